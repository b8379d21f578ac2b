"""Machine-readable MPI procedure definitions: parsing, merging, querying.

The input documents are JSON files covering a documented subset of the
machine-readable binding-specification shape: per procedure a name, an ordered
parameter list (name, kind, direction), boolean attribute flags and per-family
binding availability.  A removed-interface supplement uses the same schema plus
a per-procedure ``removed_in`` version label.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional, Sequence

from .errors import Diagnostics, MergeError, ProcedureNotFoundError, SpecFormatError

PARAMETER_KINDS = frozenset({
    "BUFFER", "COUNT", "DATATYPE", "COMM", "GROUP", "WIN", "FILE", "REQUEST",
    "OP", "INFO", "STATUS", "RANK", "TAG", "INDEX", "LOGICAL_FLAG", "STRING",
    "ERROR_CODE", "CALLBACK", "OTHER_INT", "OTHER_OPAQUE",
})

HANDLE_KINDS = frozenset({"COMM", "GROUP", "WIN", "FILE", "REQUEST", "OP", "DATATYPE", "INFO"})

DIRECTIONS = ("in", "out", "inout")

# Unknown upstream kinds degrade to OTHER_INT when the raw kind string smells
# integral, OTHER_OPAQUE otherwise; either way a warning is recorded.
_INTEGRAL_HINTS = ("INT", "COUNT", "SIZE", "RANK", "TAG", "INDEX", "DISPLACEMENT", "OFFSET")

FAMILIES = ("c", "fortran", "f08")

SAME_LANGUAGE_REASONS = frozenset({"callback", "attribute_caching", "choice_buffer"})


@dataclass(frozen=True)
class ParameterSpec:
    name: str
    kind: str
    direction: str
    is_array: bool = False
    count_dependency: Optional[str] = None


@dataclass(frozen=True)
class ProcedureSpec:
    name: str
    parameters: tuple[ParameterSpec, ...]
    has_c_binding: bool = True
    has_fortran_binding: bool = True
    has_f08_binding: bool = True
    fortran_only: bool = False
    removed: bool = False
    removed_in: Optional[str] = None
    has_large_count_variant: bool = False
    needs_same_language_pmpi_reasons: frozenset[str] = frozenset()
    chapter_group: str = "misc"
    version_label: str = ""

    def has_binding(self, family: str) -> bool:
        return {
            "c": self.has_c_binding,
            "fortran": self.has_fortran_binding,
            "f08": self.has_f08_binding,
        }[family]

    @property
    def has_choice_buffer(self) -> bool:
        return any(p.kind == "BUFFER" for p in self.parameters)

    @property
    def error_code_parameter(self) -> Optional[ParameterSpec]:
        for p in self.parameters:
            if p.kind == "ERROR_CODE":
                return p
        return None


@dataclass
class ApiSpec:
    procedures: dict[str, ProcedureSpec] = field(default_factory=dict)
    source_versions: tuple[str, ...] = ()
    supplement_applied: bool = False


def _parse_parameter(raw: dict, proc_name: str, diagnostics: Diagnostics) -> ParameterSpec:
    try:
        name = raw["name"]
        kind = raw["kind"]
    except KeyError as exc:
        raise SpecFormatError(f"{proc_name}: parameter entry missing field {exc}") from None
    direction = raw.get("direction", "in")
    if direction not in DIRECTIONS:
        raise SpecFormatError(f"{proc_name}.{name}: bad direction {direction!r}")
    if kind not in PARAMETER_KINDS:
        fallback = "OTHER_INT" if any(h in kind.upper() for h in _INTEGRAL_HINTS) else "OTHER_OPAQUE"
        diagnostics.warn(f"{proc_name}.{name}: unknown parameter kind {kind!r} mapped to {fallback}")
        kind = fallback
    return ParameterSpec(
        name=name,
        kind=kind,
        direction=direction,
        is_array=bool(raw.get("is_array", False)),
        count_dependency=raw.get("count_dependency"),
    )


def _parse_procedure(raw: dict, version_label: str, diagnostics: Diagnostics) -> ProcedureSpec:
    try:
        name = raw["name"]
    except KeyError:
        raise SpecFormatError("procedure entry without a name") from None

    parameters = tuple(
        _parse_parameter(p, name, diagnostics) for p in raw.get("parameters", ())
    )
    error_codes = [i for i, p in enumerate(parameters) if p.kind == "ERROR_CODE"]
    if len(error_codes) > 1:
        raise SpecFormatError(f"{name}: more than one ERROR_CODE parameter")
    if error_codes and error_codes[0] != len(parameters) - 1:
        raise SpecFormatError(f"{name}: ERROR_CODE parameter must be last")
    known_params = {p.name for p in parameters}
    for p in parameters:
        if p.count_dependency is not None and p.count_dependency not in known_params:
            raise SpecFormatError(
                f"{name}.{p.name}: count_dependency {p.count_dependency!r} names no parameter"
            )

    attributes = raw.get("attributes", {})
    bindings = raw.get("bindings", {})
    fortran_only = bool(attributes.get("fortran_only", False))
    has_c = bool(bindings.get("c", True))
    if fortran_only and bindings.get("c", False):
        raise SpecFormatError(f"{name}: fortran_only procedure cannot have a C binding")
    if fortran_only:
        has_c = False

    reasons = set()
    if attributes.get("callback") or any(p.kind == "CALLBACK" for p in parameters):
        reasons.add("callback")
    if attributes.get("attribute_caching"):
        reasons.add("attribute_caching")
    if any(p.kind == "BUFFER" for p in parameters):
        reasons.add("choice_buffer")

    return ProcedureSpec(
        name=name,
        parameters=parameters,
        has_c_binding=has_c,
        has_fortran_binding=bool(bindings.get("fortran", True)),
        has_f08_binding=bool(bindings.get("f08", True)),
        fortran_only=fortran_only,
        removed="removed_in" in raw,
        removed_in=raw.get("removed_in"),
        has_large_count_variant=bool(attributes.get("large_count", False)),
        needs_same_language_pmpi_reasons=frozenset(reasons),
        chapter_group=raw.get("chapter", "misc"),
        version_label=version_label,
    )


def parse_api_spec(
    document: dict,
    version_label: str,
    diagnostics: Optional[Diagnostics] = None,
) -> ApiSpec:
    """Parse one spec document into an ApiSpec tagged with ``version_label``."""
    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    if not isinstance(document, dict):
        raise SpecFormatError("spec document must be a JSON object")
    raw_procs = document.get("procedures")
    if raw_procs is None:
        raise SpecFormatError("spec document has no 'procedures' list")

    procedures: dict[str, ProcedureSpec] = {}
    for raw in raw_procs:
        proc = _parse_procedure(raw, version_label, diagnostics)
        if proc.name in procedures:
            raise SpecFormatError(f"duplicate procedure {proc.name} within one document")
        procedures[proc.name] = proc
    return ApiSpec(procedures=procedures, source_versions=(version_label,))


def load_api_spec(path: str | Path, diagnostics: Optional[Diagnostics] = None) -> ApiSpec:
    """Load a spec document from disk; the version label comes from the document."""
    path = Path(path)
    try:
        document = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise SpecFormatError(f"{path}: not valid JSON: {exc}") from exc
    label = document.get("mpi_version") if isinstance(document, dict) else None
    if not label:
        raise SpecFormatError(f"{path}: document carries no 'mpi_version' label")
    return parse_api_spec(document, label, diagnostics)


def merge_api_specs(
    specs: Sequence[ApiSpec],
    removed_supplement: Optional[ApiSpec] = None,
) -> ApiSpec:
    """Merge version-ordered specs (oldest first); newest definition wins.

    Supplement entries are added with removed=True and must not redefine a
    procedure still present in the newest spec.
    """
    if not specs:
        raise MergeError("merge needs at least one spec document")

    merged: dict[str, ProcedureSpec] = {}
    labels: list[str] = []
    for spec in specs:
        labels.extend(spec.source_versions)
        merged.update(spec.procedures)

    if removed_supplement is not None:
        newest = specs[-1]
        for name, proc in removed_supplement.procedures.items():
            if name in newest.procedures:
                raise MergeError(
                    f"supplement redefines {name}, which is still present in the newest spec"
                )
            if not proc.removed or proc.removed_in is None:
                raise MergeError(f"supplement entry {name} carries no removal version label")
            merged[name] = proc
        labels.extend(removed_supplement.source_versions)

    return ApiSpec(
        procedures=merged,
        source_versions=tuple(labels),
        supplement_applied=removed_supplement is not None,
    )


def enumerate_procedures(spec: ApiSpec, family_filter: str = "all") -> list[ProcedureSpec]:
    """Procedures in deterministic lexicographic name order, optionally filtered
    to one binding family ("all", "c", "fortran", "f08")."""
    if family_filter not in ("all", *FAMILIES):
        raise ValueError(f"unknown binding-family filter {family_filter!r}")
    procs = sorted(spec.procedures.values(), key=lambda p: p.name)
    if family_filter == "all":
        return procs
    return [p for p in procs if p.has_binding(family_filter)]


def query_procedure(spec: ApiSpec, name: str) -> ProcedureSpec:
    """Case-sensitive lookup on the canonical MPI_Xxx form."""
    try:
        return spec.procedures[name]
    except KeyError:
        raise ProcedureNotFoundError(f"no procedure named {name!r} in the merged spec") from None


def adapt_upstream_document(document: dict) -> dict:
    """Thin mapping layer from the upstream binding-specification JSON shape
    (lowercase-name-keyed object with per-parameter kind strings) onto the
    subset schema accepted by :func:`parse_api_spec`.

    Upstream parameter kinds are passed through verbatim; anything outside the
    closed taxonomy degrades to OTHER_* at parse time.  Only the fields this
    generator consumes are mapped.
    """
    kind_map = {
        "BUFFER": "BUFFER",
        "C_BUFFER": "BUFFER",
        "POLYBUFFER": "BUFFER",
        "POLYXFER_NUM_ELEM": "COUNT",
        "POLYXFER_NUM_ELEM_NONNEGATIVE": "COUNT",
        "XFER_NUM_ELEM": "COUNT",
        "XFER_NUM_ELEM_NONNEGATIVE": "COUNT",
        "DATATYPE": "DATATYPE",
        "COMMUNICATOR": "COMM",
        "GROUP": "GROUP",
        "WINDOW": "WIN",
        "FILE": "FILE",
        "REQUEST": "REQUEST",
        "OPERATION": "OP",
        "INFO": "INFO",
        "STATUS": "STATUS",
        "RANK": "RANK",
        "RANK_NNI": "RANK",
        "TAG": "TAG",
        "INDEX": "INDEX",
        "LOGICAL": "LOGICAL_FLAG",
        "LOGICAL_OPTIONAL": "LOGICAL_FLAG",
        "STRING": "STRING",
        "ERROR_CODE": "ERROR_CODE",
        "FUNCTION": "CALLBACK",
        "FUNCTION_SMALL": "CALLBACK",
        "POLYFUNCTION": "CALLBACK",
    }
    procedures = []
    for raw in document.values():
        name = raw.get("name", "")
        canonical = "MPI_" + name[4:].capitalize() if name.lower().startswith("mpi_") else name
        params = []
        for p in raw.get("parameters", ()):
            raw_kind = p.get("kind", "OTHER")
            params.append({
                "name": p.get("name"),
                "kind": kind_map.get(raw_kind, raw_kind),
                "direction": p.get("param_direction", "in"),
            })
        attrs = raw.get("attributes", {})
        express = raw.get("express") if isinstance(raw.get("express"), dict) else {}
        procedures.append({
            "name": canonical,
            "parameters": params,
            "attributes": {
                "callback": bool(attrs.get("callback", False)),
                "attribute_caching": bool(attrs.get("attribute_caching", False)),
                "fortran_only": bool(attrs.get("fortran_only", False)),
                "large_count": bool(raw.get("has_embiggenment", False)),
            },
            # Which upstream fields encode per-family availability varies
            # between standard versions; honor them when present, assume
            # availability otherwise.
            "bindings": {
                "c": bool(express.get("iso_c", True)),
                "fortran": bool(express.get("f90", True)),
                "f08": bool(express.get("f08", True)),
            },
        })
    return {"procedures": procedures}


def count_by_family(spec: ApiSpec) -> dict[str, int]:
    counts = {"all": len(spec.procedures)}
    for family in FAMILIES:
        counts[family] = len(enumerate_procedures(spec, family))
    return counts


def iter_buffer_procedures(spec: ApiSpec) -> Iterable[ProcedureSpec]:
    for proc in enumerate_procedures(spec):
        if proc.has_choice_buffer:
            yield proc
