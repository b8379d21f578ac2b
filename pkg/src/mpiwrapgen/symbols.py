"""Binding-family signatures, name mangling and linker symbol variants.

The Fortran families expose one linker symbol per calling convention: the base
symbol passes choice buffers by address, the descriptor-suffixed symbol
(``_fts`` for the legacy bindings, ``_f08ts`` for the f08 bindings) passes them
by array descriptor, and the ``_c`` marker selects the large-count overload.
Suffixes combine as ``<name>_c<descriptor-suffix>`` before the compiler's
mangling (case change plus zero to two appended underscores) is applied.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

from .apispec import ParameterSpec, ProcedureSpec
from .errors import BindingContractError, Diagnostics


@dataclass(frozen=True)
class ManglingScheme:
    case_rule: str  # "lower" | "upper" | "preserve"
    underscore_suffix_count: int  # 0 | 1 | 2

    @property
    def id(self) -> str:
        return f"{self.case_rule}{self.underscore_suffix_count}"


# The six schemes compilers are known to use: case change plus 0/1/2 underscores.
SCHEME_TABLE: tuple[ManglingScheme, ...] = tuple(
    ManglingScheme(case, n) for case in ("lower", "upper") for n in (0, 1, 2)
)

# Identity scheme, used for the C family only; not part of default generation.
PRESERVE_SCHEME = ManglingScheme("preserve", 0)

SCHEMES_BY_ID = {s.id: s for s in (*SCHEME_TABLE, PRESERVE_SCHEME)}


def mangle(name: str, scheme: ManglingScheme) -> str:
    """Apply one mangling scheme to a procedure name; pure and deterministic."""
    if not name:
        raise ValueError("cannot mangle an empty name")
    if scheme.case_rule == "lower":
        base = name.lower()
    elif scheme.case_rule == "upper":
        base = name.upper()
    elif scheme.case_rule == "preserve":
        base = name
    else:
        raise ValueError(f"unknown case rule {scheme.case_rule!r}")
    return base + "_" * scheme.underscore_suffix_count


@dataclass(frozen=True)
class SymbolVariant:
    procedure: str
    family: str  # "c" | "fortran" | "f08"
    descriptor_suffix: Optional[str]  # None | "_fts" | "_f08" | "_f08ts"
    large_count: bool
    scheme: ManglingScheme
    symbol: str
    pmpi: bool

    @property
    def base_name(self) -> str:
        """The unmangled symbol name: prefix + procedure + suffixes."""
        name = ("P" if self.pmpi else "") + self.procedure
        if self.large_count:
            name += "_c"
        if self.descriptor_suffix:
            name += self.descriptor_suffix
        return name


def _make_variant(
    proc: ProcedureSpec,
    family: str,
    descriptor_suffix: Optional[str],
    large_count: bool,
    scheme: ManglingScheme,
    pmpi: bool,
) -> SymbolVariant:
    name = ("P" if pmpi else "") + proc.name
    if large_count:
        name += "_c"
    if descriptor_suffix:
        name += descriptor_suffix
    return SymbolVariant(
        procedure=proc.name,
        family=family,
        descriptor_suffix=descriptor_suffix,
        large_count=large_count,
        scheme=scheme,
        symbol=mangle(name, scheme),
        pmpi=pmpi,
    )


def c_symbol_variant(proc: ProcedureSpec, pmpi: bool = False, large_count: bool = False) -> SymbolVariant:
    if not proc.has_c_binding:
        raise BindingContractError(f"{proc.name} has no C binding")
    return _make_variant(proc, "c", None, large_count, PRESERVE_SCHEME, pmpi)


def fortran_symbol_variants(
    proc: ProcedureSpec,
    schemes: Sequence[ManglingScheme],
    pmpi: bool,
    large_count: bool = False,
) -> list[SymbolVariant]:
    """Per scheme: the base symbol, plus a ``_fts`` descriptor symbol iff the
    procedure has a choice-buffer parameter; large-count doubles both when
    requested and the procedure has the overload."""
    if not proc.has_fortran_binding:
        raise BindingContractError(f"{proc.name} has no Fortran binding")
    variants = []
    large_options = (False, True) if (large_count and proc.has_large_count_variant) else (False,)
    for large in large_options:
        for scheme in schemes:
            variants.append(_make_variant(proc, "fortran", None, large, scheme, pmpi))
            if proc.has_choice_buffer:
                variants.append(_make_variant(proc, "fortran", "_fts", large, scheme, pmpi))
    return variants


def f08_symbol_variants(
    proc: ProcedureSpec,
    schemes: Sequence[ManglingScheme],
    pmpi: bool,
    large_count: bool = False,
) -> list[SymbolVariant]:
    """Per scheme: the ``_f08`` symbol always, plus ``_f08ts`` iff the procedure
    has a choice-buffer parameter."""
    if not proc.has_f08_binding:
        raise BindingContractError(f"{proc.name} has no Fortran 2008 binding")
    variants = []
    large_options = (False, True) if (large_count and proc.has_large_count_variant) else (False,)
    for large in large_options:
        for scheme in schemes:
            variants.append(_make_variant(proc, "f08", "_f08", large, scheme, pmpi))
            if proc.has_choice_buffer:
                variants.append(_make_variant(proc, "f08", "_f08ts", large, scheme, pmpi))
    return variants


# C-side type table. Pointer stars bind to the type name ("const void* buf").
_C_TYPES = {
    "BUFFER": "void*",
    "COUNT": "int",
    "DATATYPE": "MPI_Datatype",
    "COMM": "MPI_Comm",
    "GROUP": "MPI_Group",
    "WIN": "MPI_Win",
    "FILE": "MPI_File",
    "REQUEST": "MPI_Request",
    "OP": "MPI_Op",
    "INFO": "MPI_Info",
    "STATUS": "MPI_Status",
    "RANK": "int",
    "TAG": "int",
    "INDEX": "int",
    "LOGICAL_FLAG": "int",
    "STRING": "char",
    "ERROR_CODE": "int",
    "CALLBACK": "MPI_Callback_function",
    "OTHER_INT": "int",
    "OTHER_OPAQUE": "void*",
}

_LARGE_COUNT_C_TYPE = "MPI_Count"


def c_parameter_declaration(
    param: ParameterSpec,
    large_count: bool = False,
    diagnostics: Optional[Diagnostics] = None,
) -> Optional[str]:
    """One C parameter declaration, or None for parameters that do not appear
    in the C signature (the Fortran-only error-code argument)."""
    kind = param.kind
    if kind == "ERROR_CODE":
        return None
    base = _C_TYPES.get(kind)
    if base is None:  # closed taxonomy; defensive fallback mirrors parse-time degrade
        if diagnostics is not None:
            diagnostics.warn(f"parameter {param.name}: kind {kind!r} rendered as int")
        base = "int"
    if kind == "COUNT" and large_count:
        base = _LARGE_COUNT_C_TYPE

    if kind == "BUFFER":
        ctype = "const void*" if param.direction == "in" else "void*"
    elif kind == "STRING":
        ctype = "const char*" if param.direction == "in" else "char*"
    elif kind == "STATUS":
        ctype = ("const " if param.direction == "in" else "") + "MPI_Status*"
    elif kind == "CALLBACK":
        ctype = base + "*"
    elif kind == "OTHER_OPAQUE":
        ctype = base
    elif param.direction in ("out", "inout") or param.is_array:
        ctype = base + "*"
    else:
        ctype = base
    return f"{ctype} {param.name}"


def render_c_prototype(
    proc: ProcedureSpec,
    large_count: bool = False,
    diagnostics: Optional[Diagnostics] = None,
) -> str:
    """One-line C prototype; the error code is the int return value."""
    if proc.fortran_only or not proc.has_c_binding:
        raise BindingContractError(f"{proc.name} has no C binding")
    name = proc.name + ("_c" if large_count else "")
    decls = [
        d for p in proc.parameters
        if (d := c_parameter_declaration(p, large_count, diagnostics)) is not None
    ]
    args = ", ".join(decls) if decls else "void"
    return f"int {name}({args})"


# Fortran 2008 declaration table.
_F08_HANDLE_TYPES = {
    "DATATYPE": "MPI_Datatype",
    "COMM": "MPI_Comm",
    "GROUP": "MPI_Group",
    "WIN": "MPI_Win",
    "FILE": "MPI_File",
    "REQUEST": "MPI_Request",
    "OP": "MPI_Op",
    "INFO": "MPI_Info",
}


def f08_parameter_declaration(param: ParameterSpec) -> str:
    kind = param.kind
    intent = {"in": "intent(in)", "out": "intent(out)", "inout": "intent(inout)"}[param.direction]
    dims = ""
    if param.is_array:
        dims = f"({param.count_dependency})" if param.count_dependency else "(*)"

    if kind == "BUFFER":
        return f"type(*), dimension(..) :: {param.name}"
    if kind == "ERROR_CODE":
        return f"integer, optional, intent(out) :: {param.name}"
    if kind in _F08_HANDLE_TYPES:
        return f"type({_F08_HANDLE_TYPES[kind]}), {intent} :: {param.name}{dims}"
    if kind == "STATUS":
        return f"type(MPI_Status), {intent} :: {param.name}{dims}"
    if kind == "LOGICAL_FLAG":
        return f"logical, {intent} :: {param.name}{dims}"
    if kind == "STRING":
        return f"character(len=*), {intent} :: {param.name}"
    if kind == "CALLBACK":
        return f"external :: {param.name}"
    if kind == "OTHER_OPAQUE":
        return f"type(c_ptr), {intent} :: {param.name}"
    # COUNT, RANK, TAG, INDEX, OTHER_INT
    return f"integer, {intent} :: {param.name}{dims}"


def render_f08_interface(proc: ProcedureSpec, subroutine_name: Optional[str] = None) -> str:
    """Subroutine interface block for the f08 binding of one procedure."""
    if not proc.has_f08_binding:
        raise BindingContractError(f"{proc.name} has no Fortran 2008 binding")
    name = subroutine_name or proc.name
    arg_names = ", ".join(p.name for p in proc.parameters)
    lines = [f"subroutine {name}({arg_names})"]
    lines.extend(f"    {f08_parameter_declaration(p)}" for p in proc.parameters)
    lines.append(f"end subroutine {name}")
    return "\n".join(lines)
