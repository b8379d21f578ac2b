"""Configure-check manifest: which f08 procedures the installed library
actually provides, and under which linker symbol.

Only the generated wrappers are distributed; at installation time a build
system runs these checks and defines the matching guard macros.  For every f08
procedure there is one module-accessibility check (can the name be used from
the mpi_f08 module) and one symbol-presence check whose candidates cover every
mangling scheme, base symbol before descriptor symbol, large-count last; the
first candidate found wins.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from typing import Optional, Sequence

from . import __version__
from .apispec import ApiSpec, enumerate_procedures
from .errors import RenderError
from .symbols import SCHEME_TABLE, ManglingScheme, f08_symbol_variants

# Library capabilities probed once per installation.
CAPABILITY_PROBES = (
    ("HAVE_SUBARRAYS_SUPPORTED", "subarrays_supported"),
    ("HAVE_ASYNC_PROTECTS_NONBLOCKING", "async_protects"),
    ("HAVE_NATIVE_STATUS_CONVERSION", "native_status_conversion"),
)


@dataclass(frozen=True)
class CheckDescriptor:
    id: str
    procedure: Optional[str]
    kind: str  # "module_accessibility" | "symbol_presence" | "capability"
    candidates: tuple[str, ...] = ()
    capability_name: Optional[str] = None


def generate_check_manifest(
    spec: ApiSpec,
    schemes: Sequence[ManglingScheme] = SCHEME_TABLE,
) -> list[CheckDescriptor]:
    """One module-accessibility and one symbol-presence check per f08
    procedure, plus the global capability probes."""
    checks: list[CheckDescriptor] = []
    for proc in enumerate_procedures(spec, "f08"):
        upper = proc.name.upper()
        checks.append(CheckDescriptor(
            id=f"HAVE_F08_{upper}",
            procedure=proc.name,
            kind="module_accessibility",
        ))
        variants = f08_symbol_variants(proc, schemes, pmpi=False, large_count=True)
        candidates = tuple(v.symbol for v in variants)
        if len(set(candidates)) != len(candidates):
            raise RenderError(f"{proc.name}: duplicate symbol candidates")
        checks.append(CheckDescriptor(
            id=f"F08_SYMBOL_{upper}",
            procedure=proc.name,
            kind="symbol_presence",
            candidates=candidates,
        ))
    for check_id, capability in CAPABILITY_PROBES:
        checks.append(CheckDescriptor(
            id=check_id,
            procedure=None,
            kind="capability",
            capability_name=capability,
        ))
    seen = set()
    for check in checks:
        if check.id in seen:
            raise RenderError(f"duplicate check id {check.id}")
        seen.add(check.id)
    return checks


def render_check_snippets(manifest: Sequence[CheckDescriptor], style: str) -> str:
    """Emit the manifest either as the machine-readable JSON document or as a
    shell script of compile/link probes a build system can run."""
    if style == "machine_manifest":
        return _render_machine_manifest(manifest)
    if style == "shell_probe":
        return _render_shell_probes(manifest)
    raise RenderError(f"unsupported check snippet style {style!r}")


def _render_machine_manifest(manifest: Sequence[CheckDescriptor]) -> str:
    capabilities = [
        {"id": c.id, "capability_name": c.capability_name}
        for c in manifest if c.kind == "capability"
    ]
    checks = [
        {
            "id": c.id,
            "procedure": c.procedure,
            "kind": c.kind,
            "candidates": list(c.candidates),
        }
        for c in manifest if c.kind != "capability"
    ]
    document = {
        "format_version": 1,
        "generator_version": __version__,
        "capabilities": capabilities,
        "checks": checks,
    }
    return json.dumps(document, indent=2) + "\n"


_PROBE_HEADER = """\
#!/bin/sh
# Configure probes generated by mpiwrapgen {version}; do not edit.
#
# Usage: wrapgen_probe_all <results-file>
# Each probe appends one "<check-id>=<result>" line: symbol probes report the
# first candidate symbol the MPI library resolves, module probes and
# capability probes report yes/no.

: "${{MPIFC:=mpifort}}"
: "${{MPICC:=mpicc}}"

wrapgen_probe_symbol() {{
    check_id=$1; shift
    for candidate in "$@"; do
        cat > conftest_wrapgen.c <<EOF
extern int ${{candidate}}();
int main(void) {{ return ${{candidate}}(); }}
EOF
        if "$MPICC" conftest_wrapgen.c -o conftest_wrapgen 2>/dev/null; then
            echo "${{check_id}}=${{candidate}}"
            rm -f conftest_wrapgen conftest_wrapgen.c
            return 0
        fi
    done
    rm -f conftest_wrapgen conftest_wrapgen.c
    echo "${{check_id}}=no"
}}

wrapgen_probe_module() {{
    check_id=$1
    procedure=$2
    cat > conftest_wrapgen.F90 <<EOF
program conftest
    use :: mpi_f08, only: ${{procedure}}
end program conftest
EOF
    if "$MPIFC" -c conftest_wrapgen.F90 -o conftest_wrapgen.o 2>/dev/null; then
        echo "${{check_id}}=yes"
    else
        echo "${{check_id}}=no"
    fi
    rm -f conftest_wrapgen.F90 conftest_wrapgen.o
}}

wrapgen_probe_capability() {{
    check_id=$1
    constant=$2
    cat > conftest_wrapgen.F90 <<EOF
program conftest
    use :: mpi_f08
    logical :: probe
    probe = ${{constant}}
end program conftest
EOF
    if "$MPIFC" -c conftest_wrapgen.F90 -o conftest_wrapgen.o 2>/dev/null; then
        echo "${{check_id}}=yes"
    else
        echo "${{check_id}}=no"
    fi
    rm -f conftest_wrapgen.F90 conftest_wrapgen.o
}}
"""

_CAPABILITY_CONSTANTS = {
    "subarrays_supported": "MPI_SUBARRAYS_SUPPORTED",
    "async_protects": "MPI_ASYNC_PROTECTS_NONBLOCKING",
}


def _render_shell_probes(manifest: Sequence[CheckDescriptor]) -> str:
    lines = [_PROBE_HEADER.format(version=__version__)]
    lines.append("wrapgen_probe_all() {")
    for check in manifest:
        if check.kind == "symbol_presence":
            candidates = " ".join(check.candidates)
            lines.append(f'    wrapgen_probe_symbol {check.id} {candidates} >> "$1"')
        elif check.kind == "module_accessibility":
            lines.append(f'    wrapgen_probe_module {check.id} {check.procedure} >> "$1"')
        elif check.capability_name == "native_status_conversion":
            # The f08 status conversions are missing from some libraries;
            # probe the C entry point directly.
            lines.append(f'    wrapgen_probe_symbol {check.id} MPI_Status_f082c >> "$1"')
        else:
            constant = _CAPABILITY_CONSTANTS.get(check.capability_name or "", "MPI_SUBARRAYS_SUPPORTED")
            lines.append(f'    wrapgen_probe_capability {check.id} "{constant}" >> "$1"')
    lines.append("}")
    return "\n".join(lines) + "\n"
