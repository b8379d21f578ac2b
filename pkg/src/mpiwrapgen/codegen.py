"""Rendering of wrapper units, tool-interface shims, source files and trees.

Three wrapper families are emitted:

* ``c``: wrappers interposing the C binding; they write ENTER/EXIT events and
  delegate to the C PMPI entry.
* ``fortran_intercept``: C functions interposing the legacy Fortran symbols;
  they marshal arguments to C representations and delegate to the C wrapper
  layer (never to a Fortran PMPI symbol).  This layer deliberately reproduces
  the legacy behavior, including its known deficits (unconverted logicals,
  untrimmed info strings, no descriptor-suffix interception).
* ``f08``: Fortran subroutines interposing the mpi_f08 symbols; arguments pass
  to the same-language PMPI entry untouched, only the optional error argument
  gets presence handling.

Every wrapper sits behind a preprocessor guard so configure checks can exclude
procedures the installed MPI library does not provide.
"""

from __future__ import annotations

import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional, Sequence

from . import __version__
from .apispec import ApiSpec, ParameterSpec, ProcedureSpec
from .errors import Diagnostics, RenderError
from .interop import StatusStrategy, marshal_plan
from .symbols import (
    SCHEME_TABLE,
    ManglingScheme,
    SymbolVariant,
    c_symbol_variant,
    f08_parameter_declaration,
    f08_symbol_variants,
    fortran_symbol_variants,
    render_c_prototype,
)
from .tasks import HOOK_POINTS, TaskConfig, compose

WRAPPER_FAMILIES = ("c", "fortran_intercept", "f08")

_FAMILY_DIRS = {"c": "c", "fortran_intercept": "f", "f08": "f08"}
_FAMILY_EXTENSIONS = {"c": ".c", "fortran_intercept": ".c", "f08": ".F90"}

_INDENT = "    "


@dataclass(frozen=True)
class WrapperUnit:
    procedure: str
    family: str
    variant: SymbolVariant
    guard: str
    text: str
    required_checks: tuple[str, ...] = ()


@dataclass(frozen=True)
class SourceFileTemplate:
    path: str
    family: str
    common_prelude: str
    wrapper_list: tuple[str, ...]


@dataclass
class GeneratedTree:
    files: dict[str, str]
    manifest: dict


#: The prominent legacy mangling: lowercase name, one appended underscore.
DEFAULT_INTERCEPT_SCHEME = ManglingScheme("lower", 1)


@dataclass(frozen=True)
class GenerateOptions:
    families: tuple[str, ...] = WRAPPER_FAMILIES
    schemes: tuple[ManglingScheme, ...] = SCHEME_TABLE
    intercept_scheme: ManglingScheme = DEFAULT_INTERCEPT_SCHEME
    parallel: bool = False


@dataclass(frozen=True)
class ToolFunctionSignature:
    name: str
    parameters: tuple[ParameterSpec, ...]


@dataclass(frozen=True)
class ToolShim:
    """Up to two conversion layers between f08 wrapper code and the C tool.

    ``fortran_text`` converts what only Fortran can convert (logicals, info
    trimming, status tagging); ``c_text`` converts what only C can convert
    (handles, special constants, strings, indices).  When both are None the
    tool function is interoperable and called directly.
    """

    name: str
    fortran_text: Optional[str]
    c_text: Optional[str]

    @property
    def direct(self) -> bool:
        return self.fortran_text is None and self.c_text is None


def guard_name(proc_name: str, family: str, variant: SymbolVariant) -> str:
    """Deterministic preprocessor guard, unique per (procedure, family, variant)."""
    if family == "c":
        tag = "C"
    elif family == "fortran_intercept":
        tag = "F_TS_BUFFERS" if variant.descriptor_suffix == "_fts" else "F"
    elif family == "f08":
        tag = "F08_TS_BUFFERS" if variant.descriptor_suffix == "_f08ts" else "F08"
    else:
        raise RenderError(f"unknown wrapper family {family!r}")
    name = f"HAVE_{tag}_{proc_name.upper()}"
    if variant.large_count:
        name += "_C"
    return name


def _indent_fragment(fragment: str, level: int) -> list[str]:
    return [(_INDENT * level + line).rstrip() for line in fragment.split("\n")]


def _hook_lines(fragments: Mapping[str, Sequence[str]], hook: str, level: int) -> list[str]:
    lines: list[str] = []
    for fragment in fragments.get(hook, ()):
        lines.extend(_indent_fragment(fragment, level))
    return lines


# ---------------------------------------------------------------------------
# C family
# ---------------------------------------------------------------------------

def _render_c_wrapper(
    proc: ProcedureSpec,
    fragments: Mapping[str, Sequence[str]],
    variant: SymbolVariant,
) -> str:
    guard = guard_name(proc.name, "c", variant)
    prototype = render_c_prototype(proc, large_count=variant.large_count)
    args = ", ".join(p.name for p in proc.parameters if p.kind != "ERROR_CODE")
    pmpi = "P" + proc.name + ("_c" if variant.large_count else "")

    lines = [f"#ifdef {guard}", prototype, "{", f"{_INDENT}int return_value;"]
    lines += _hook_lines(fragments, "local_vars", 1)
    lines += [
        "",
        f'{_INDENT}if (event_gen_active("{proc.name}")) {{',
        f'{_INDENT}{_INDENT}write_event("ENTER {proc.name}");',
    ]
    lines += _hook_lines(fragments, "enter", 2)
    lines += [f"{_INDENT}}}", ""]
    lines += _hook_lines(fragments, "pre_pmpi", 1)
    lines += [f"{_INDENT}return_value = {pmpi}({args});"]
    lines += _hook_lines(fragments, "post_pmpi", 1)
    lines += [
        "",
        f'{_INDENT}if (event_gen_active("{proc.name}")) {{',
    ]
    lines += _hook_lines(fragments, "exit", 2)
    lines += [
        f'{_INDENT}{_INDENT}write_event("EXIT {proc.name}");',
        f"{_INDENT}}}",
        "",
        f"{_INDENT}return return_value;",
        "}",
        f"#endif /* {guard} */",
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# f08 family
# ---------------------------------------------------------------------------

_F08_IMPORTS = {
    "DATATYPE": "MPI_Datatype",
    "COMM": "MPI_Comm",
    "GROUP": "MPI_Group",
    "WIN": "MPI_Win",
    "FILE": "MPI_File",
    "REQUEST": "MPI_Request",
    "OP": "MPI_Op",
    "INFO": "MPI_Info",
    "STATUS": "MPI_Status",
}

# Free-form Fortran caps lines at 132 columns; wrap well before that.
_F08_LINE_LIMIT = 100


def _wrap_f08_statement(line: str) -> list[str]:
    """Break a long statement at argument commas with & continuations."""
    if len(line) <= _F08_LINE_LIMIT:
        return [line]
    indent = line[:len(line) - len(line.lstrip())]
    continuation_indent = indent + _INDENT * 2
    pieces = line.split(", ")
    lines = []
    current = pieces[0]
    for piece in pieces[1:]:
        if len(current) + 2 + len(piece) > _F08_LINE_LIMIT - 2:
            lines.append(current + ", &")
            current = continuation_indent + piece
        else:
            current += ", " + piece
    lines.append(current)
    return lines


def _render_f08_wrapper(
    proc: ProcedureSpec,
    fragments: Mapping[str, Sequence[str]],
    variant: SymbolVariant,
) -> str:
    guard = guard_name(proc.name, "f08", variant)
    subroutine = variant.base_name
    pmpi = "P" + subroutine
    error_param = proc.error_code_parameter

    imports = sorted({_F08_IMPORTS[p.kind] for p in proc.parameters if p.kind in _F08_IMPORTS})
    only = ", ".join([*imports, pmpi])

    arg_names = ", ".join(p.name for p in proc.parameters)
    call_args = [p.name for p in proc.parameters if p.kind != "ERROR_CODE"]
    if error_param is not None:
        call_args.append("ierror_local")

    lines = [f"#ifdef {guard}"]
    lines += _wrap_f08_statement(f"subroutine {subroutine}({arg_names})")
    lines += _wrap_f08_statement(f"{_INDENT}use :: mpi_f08, only: {only}")
    lines.append(f"{_INDENT}use :: wrapgen_events, only: event_gen_active, write_event")
    lines += _hook_lines(fragments, "use_statements", 1)
    lines.append(f"{_INDENT}implicit none")
    lines += [f"{_INDENT}{f08_parameter_declaration(p)}" for p in proc.parameters]
    if error_param is not None:
        lines.append(f"{_INDENT}integer :: ierror_local")
    lines += _hook_lines(fragments, "local_vars", 1)
    lines += [
        "",
        f'{_INDENT}if (event_gen_active("{proc.name}")) then',
        f'{_INDENT}{_INDENT}call write_event("ENTER {proc.name}")',
    ]
    lines += _hook_lines(fragments, "enter", 2)
    lines += [f"{_INDENT}end if", ""]
    lines += _hook_lines(fragments, "pre_pmpi", 1)
    lines += _wrap_f08_statement(f"{_INDENT}call {pmpi}({', '.join(call_args)})")
    lines += _hook_lines(fragments, "post_pmpi", 1)
    lines += [
        "",
        f'{_INDENT}if (event_gen_active("{proc.name}")) then',
    ]
    lines += _hook_lines(fragments, "exit", 2)
    lines += [
        f'{_INDENT}{_INDENT}call write_event("EXIT {proc.name}")',
        f"{_INDENT}end if",
    ]
    if error_param is not None:
        lines += ["", f"{_INDENT}if (present({error_param.name})) {error_param.name} = ierror_local"]
    lines += [f"end subroutine {subroutine}", "#endif"]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Legacy Fortran intercept family (written in C)
# ---------------------------------------------------------------------------

_F2C = {
    "DATATYPE": ("MPI_Datatype", "MPI_Type_f2c", "MPI_Type_c2f"),
    "COMM": ("MPI_Comm", "MPI_Comm_f2c", "MPI_Comm_c2f"),
    "GROUP": ("MPI_Group", "MPI_Group_f2c", "MPI_Group_c2f"),
    "WIN": ("MPI_Win", "MPI_Win_f2c", "MPI_Win_c2f"),
    "FILE": ("MPI_File", "MPI_File_f2c", "MPI_File_c2f"),
    "REQUEST": ("MPI_Request", "MPI_Request_f2c", "MPI_Request_c2f"),
    "OP": ("MPI_Op", "MPI_Op_f2c", "MPI_Op_c2f"),
    "INFO": ("MPI_Info", "MPI_Info_f2c", "MPI_Info_c2f"),
}


def _intercept_parameter(param: ParameterSpec) -> str:
    if param.kind == "BUFFER":
        return f"void* {param.name}"
    if param.kind == "STRING":
        return f"char* {param.name}"
    if param.kind == "CALLBACK":
        return f"MPI_Callback_function* {param.name}"
    if param.kind == "OTHER_OPAQUE":
        return f"void* {param.name}"
    return f"MPI_Fint* {param.name}"


def _render_fortran_intercept(
    proc: ProcedureSpec,
    fragments: Mapping[str, Sequence[str]],
    variant: SymbolVariant,
) -> str:
    guard = guard_name(proc.name, "fortran_intercept", variant)
    params = [_intercept_parameter(p) for p in proc.parameters]
    params += [f"int {p.name}_len" for p in proc.parameters if p.kind == "STRING"]
    signature = f"void {variant.symbol}({', '.join(params) if params else 'void'})"

    decls: list[str] = []
    pre: list[str] = []
    post: list[str] = []
    frees: list[str] = []
    args: list[str] = []
    error_param: Optional[ParameterSpec] = None

    for p in proc.parameters:
        n = p.name
        if p.kind == "ERROR_CODE":
            error_param = p
            continue
        if p.kind == "BUFFER":
            decls.append(f"void* {n}_c = {n};")
            pre.append(f"if ({n}_c == (void*) &wrapgen_mpi_bottom_f) {{")
            pre.append(f"{_INDENT}{n}_c = MPI_BOTTOM;")
            pre.append("}")
            args.append(f"{n}_c")
        elif p.kind == "STATUS":
            decls.append(f"MPI_Status {n}_c;")
            decls.append(
                f"MPI_Status* {n}_c_ptr = ({n} == MPI_F_STATUS_IGNORE)"
                f" ? MPI_STATUS_IGNORE : &{n}_c;"
            )
            if p.direction in ("in", "inout"):
                pre.append(f"if ({n}_c_ptr != MPI_STATUS_IGNORE) {{")
                pre.append(f"{_INDENT}MPI_Status_f2c({n}, &{n}_c);")
                pre.append("}")
            if p.direction in ("out", "inout"):
                post.append(f"if ({n}_c_ptr != MPI_STATUS_IGNORE) {{")
                post.append(f"{_INDENT}MPI_Status_c2f(&{n}_c, {n});")
                post.append("}")
            args.append(f"{n}_c_ptr")
        elif p.kind in _F2C:
            ctype, f2c, c2f = _F2C[p.kind]
            if p.is_array:
                count = f"(int) *{p.count_dependency}" if p.count_dependency else "1"
                decls.append(f"int {n}_n = {count};")
                decls.append(f"{ctype}* {n}_c = malloc((size_t) {n}_n * sizeof({ctype}));")
                pre.append(f"for (int i_{n} = 0; i_{n} < {n}_n; ++i_{n}) {{")
                pre.append(f"{_INDENT}{n}_c[i_{n}] = {f2c}({n}[i_{n}]);")
                pre.append("}")
                if p.direction in ("out", "inout"):
                    post.append(f"for (int i_{n} = 0; i_{n} < {n}_n; ++i_{n}) {{")
                    post.append(f"{_INDENT}{n}[i_{n}] = {c2f}({n}_c[i_{n}]);")
                    post.append("}")
                frees.append(f"free({n}_c);")
                args.append(f"{n}_c")
            elif p.direction == "in":
                decls.append(f"{ctype} {n}_c = {f2c}(*{n});")
                args.append(f"{n}_c")
            else:
                if p.direction == "inout":
                    decls.append(f"{ctype} {n}_c = {f2c}(*{n});")
                else:
                    decls.append(f"{ctype} {n}_c;")
                post.append(f"*{n} = {c2f}({n}_c);")
                args.append(f"&{n}_c")
        elif p.kind == "STRING":
            if p.direction == "in":
                # Exact copy with terminator; the legacy layer does not trim
                # info strings (known deficit).
                decls.append(f"char* {n}_c = wrapgen_fstr_to_cstr({n}, {n}_len);")
            else:
                decls.append(f"char* {n}_c = wrapgen_alloc_cstr({n}_len);")
                post.append(f"wrapgen_cstr_to_fstr({n}_c, {n}, {n}_len);")
            frees.append(f"free({n}_c);")
            args.append(f"{n}_c")
        elif p.kind == "INDEX":
            if p.direction == "in":
                args.append(f"(int) (*{n} - 1)")
            else:
                decls.append(f"int {n}_c;")
                post.append(f"*{n} = (MPI_Fint) ({n}_c + 1);")
                args.append(f"&{n}_c")
        elif p.kind in ("CALLBACK", "OTHER_OPAQUE"):
            args.append(n)
        else:
            # COUNT, RANK, TAG, LOGICAL_FLAG, OTHER_INT: integral pass-through.
            # Logicals are deliberately passed unconverted (known deficit).
            if p.direction == "in":
                args.append(f"(int) *{n}")
            else:
                init = f" = (int) *{n}" if p.direction == "inout" else ""
                decls.append(f"int {n}_c{init};")
                post.append(f"*{n} = (MPI_Fint) {n}_c;")
                args.append(f"&{n}_c")

    call = f"{proc.name}({', '.join(args)})"
    if error_param is not None:
        call_line = f"*{error_param.name} = (MPI_Fint) {call};"
    else:
        call_line = f"(void) {call};"

    lines = [f"#ifdef {guard}", signature, "{"]
    lines += [f"{_INDENT}{d}" for d in decls]
    lines += _hook_lines(fragments, "local_vars", 1)
    if pre or fragments.get("enter") or fragments.get("pre_pmpi"):
        lines.append("")
    lines += _hook_lines(fragments, "enter", 1)
    lines += [f"{_INDENT}{s}" for s in pre]
    lines += _hook_lines(fragments, "pre_pmpi", 1)
    lines += ["", f"{_INDENT}{call_line}"]
    if post or frees or fragments.get("post_pmpi") or fragments.get("exit"):
        lines.append("")
    lines += _hook_lines(fragments, "post_pmpi", 1)
    lines += [f"{_INDENT}{s}" for s in post]
    lines += _hook_lines(fragments, "exit", 1)
    lines += [f"{_INDENT}{s}" for s in frees]
    lines += ["}", f"#endif /* {guard} */"]
    return "\n".join(lines)


def render_wrapper(
    proc: ProcedureSpec,
    family: str,
    hook_fragments: Mapping[str, Sequence[str]],
    variant: SymbolVariant,
) -> WrapperUnit:
    """Render one wrapper unit for one symbol variant of one procedure."""
    if family not in WRAPPER_FAMILIES:
        raise RenderError(f"unknown wrapper family {family!r}")
    if not _family_eligible(proc, family):
        raise RenderError(f"{proc.name} has no {family} wrapper (binding not available)")
    unknown_hooks = set(hook_fragments) - set(HOOK_POINTS)
    if unknown_hooks:
        raise RenderError(f"unknown hook point(s): {', '.join(sorted(unknown_hooks))}")

    if family == "c":
        text = _render_c_wrapper(proc, hook_fragments, variant)
    elif family == "f08":
        text = _render_f08_wrapper(proc, hook_fragments, variant)
    else:
        text = _render_fortran_intercept(proc, hook_fragments, variant)

    guard = guard_name(proc.name, family, variant)
    required = ()
    if family == "f08":
        required = (guard_name(proc.name, "f08", replace(variant, descriptor_suffix="_f08")),
                    f"F08_SYMBOL_{proc.name.upper()}")
    return WrapperUnit(
        procedure=proc.name,
        family=family,
        variant=variant,
        guard=guard,
        text=text,
        required_checks=required,
    )


def _family_eligible(proc: ProcedureSpec, family: str) -> bool:
    if family == "c":
        return proc.has_c_binding and not proc.fortran_only
    if family == "fortran_intercept":
        # The legacy layer delegates to the C wrappers; Fortran-only
        # procedures cannot be intercepted there (status quo deficit).
        return proc.has_fortran_binding and not proc.fortran_only
    if family == "f08":
        return proc.has_f08_binding
    return False


def wrapper_variants_for(
    proc: ProcedureSpec,
    family: str,
    intercept_scheme: ManglingScheme = DEFAULT_INTERCEPT_SCHEME,
) -> list[SymbolVariant]:
    """The symbol variants that get a wrapper unit in one family.

    The C family has exactly one symbol.  The legacy intercept covers only the
    by-address symbol under one mangling scheme (descriptor symbols are not
    intercepted there).  The f08 family covers the base symbol and, for
    choice-buffer procedures, the descriptor symbol; f08 subroutine names are
    mangled by the Fortran compiler at build time, so scheme choice does not
    multiply f08 units.
    """
    if family == "c":
        return [c_symbol_variant(proc)]
    if family == "fortran_intercept":
        return [fortran_symbol_variants(proc, [intercept_scheme], pmpi=False)[0]]
    return f08_symbol_variants(proc, [DEFAULT_INTERCEPT_SCHEME], pmpi=False)


def render_tool_shim(
    signature: ToolFunctionSignature,
    strategy: StatusStrategy,
) -> ToolShim:
    """Conversion layers needed to call one tool function from f08 wrappers.

    Fortran-side steps: logical conversion, error-argument presence, status
    tagging.  C-side steps: handle conversion (MPI_*_f2c exists only in C),
    special constants, strings, indices, and the status query helper that
    dispatches on the language tag.
    """
    fortran_side: list[ParameterSpec] = []
    c_side: list[ParameterSpec] = []
    wrapped_status = False
    for param in signature.parameters:
        for step in marshal_plan(param, "to_c", family="f08"):
            if step.rule in ("LOGICAL_CONVERT", "OPTIONAL_IERROR_PRESENT_CHECK"):
                if param not in fortran_side:
                    fortran_side.append(param)
            elif step.rule == "STATUS_WRAP_WITH_LANG":
                if strategy.mode == "WRAPPED_WITH_LANGUAGE_TAG":
                    wrapped_status = True
                    if param not in fortran_side:
                        fortran_side.append(param)
                if param not in c_side:
                    c_side.append(param)
            elif step.rule in ("HANDLE_F2C", "HANDLE_C2F", "SPECIAL_CONSTANT_MAP",
                               "STRING_CONVERT", "INDEX_OFFSET", "INFO_TRIM"):
                if param not in c_side:
                    c_side.append(param)

    fortran_text = _render_shim_fortran(signature, fortran_side, bool(c_side), strategy) if fortran_side else None
    c_text = _render_shim_c(signature, c_side, wrapped_status) if c_side else None
    return ToolShim(name=signature.name, fortran_text=fortran_text, c_text=c_text)


def _render_shim_fortran(
    signature: ToolFunctionSignature,
    converted: Sequence[ParameterSpec],
    has_c_layer: bool,
    strategy: StatusStrategy,
) -> str:
    name = signature.name
    target = f"{name}_fromf08" if has_c_layer else name
    lines = [f"subroutine {name}({', '.join(p.name for p in signature.parameters)})"]
    lines.append(f"{_INDENT}use, intrinsic :: iso_c_binding, only: c_int, c_loc")
    if any(p.kind == "STATUS" for p in signature.parameters):
        lines.append(f"{_INDENT}use :: mpi_f08, only: MPI_Status")
    lines.append(f"{_INDENT}implicit none")
    call_args: list[str] = []
    decls: list[str] = []
    conversions: list[str] = []
    for p in signature.parameters:
        if p.kind == "STATUS" and p in converted:
            decls.append(f"type(MPI_Status), intent(in), target :: {p.name}")
            call_args.append(f"c_loc({p.name})")
            call_args.append(f"WRAPGEN_LANG_{strategy.language_tag.upper()}")
        elif p.kind == "LOGICAL_FLAG" and p in converted:
            decls.append(f"logical, intent(in) :: {p.name}")
            decls.append(f"integer(c_int) :: {p.name}_c")
            conversions.append(f"{p.name}_c = merge(1_c_int, 0_c_int, {p.name})")
            call_args.append(f"{p.name}_c")
        else:
            decls.append(f"{f08_parameter_declaration(p)}")
            call_args.append(p.name)
    lines += [f"{_INDENT}{d}" for d in decls]
    lines += [f"{_INDENT}{c}" for c in conversions]
    lines.append(f"{_INDENT}call {target}({', '.join(call_args)})")
    lines.append(f"end subroutine {name}")
    return "\n".join(lines)


def _render_shim_c(
    signature: ToolFunctionSignature,
    converted: Sequence[ParameterSpec],
    wrapped_status: bool,
) -> str:
    name = signature.name
    params: list[str] = []
    decls: list[str] = []
    call_args: list[str] = []
    for p in signature.parameters:
        if p.kind == "STATUS":
            params.append(f"void* {p.name}_obj")
            params.append(f"int {p.name}_lang")
            decls.append(f"wrapgen_status_handle {p.name}_h = {{ {p.name}_obj, {p.name}_lang }};")
            call_args.append(f"&{p.name}_h")
        elif p.kind in _F2C and p in converted:
            ctype, f2c, _ = _F2C[p.kind]
            params.append(f"MPI_Fint* {p.name}")
            decls.append(f"{ctype} {p.name}_c = {f2c}(*{p.name});")
            call_args.append(f"{p.name}_c")
        elif p.kind == "STRING":
            params.append(f"const char* {p.name}")
            params.append(f"int {p.name}_len")
            decls.append(f"char* {p.name}_c = wrapgen_fstr_to_cstr({p.name}, {p.name}_len);")
            call_args.append(f"{p.name}_c")
        elif p.kind == "INDEX":
            params.append(f"int {p.name}")
            call_args.append(f"{p.name} - 1")
        elif p.kind == "LOGICAL_FLAG":
            params.append(f"int {p.name}")
            call_args.append(p.name)
        else:
            params.append(f"int {p.name}")
            call_args.append(p.name)
    lines = [f"void {name}_fromf08({', '.join(params)})", "{"]
    lines += [f"{_INDENT}{d}" for d in decls]
    lines.append(f"{_INDENT}{name}({', '.join(call_args)});")
    for p in signature.parameters:
        if p.kind == "STRING":
            lines.append(f"{_INDENT}free({p.name}_c);")
    lines.append("}")
    if wrapped_status:
        lines += [
            "",
            "int wrapgen_status_get_count(const wrapgen_status_handle* status_h, MPI_Datatype datatype, int* count)",
            "{",
            f"{_INDENT}if (status_h->lang == WRAPGEN_LANG_C) {{",
            f"{_INDENT}{_INDENT}return MPI_Get_count((const MPI_Status*) status_h->object, datatype, count);",
            f"{_INDENT}}}",
            f"{_INDENT}if (status_h->lang == WRAPGEN_LANG_F08) {{",
            f"{_INDENT}{_INDENT}return wrapgen_get_count_tof08(status_h->object, datatype, count);",
            f"{_INDENT}}}",
            f"{_INDENT}return wrapgen_get_count_tofortran(status_h->object, datatype, count);",
            "}",
        ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Source files and trees
# ---------------------------------------------------------------------------

_C_PRELUDE = """\
/*
 * {path}: {label}.
 * Generated by mpiwrapgen {version}; do not edit.
 */

#include <stdlib.h>

#include <mpi.h>

#include "wrapgen_runtime.h"
"""

_F08_PRELUDE = """\
! {path}: Fortran 2008 binding wrappers.
! Generated by mpiwrapgen {version}; do not edit.
"""

_FAMILY_LABELS = {
    "c": "C binding wrappers",
    "fortran_intercept": "legacy Fortran intercept layer",
}

RUNTIME_HEADER = """\
/*
 * wrapgen_runtime.h: support declarations for generated wrappers.
 * Generated by mpiwrapgen {version}; do not edit.
 */

#ifndef WRAPGEN_RUNTIME_H
#define WRAPGEN_RUNTIME_H

#include <stdlib.h>
#include <string.h>

#include <mpi.h>

#ifdef __cplusplus
extern "C" {{
#endif

/*
 * Event API mapping. The generated wrappers call the two schematic entry
 * points below; a tool adopting the wrappers renames them here (or predefines
 * the macros) to point at its own implementation.
 */
#ifndef event_gen_active
int event_gen_active(const char* procedure_name);
#endif
#ifndef write_event
void write_event(const char* event_text);
#endif

/* Status objects travel with a language tag; tools query them in the
 * language they originated from. */
#define WRAPGEN_LANG_C 0
#define WRAPGEN_LANG_FORTRAN 1
#define WRAPGEN_LANG_F08 2

typedef struct wrapgen_status_handle {{
    void* object;
    int lang;
}} wrapgen_status_handle;

/* Address marking the Fortran-side MPI_BOTTOM; provided by the library
 * integration (one definition per link). */
extern MPI_Fint wrapgen_mpi_bottom_f;

static inline char* wrapgen_fstr_to_cstr(const char* source, int length)
{{
    char* copy = (char*) malloc((size_t) length + 1);
    memcpy(copy, source, (size_t) length);
    copy[length] = '\\0';
    return copy;
}}

static inline char* wrapgen_alloc_cstr(int length)
{{
    return (char*) calloc((size_t) length + 1, 1);
}}

static inline void wrapgen_cstr_to_fstr(const char* source, char* target, int length)
{{
    size_t used = strlen(source);
    if (used > (size_t) length) {{
        used = (size_t) length;
    }}
    memcpy(target, source, used);
    memset(target + used, ' ', (size_t) length - used);
}}

#ifdef __cplusplus
}}
#endif

#endif /* WRAPGEN_RUNTIME_H */
"""

EVENTS_MODULE = """\
! wrapgen_events.F90: event and measurement API for generated f08 wrappers.
! Generated by mpiwrapgen {version}; do not edit.
!
! The module forwards to the tool's C entry points (event_gen_active,
! write_event, record_metric); string arguments are converted here so the
! wrappers themselves stay conversion-free.

module wrapgen_events
    use, intrinsic :: iso_c_binding, only: c_char, c_int, c_null_char
    use :: mpi_f08, only: MPI_Datatype, MPI_Comm, MPI_Request, PMPI_Type_size
    implicit none
    private

    public :: event_gen_active, write_event
    public :: wrapgen_type_size
    public :: record_send_bytes, record_recv_bytes
    public :: record_request, record_comm_handle

    interface
        function wrapgen_event_gen_active_c(procedure_name) &
                bind(c, name="event_gen_active") result(active)
            import :: c_char, c_int
            character(kind=c_char), dimension(*), intent(in) :: procedure_name
            integer(c_int) :: active
        end function wrapgen_event_gen_active_c

        subroutine wrapgen_write_event_c(event_text) bind(c, name="write_event")
            import :: c_char
            character(kind=c_char), dimension(*), intent(in) :: event_text
        end subroutine wrapgen_write_event_c

        subroutine wrapgen_record_metric_c(metric_name, metric_value) &
                bind(c, name="record_metric")
            import :: c_char, c_int
            character(kind=c_char), dimension(*), intent(in) :: metric_name
            integer(c_int), value :: metric_value
        end subroutine wrapgen_record_metric_c
    end interface

contains

    function event_gen_active(procedure_name) result(active)
        character(len=*), intent(in) :: procedure_name
        logical :: active
        active = wrapgen_event_gen_active_c(trim(procedure_name)//c_null_char) /= 0_c_int
    end function event_gen_active

    subroutine write_event(event_text)
        character(len=*), intent(in) :: event_text
        call wrapgen_write_event_c(trim(event_text)//c_null_char)
    end subroutine write_event

    function wrapgen_type_size(datatype) result(type_size)
        type(MPI_Datatype), intent(in) :: datatype
        integer :: type_size
        integer :: ierror_local
        call PMPI_Type_size(datatype, type_size, ierror_local)
    end function wrapgen_type_size

    subroutine record_send_bytes(byte_count)
        integer, intent(in) :: byte_count
        call wrapgen_record_metric_c("bytes_sent"//c_null_char, int(byte_count, c_int))
    end subroutine record_send_bytes

    subroutine record_recv_bytes(byte_count)
        integer, intent(in) :: byte_count
        call wrapgen_record_metric_c("bytes_received"//c_null_char, int(byte_count, c_int))
    end subroutine record_recv_bytes

    subroutine record_request(request)
        type(MPI_Request), intent(in) :: request
        call wrapgen_record_metric_c("request"//c_null_char, int(request%MPI_VAL, c_int))
    end subroutine record_request

    subroutine record_comm_handle(comm)
        type(MPI_Comm), intent(in) :: comm
        call wrapgen_record_metric_c("communicator"//c_null_char, int(comm%MPI_VAL, c_int))
    end subroutine record_comm_handle

end module wrapgen_events
"""


def _file_prelude(path: str, family: str) -> str:
    if family == "f08":
        return _F08_PRELUDE.format(path=path, version=__version__)
    return _C_PRELUDE.format(path=path, label=_FAMILY_LABELS[family], version=__version__)


def render_source_file(
    template: SourceFileTemplate,
    spec: ApiSpec,
    task_config: TaskConfig,
    intercept_scheme: ManglingScheme = DEFAULT_INTERCEPT_SCHEME,
) -> str:
    """Prelude plus the template's wrapper units, in template order."""
    sections = [_file_prelude(template.path, template.family)]
    if template.common_prelude:
        sections.append(template.common_prelude.rstrip("\n") + "\n")
    for name in template.wrapper_list:
        if name not in spec.procedures:
            raise RenderError(f"{template.path}: procedure {name} is not in the spec")
        proc = spec.procedures[name]
        if not _family_eligible(proc, template.family):
            raise RenderError(
                f"{template.path}: {name} has no {template.family} binding"
            )
        fragments = compose(task_config.for_procedure(name), family=template.family)
        for variant in wrapper_variants_for(proc, template.family, intercept_scheme):
            unit = render_wrapper(proc, template.family, fragments, variant)
            sections.append(unit.text + "\n")
    return "\n".join(sections)


def load_template_documents(template_dir) -> list[dict]:
    """Load chapter template documents (*.json) in deterministic name order."""
    directory = Path(template_dir)
    documents = []
    for path in sorted(directory.glob("*.json")):
        try:
            doc = json.loads(path.read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise RenderError(f"{path}: not valid JSON: {exc}") from exc
        if "name" not in doc:
            raise RenderError(f"{path}: template document carries no 'name'")
        documents.append(doc)
    return documents


def _select_template_procedures(
    templates: Sequence[dict],
    spec: ApiSpec,
) -> dict[str, list[str]]:
    """Chapter template name -> ordered procedure names it covers."""
    selected: dict[str, list[str]] = {}
    rest_templates = []
    claimed: set[str] = set()
    all_names = sorted(spec.procedures)

    for doc in templates:
        name = doc["name"]
        select = doc.get("select", {})
        if select.get("rest"):
            rest_templates.append(name)
            selected[name] = []
            continue
        if "procedures" in select:
            for proc_name in select["procedures"]:
                if proc_name not in spec.procedures:
                    raise RenderError(
                        f"template {name}: procedure {proc_name} is not in the spec"
                    )
            names = list(select["procedures"])
        else:
            chapters = set(select.get("chapters", ()))
            names = [n for n in all_names if spec.procedures[n].chapter_group in chapters]
        selected[name] = names
        claimed.update(names)

    remainder = [n for n in all_names if n not in claimed]
    for name in rest_templates:
        selected[name] = remainder
        remainder = []  # only the first rest-template receives the remainder
    return selected


def generate_tree(
    spec: ApiSpec,
    templates: Sequence[dict],
    task_config: TaskConfig,
    options: GenerateOptions = GenerateOptions(),
    diagnostics: Optional[Diagnostics] = None,
) -> GeneratedTree:
    """Render all requested family files plus the check manifest; byte
    deterministic for fixed inputs, with or without parallel rendering."""
    from .checks import generate_check_manifest, render_check_snippets

    diagnostics = diagnostics if diagnostics is not None else Diagnostics()
    for family in options.families:
        if family not in WRAPPER_FAMILIES:
            raise RenderError(f"unknown wrapper family {family!r}")

    chapter_procs = _select_template_procedures(templates, spec)
    template_names = sorted(chapter_procs)

    skipped: list[dict] = []
    covered: set[str] = set()
    for names in chapter_procs.values():
        covered.update(names)
    for name in sorted(spec.procedures):
        if name not in covered:
            skipped.append({"procedure": name, "family": "*", "reason": "not selected by any template"})

    file_templates: list[SourceFileTemplate] = []
    family_procs: dict[str, set[str]] = {family: set() for family in options.families}
    for family in options.families:
        for tmpl_name in template_names:
            doc = next(d for d in templates if d["name"] == tmpl_name)
            eligible = []
            for proc_name in chapter_procs[tmpl_name]:
                proc = spec.procedures[proc_name]
                if _family_eligible(proc, family):
                    eligible.append(proc_name)
                else:
                    skipped.append({
                        "procedure": proc_name,
                        "family": family,
                        "reason": "binding not available in this family",
                    })
            if not eligible:
                continue
            family_procs[family].update(eligible)
            path = f"{_FAMILY_DIRS[family]}/{tmpl_name}{_FAMILY_EXTENSIONS[family]}"
            file_templates.append(SourceFileTemplate(
                path=path,
                family=family,
                common_prelude=doc.get("prelude", ""),
                wrapper_list=tuple(eligible),
            ))

    def render_one(template: SourceFileTemplate) -> tuple[str, str]:
        return template.path, render_source_file(
            template, spec, task_config, options.intercept_scheme
        )

    files: dict[str, str] = {}
    if options.parallel and file_templates:
        with ThreadPoolExecutor(max_workers=4) as pool:
            rendered = list(pool.map(render_one, file_templates))
    else:
        rendered = [render_one(t) for t in file_templates]
    for path, content in rendered:
        if path in files:
            raise RenderError(f"duplicate output path {path}")
        files[path] = content

    if "c" in options.families or "fortran_intercept" in options.families:
        header = RUNTIME_HEADER.format(version=__version__)
        if "c" in options.families:
            files["c/wrapgen_runtime.h"] = header
        if "fortran_intercept" in options.families:
            files["f/wrapgen_runtime.h"] = header
    if "f08" in options.families:
        files["f08/wrapgen_events.F90"] = EVENTS_MODULE.format(version=__version__)

    manifest_checks = generate_check_manifest(spec, options.schemes)
    files["checks/manifest.json"] = render_check_snippets(manifest_checks, "machine_manifest")

    skipped_sorted = sorted(skipped, key=lambda s: (s["procedure"], s["family"]))
    check_kinds = {"module_accessibility": 0, "symbol_presence": 0, "capability": 0}
    for check in manifest_checks:
        check_kinds[check.kind] += 1
    manifest = {
        "format_version": 1,
        "generator_version": __version__,
        "source_versions": list(spec.source_versions),
        "families": {
            family: {
                "wrappers": len(family_procs[family]),
                "files": sorted(p for p in files if p.startswith(_FAMILY_DIRS[family] + "/")),
            }
            for family in options.families
        },
        "skipped": skipped_sorted,
        "checks": {
            "total": len(manifest_checks),
            "module_accessibility": check_kinds["module_accessibility"],
            "symbol_presence": check_kinds["symbol_presence"],
            "capabilities": check_kinds["capability"],
        },
    }
    files["manifest.json"] = json.dumps(manifest, indent=2) + "\n"

    files = dict(sorted(files.items()))
    return GeneratedTree(files=files, manifest=manifest)
