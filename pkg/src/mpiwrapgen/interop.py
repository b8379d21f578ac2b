"""Classification predicates and marshalling plans for the C/Fortran boundary.

This module encodes the mixed-language interface problems as data: which
procedures must reach PMPI in their own language, which can be intercepted in C
at all, and which conversion steps each parameter kind needs when it crosses a
language boundary.  The legacy Fortran wrapper layer handles only a subset of
these problems; :func:`issue_support_matrix` records, per wrapper family, which
issue is handled correctly.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .apispec import HANDLE_KINDS, PARAMETER_KINDS, ParameterSpec, ProcedureSpec

CONVERSION_RULES = (
    "LOGICAL_CONVERT",
    "OPTIONAL_IERROR_PRESENT_CHECK",
    "HANDLE_F2C",
    "HANDLE_C2F",
    "SPECIAL_CONSTANT_MAP",
    "STRING_CONVERT",
    "STATUS_WRAP_WITH_LANG",
    "INDEX_OFFSET",
    "INFO_TRIM",
    "PASS_THROUGH",
)

BOUNDARY_DIRECTIONS = ("to_c", "to_fortran")


@dataclass(frozen=True)
class ConversionStep:
    rule: str
    parameter: str
    boundary_direction: str


@dataclass(frozen=True)
class SpecialConstantEntry:
    constant: str
    fortran_side: str
    c_side: str


# Constants whose Fortran and C values differ; emitted code compares on the
# Fortran side before crossing the boundary.
SPECIAL_CONSTANTS = (
    SpecialConstantEntry("MPI_BOTTOM", "address of the library's Fortran bottom marker", "MPI_BOTTOM"),
    SpecialConstantEntry("MPI_IN_PLACE", "address of the library's Fortran in-place marker", "MPI_IN_PLACE"),
    SpecialConstantEntry("MPI_STATUS_IGNORE", "MPI_F_STATUS_IGNORE", "MPI_STATUS_IGNORE"),
)


@dataclass(frozen=True)
class StatusStrategy:
    mode: str  # "NATIVE_CONVERSION" | "WRAPPED_WITH_LANGUAGE_TAG"
    language_tag: str  # "c" | "f08" | "fortran"


def needs_same_language_pmpi(proc: ProcedureSpec) -> bool:
    """Callbacks, attribute caching and choice buffers force the wrapper to call
    the PMPI entry of its own language and support method."""
    return bool(proc.needs_same_language_pmpi_reasons)


def is_interceptable_in_c(proc: ProcedureSpec) -> bool:
    """Procedures that exist only in the Fortran bindings have no C PMPI entry
    to delegate to."""
    return not proc.fortran_only


def marshal_plan(
    param: ParameterSpec,
    boundary_direction: str,
    family: str = "fortran",
) -> list[ConversionStep]:
    """Ordered conversion steps for one parameter crossing a language boundary.

    Total over the kind taxonomy: every kind yields a plan, unhandled kinds
    pass through.  The optional-ierror presence check applies to the f08 family
    only; the legacy bindings make the error argument mandatory.
    """
    if boundary_direction not in BOUNDARY_DIRECTIONS:
        raise ValueError(f"unknown boundary direction {boundary_direction!r}")

    def step(rule: str) -> ConversionStep:
        return ConversionStep(rule, param.name, boundary_direction)

    kind = param.kind
    if kind == "LOGICAL_FLAG":
        return [step("LOGICAL_CONVERT")]
    if kind == "INFO":
        handle = "HANDLE_F2C" if boundary_direction == "to_c" else "HANDLE_C2F"
        return [step("INFO_TRIM"), step(handle)]
    if kind in HANDLE_KINDS:
        return [step("HANDLE_F2C" if boundary_direction == "to_c" else "HANDLE_C2F")]
    if kind == "STRING":
        return [step("STRING_CONVERT")]
    if kind == "STATUS":
        return [step("STATUS_WRAP_WITH_LANG")]
    if kind == "INDEX":
        return [step("INDEX_OFFSET")]
    if kind == "BUFFER":
        return [step("SPECIAL_CONSTANT_MAP"), step("PASS_THROUGH")]
    if kind == "ERROR_CODE":
        if family == "f08":
            return [step("OPTIONAL_IERROR_PRESENT_CHECK")]
        return [step("PASS_THROUGH")]
    # COUNT, RANK, TAG, CALLBACK, OTHER_INT, OTHER_OPAQUE
    return [step("PASS_THROUGH")]


def status_strategy(available_native_conversions: bool, origin_family: str) -> StatusStrategy:
    """Pick how a status object reaches tool code written in C.

    A C-origin status needs no conversion at all; for the Fortran families the
    native conversion calls are used only when the library provides them,
    otherwise the object travels wrapped with a language tag and is queried in
    its original language.
    """
    if origin_family not in ("c", "fortran", "f08"):
        raise ValueError(f"unknown origin family {origin_family!r}")
    if origin_family == "c" or available_native_conversions:
        return StatusStrategy("NATIVE_CONVERSION", origin_family)
    return StatusStrategy("WRAPPED_WITH_LANGUAGE_TAG", origin_family)


ISSUE_NAMES = {
    1: "Logical",
    2: "Error return",
    3: "Fortran only routines",
    4: "Callbacks, Attributes, Choice buffers",
    5: "Array descriptors",
    6: "MPI handles",
    7: "MPI constants",
    8: "Character strings",
    9: "Status object",
    10: "Array indices",
    11: "Info strings",
}

# Issues the legacy Fortran wrapper layer gets wrong: logicals pass unconverted,
# Fortran-only routines are not intercepted, same-language PMPI delegation is
# violated, descriptor symbols are not intercepted, info strings reach C
# untrimmed.
_FORTRAN_UNHANDLED = frozenset({1, 3, 4, 5, 11})


def issue_support_matrix(family: str) -> dict[int, bool]:
    """Per wrapper family: which of the eleven interface issues is handled
    correctly.  The f08 layer handles all of them."""
    if family == "fortran":
        return {issue: issue not in _FORTRAN_UNHANDLED for issue in ISSUE_NAMES}
    if family == "f08":
        return {issue: True for issue in ISSUE_NAMES}
    raise ValueError(f"unknown wrapper family {family!r}")


# Reference semantics for value-level conversions; the generator emits code
# performing these, and tests check the round-trip/idempotence laws against
# these functions.

def apply_index_offset(value: int, boundary_direction: str) -> int:
    """C indices start at zero, Fortran indices at one."""
    if boundary_direction == "to_c":
        return value - 1
    if boundary_direction == "to_fortran":
        return value + 1
    raise ValueError(f"unknown boundary direction {boundary_direction!r}")


def apply_info_trim(value: str) -> str:
    """Leading and trailing spaces are stripped from info keys and values."""
    return value.strip(" ")


def apply_logical_convert(value: bool) -> int:
    """Lowest-common-denominator logical representation: integer 0/1."""
    return 1 if value else 0


def apply_string_convert_to_c(value: str, length: Optional[int] = None) -> str:
    """Fixed-length, space-padded Fortran string to a length-delimited C string
    (the terminator is implicit in the str type here)."""
    if length is not None:
        value = value[:length].ljust(length)
    return value.rstrip(" ")


def apply_string_convert_to_fortran(value: str, length: int) -> str:
    """C string to a fixed-length, space-padded Fortran character array."""
    return value[:length].ljust(length)


def all_kinds_covered() -> bool:
    """True iff marshal_plan yields a nonempty plan for every parameter kind."""
    for kind in PARAMETER_KINDS:
        param = ParameterSpec(name="x", kind=kind, direction="in")
        for direction in BOUNDARY_DIRECTIONS:
            if not marshal_plan(param, direction):
                return False
    return True
