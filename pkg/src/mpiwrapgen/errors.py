"""Error types and the diagnostics collector shared by all pipeline stages."""

from __future__ import annotations

from dataclasses import dataclass, field


class WrapgenError(Exception):
    """Base class for all generator errors."""


class SpecFormatError(WrapgenError):
    """A spec/supplement document violates the input schema."""


class ProcedureNotFoundError(WrapgenError, KeyError):
    """Lookup of a procedure name that is not in the merged spec."""

    def __str__(self) -> str:  # KeyError.__str__ would repr() the message
        return Exception.__str__(self)


class MergeError(WrapgenError):
    """Supplement/merge rules violated (e.g. supplement redefines a live procedure)."""


class BindingContractError(WrapgenError):
    """An operation was called for a binding family the procedure does not have."""


class TaskError(WrapgenError):
    """Task library/config problems: unknown task, unbound parameter, dangling reference."""


class LocalVariableCollisionError(TaskError):
    """Two composed tasks declare the same local variable name."""


class RenderError(WrapgenError):
    """Wrapper/file rendering failed (family mismatch, unresolved placeholder, ...)."""


@dataclass
class Diagnostics:
    """Collects warnings and errors accumulated while running the pipeline.

    Warnings never abort on their own; the CLI turns them fatal under --strict.
    """

    warnings: list[str] = field(default_factory=list)
    errors: list[str] = field(default_factory=list)

    def warn(self, message: str) -> None:
        self.warnings.append(message)

    def error(self, message: str) -> None:
        self.errors.append(message)

    @property
    def ok(self) -> bool:
        return not self.errors
