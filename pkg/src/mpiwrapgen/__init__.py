"""mpiwrapgen: generator for PMPI interception wrapper source trees.

Reads machine-readable MPI procedure definitions, merges them across standard
versions, and emits interception wrappers for the C, legacy Fortran and
Fortran 2008 binding families together with a configure-check manifest.
"""

__version__ = "0.1.0"

from .errors import (  # noqa: F401
    BindingContractError,
    Diagnostics,
    LocalVariableCollisionError,
    MergeError,
    ProcedureNotFoundError,
    RenderError,
    SpecFormatError,
    TaskError,
    WrapgenError,
)
