"""Shared exception types for the netbench toolkit.

Every error a caller is expected to catch lives here so that the solver
modules can raise each other's failure modes without import cycles.
"""


class NetbenchError(Exception):
    """Base class for all toolkit errors."""


class StructuralError(NetbenchError):
    """A netlist is malformed, e.g. a component port is left dangling."""


class NotSquare(NetbenchError):
    """The equation system is not square (or contains non-equality rows)."""


class HasDisjunctions(NetbenchError):
    """A plain linear solve was requested on a system with disjunctions."""


class SingularSystem(NetbenchError):
    """The square system is singular: inconsistent or rank deficient."""


class NonlinearResidue(NetbenchError):
    """Products of non-fixed unknowns remain after presolve substitution."""


class UnsupportedStrict(NetbenchError):
    """Strict inequalities cannot be represented in the requested encoding."""


class UnsupportedInterval(NetbenchError):
    """Interval coefficients are not supported on this code path."""


class NonMonotoneInterval(NetbenchError):
    """Endpoint optimization failed its monotonicity spot check."""


class DivergentEnclosure(NetbenchError):
    """Interval elimination hit a pivot interval containing zero."""


class Unsatisfiable(NetbenchError):
    """No feasible branch combination exists."""

    def __init__(self, message, stats=None):
        super().__init__(message)
        self.stats = stats


class Infeasible(NetbenchError):
    """A linear program has an empty feasible region."""


class Unbounded(NetbenchError):
    """A linear program is unbounded in the optimization direction."""


class ExplosionGuard(NetbenchError):
    """Branch enumeration would exceed the configured cap."""


class SizeCap(NetbenchError):
    """The instance exceeds the documented size limit for this solver."""


class SingularSymbolic(NetbenchError):
    """The symbolic system matrix is singular over the parameter field."""


class DenominatorZero(NetbenchError):
    """A rational function was evaluated at a root of its denominator."""


class DenominatorStraddlesZero(NetbenchError):
    """An interval evaluation cannot exclude zero from the denominator."""


class InstanceFormatError(NetbenchError):
    """An instance file is malformed or has an unsupported version."""

    def __init__(self, message, line=None, field=None):
        loc = []
        if line is not None:
            loc.append(f"line {line}")
        if field is not None:
            loc.append(f"field {field!r}")
        if loc:
            message = f"{message} ({', '.join(loc)})"
        super().__init__(message)
        self.line = line
        self.field = field


class LpExportError(NetbenchError):
    """The system cannot be expressed in LP text format."""
