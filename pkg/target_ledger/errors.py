"""Exception hierarchy shared by the engine and the CLI.

Every error is a ``ValueError`` so callers that only care about "bad input"
can catch that; the CLI maps ``exit_code``/``code`` onto its exit status.
"""

from typing import Any, List, Optional, Tuple

EXIT_USAGE = 2
EXIT_DATA = 3
EXIT_INFEASIBLE = 4


class LedgerError(ValueError):
    """Base class for all domain errors."""

    code = "E_DATA"
    exit_code = EXIT_DATA


class PaymentError(LedgerError):
    """A payment that cannot be booked."""

    def __init__(self, message: str, payment: Any = None, position: Optional[int] = None):
        if position is not None:
            message = f"payment #{position}: {message}"
        super().__init__(message)
        self.payment = payment
        self.position = position


class MatrixError(LedgerError):
    """A balance matrix that is not skew-symmetric with zero diagonal."""

    def __init__(self, violations: List[Any]):
        shown = "; ".join(str(v) for v in violations[:5])
        more = f" (+{len(violations) - 5} more)" if len(violations) > 5 else ""
        super().__init__(f"invalid balance matrix: {shown}{more}")
        self.violations = violations


class InfeasibleReportError(LedgerError):
    """Aggregate balances that do not sum to zero."""

    def __init__(self, total: int):
        super().__init__(f"aggregate balances sum to {total}, expected 0")
        self.total = total


class ConstraintError(LedgerError):
    """Reconstruction constraints that contradict their own antisymmetry."""

    code = "E_USAGE"
    exit_code = EXIT_USAGE


class InfeasibleReconstruction(LedgerError):
    """No matrix satisfies the report together with the constraints."""

    code = "E_INFEASIBLE"
    exit_code = EXIT_INFEASIBLE

    def __init__(self, certificate: Any):
        super().__init__(f"reconstruction infeasible: {certificate}")
        self.certificate = certificate


class EnumerationBudgetError(LedgerError):
    """Exhaustive enumeration would exceed the configured budget."""

    code = "E_USAGE"
    exit_code = EXIT_USAGE

    def __init__(self, estimate: int, budget: int):
        super().__init__(
            f"enumeration needs about {estimate} candidates, budget is {budget}; "
            f"lower the bound or raise the quantum"
        )
        self.estimate = estimate
        self.budget = budget


class DataError(LedgerError):
    """Malformed input file; ``issues`` holds ``(line, message)`` pairs."""

    def __init__(self, path: Any, issues: List[Tuple[int, str]]):
        head = ", ".join(f"line {line}: {msg}" for line, msg in issues[:5])
        more = f" (+{len(issues) - 5} more)" if len(issues) > 5 else ""
        super().__init__(f"{path}: {head}{more}")
        self.path = path
        self.issues = issues


class ScenarioError(LedgerError):
    """Scenario configuration that cannot be run."""

    code = "E_USAGE"
    exit_code = EXIT_USAGE


class StrategemError(LedgerError):
    """Rule violation inside a strategem simulation."""
