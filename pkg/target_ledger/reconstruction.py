"""Inverse problem: bilateral matrices consistent with published aggregates.

For n participants the row sums fix only n-1 numbers while the matrix has
n(n-1)/2 free entries, so for n > 2 the aggregates never determine the
bilateral positions. This module characterises the solution family and
picks representatives from it:

* ``min_norm_reconstruct``: exact closed form T(i,j) = (T_i - T_j)/n,
* ``constrained_reconstruct``: L1-minimal, least-norm or merely feasible
  matrices under bounds and pinned entries, solved with scipy's HiGHS LP,
* ``enumerate_integer_solutions``: exhaustive listing for n <= 4.
"""

import itertools
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, Iterable, List, NamedTuple, Optional, Sequence, Tuple

import numpy as np
from scipy.optimize import linprog, minimize

from .errors import (ConstraintError, EnumerationBudgetError, InfeasibleReconstruction,
                     InfeasibleReportError)
from .ledger import AggregateReport, BalanceMatrix, degrees_of_freedom
from .utils import Money, round_half_even

logger = logging.getLogger(__name__)

# Exact rational money; min-norm entries have denominator dividing n.
RationalMoney = Fraction

MIN_FROBENIUS = 'min_frobenius_norm'
MIN_L1 = 'min_l1'
FEASIBILITY_ONLY = 'feasibility_only'
OBJECTIVES = (MIN_FROBENIUS, MIN_L1, FEASIBILITY_ONLY)

DEFAULT_QUANTUM = 1_000_000_000
DEFAULT_BUDGET = 2_000_000
DEFAULT_LP_TOLERANCE = 1e-9
MAX_ENUMERATION_N = 4

Pair = Tuple[int, int]


def feasible(report: AggregateReport) -> bool:
    """Aggregates can come from some matrix iff they sum to exactly zero."""
    return report.total == 0


def _require_feasible(report: AggregateReport) -> None:
    if not feasible(report):
        raise InfeasibleReportError(report.total)


def solution_space_dim(n: int) -> int:
    """Dimension of the family of matrices sharing one aggregate vector."""
    bilateral, aggregates = degrees_of_freedom(n)
    return bilateral - aggregates


# -- solution family ---------------------------------------------------------

@dataclass(frozen=True)
class SolutionSpace:
    n: int
    particular: BalanceMatrix
    null_dimension: int
    basis: Tuple[BalanceMatrix, ...]


def null_space_basis(labels: Sequence[str]) -> List[BalanceMatrix]:
    """Elementary 3-cycles through participant 0: (0, j, k) for 0 < j < k.

    Each has every row sum zero, and entry (j, k) appears in exactly one
    cycle, so the (n-1)(n-2)/2 cycles are independent.
    """
    n = len(labels)
    basis = []
    for j in range(1, n):
        for k in range(j + 1, n):
            rows = [[0] * n for _ in range(n)]
            rows[0][j], rows[j][0] = 1, -1
            rows[j][k], rows[k][j] = 1, -1
            rows[k][0], rows[0][k] = 1, -1
            basis.append(BalanceMatrix(tuple(labels), tuple(tuple(r) for r in rows)))
    return basis


def star_solution(report: AggregateReport) -> BalanceMatrix:
    """Integer particular solution routing every balance through participant 0."""
    _require_feasible(report)
    n = report.n
    rows = [[0] * n for _ in range(n)]
    for j in range(1, n):
        rows[j][0] = report.balances[j]
        rows[0][j] = -report.balances[j]
    return BalanceMatrix(report.labels, tuple(tuple(r) for r in rows))


def solution_space(report: AggregateReport) -> SolutionSpace:
    """Particular solution plus a basis of the directions that keep aggregates."""
    particular = star_solution(report)
    basis = tuple(null_space_basis(report.labels))
    return SolutionSpace(report.n, particular, solution_space_dim(report.n), basis)


def parametrize_n3(report: AggregateReport, t12: Money) -> BalanceMatrix:
    """The one-parameter family for three participants.

    T13 = -t12 - T2 - T3 and T23 = t12 + T2 reproduce the report for any t12.
    """
    if report.n != 3:
        raise ValueError(f"parametrize_n3 needs exactly 3 participants, got {report.n}")
    _require_feasible(report)
    _, t2, t3 = report.balances
    return BalanceMatrix.from_upper(report.labels, [t12, -t12 - t2 - t3, t12 + t2])


def n3_family_interval(report: AggregateReport, bound: Money,
                       nonnegative_t12: bool = False) -> Optional[Tuple[Money, Money]]:
    """Closed range of t12 keeping T12, T13, T23 within +-bound, or None."""
    if report.n != 3:
        raise ValueError(f"n3_family_interval needs exactly 3 participants, got {report.n}")
    _require_feasible(report)
    t1, t2, _ = report.balances
    lo = max(-bound, t1 - bound, -bound - t2)
    hi = min(bound, t1 + bound, bound - t2)
    if nonnegative_t12:
        lo = max(lo, 0)
    return (lo, hi) if lo <= hi else None


# -- minimum norm ------------------------------------------------------------

@dataclass(frozen=True)
class RationalMatrix:
    """Skew-symmetric matrix of exact rationals (cents)."""

    labels: Tuple[str, ...]
    entries: Tuple[Tuple[Fraction, ...], ...]

    @property
    def n(self) -> int:
        return len(self.labels)

    def entry(self, i: int, j: int) -> Fraction:
        return self.entries[i][j]

    def row_sums(self) -> Tuple[Fraction, ...]:
        return tuple(sum(row, Fraction(0)) for row in self.entries)

    def upper(self) -> Tuple[Fraction, ...]:
        n = self.n
        return tuple(self.entries[i][j] for i in range(n) for j in range(i + 1, n))

    def is_integral(self) -> bool:
        return all(v.denominator == 1 for row in self.entries for v in row)

    def squared_norm(self) -> Fraction:
        return sum((v * v for row in self.entries for v in row), Fraction(0))


def min_norm_reconstruct(report: AggregateReport) -> RationalMatrix:
    """Least-Frobenius-norm matrix with the given row sums: (T_i - T_j)/n."""
    _require_feasible(report)
    n = report.n
    b = report.balances
    entries = tuple(tuple(Fraction(b[i] - b[j], n) for j in range(n)) for i in range(n))
    return RationalMatrix(report.labels, entries)


# -- rounding to cents -------------------------------------------------------

def _repair_row_sums(rows: List[List[int]], targets: Sequence[int],
                     frozen: Iterable[Pair] = ()) -> bool:
    """Shift whole cents between rows until every row sum hits its target.

    A pair is offending when one of its rows over-shoots and the other
    under-shoots. Each step adjusts the largest-magnitude entry among the
    offending pairs (ties to the lowest indices), both halves at once so the
    matrix stays skew-symmetric. Pinned pairs are never touched. Returns True
    if anything was changed.
    """
    frozen = {tuple(sorted(p)) for p in frozen}
    residual = [sum(row) - t for row, t in zip(rows, targets)]
    changed = False
    while any(residual):
        offending = [(i, j) for i in range(len(residual)) if residual[i] > 0
                     for j in range(len(residual)) if residual[j] < 0
                     and tuple(sorted((i, j))) not in frozen]
        if not offending:
            logger.warning("REPAIR | cannot restore row sums, residual=%s", residual)
            break
        i, j = min(offending, key=lambda p: (-abs(rows[p[0]][p[1]]), min(p), max(p)))
        d = min(residual[i], -residual[j])
        rows[i][j] -= d
        rows[j][i] += d
        residual[i] -= d
        residual[j] += d
        changed = True
    return changed


def to_integer_matrix(matrix: RationalMatrix, targets: Optional[Sequence[int]] = None,
                      frozen: Iterable[Pair] = ()) -> Tuple[BalanceMatrix, bool]:
    """Round a rational matrix to whole cents, half-to-even, then repair row sums.

    Returns the integer matrix and whether the input was already integral.
    """
    n = matrix.n
    rows = [[0] * n for _ in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            v = round_half_even(matrix.entries[i][j])
            rows[i][j], rows[j][i] = v, -v
    if targets is None:
        targets = [round_half_even(s) for s in matrix.row_sums()]
    _repair_row_sums(rows, targets, frozen)
    return BalanceMatrix(matrix.labels, tuple(tuple(r) for r in rows)), matrix.is_integral()


# -- constraints -------------------------------------------------------------

class Condition(NamedTuple):
    """One user constraint on a single entry, 0-based indices."""

    kind: str  # 'fix', 'lower' or 'upper'
    i: int
    j: int
    value: Money

    def __str__(self) -> str:
        op = {'fix': '=', 'lower': '>=', 'upper': '<='}[self.kind]
        return f"T({self.i + 1},{self.j + 1}) {op} {self.value}"


@dataclass(frozen=True)
class ReconstructionConstraints:
    """Bounds and pinned entries, stored in antisymmetric pairs."""

    lower: Dict[Pair, Money] = field(default_factory=dict)
    upper: Dict[Pair, Money] = field(default_factory=dict)
    fixed: Dict[Pair, Money] = field(default_factory=dict)
    objective: str = MIN_L1

    @classmethod
    def build(cls, conditions: Iterable[Condition] = (), objective: str = MIN_L1
              ) -> 'ReconstructionConstraints':
        """Collect conditions, adding the mirrored entry of every one.

        A lower bound on (i, j) is an upper bound on (j, i) of the negated
        value; a pinned (i, j) pins (j, i) to the negated value.
        """
        if objective not in OBJECTIVES:
            raise ConstraintError(f"Unknown objective {objective!r}; expected one of {OBJECTIVES}")
        lower, upper, fixed = {}, {}, {}

        def put(table, key, value, label):
            if key in table and table[key] != value:
                raise ConstraintError(
                    f"conflicting {label} for T({key[0] + 1},{key[1] + 1}): {table[key]} vs {value}"
                )
            table[key] = value

        for c in conditions:
            if c.i == c.j:
                raise ConstraintError(f"diagonal entry T({c.i + 1},{c.j + 1}) is always 0")
            if c.kind == 'fix':
                put(fixed, (c.i, c.j), c.value, 'fixed value')
                put(fixed, (c.j, c.i), -c.value, 'fixed value')
            elif c.kind == 'lower':
                put(lower, (c.i, c.j), c.value, 'lower bound')
                put(upper, (c.j, c.i), -c.value, 'upper bound')
            elif c.kind == 'upper':
                put(upper, (c.i, c.j), c.value, 'upper bound')
                put(lower, (c.j, c.i), -c.value, 'lower bound')
            else:
                raise ConstraintError(f"Unknown constraint kind {c.kind!r}")
        return cls(lower, upper, fixed, objective)

    def violations(self) -> List[str]:
        """Pairs that break antisymmetric consistency."""
        issues = []
        for (i, j), lo in self.lower.items():
            if (j, i) in self.upper and self.upper[(j, i)] != -lo:
                issues.append(f"lower T({i + 1},{j + 1})={lo} but upper T({j + 1},{i + 1})={self.upper[(j, i)]}")
        for (i, j), v in self.fixed.items():
            if self.fixed.get((j, i)) != -v:
                issues.append(f"fixed T({i + 1},{j + 1})={v} without T({j + 1},{i + 1})={-v}")
        return issues

    def conditions(self) -> List[Condition]:
        """One condition per antisymmetric pair, expressed on i < j when possible."""
        out = []
        for (i, j), v in sorted(self.fixed.items()):
            if i < j:
                out.append(Condition('fix', i, j, v))
        for (i, j), v in sorted(self.lower.items()):
            if i < j or (j, i) not in self.upper:
                out.append(Condition('lower', i, j, v))
        for (i, j), v in sorted(self.upper.items()):
            if i < j or (j, i) not in self.lower:
                out.append(Condition('upper', i, j, v))
        return out

    def is_empty(self) -> bool:
        return not (self.lower or self.upper or self.fixed)

    def with_objective(self, objective: str) -> 'ReconstructionConstraints':
        return ReconstructionConstraints.build(self.conditions(), objective)


class InfeasibilityCertificate(NamedTuple):
    """An irreducible set of constraints that cannot hold together with the report."""

    conditions: Tuple[Condition, ...]

    def __str__(self) -> str:
        named = ", ".join(str(c) for c in self.conditions) or "(none)"
        return f"row sums together with {named}"


@dataclass(frozen=True)
class Reconstruction:
    matrix: BalanceMatrix
    objective: str
    value: int
    null_dimension: int
    exact: bool = True


class _LinearProgram:
    """Split-variable LP over the strict upper triangle: x = p - m, p, m >= 0."""

    def __init__(self, report: AggregateReport, conditions: Sequence[Condition]):
        self.report = report
        n = report.n
        self.pairs = [(i, j) for i in range(n) for j in range(i + 1, n)]
        self.k = len(self.pairs)
        index = {pair: k for k, pair in enumerate(self.pairs)}

        # Row sums; the last one is implied by the zero total
        a_eq = np.zeros((max(n - 1, 0), 2 * self.k))
        for r in range(n - 1):
            for k, (i, j) in enumerate(self.pairs):
                sign = 1.0 if i == r else (-1.0 if j == r else 0.0)
                a_eq[r, k], a_eq[r, self.k + k] = sign, -sign
        self.a_eq_rows = list(a_eq)
        self.b_eq_rows = [float(v) for v in report.balances[:n - 1]]
        self.a_ub_rows: List[np.ndarray] = []
        self.b_ub_rows: List[float] = []

        for c in conditions:
            sign = 1.0 if c.i < c.j else -1.0
            k = index[(min(c.i, c.j), max(c.i, c.j))]
            value = sign * c.value
            row = np.zeros(2 * self.k)
            row[k], row[self.k + k] = 1.0, -1.0
            if c.kind == 'fix':
                self.a_eq_rows.append(row)
                self.b_eq_rows.append(value)
            # lower on x when sign > 0, upper on x when the pair was flipped
            elif (c.kind == 'lower') == (sign > 0):
                self.a_ub_rows.append(-row)
                self.b_ub_rows.append(-value)
            else:
                self.a_ub_rows.append(row)
                self.b_ub_rows.append(value)

    def solve(self, cost: np.ndarray, extra_ub: Sequence[Tuple[np.ndarray, float]] = ()):
        a_ub = self.a_ub_rows + [row for row, _ in extra_ub]
        b_ub = self.b_ub_rows + [b for _, b in extra_ub]
        return linprog(
            cost,
            A_ub=np.array(a_ub) if a_ub else None,
            b_ub=np.array(b_ub) if b_ub else None,
            A_eq=np.array(self.a_eq_rows) if self.a_eq_rows else None,
            b_eq=np.array(self.b_eq_rows) if self.b_eq_rows else None,
            bounds=(0, None),
            method='highs',
        )

    def entries(self, z: np.ndarray) -> np.ndarray:
        return z[:self.k] - z[self.k:]


def _is_infeasible(result) -> bool:
    return result.status == 2


def _certificate(report: AggregateReport, conditions: Sequence[Condition]) -> InfeasibilityCertificate:
    """Deletion filter: drop every condition whose removal keeps the LP infeasible."""
    kept = list(conditions)
    for c in list(kept):
        trial = [d for d in kept if d is not c]
        lp = _LinearProgram(report, trial)
        if _is_infeasible(lp.solve(np.zeros(2 * lp.k))):
            kept = trial
    return InfeasibilityCertificate(tuple(kept))


def _lexicographic_refine(lp: _LinearProgram, optimum: float, tolerance: float) -> np.ndarray:
    """Among L1-optimal points pick the lexicographically smallest upper triangle."""
    cost_l1 = np.ones(2 * lp.k)
    slack = max(tolerance * abs(optimum), 0.5)
    extra = [(cost_l1, optimum + slack)]
    z = None
    for k in range(lp.k):
        cost = np.zeros(2 * lp.k)
        cost[k], cost[lp.k + k] = 1.0, -1.0
        result = lp.solve(cost, extra)
        if result.status != 0:
            logger.warning("LP | lexicographic pass stopped at entry %d: %s", k, result.message)
            break
        z = result.x
        extra = extra + [(cost, float(result.fun) + 0.5)]
    return z


def _least_norm_bounded(lp: _LinearProgram, start: np.ndarray) -> np.ndarray:
    """Least-squares entries under the LP's equalities and bounds (SLSQP)."""
    k = lp.k
    a_eq = np.array(lp.a_eq_rows)[:, :k] if lp.a_eq_rows else np.zeros((0, k))
    b_eq = np.array(lp.b_eq_rows)
    a_ub = np.array(lp.a_ub_rows)[:, :k] if lp.a_ub_rows else np.zeros((0, k))
    b_ub = np.array(lp.b_ub_rows)
    scale = max(1.0, float(np.max(np.abs(np.concatenate([b_eq, b_ub, start])))))

    constraints = [{'type': 'eq', 'fun': lambda y: a_eq @ y - b_eq / scale, 'jac': lambda y: a_eq}]
    if len(b_ub):
        constraints.append({'type': 'ineq', 'fun': lambda y: b_ub / scale - a_ub @ y,
                            'jac': lambda y: -a_ub})
    result = minimize(
        lambda y: float(y @ y), start / scale, jac=lambda y: 2 * y,
        constraints=constraints, method='SLSQP', options={'ftol': 1e-14, 'maxiter': 500},
    )
    if not result.success:
        logger.warning("QP | SLSQP did not converge: %s", result.message)
    return result.x * scale


def _round_entries(report: AggregateReport, pairs: Sequence[Pair], x: np.ndarray,
                   constraints: ReconstructionConstraints) -> Tuple[BalanceMatrix, bool]:
    n = report.n
    rows = [[0] * n for _ in range(n)]
    exact = True
    for (i, j), value in zip(pairs, x):
        v = constraints.fixed.get((i, j))
        if v is None:
            v = int(round(float(value)))
            exact = exact and abs(float(value) - v) < 1e-6
        rows[i][j], rows[j][i] = v, -v
    if _repair_row_sums(rows, report.balances, constraints.fixed.keys()):
        logger.warning("REPAIR | row sums restored after rounding")
    return BalanceMatrix(report.labels, tuple(tuple(r) for r in rows)), exact


def _objective_value(matrix: BalanceMatrix, objective: str) -> int:
    if objective == MIN_L1:
        return sum(abs(v) for v in matrix.upper())
    if objective == MIN_FROBENIUS:
        return 2 * sum(v * v for v in matrix.upper())
    return 0


def constrained_reconstruct(report: AggregateReport,
                            constraints: Optional[ReconstructionConstraints] = None,
                            canonical: bool = True,
                            tolerance: float = DEFAULT_LP_TOLERANCE) -> Reconstruction:
    """A matrix reproducing ``report`` under ``constraints``.

    min_l1 minimises sum |T_ij| over i < j; with ``canonical`` ties are broken
    towards the lexicographically smallest upper triangle. min_frobenius_norm
    uses the closed form when unconstrained. Raises InfeasibleReconstruction
    with a certificate when the constraints cannot be met.
    """
    _require_feasible(report)
    constraints = constraints or ReconstructionConstraints()
    issues = constraints.violations()
    if issues:
        raise ConstraintError("; ".join(issues))
    for (i, j) in itertools.chain(constraints.lower, constraints.upper, constraints.fixed):
        if not (0 <= i < report.n and 0 <= j < report.n):
            raise ConstraintError(f"constraint on T({i + 1},{j + 1}) outside {report.n} participants")

    objective = constraints.objective
    null_dim = solution_space_dim(report.n)

    if objective == MIN_FROBENIUS and constraints.is_empty():
        matrix, exact = to_integer_matrix(min_norm_reconstruct(report), report.balances)
        return Reconstruction(matrix, objective, _objective_value(matrix, objective), null_dim, exact)

    conditions = constraints.conditions()
    lp = _LinearProgram(report, conditions)
    cost = np.ones(2 * lp.k) if objective == MIN_L1 else np.zeros(2 * lp.k)
    result = lp.solve(cost)
    logger.debug("LP | objective=%s status=%d n=%d conditions=%d",
                 objective, result.status, report.n, len(conditions))
    if _is_infeasible(result):
        raise InfeasibleReconstruction(_certificate(report, conditions))
    if result.status != 0:
        raise InfeasibleReconstruction(InfeasibilityCertificate(tuple(conditions)))

    z = result.x
    if objective == MIN_L1 and canonical and lp.k > 0:
        refined = _lexicographic_refine(lp, float(result.fun), tolerance)
        if refined is not None:
            z = refined
    x = lp.entries(z)
    if objective == MIN_FROBENIUS:
        x = _least_norm_bounded(lp, x)

    matrix, exact = _round_entries(report, lp.pairs, x, constraints)
    return Reconstruction(matrix, objective, _objective_value(matrix, objective), null_dim, exact)


def reconstruct_batch(reports: Sequence[AggregateReport],
                      constraints: Optional[ReconstructionConstraints] = None,
                      workers: int = 1) -> List[Reconstruction]:
    """Reconstruct many reports; results come back in input order."""
    if workers <= 1:
        return [constrained_reconstruct(r, constraints) for r in reports]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda r: constrained_reconstruct(r, constraints), reports))


# -- enumeration -------------------------------------------------------------

def enumerate_integer_solutions(report: AggregateReport, bound: Money,
                                quantum: Money = DEFAULT_QUANTUM,
                                budget: int = DEFAULT_BUDGET) -> List[BalanceMatrix]:
    """Every matrix with entries in quantum steps within +-bound matching the report.

    The entries T(j, k) with 1 <= j < k are free; row j then fixes T(j, 0).
    Results are sorted by their upper triangle.
    """
    n = report.n
    if n > MAX_ENUMERATION_N:
        raise ValueError(f"Enumeration supports at most {MAX_ENUMERATION_N} participants, got {n}")
    if n < 2:
        raise ValueError(f"Need at least 2 participants, got {n}")
    if bound < 0:
        raise ValueError(f"bound must be >= 0, got {bound}")
    if quantum <= 0:
        raise ValueError(f"quantum must be positive, got {quantum}")
    if not feasible(report):
        return []

    steps = bound // quantum
    free = [(j, k) for j in range(1, n) for k in range(j + 1, n)]
    estimate = (2 * steps + 1) ** len(free)
    if estimate > budget:
        raise EnumerationBudgetError(estimate, budget)

    grid = [s * quantum for s in range(-steps, steps + 1)]
    solutions = []
    for values in itertools.product(grid, repeat=len(free)):
        rows = [[0] * n for _ in range(n)]
        for (j, k), v in zip(free, values):
            rows[j][k], rows[k][j] = v, -v
        ok = True
        for j in range(1, n):
            t_j0 = report.balances[j] - sum(rows[j])
            if abs(t_j0) > bound or t_j0 % quantum:
                ok = False
                break
            rows[j][0], rows[0][j] = t_j0, -t_j0
        if ok:
            solutions.append(BalanceMatrix(report.labels, tuple(tuple(r) for r in rows)))
    solutions.sort(key=lambda m: m.upper())
    logger.debug("ENUMERATE | n=%d candidates=%d solutions=%d", n, estimate, len(solutions))
    return solutions
