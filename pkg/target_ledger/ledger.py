"""Bilateral TARGET balance matrix, payment booking and end-of-day netting.

Entry (i, j) of a ``BalanceMatrix`` is the claim of participant i on
participant j in cents. The matrix is skew-symmetric with a zero diagonal, so
the per-participant aggregates (row sums) always add up to exactly zero.
Snapshots are immutable; every operation returns a new value.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, List, NamedTuple, Optional, Sequence, Tuple, Union

from .errors import MatrixError, PaymentError
from .participants import ParticipantSet
from .utils import Money, billions

logger = logging.getLogger(__name__)

Labels = Union[ParticipantSet, Sequence[str]]


def _labels(participants: Labels) -> Tuple[str, ...]:
    if isinstance(participants, ParticipantSet):
        return participants.labels
    return ParticipantSet(participants).labels


@dataclass(frozen=True)
class Payment:
    """A cross-border transfer of central bank money from payer to payee."""

    payer: int
    payee: int
    amount: Money
    day: int = 0


class Violation(NamedTuple):
    kind: str  # 'diagonal' or 'antisymmetry'
    i: int
    j: int
    detail: str

    def __str__(self) -> str:
        return f"{self.kind} at ({self.i},{self.j}): {self.detail}"


@dataclass(frozen=True)
class BalanceMatrix:
    labels: Tuple[str, ...]
    entries: Tuple[Tuple[Money, ...], ...]

    def __post_init__(self):
        n = len(self.labels)
        if len(self.entries) != n or any(len(row) != n for row in self.entries):
            raise MatrixError([Violation('shape', n, n, f"expected {n}x{n} entries")])

    @classmethod
    def zeros(cls, participants: Labels) -> 'BalanceMatrix':
        labels = _labels(participants)
        n = len(labels)
        return cls(labels, tuple((0,) * n for _ in range(n)))

    @classmethod
    def from_rows(cls, participants: Labels, rows: Iterable[Iterable[int]]) -> 'BalanceMatrix':
        return cls(_labels(participants), tuple(tuple(int(v) for v in row) for row in rows))

    @classmethod
    def from_upper(cls, participants: Labels, upper: Sequence[int]) -> 'BalanceMatrix':
        """Build from the strict upper triangle, row-major: T12, T13, ..., T23, ..."""
        labels = _labels(participants)
        n = len(labels)
        if len(upper) != n * (n - 1) // 2:
            raise ValueError(f"Expected {n * (n - 1) // 2} upper entries, got {len(upper)}")
        rows = [[0] * n for _ in range(n)]
        k = 0
        for i in range(n):
            for j in range(i + 1, n):
                rows[i][j] = int(upper[k])
                rows[j][i] = -int(upper[k])
                k += 1
        return cls(labels, tuple(tuple(r) for r in rows))

    @property
    def n(self) -> int:
        return len(self.labels)

    def entry(self, i: int, j: int) -> Money:
        return self.entries[i][j]

    def upper(self) -> Tuple[Money, ...]:
        """Strict upper triangle, row-major."""
        n = self.n
        return tuple(self.entries[i][j] for i in range(n) for j in range(i + 1, n))

    def row_sums(self) -> Tuple[Money, ...]:
        return tuple(sum(row) for row in self.entries)

    def is_zero(self) -> bool:
        return all(v == 0 for row in self.entries for v in row)

    def __add__(self, other: 'BalanceMatrix') -> 'BalanceMatrix':
        if other.labels != self.labels:
            raise ValueError("Cannot add matrices over different participants")
        return BalanceMatrix(self.labels, tuple(
            tuple(a + b for a, b in zip(r1, r2)) for r1, r2 in zip(self.entries, other.entries)
        ))

    def scale(self, k: int) -> 'BalanceMatrix':
        return BalanceMatrix(self.labels, tuple(tuple(k * v for v in row) for row in self.entries))

    def permute(self, order: Sequence[int]) -> 'BalanceMatrix':
        """Relabel so that new participant p is old participant order[p]."""
        if sorted(order) != list(range(self.n)):
            raise ValueError(f"Not a permutation of 0..{self.n - 1}: {list(order)}")
        return BalanceMatrix(
            tuple(self.labels[o] for o in order),
            tuple(tuple(self.entries[a][b] for b in order) for a in order),
        )


@dataclass(frozen=True)
class AggregateReport:
    """Published per-participant net balances for one day."""

    labels: Tuple[str, ...]
    balances: Tuple[Money, ...]
    day: int = 0

    def __post_init__(self):
        if len(self.labels) != len(self.balances):
            raise ValueError("Aggregate report needs one balance per participant")

    @classmethod
    def of(cls, participants: Labels, balances: Iterable[int], day: int = 0) -> 'AggregateReport':
        return cls(_labels(participants), tuple(int(b) for b in balances), day)

    @property
    def n(self) -> int:
        return len(self.balances)

    @property
    def total(self) -> Money:
        return sum(self.balances)

    def balance(self, label: str) -> Money:
        return self.balances[self.labels.index(label)]

    def scale(self, k: int) -> 'AggregateReport':
        return AggregateReport(self.labels, tuple(k * b for b in self.balances), self.day)


def validate_payment(p: Payment, n: int, position: Optional[int] = None) -> None:
    """Raise PaymentError unless the payment can be booked among n participants."""
    if not (0 <= p.payer < n and 0 <= p.payee < n):
        raise PaymentError(f"participant id out of range [0, {n}): {p.payer} -> {p.payee}",
                           p, position)
    if p.payer == p.payee:
        raise PaymentError(f"payer and payee are identical ({p.payer})", p, position)
    if p.amount <= 0:
        raise PaymentError(f"amount must be positive, got {p.amount}", p, position)
    if p.day < 0:
        raise PaymentError(f"day must be >= 0, got {p.day}", p, position)


def record_payment(ledger: BalanceMatrix, p: Payment) -> BalanceMatrix:
    """Book one payment: the payee gains a claim on the payer."""
    validate_payment(p, ledger.n)
    rows = [list(row) for row in ledger.entries]
    rows[p.payee][p.payer] += p.amount
    rows[p.payer][p.payee] -= p.amount
    return BalanceMatrix(ledger.labels, tuple(tuple(r) for r in rows))


def validate_matrix(m: BalanceMatrix) -> List[Violation]:
    """All diagonal and antisymmetry violations; empty when the matrix is valid."""
    violations = []
    n = m.n
    for i in range(n):
        if m.entries[i][i] != 0:
            violations.append(Violation('diagonal', i, i, f"entry is {m.entries[i][i]}, expected 0"))
    for i in range(n):
        for j in range(i + 1, n):
            if m.entries[i][j] != -m.entries[j][i]:
                violations.append(Violation(
                    'antisymmetry', i, j,
                    f"({i},{j})={m.entries[i][j]} but ({j},{i})={m.entries[j][i]}",
                ))
    return violations


def aggregate(m: BalanceMatrix, day: int = 0) -> AggregateReport:
    """Net every participant's bilateral positions into a single balance."""
    violations = validate_matrix(m)
    if violations:
        raise MatrixError(violations)
    return AggregateReport(m.labels, m.row_sums(), day)


def end_of_day_netting(payments: Sequence[Payment], day: int, participants: Labels,
                       prior: Optional[BalanceMatrix] = None
                       ) -> Tuple[BalanceMatrix, AggregateReport]:
    """Fold a day's payments into the matrix and publish the aggregates.

    Starts from ``prior`` when a running ledger is kept, otherwise from zero.
    """
    labels = _labels(participants)
    start = prior if prior is not None else BalanceMatrix.zeros(labels)
    if start.labels != labels:
        raise ValueError("Prior matrix is over a different participant set")
    n = len(labels)

    # Mutable accumulator; equivalent to folding record_payment
    rows = [list(row) for row in start.entries]
    for position, p in enumerate(payments):
        validate_payment(p, n, position)
        if p.day != day:
            raise PaymentError(f"payment dated day {p.day}, netting day {day}", p, position)
        rows[p.payee][p.payer] += p.amount
        rows[p.payer][p.payee] -= p.amount

    matrix = BalanceMatrix(labels, tuple(tuple(r) for r in rows))
    report = aggregate(matrix, day)
    logger.debug("NETTING | day=%d payments=%d participants=%d", day, len(payments), n)
    return matrix, report


def degrees_of_freedom(n: int) -> Tuple[int, int]:
    """(independent bilateral balances, independent published aggregates)."""
    if n < 2:
        raise ValueError(f"Need at least 2 participants, got {n}")
    return n * (n - 1) // 2, n - 1


@dataclass
class RunningLedger:
    """Single writer advancing the ledger day by day.

    Cumulative by default: each day's netting starts from the previous
    closing matrix. With ``cumulative=False`` every day starts from zero.
    """

    participants: ParticipantSet
    cumulative: bool = True
    current: Optional[BalanceMatrix] = None
    history: List[AggregateReport] = field(default_factory=list)

    def __post_init__(self):
        if self.current is None:
            self.current = BalanceMatrix.zeros(self.participants)

    @property
    def last_day(self) -> Optional[int]:
        return self.history[-1].day if self.history else None

    def close_day(self, payments: Sequence[Payment], day: int) -> Tuple[BalanceMatrix, AggregateReport]:
        if self.last_day is not None and day <= self.last_day:
            raise ValueError(f"Day {day} already closed (last closed day {self.last_day})")
        prior = self.current if self.cumulative else None
        matrix, report = end_of_day_netting(payments, day, self.participants, prior)
        self.current = matrix
        self.history.append(report)
        return matrix, report

    def run(self, payments: Iterable[Payment]) -> List[AggregateReport]:
        """Close every day present in ``payments`` in ascending order."""
        by_day = {}
        for p in payments:
            by_day.setdefault(p.day, []).append(p)
        return [self.close_day(by_day[day], day)[1] for day in sorted(by_day)]


def three_cycle(participants: Labels, i: int, j: int, k: int, x: Money) -> BalanceMatrix:
    """Circular claims i->j->k->i of size x: every row sums to zero."""
    labels = _labels(participants)
    if len({i, j, k}) != 3:
        raise ValueError("A 3-cycle needs three distinct participants")
    rows = [[0] * len(labels) for _ in labels]
    for a, b in ((i, j), (j, k), (k, i)):
        rows[a][b] += x
        rows[b][a] -= x
    return BalanceMatrix(labels, tuple(tuple(r) for r in rows))


def austria_scenario_one() -> Tuple[ParticipantSet, List[Payment]]:
    """AT lends 100 bn to IT and borrows 165 bn from DE: AT ends at -65 bn."""
    ps = ParticipantSet(['AT', 'IT', 'DE'])
    at, it, de = (ps.index_of(label) for label in ('AT', 'IT', 'DE'))
    return ps, [
        Payment(payer=it, payee=at, amount=billions(100)),
        Payment(payer=at, payee=de, amount=billions(165)),
    ]


def austria_scenario_two() -> Tuple[ParticipantSet, List[Payment]]:
    """AT borrows 30 bn from IT, lends 100 bn to DE, borrows 135 bn from FR."""
    ps = ParticipantSet(['AT', 'IT', 'DE', 'FR'])
    at, it, de, fr = (ps.index_of(label) for label in ('AT', 'IT', 'DE', 'FR'))
    return ps, [
        Payment(payer=at, payee=it, amount=billions(30)),
        Payment(payer=de, payee=at, amount=billions(100)),
        Payment(payer=at, payee=fr, amount=billions(135)),
    ]


class LossAllocation(NamedTuple):
    defaulting: str
    absorbed: Money
    unabsorbed: Money
    shares: Tuple[Tuple[str, Money], ...]


def allocate_default_loss(report: AggregateReport, defaulting: str,
                          absorbed_share: Fraction = Fraction(1)) -> LossAllocation:
    """Spread the absorbed part of a defaulted TARGET liability over creditors.

    Creditors carry the loss pro rata to their positive balances, rounded to
    cents by largest remainder (ties go to the lower index).
    """
    absorbed_share = Fraction(absorbed_share)
    if not 0 <= absorbed_share <= 1:
        raise ValueError(f"absorbed share must be in [0, 1], got {absorbed_share}")
    d = report.labels.index(defaulting) if defaulting in report.labels else None
    if d is None:
        raise ValueError(f"Unknown participant: {defaulting!r}")

    liability = max(0, -report.balances[d])
    absorbed = round(liability * absorbed_share)
    creditors = [(i, b) for i, b in enumerate(report.balances) if b > 0 and i != d]
    weight = sum(b for _, b in creditors)
    if absorbed == 0 or weight == 0:
        return LossAllocation(defaulting, 0, liability, ())

    exact = [(i, Fraction(absorbed * b, weight)) for i, b in creditors]
    floors = {i: int(share) for i, share in exact}
    leftover = absorbed - sum(floors.values())
    by_remainder = sorted(exact, key=lambda e: (-(e[1] - int(e[1])), e[0]))
    for i, _ in by_remainder[:leftover]:
        floors[i] += 1
    shares = tuple((report.labels[i], floors[i]) for i, _ in creditors)
    return LossAllocation(defaulting, absorbed, liability - absorbed, shares)
