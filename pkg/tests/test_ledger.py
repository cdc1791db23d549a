"""Tests for the balance matrix, netting and loss allocation."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from target_ledger.errors import MatrixError, PaymentError
from target_ledger.ledger import (
    AggregateReport, BalanceMatrix, Payment, RunningLedger, aggregate, allocate_default_loss,
    austria_scenario_two, degrees_of_freedom, end_of_day_netting,
    record_payment, three_cycle, validate_matrix,
)
from target_ledger.participants import default_participants
from target_ledger.utils import billions

LABELS5 = ['AT', 'BE', 'DE', 'ES', 'FR']
ALL_LABELS = default_participants(include_ecb=True, include_extra_euro_area=True).labels


@st.composite
def payment_streams(draw, max_size=60):
    """Labels for 2..22 participants and a payment stream among them."""
    n = draw(st.integers(min_value=2, max_value=len(ALL_LABELS)))
    size = draw(st.integers(min_value=0, max_value=max_size))
    payments = []
    for _ in range(size):
        payer = draw(st.integers(0, n - 1))
        payee = draw(st.integers(0, n - 2))
        payee += payee >= payer
        payments.append(Payment(payer, payee, draw(st.integers(1, 10**15))))
    return ALL_LABELS[:n], payments


@st.composite
def valid_matrices(draw, n=5):
    upper = draw(st.lists(st.integers(-10**15, 10**15), min_size=n * (n - 1) // 2,
                          max_size=n * (n - 1) // 2))
    return BalanceMatrix.from_upper(LABELS5[:n], upper)


def test_single_payment_booking():
    """Payee gains a claim on the payer."""
    m = record_payment(BalanceMatrix.zeros(['AT', 'DE']), Payment(payer=0, payee=1, amount=100))

    assert m.entry(1, 0) == 100
    assert m.entry(0, 1) == -100


def test_payment_and_reversal_cancel():
    """Paying back the same amount restores the zero matrix."""
    m = BalanceMatrix.zeros(['AT', 'DE'])
    m = record_payment(m, Payment(0, 1, 100))
    m = record_payment(m, Payment(1, 0, 100))

    assert m.is_zero()


def test_austria_scenario_one_row_sums(austria_matrix):
    """AT lends 100bn to IT and borrows 165bn from DE."""
    assert austria_matrix.entry(0, 1) == billions(100)
    assert austria_matrix.entry(2, 0) == billions(165)
    assert aggregate(austria_matrix).balances == (billions(-65), billions(-100), billions(165))


def test_austria_scenario_two_row_sums():
    """Different trades, same AT aggregate."""
    participants, payments = austria_scenario_two()
    _, report = end_of_day_netting(payments, 0, participants)

    assert report.balance('AT') == billions(-65)
    assert report.total == 0


@pytest.mark.parametrize('payment, message', [
    (Payment(0, 0, 10), 'identical'),
    (Payment(0, 1, 0), 'positive'),
    (Payment(0, 1, -5), 'positive'),
    (Payment(0, 7, 10), 'out of range'),
])
def test_invalid_payments_rejected(payment, message):
    """Self-payments, non-positive amounts and unknown ids raise PaymentError."""
    with pytest.raises(PaymentError, match=message):
        record_payment(BalanceMatrix.zeros(['AT', 'DE', 'IT']), payment)


def test_netting_error_names_position():
    """The offending payment's position in the stream is reported."""
    payments = [Payment(0, 1, 5), Payment(1, 2, 5), Payment(2, 2, 5)]

    with pytest.raises(PaymentError) as excinfo:
        end_of_day_netting(payments, 0, ['AT', 'DE', 'IT'])

    assert excinfo.value.position == 2
    assert 'payment #2' in str(excinfo.value)


def test_netting_rejects_other_days():
    """A payment dated another day is not folded in."""
    with pytest.raises(PaymentError, match='netting day 0'):
        end_of_day_netting([Payment(0, 1, 5, day=3)], 0, ['AT', 'DE'])


def test_validate_matrix_examples():
    """Zero matrix is clean; broken antisymmetry and diagonal are both named."""
    assert validate_matrix(BalanceMatrix.zeros(['A', 'B', 'C'])) == []

    asym = BalanceMatrix.from_rows(['A', 'B', 'C'], [[0, 5, 0], [5, 0, 0], [0, 0, 0]])
    violations = validate_matrix(asym)
    assert [(v.kind, v.i, v.j) for v in violations] == [('antisymmetry', 0, 1)]

    diag = BalanceMatrix.from_rows(['A', 'B', 'C'], [[0, 0, 0], [0, 0, 0], [0, 0, 1]])
    violations = validate_matrix(diag)
    assert [(v.kind, v.i, v.j) for v in violations] == [('diagonal', 2, 2)]


def test_aggregate_refuses_invalid_matrix():
    """Aggregating a broken matrix raises with the violation list."""
    bad = BalanceMatrix.from_rows(['A', 'B'], [[0, 5], [5, 0]])

    with pytest.raises(MatrixError) as excinfo:
        aggregate(bad)

    assert len(excinfo.value.violations) == 1


def test_empty_netting_is_zero():
    """No payments: zero matrix, zero report."""
    matrix, report = end_of_day_netting([], 0, ['A', 'B', 'C'])

    assert matrix.is_zero()
    assert report.balances == (0, 0, 0)


def test_random_netting_matches_payment_oracle():
    """1000 payments among 5: aggregates equal per-participant signed sums."""
    rng = random.Random(7)
    payments = []
    for _ in range(1000):
        payer, payee = rng.sample(range(5), 2)
        payments.append(Payment(payer, payee, rng.randint(1, 10**12)))

    _, report = end_of_day_netting(payments, 0, LABELS5)

    expected = [0] * 5
    for p in payments:
        expected[p.payee] += p.amount
        expected[p.payer] -= p.amount
    assert list(report.balances) == expected


def test_aggregate_matches_row_oracle():
    """Random valid n=6 matrix: re-sum every row independently."""
    rng = random.Random(11)
    labels = ['A', 'B', 'C', 'D', 'E', 'F']
    upper = [rng.randint(-10**14, 10**14) for _ in range(15)]
    m = BalanceMatrix.from_upper(labels, upper)

    report = aggregate(m)

    for i in range(6):
        total = 0
        for j in range(6):
            total = total + m.entries[i][j]
        assert report.balances[i] == total


@pytest.mark.parametrize('n, expected', [
    (2, (1, 1)),
    (20, (190, 19)),
    (21, (210, 20)),
    (22, (231, 21)),
])
def test_degrees_of_freedom(n, expected):
    """Bilateral vs. published counts."""
    assert degrees_of_freedom(n) == expected


def test_degrees_of_freedom_needs_two():
    with pytest.raises(ValueError):
        degrees_of_freedom(1)


def test_running_ledger_cumulative():
    """Cumulative mode carries yesterday's matrix forward."""
    ledger = RunningLedger(['A', 'B'])
    reports = ledger.run([Payment(0, 1, 10, day=0), Payment(0, 1, 5, day=2)])

    assert [r.day for r in reports] == [0, 2]
    assert reports[-1].balances == (-15, 15)


def test_running_ledger_per_day():
    """Per-day mode starts every day from zero."""
    ledger = RunningLedger(['A', 'B'], cumulative=False)
    reports = ledger.run([Payment(0, 1, 10, day=0), Payment(0, 1, 5, day=1)])

    assert reports[-1].balances == (-5, 5)


def test_running_ledger_rejects_closed_day():
    ledger = RunningLedger(['A', 'B'])
    ledger.close_day([], 3)

    with pytest.raises(ValueError, match='already closed'):
        ledger.close_day([], 3)


def test_three_cycle_is_invisible():
    """Circular claims leave every aggregate at zero."""
    cycle = three_cycle(LABELS5, 0, 2, 4, 1234)

    assert validate_matrix(cycle) == []
    assert aggregate(cycle).balances == (0, 0, 0, 0, 0)


def test_default_loss_pro_rata():
    """Creditors share the absorbed liability by balance; remainders go largest first."""
    report = AggregateReport.of(['GR', 'DE', 'NL', 'FR'], [-100, 50, 30, 20])

    loss = allocate_default_loss(report, 'GR')

    assert loss.absorbed == 100
    assert dict(loss.shares) == {'DE': 50, 'NL': 30, 'FR': 20}


def test_default_loss_rounding_and_partial_absorption():
    """Cents are never lost: shares sum to the absorbed amount."""
    report = AggregateReport.of(['GR', 'DE', 'NL', 'FR'], [-10, 3, 3, 4])

    loss = allocate_default_loss(report, 'GR', absorbed_share=0.5)

    assert loss.absorbed == 5
    assert loss.unabsorbed == 5
    assert sum(amount for _, amount in loss.shares) == 5


def test_default_loss_unknown_participant():
    with pytest.raises(ValueError, match='Unknown participant'):
        allocate_default_loss(AggregateReport.of(['A', 'B'], [1, -1]), 'ZZ')


@settings(max_examples=50, deadline=None)
@given(payment_streams())
def test_netting_conserves_zero_sum(stream):
    """Aggregates of any payment stream add up to exactly zero."""
    labels, payments = stream
    matrix, report = end_of_day_netting(payments, 0, labels)

    assert report.total == 0
    assert validate_matrix(matrix) == []


@settings(max_examples=50, deadline=None)
@given(payment_streams(max_size=20))
def test_skew_symmetry_after_every_payment(stream):
    """Each single booking keeps the matrix valid."""
    labels, payments = stream
    m = BalanceMatrix.zeros(labels)
    for p in payments:
        m = record_payment(m, p)
        assert validate_matrix(m) == []


@pytest.mark.slow
def test_ten_thousand_payments_among_twenty_two():
    """Full participant set, long seeded stream: valid after every booking, zero-sum at the end."""
    rng = random.Random(22)
    n = len(ALL_LABELS)
    m = BalanceMatrix.zeros(ALL_LABELS)
    expected = [0] * n
    for _ in range(10_000):
        payer, payee = rng.sample(range(n), 2)
        amount = rng.randint(1, 10**15)
        m = record_payment(m, Payment(payer, payee, amount))
        assert validate_matrix(m) == []
        expected[payee] += amount
        expected[payer] -= amount

    report = aggregate(m)
    assert report.total == 0
    assert list(report.balances) == expected


@settings(max_examples=50, deadline=None)
@given(valid_matrices(), valid_matrices(), st.integers(-1000, 1000))
def test_aggregation_is_linear(a, b, k):
    """agg(aA + B) = a agg(A) + agg(B)."""
    combined = aggregate(a.scale(k) + b).balances
    expected = tuple(k * x + y for x, y in zip(aggregate(a).balances, aggregate(b).balances))

    assert combined == expected


@settings(max_examples=50, deadline=None)
@given(valid_matrices(), st.permutations(range(5)))
def test_aggregation_is_permutation_equivariant(m, order):
    """Relabelling participants permutes the aggregates the same way."""
    base = aggregate(m).balances
    permuted = aggregate(m.permute(order)).balances

    assert permuted == tuple(base[o] for o in order)
