"""Tests for the ELA blocking rule and issuance."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from target_ledger.ela import (
    Council, ElaPosition, blocking_threshold, bloc_guarantees_ela, ela_blocked,
    ela_capital_flight, ela_gdp_ratio, ela_issue, format_ratio, min_unblockable_support,
)
from target_ledger.errors import StrategemError
from target_ledger.ledger import end_of_day_netting


@pytest.mark.parametrize('members, against, blocked', [
    (23, 15, False),
    (23, 16, True),
    (3, 2, True),
    (3, 1, False),
    (1, 1, True),
])
def test_two_thirds_rule(members, against, blocked):
    assert ela_blocked(Council(members, against)) is blocked


def test_gipsic_with_two_allies():
    """Six governors plus two board members keep ELA flowing in a 23-seat council."""
    assert min_unblockable_support(23) == 8
    assert bloc_guarantees_ela(23, 8)
    assert not bloc_guarantees_ela(23, 7)


def test_threshold_consistency_up_to_one_hundred():
    """Support above a third is never blocked; blocked exactly below the minimum support."""
    for m in range(1, 101):
        for against in range(m + 1):
            c = Council(m, against)
            if 3 * c.supporters > m:
                assert not ela_blocked(c)
            assert ela_blocked(c) == (c.supporters < min_unblockable_support(m))


@settings(max_examples=100, deadline=None)
@given(st.integers(1, 500), st.data())
def test_blocking_is_monotone(members, data):
    """One more vote against never unblocks."""
    against = data.draw(st.integers(0, members - 1))

    if ela_blocked(Council(members, against)):
        assert ela_blocked(Council(members, against + 1))


def test_blocking_threshold_is_ceiling():
    assert blocking_threshold(23) == 16
    assert blocking_threshold(3) == 2
    assert blocking_threshold(4) == 3


def test_council_validation():
    with pytest.raises(StrategemError):
        Council(0)
    with pytest.raises(StrategemError):
        Council(5, 6)


def test_issue_reaches_seventy_one_percent():
    pos = ElaPosition('CY', 0, 100)

    outcome = ela_issue(pos, 71, Council(23, 0))

    assert not outcome.blocked
    assert ela_gdp_ratio(outcome.position) == Fraction(71, 100)
    assert format_ratio(ela_gdp_ratio(outcome.position)) == '0.7100'


def test_blocked_issue_leaves_position():
    pos = ElaPosition('CY', 50, 100)

    outcome = ela_issue(pos, 10, Council(23, 20))

    assert outcome.blocked
    assert outcome.position == pos


def test_issuance_has_no_cap():
    pos = ElaPosition('CY', 0, 100)
    for _ in range(10):
        pos = ela_issue(pos, 1000, Council(23)).position

    assert pos.outstanding == 10000
    assert ela_gdp_ratio(pos) == 100


@pytest.mark.parametrize('outstanding, gdp, shown', [
    (71, 100, '0.7100'),
    (0, 17, '0.0000'),
    (1, 3, '0.3333'),
])
def test_ratio_display(outstanding, gdp, shown):
    assert format_ratio(ela_gdp_ratio(ElaPosition('GR', outstanding, gdp))) == shown


def test_issue_rejects_non_positive():
    with pytest.raises(StrategemError):
        ela_issue(ElaPosition('GR', 0, 100), 0, Council(3))


def test_capital_flight_raises_target_liability():
    """Moving freshly created money abroad shows up as a TARGET liability."""
    pos = ElaPosition('GR', 0, 100)
    payments = ela_capital_flight(pos, 1000, Fraction(1, 2), payer=0, destination=1)

    _, report = end_of_day_netting(payments, 0, ['GR', 'DE'])

    assert report.balances == (-500, 500)


def test_capital_flight_zero_share():
    assert ela_capital_flight(ElaPosition('GR', 0, 100), 1000, 0, 0, 1) == []
