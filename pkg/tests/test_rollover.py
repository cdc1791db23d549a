"""Tests for perpetual debt rollover."""

import math
from fractions import Fraction

import pytest

from target_ledger.errors import StrategemError
from target_ledger.rollover import rollover_is_log_linear, simulate_rollover


def test_zero_rates_are_constant():
    path = simulate_rollover(100, 0, 0, 5)

    assert [p.nominal for p in path.series] == [100] * 6
    assert [p.real for p in path.series] == [100] * 6


def test_compound_interest_two_periods():
    path = simulate_rollover(100, Fraction('0.05'), 0, 2)

    assert path.series[-1].nominal == Fraction('110.25')


def test_cents_rendering_half_even():
    """10000 cents at 5 % for two periods is 11025 cents."""
    path = simulate_rollover(10000, Fraction('0.05'), 0, 2)

    assert path.nominal_cents() == (10000, 10500, 11025)
    assert simulate_rollover(1, Fraction(1, 2), 0, 1).nominal_cents() == (1, 2)
    assert simulate_rollover(5, Fraction(1, 2), 0, 1).nominal_cents() == (5, 8)


def test_fifty_periods_against_iterative_oracle():
    """Closed form vs. a step-by-step float multiply, within 1e-12 relative."""
    path = simulate_rollover(100, Fraction('0.03'), Fraction('0.02'), 50)

    nominal, real = 100.0, 100.0
    for point in path.series[1:]:
        nominal *= 1.03
        real /= 1.02
        assert math.isclose(float(point.nominal), nominal, rel_tol=1e-12)
        assert math.isclose(float(point.real), real, rel_tol=1e-12)
    assert rollover_is_log_linear(path)


def test_zero_principal_is_not_log_linear():
    assert not rollover_is_log_linear(simulate_rollover(0, Fraction('0.05'), 0, 3))


@pytest.mark.parametrize('args', [
    (-1, 0, 0, 1),
    (100, -1, 0, 1),
    (100, 0, -1, 1),
    (100, 0, 0, -1),
])
def test_invalid_inputs(args):
    with pytest.raises(StrategemError):
        simulate_rollover(*args)
