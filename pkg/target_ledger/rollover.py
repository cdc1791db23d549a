"""Perpetual rollover of sovereign debt: compounding principal, eroding value."""

from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple, Tuple, Union

from .errors import StrategemError
from .utils import round_half_even

Rational = Union[int, Fraction]


class RolloverPoint(NamedTuple):
    t: int
    nominal: Fraction
    real: Fraction


@dataclass(frozen=True)
class RolloverPath:
    """Debt stock rolled over each period instead of being repaid.

    ``nominal`` is what is owed at period t, ``real`` is the original
    principal expressed in period-0 money after t periods of inflation.
    """

    initial_principal: Fraction
    nominal_rate: Fraction
    inflation: Fraction
    horizon: int
    series: Tuple[RolloverPoint, ...]

    def nominal_cents(self) -> Tuple[int, ...]:
        return tuple(round_half_even(p.nominal) for p in self.series)

    def real_cents(self) -> Tuple[int, ...]:
        return tuple(round_half_even(p.real) for p in self.series)


def simulate_rollover(initial_principal: Rational, nominal_rate: Rational,
                      inflation: Rational, horizon: int) -> RolloverPath:
    """nominal_t = D0 (1+r)^t and real_t = D0 / (1+pi)^t for t = 0..horizon, exactly."""
    d0 = Fraction(initial_principal)
    r = Fraction(nominal_rate)
    pi = Fraction(inflation)
    if d0 < 0:
        raise StrategemError(f"initial principal must be >= 0, got {d0}")
    if r < 0 or pi < 0:
        raise StrategemError("negative interest or inflation rates are not modelled")
    if horizon < 0:
        raise StrategemError(f"horizon must be >= 0, got {horizon}")

    growth = 1 + r
    erosion = 1 + pi
    series = tuple(
        RolloverPoint(t, d0 * growth ** t, d0 / erosion ** t) for t in range(horizon + 1)
    )
    return RolloverPath(d0, r, pi, horizon, series)


def rollover_is_log_linear(path: RolloverPath) -> bool:
    """Consecutive ratios are exactly 1+r (nominal) and 1/(1+pi) (real)."""
    if path.initial_principal == 0:
        return False
    growth = 1 + path.nominal_rate
    erosion = 1 + path.inflation
    pairs = zip(path.series, path.series[1:])
    return all(b.nominal / a.nominal == growth and a.real / b.real == erosion for a, b in pairs)
