"""Emergency Liquidity Assistance under the Governing Council blocking rule."""

import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import List, NamedTuple

from .errors import StrategemError
from .ledger import Payment
from .utils import Money, render_fraction

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class Council:
    """Unweighted vote: one member, one vote."""

    members: int
    against: int = 0

    def __post_init__(self):
        if self.members <= 0:
            raise StrategemError(f"council needs at least one member, got {self.members}")
        if not 0 <= self.against <= self.members:
            raise StrategemError(f"votes against must be in [0, {self.members}], got {self.against}")

    @property
    def supporters(self) -> int:
        return self.members - self.against


def blocking_threshold(members: int) -> int:
    """Smallest two-thirds majority: ceil(2 * members / 3)."""
    return -(-2 * members // 3)


def ela_blocked(c: Council) -> bool:
    return c.against >= blocking_threshold(c.members)


def min_unblockable_support(members: int) -> int:
    """Fewest supporters that make a blocking majority impossible."""
    return members - blocking_threshold(members) + 1


def bloc_guarantees_ela(members: int, bloc: int) -> bool:
    """Whether a bloc voting as one can always keep ELA flowing."""
    return bloc >= min_unblockable_support(members)


@dataclass(frozen=True)
class ElaPosition:
    ncb: str
    outstanding: Money
    nominal_gdp: Money

    def __post_init__(self):
        if self.outstanding < 0:
            raise StrategemError(f"outstanding ELA must be >= 0, got {self.outstanding}")
        if self.nominal_gdp <= 0:
            raise StrategemError(f"nominal GDP must be positive, got {self.nominal_gdp}")


class ElaOutcome(NamedTuple):
    position: ElaPosition
    blocked: bool


def ela_issue(pos: ElaPosition, amount: Money, c: Council) -> ElaOutcome:
    """Lend ``amount`` unless the council blocks; there is no upper cap."""
    if amount <= 0:
        raise StrategemError(f"ELA amount must be positive, got {amount}")
    if ela_blocked(c):
        logger.warning("ELA | %s request of %d blocked (%d of %d against)",
                       pos.ncb, amount, c.against, c.members)
        return ElaOutcome(pos, True)
    return ElaOutcome(replace(pos, outstanding=pos.outstanding + amount), False)


def ela_gdp_ratio(pos: ElaPosition) -> Fraction:
    if pos.nominal_gdp <= 0:
        raise StrategemError("nominal GDP must be positive")
    return Fraction(pos.outstanding, pos.nominal_gdp)


def format_ratio(ratio: Fraction) -> str:
    """Four decimals, half-to-even: 71/100 -> '0.7100'."""
    return render_fraction(ratio, 4)


def ela_capital_flight(pos: ElaPosition, amount: Money, share: Fraction,
                       payer: int, destination: int, day: int = 0) -> List[Payment]:
    """Payments that move ``share`` of freshly issued ELA money abroad.

    Feeding these into the netting raises the issuing NCB's TARGET
    liability; the coupling is optional and off unless a scenario asks.
    """
    share = Fraction(share)
    if not 0 <= share <= 1:
        raise StrategemError(f"capital flight share must be in [0, 1], got {share}")
    moved = int(amount * share)
    if moved <= 0:
        return []
    logger.debug("ELA | %s capital flight %d on day %d", pos.ncb, moved, day)
    return [Payment(payer=payer, payee=destination, amount=moved, day=day)]
