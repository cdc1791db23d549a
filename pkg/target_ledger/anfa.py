"""Own-account asset purchases under the Agreement on Net Financial Assets."""

import logging
from dataclasses import dataclass, replace
from typing import List, Sequence

from .errors import StrategemError
from .utils import Money

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class AnfaAccount:
    """NCB holdings bought with created money, against an agreed ceiling.

    ``breached`` only ever turns on: sales are not modelled.
    """

    ncb: str
    own_assets: Money = 0
    ceiling: Money = 0
    breached: bool = False

    def __post_init__(self):
        if self.own_assets < 0:
            raise StrategemError(f"own assets must be >= 0, got {self.own_assets}")
        if self.ceiling < 0:
            raise StrategemError(f"ceiling must be >= 0, got {self.ceiling}")

    @property
    def headroom(self) -> Money:
        return self.ceiling - self.own_assets


def anfa_purchase(acct: AnfaAccount, amount: Money) -> AnfaAccount:
    """Record a purchase; crossing the ceiling is flagged, never refused."""
    if amount <= 0:
        raise StrategemError(f"purchase amount must be positive, got {amount}")
    own = acct.own_assets + amount
    breached = acct.breached or own > acct.ceiling
    if breached and not acct.breached:
        logger.warning("ANFA | %s exceeds ceiling %d with %d", acct.ncb, acct.ceiling, own)
    return replace(acct, own_assets=own, breached=breached)


def anfa_replay(acct: AnfaAccount, purchases: Sequence[Money]) -> List[AnfaAccount]:
    """Account state after each purchase, in order."""
    path = []
    for amount in purchases:
        acct = anfa_purchase(acct, amount)
        path.append(acct)
    return path
