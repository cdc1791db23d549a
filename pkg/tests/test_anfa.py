"""Tests for ANFA ceiling tracking."""

import pytest

from target_ledger.anfa import AnfaAccount, anfa_purchase, anfa_replay
from target_ledger.errors import StrategemError
from target_ledger.utils import billions


def test_purchases_up_to_ceiling():
    """Reaching the 650bn ceiling exactly is not a breach; one more cent is."""
    acct = AnfaAccount('EA', ceiling=billions(650))
    path = anfa_replay(acct, [billions(400), billions(250)])

    assert path[-1].own_assets == billions(650)
    assert not path[-1].breached
    assert path[-1].headroom == 0

    assert anfa_purchase(path[-1], 1).breached


def test_zero_ceiling():
    assert anfa_purchase(AnfaAccount('IE', ceiling=0), 1).breached


def test_breach_flag_sticks():
    """Once set the flag never clears."""
    path = anfa_replay(AnfaAccount('IE', ceiling=10), [11, 1, 1])

    assert [a.breached for a in path] == [True, True, True]


def test_replay_is_per_purchase():
    path = anfa_replay(AnfaAccount('IE', own_assets=5, ceiling=20), [5, 5, 10])

    assert [a.own_assets for a in path] == [10, 15, 25]
    assert [a.breached for a in path] == [False, False, True]


def test_non_positive_purchase_rejected():
    with pytest.raises(StrategemError):
        anfa_purchase(AnfaAccount('IE', ceiling=10), 0)


def test_negative_ceiling_rejected():
    with pytest.raises(StrategemError):
        AnfaAccount('IE', ceiling=-1)
