"""Tests for love-letter capacity, timelines and rule dilution."""

from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from target_ledger.collateral import (
    AMEND, BORROW, DEFAULT, LOVE_LETTER, PROHIBIT, REPAY, DebtCeiling, DilutionEvent,
    HaircutSchedule, Holding, LoveLetterNetwork, TimelineEvent, apply_dilution, ceiling_breached,
    collateral_capacity, dilution_path, love_letter_capacity, love_letter_default,
    luxembourg_2008_schedule, network_violations, relax_ceiling, replay_love_letter_timeline,
)
from target_ledger.errors import StrategemError
from target_ledger.utils import billions


@pytest.fixture
def twin_banks():
    """Two banks each holding 2.5bn of the other's IOUs."""
    return LoveLetterNetwork(
        banks=('KA', 'LA'),
        cross_holdings=(
            Holding('KA', 'LA', billions('2.5')),
            Holding('LA', 'KA', billions('2.5')),
        ),
    )


def test_capacity_without_haircut(twin_banks):
    capacity = love_letter_capacity(twin_banks, HaircutSchedule.of({LOVE_LETTER: 0}))

    assert capacity == {'KA': billions('2.5'), 'LA': billions('2.5')}


def test_full_haircut_means_no_capacity(twin_banks):
    capacity = love_letter_capacity(twin_banks, HaircutSchedule.of({LOVE_LETTER: 1}))

    assert capacity == {'KA': 0, 'LA': 0}


def test_capacity_with_haircut():
    """4.5bn face at a 20 % haircut lends 3.6bn."""
    net = LoveLetterNetwork(('KA', 'LA'), (Holding('LA', 'KA', billions('4.5')),))

    capacity = love_letter_capacity(net, HaircutSchedule.of({LOVE_LETTER: Fraction(1, 5)}))

    assert capacity['KA'] == billions('3.6')


def test_ineligible_class_counts_zero(twin_banks):
    assert love_letter_capacity(twin_banks, HaircutSchedule.of({'sovereign': 0})) == {'KA': 0, 'LA': 0}


def test_prohibition_zeroes_cross_issued(twin_banks):
    """After the prohibition day cross-issued IOUs stop counting; outside issuers still count."""
    net = LoveLetterNetwork(
        twin_banks.banks,
        twin_banks.cross_holdings + (Holding('GOV', 'KA', 100, 'sovereign'),),
        prohibited_after=212,
    )
    hs = HaircutSchedule.of({LOVE_LETTER: 0, 'sovereign': 0})

    assert love_letter_capacity(net, hs, day=200)['KA'] == billions('2.5') + 100
    assert love_letter_capacity(net, hs, day=213) == {'KA': 100, 'LA': 0}
    assert love_letter_capacity(net, hs) == {'KA': 100, 'LA': 0}
    assert collateral_capacity(net, hs)['KA'] == billions('2.5') + 100


def test_network_violations_after_prohibition(twin_banks):
    net = LoveLetterNetwork(twin_banks.banks, twin_banks.cross_holdings,
                            pledged={'KA': billions(2)}, prohibited_after=0)
    hs = HaircutSchedule.of({LOVE_LETTER: 0})

    assert network_violations(net, hs, day=0) == []
    assert len(network_violations(net, hs)) == 1


def test_holder_must_be_in_network():
    with pytest.raises(StrategemError, match='not a bank'):
        LoveLetterNetwork(('KA',), (Holding('KA', 'ZZ', 5),))


@pytest.mark.parametrize('pledged, recovery, expected', [
    (billions('3.5'), 0, billions('3.5')),
    (billions('3.5'), 1, 0),
    (billions('4.5'), Fraction(1, 5), billions('3.6')),
])
def test_love_letter_default(pledged, recovery, expected):
    net = LoveLetterNetwork(('KA',), pledged={'KA': pledged})

    assert love_letter_default(net, recovery) == expected


def test_recovery_out_of_range():
    with pytest.raises(StrategemError, match='recovery'):
        love_letter_default(LoveLetterNetwork(('KA',)), Fraction(3, 2))


def test_luxembourg_timeline():
    """2.5bn, 4.5bn, 3.5bn and a full loss at the autumn default."""
    timeline = replay_love_letter_timeline(luxembourg_2008_schedule())

    assert timeline.exposures == (billions('2.5'), billions('4.5'), billions('3.5'))
    assert timeline.loss == billions('3.5')
    assert timeline.default_day == 280


def test_empty_timeline():
    timeline = replay_love_letter_timeline([])

    assert timeline.points == ()
    assert timeline.loss == 0
    assert timeline.terminal_exposure == 0


def test_full_unwind_has_no_loss():
    timeline = replay_love_letter_timeline([
        TimelineEvent(1, BORROW, billions(1)),
        TimelineEvent(2, REPAY, billions(1)),
        TimelineEvent(3, DEFAULT),
    ])

    assert timeline.terminal_exposure == 0
    assert timeline.loss == 0


def test_default_recovery_override():
    timeline = replay_love_letter_timeline([
        TimelineEvent(1, BORROW, 100),
        TimelineEvent(2, DEFAULT, recovery=Fraction(1, 4)),
    ])

    assert timeline.loss == 75


@pytest.mark.parametrize('schedule, message', [
    ([TimelineEvent(5, BORROW, 1), TimelineEvent(4, BORROW, 1)], 'precedes'),
    ([TimelineEvent(1, BORROW, 5), TimelineEvent(2, PROHIBIT, 1), TimelineEvent(3, BORROW, 1)], 'prohibited'),
    ([TimelineEvent(1, DEFAULT), TimelineEvent(2, BORROW, 1)], 'after default'),
    ([TimelineEvent(1, BORROW, 5), TimelineEvent(2, REPAY, 6)], 'exceeds'),
])
def test_timeline_rejects_bad_schedules(schedule, message):
    with pytest.raises(StrategemError, match=message):
        replay_love_letter_timeline(schedule)


def test_admitting_fallen_angels_widens_eligibility():
    """New class at 30 % haircut: eligible, capacities weakly increase."""
    net = LoveLetterNetwork(('A', 'B'), (
        Holding('X', 'A', 1000, 'sovereign'),
        Holding('Y', 'B', 1000, 'fallen_angel'),
    ))
    hs = HaircutSchedule.of({'sovereign': Fraction(1, 10)})

    report = dilution_path(net, hs, [DilutionEvent('fallen_angel', Fraction(3, 10))])

    assert 'fallen_angel' in report.schedules[-1].eligibility
    assert report.monotone
    assert report.capacities[-1] == {'A': 900, 'B': 700}


def test_lowering_haircut_raises_capacity():
    """Face 100: haircut 0.2 -> 0.1 lifts capacity 80 -> 90."""
    net = LoveLetterNetwork(('A',), (Holding('X', 'A', 100, 'sovereign'),))
    hs = HaircutSchedule.of({'sovereign': Fraction(1, 5)})

    report = dilution_path(net, hs, [DilutionEvent('sovereign', Fraction(1, 10))])

    assert [c['A'] for c in report.capacities] == [80, 90]


def test_dilution_on_unheld_class_changes_nothing():
    net = LoveLetterNetwork(('A',), (Holding('X', 'A', 100, 'sovereign'),))
    hs = HaircutSchedule.of({'sovereign': Fraction(1, 5)})

    report = dilution_path(net, hs, [DilutionEvent('covered', Fraction(1, 2))])

    assert report.capacities[0] == report.capacities[1]


def test_dilution_mode_refuses_tightening():
    hs = HaircutSchedule.of({'sovereign': Fraction(1, 10)})

    with pytest.raises(StrategemError, match='amend'):
        apply_dilution(hs, DilutionEvent('sovereign', Fraction(1, 2)))
    with pytest.raises(StrategemError, match='amend'):
        apply_dilution(hs, DilutionEvent('sovereign', None))


def test_amend_mode_flags_capacity_decrease():
    net = LoveLetterNetwork(('A',), (Holding('X', 'A', 100, 'sovereign'),))
    hs = HaircutSchedule.of({'sovereign': Fraction(1, 10)})

    report = dilution_path(net, hs, [DilutionEvent('sovereign', None)], mode=AMEND)

    assert not report.monotone
    assert report.decreases[0].before == 90
    assert report.decreases[0].after == 0


@settings(max_examples=50, deadline=None)
@given(
    st.lists(st.integers(0, 10**12), min_size=1, max_size=4),
    st.lists(st.tuples(st.sampled_from(['sov', 'corp', 'abs', 'll']),
                       st.fractions(min_value=0, max_value=1, max_denominator=100)),
             max_size=6),
)
def test_dilution_never_lowers_capacity(faces, events):
    """Any sequence accepted in dilution mode keeps every capacity weakly increasing."""
    classes = ['sov', 'corp', 'abs', 'll']
    net = LoveLetterNetwork(('A', 'B'), tuple(
        Holding('X', 'AB'[k % 2], face, classes[k % 4]) for k, face in enumerate(faces)))
    hs = HaircutSchedule.of({'sov': Fraction(1, 2)})
    accepted = []
    for cls, haircut in events:
        try:
            hs = apply_dilution(hs, DilutionEvent(cls, haircut))
        except StrategemError:
            continue
        accepted.append(DilutionEvent(cls, haircut))

    report = dilution_path(net, HaircutSchedule.of({'sov': Fraction(1, 2)}), accepted)

    assert report.monotone


def test_debt_ceiling():
    """60 % by default; dilution only relaxes it."""
    assert not ceiling_breached(60, 100)
    assert ceiling_breached(61, 100)

    relaxed = relax_ceiling(DebtCeiling(), Fraction(9, 10))
    assert not ceiling_breached(90, 100, relaxed)

    with pytest.raises(StrategemError, match='amend'):
        relax_ceiling(relaxed, Fraction(1, 2))
    assert relax_ceiling(relaxed, Fraction(1, 2), AMEND).limit == Fraction(1, 2)


def test_validate_rejects_pledges_beyond_capacity(twin_banks):
    """5bn pledged against 2.5bn of IOUs does not fit; 2.5bn does."""
    hs = HaircutSchedule.of({LOVE_LETTER: 0})
    over = LoveLetterNetwork(twin_banks.banks, twin_banks.cross_holdings, pledged={'KA': billions(5)})
    fits = LoveLetterNetwork(twin_banks.banks, twin_banks.cross_holdings, pledged={'KA': billions('2.5')})

    with pytest.raises(StrategemError, match='KA: pledged'):
        over.validate(hs)
    fits.validate(hs)


def test_default_checks_pledges_when_given_haircuts(twin_banks):
    hs = HaircutSchedule.of({LOVE_LETTER: Fraction(1, 5)})
    net = LoveLetterNetwork(twin_banks.banks, twin_banks.cross_holdings, pledged={'KA': billions('2.5')})

    assert love_letter_default(net) == billions('2.5')
    with pytest.raises(StrategemError, match='exceeds capacity'):
        love_letter_default(net, hs=hs)


def test_default_validates_on_the_prohibition_day(twin_banks):
    """Pledges made while love letters counted stay valid at the later default."""
    net = LoveLetterNetwork(twin_banks.banks, twin_banks.cross_holdings,
                            pledged={'KA': billions(2)}, prohibited_after=212)
    hs = HaircutSchedule.of({LOVE_LETTER: 0})

    assert network_violations(net, hs) != []
    assert love_letter_default(net, hs=hs) == billions(2)
