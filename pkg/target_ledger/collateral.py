"""Collateral capacity: reciprocal IOUs ("love letters") and rule dilution.

Capacity is what a central bank lends against pledged holdings: face value
times (1 - haircut) for eligible asset classes, floored to whole cents.
Cross-issued IOUs between the network's own banks stop counting once their
use has been prohibited.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Dict, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import StrategemError
from .utils import Money, billions

logger = logging.getLogger(__name__)

LOVE_LETTER = 'love_letter'

DILUTION = 'dilution'
AMEND = 'amend'


class Holding(NamedTuple):
    issuer: str
    holder: str
    face: Money
    asset_class: str = LOVE_LETTER


@dataclass(frozen=True)
class HaircutSchedule:
    eligibility: frozenset
    haircut: Mapping[str, Fraction]

    def __post_init__(self):
        object.__setattr__(self, 'eligibility', frozenset(self.eligibility))
        object.__setattr__(self, 'haircut', {k: Fraction(v) for k, v in self.haircut.items()})
        for cls, h in self.haircut.items():
            if not 0 <= h <= 1:
                raise StrategemError(f"haircut for {cls!r} must be in [0, 1], got {h}")
        missing = sorted(self.eligibility - set(self.haircut))
        if missing:
            raise StrategemError(f"eligible classes without haircut: {', '.join(missing)}")

    @classmethod
    def of(cls, haircuts: Mapping[str, object]) -> 'HaircutSchedule':
        """Every listed class eligible at the given haircut."""
        return cls(frozenset(haircuts), {k: Fraction(v) for k, v in haircuts.items()})

    def factor(self, asset_class: str) -> Fraction:
        """Lendable share of face value."""
        if asset_class not in self.eligibility:
            return Fraction(0)
        return 1 - self.haircut[asset_class]


@dataclass(frozen=True)
class LoveLetterNetwork:
    banks: Tuple[str, ...]
    cross_holdings: Tuple[Holding, ...] = ()
    pledged: Mapping[str, Money] = field(default_factory=dict)
    prohibited_after: Optional[int] = None

    def __post_init__(self):
        object.__setattr__(self, 'banks', tuple(self.banks))
        object.__setattr__(self, 'cross_holdings', tuple(Holding(*h) for h in self.cross_holdings))
        for h in self.cross_holdings:
            if h.face < 0:
                raise StrategemError(f"negative face value in holding {h}")
            if h.holder not in self.banks:
                raise StrategemError(f"holder {h.holder!r} is not a bank of the network")
        for bank, amount in self.pledged.items():
            if bank not in self.banks:
                raise StrategemError(f"pledging bank {bank!r} is not in the network")
            if amount < 0:
                raise StrategemError(f"negative pledged borrowing for {bank!r}")

    def is_cross_issued(self, h: Holding) -> bool:
        return h.issuer in self.banks and h.issuer != h.holder

    def total_pledged(self) -> Money:
        return sum(self.pledged.values())

    def validate(self, hs: HaircutSchedule, day: Optional[int] = None) -> None:
        """Raise unless every bank's pledged borrowing fits its capacity on ``day``.

        Pledged amounts depend on the haircut schedule, so construction only
        checks signs and membership; this is the capacity check.
        """
        violations = network_violations(self, hs, day)
        if violations:
            raise StrategemError("pledged borrowing exceeds capacity: " + '; '.join(violations))


def _prohibited(net: LoveLetterNetwork, day: Optional[int]) -> bool:
    if net.prohibited_after is None:
        return False
    return day is None or day > net.prohibited_after


def collateral_capacity(net: LoveLetterNetwork, hs: HaircutSchedule) -> Dict[str, Money]:
    """Per-bank lending capacity from all holdings, ignoring any prohibition."""
    capacity = {bank: Fraction(0) for bank in net.banks}
    for h in net.cross_holdings:
        capacity[h.holder] += h.face * hs.factor(h.asset_class)
    return {bank: int(value) for bank, value in capacity.items()}


def love_letter_capacity(net: LoveLetterNetwork, hs: HaircutSchedule,
                         day: Optional[int] = None) -> Dict[str, Money]:
    """Per-bank capacity; cross-issued IOUs count zero once prohibited.

    ``day=None`` evaluates the network's final state.
    """
    if not _prohibited(net, day):
        return collateral_capacity(net, hs)
    allowed = tuple(h for h in net.cross_holdings if not net.is_cross_issued(h))
    return collateral_capacity(
        LoveLetterNetwork(net.banks, allowed, net.pledged, net.prohibited_after), hs)


def network_violations(net: LoveLetterNetwork, hs: HaircutSchedule,
                       day: Optional[int] = None) -> List[str]:
    """Banks whose pledged borrowing exceeds their capacity."""
    capacity = love_letter_capacity(net, hs, day)
    return [
        f"{bank}: pledged {net.pledged[bank]} exceeds capacity {capacity[bank]}"
        for bank in net.banks
        if net.pledged.get(bank, 0) > capacity[bank]
    ]


def _check_recovery(recovery: Fraction) -> Fraction:
    recovery = Fraction(recovery)
    if not 0 <= recovery <= 1:
        raise StrategemError(f"recovery must be in [0, 1], got {recovery}")
    return recovery


def love_letter_default(net: LoveLetterNetwork, recovery: Fraction = Fraction(0),
                        hs: Optional[HaircutSchedule] = None) -> Money:
    """Central bank loss when every pledging bank defaults.

    With a haircut schedule the pledges are first checked against capacity on
    the last day cross-issued IOUs still counted.
    """
    recovery = _check_recovery(recovery)
    if hs is not None:
        net.validate(hs, net.prohibited_after)
    return round(net.total_pledged() * (1 - recovery))


# -- timeline ----------------------------------------------------------------

BORROW = 'borrow'
REPAY = 'repay'
PROHIBIT = 'prohibit'
DEFAULT = 'default'
TIMELINE_EVENTS = (BORROW, REPAY, PROHIBIT, DEFAULT)


class TimelineEvent(NamedTuple):
    day: int
    kind: str
    amount: Money = 0
    recovery: Optional[Fraction] = None
    label: str = ''


class ExposurePoint(NamedTuple):
    day: int
    label: str
    exposure: Money


@dataclass(frozen=True)
class LoveLetterTimeline:
    points: Tuple[ExposurePoint, ...]
    loss: Money
    default_day: Optional[int] = None

    @property
    def exposures(self) -> Tuple[Money, ...]:
        return tuple(p.exposure for p in self.points)

    @property
    def terminal_exposure(self) -> Money:
        return self.points[-1].exposure if self.points else 0


def replay_love_letter_timeline(schedule: Sequence[TimelineEvent],
                                recovery: Fraction = Fraction(0)) -> LoveLetterTimeline:
    """Replay borrowing against love letters and return the exposure path.

    Each borrow/repay/prohibit records the resulting exposure; a default
    turns the outstanding exposure into a loss at the recovery rate.
    """
    recovery = _check_recovery(recovery)
    exposure = 0
    prohibited = False
    points: List[ExposurePoint] = []
    loss = 0
    default_day = None
    last_day = None

    for position, event in enumerate(schedule):
        if last_day is not None and event.day < last_day:
            raise StrategemError(f"event #{position} on day {event.day} precedes day {last_day}")
        last_day = event.day
        if default_day is not None:
            raise StrategemError(f"event #{position} after default on day {default_day}")
        if event.kind not in TIMELINE_EVENTS:
            raise StrategemError(f"unknown timeline event {event.kind!r}")
        if event.amount < 0:
            raise StrategemError(f"event #{position}: negative amount {event.amount}")

        if event.kind == BORROW:
            if prohibited:
                raise StrategemError(f"event #{position}: borrowing after love letters were prohibited")
            exposure += event.amount
        elif event.kind in (REPAY, PROHIBIT):
            if event.amount > exposure:
                raise StrategemError(f"event #{position}: unwinding {event.amount} exceeds exposure {exposure}")
            exposure -= event.amount
            prohibited = prohibited or event.kind == PROHIBIT
        else:
            rate = _check_recovery(event.recovery) if event.recovery is not None else recovery
            loss = round(exposure * (1 - rate))
            default_day = event.day
            logger.debug("LOVE_LETTER | default day=%d exposure=%d loss=%d", event.day, exposure, loss)
            continue
        points.append(ExposurePoint(event.day, event.label or event.kind, exposure))

    return LoveLetterTimeline(tuple(points), loss, default_day)


def luxembourg_2008_schedule() -> List[TimelineEvent]:
    """Icelandic subsidiaries at the Central Bank of Luxembourg, 2008 (days from 1 Jan)."""
    return [
        TimelineEvent(120, BORROW, billions('2.5'), label='2008-04'),
        TimelineEvent(181, BORROW, billions('2.0'), label='2008-06'),
        TimelineEvent(212, PROHIBIT, billions('1.0'), label='2008-07'),
        TimelineEvent(280, DEFAULT, label='2008-10'),
    ]


# -- dilution ----------------------------------------------------------------

class DilutionEvent(NamedTuple):
    """Admit ``asset_class`` or set its haircut; ``haircut=None`` removes it."""

    asset_class: str
    haircut: Optional[Fraction]


def apply_dilution(hs: HaircutSchedule, event: DilutionEvent, mode: str = DILUTION) -> HaircutSchedule:
    """New schedule after ``event``.

    In dilution mode an event may only widen eligibility or lower a haircut;
    ``mode='amend'`` accepts any change.
    """
    if mode not in (DILUTION, AMEND):
        raise StrategemError(f"unknown dilution mode {mode!r}")
    eligibility = set(hs.eligibility)
    haircut = dict(hs.haircut)
    cls = event.asset_class

    if event.haircut is None:
        if mode == DILUTION and cls in eligibility:
            raise StrategemError(f"removing {cls!r} narrows eligibility; use amend mode")
        eligibility.discard(cls)
        haircut.pop(cls, None)
        return HaircutSchedule(frozenset(eligibility), haircut)

    new = Fraction(event.haircut)
    if mode == DILUTION and cls in eligibility and new > haircut[cls]:
        raise StrategemError(f"raising the haircut on {cls!r} from {haircut[cls]} to {new}; use amend mode")
    eligibility.add(cls)
    haircut[cls] = new
    return HaircutSchedule(frozenset(eligibility), haircut)


class CapacityDecrease(NamedTuple):
    step: int
    bank: str
    before: Money
    after: Money


@dataclass(frozen=True)
class DilutionReport:
    schedules: Tuple[HaircutSchedule, ...]
    capacities: Tuple[Dict[str, Money], ...]
    decreases: Tuple[CapacityDecrease, ...]

    @property
    def monotone(self) -> bool:
        return not self.decreases


def dilution_path(net: LoveLetterNetwork, hs: HaircutSchedule, events: Sequence[DilutionEvent],
                  mode: str = DILUTION, day: Optional[int] = None) -> DilutionReport:
    """Capacities before and after every event, with any decrease flagged."""
    schedules = [hs]
    capacities = [love_letter_capacity(net, hs, day)]
    decreases = []
    for step, event in enumerate(events, start=1):
        schedules.append(apply_dilution(schedules[-1], event, mode))
        capacities.append(love_letter_capacity(net, schedules[-1], day))
        for bank in net.banks:
            before, after = capacities[-2][bank], capacities[-1][bank]
            if after < before:
                decreases.append(CapacityDecrease(step, bank, before, after))
    if decreases:
        logger.warning("DILUTION | capacity decreased in %d place(s)", len(decreases))
    return DilutionReport(tuple(schedules), tuple(capacities), tuple(decreases))


@dataclass(frozen=True)
class DebtCeiling:
    """Debt-to-GDP limit; 60 % as originally agreed."""

    limit: Fraction = Fraction(3, 5)


def ceiling_breached(debt: Money, gdp: Money, ceiling: DebtCeiling = DebtCeiling()) -> bool:
    if gdp <= 0:
        raise StrategemError(f"GDP must be positive, got {gdp}")
    return Fraction(debt, gdp) > ceiling.limit


def relax_ceiling(ceiling: DebtCeiling, new_limit: Fraction, mode: str = DILUTION) -> DebtCeiling:
    """Move the limit; dilution mode only lets it go up."""
    new_limit = Fraction(new_limit)
    if new_limit < 0:
        raise StrategemError(f"debt ceiling must be >= 0, got {new_limit}")
    if mode == DILUTION and new_limit < ceiling.limit:
        raise StrategemError(f"lowering the ceiling from {ceiling.limit} to {new_limit}; use amend mode")
    return DebtCeiling(new_limit)
