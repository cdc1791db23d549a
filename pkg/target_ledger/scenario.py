"""Scenario configs, strategem runs and report emission.

A scenario is an INI file::

    [scenario]
    strategem = rollover
    seed = 0

    [rollover]
    initial_principal_cents = 10000
    nominal_rate = 0.05
    inflation = 0
    horizon = 2

Event lists are written one ``day,event,args`` per line under ``events``.
Everything is computed in memory first; files are only written once the
whole run has succeeded, each one atomically.
"""

import configparser
import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from datetime import date, timedelta
from fractions import Fraction
from pathlib import Path
from typing import Callable, Dict, List, NamedTuple, Optional, Sequence, Tuple

from . import __version__
from .anfa import AnfaAccount, anfa_replay
from .collateral import (AMEND, DILUTION, BORROW, DEFAULT, PROHIBIT, REPAY, DebtCeiling,
                         DilutionEvent, HaircutSchedule, Holding, LoveLetterNetwork, TimelineEvent,
                         ceiling_breached, dilution_path, relax_ceiling, replay_love_letter_timeline)
from .config import DEFAULT_CONFIG
from .csvio import (SeriesRow, aggregate_csv, load_payment_journal, matrix_csv, parse_condition,
                    solution_meta, summary_text, timeseries_csv)
from .ela import (Council, ElaPosition, ela_capital_flight, ela_gdp_ratio, ela_issue,
                  format_ratio, min_unblockable_support)
from .errors import ScenarioError
from .ledger import (Payment, RunningLedger, allocate_default_loss,
                     degrees_of_freedom)
from .participants import ParticipantSet, participants_from_config
from .reconstruction import OBJECTIVES, ReconstructionConstraints, constrained_reconstruct
from .rollover import rollover_is_log_linear, simulate_rollover
from .utils import content_digest, json_text, parse_fraction, parse_int, render_fraction, write_file_set

logger = logging.getLogger(__name__)

SERIES_FILE = 'series.csv'
SUMMARY_FILE = 'summary.txt'
MANIFEST_FILE = 'manifest.json'

FULL = 'full'
SUMMARY_ONLY = 'summary'
REPORT_FORMATS = (FULL, SUMMARY_ONLY)


class Event(NamedTuple):
    line: int
    day: int
    kind: str
    args: Tuple[str, ...]


class Scenario(NamedTuple):
    path: Path
    strategem: str
    seed: int
    label: str
    params: Dict[str, str]


@dataclass
class ScenarioResult:
    scenario: Scenario
    files: Dict[str, str] = field(default_factory=dict)
    summary: Dict[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class RunManifest:
    command: str
    config_path: str
    seed: int
    engine_version: str
    outputs: Tuple[str, ...]
    digests: Dict[str, str]

    def as_dict(self) -> Dict[str, object]:
        return {
            'command': self.command,
            'config_path': self.config_path,
            'seed': self.seed,
            'engine_version': self.engine_version,
            'outputs': list(self.outputs),
            'digests': dict(self.digests),
        }


class _Params:
    """Typed access to one config section; unknown keys are an error."""

    def __init__(self, scenario: Scenario, allowed: Sequence[str]):
        self.scenario = scenario
        self.values = scenario.params
        unknown = sorted(set(self.values) - set(allowed))
        if unknown:
            raise ScenarioError(f"[{scenario.strategem}] unknown keys: {', '.join(unknown)}")

    def _fail(self, key: str, problem: str) -> ScenarioError:
        return ScenarioError(f"[{self.scenario.strategem}] {key}: {problem}")

    def text(self, key: str, default: Optional[str] = None) -> str:
        value = self.values.get(key, default)
        if value is None:
            raise self._fail(key, "required")
        return value.strip()

    def integer(self, key: str, default: Optional[int] = None, minimum: Optional[int] = None) -> int:
        raw = self.values.get(key)
        if raw is None:
            if default is None:
                raise self._fail(key, "required")
            value = default
        else:
            try:
                value = parse_int(raw)
            except ValueError as e:
                raise self._fail(key, str(e)) from None
        if minimum is not None and value < minimum:
            raise self._fail(key, f"must be >= {minimum}, got {value}")
        return value

    def fraction(self, key: str, default: Optional[str] = None,
                 low: Optional[Fraction] = None, high: Optional[Fraction] = None) -> Fraction:
        try:
            value = parse_fraction(self.text(key, default))
        except ValueError as e:
            raise self._fail(key, str(e)) from None
        if (low is not None and value < low) or (high is not None and value > high):
            raise self._fail(key, f"must be in [{low}, {high}], got {value}")
        return value

    def flag(self, key: str, default: bool = False) -> bool:
        raw = self.values.get(key)
        if raw is None:
            return default
        lowered = raw.strip().lower()
        if lowered in ('true', 'yes', 'on', '1'):
            return True
        if lowered in ('false', 'no', 'off', '0'):
            return False
        raise self._fail(key, f"not a boolean: {raw!r}")

    def lines(self, key: str) -> List[Tuple[int, str]]:
        raw = self.values.get(key, '')
        return [(n, line.strip()) for n, line in enumerate(raw.splitlines(), start=1) if line.strip()]

    def events(self, kinds: Sequence[str]) -> List[Event]:
        """Parse ``day,event,args`` lines; args are whitespace separated."""
        events = []
        for n, line in self.lines('events'):
            parts = [p.strip() for p in line.split(',', 2)]
            if len(parts) < 2:
                raise self._fail('events', f"line {n}: expected day,event,args, got {line!r}")
            try:
                day = parse_int(parts[0])
            except ValueError as e:
                raise self._fail('events', f"line {n}: {e}") from None
            if parts[1] not in kinds:
                raise self._fail('events', f"line {n}: unknown event {parts[1]!r}, expected one of {', '.join(kinds)}")
            args = tuple(parts[2].split()) if len(parts) == 3 else ()
            events.append(Event(n, day, parts[1], args))
        return events

    def participants(self, settings) -> ParticipantSet:
        raw = self.values.get('participants')
        if raw is None:
            return participants_from_config(settings)
        try:
            return ParticipantSet(label for label in raw.split(',') if label.strip())
        except ValueError as e:
            raise self._fail('participants', str(e)) from None

    def path(self, key: str) -> Path:
        return (self.scenario.path.parent / self.text(key)).resolve()


def _event_int(params: _Params, event: Event, index: int, default: Optional[int] = None) -> int:
    if len(event.args) <= index:
        if default is None:
            raise params._fail('events', f"line {event.line}: {event.kind} needs an amount")
        return default
    try:
        return parse_int(event.args[index])
    except ValueError as e:
        raise params._fail('events', f"line {event.line}: {e}") from None


def _event_fraction(params: _Params, event: Event, index: int) -> Optional[Fraction]:
    if len(event.args) <= index:
        return None
    try:
        return parse_fraction(event.args[index])
    except ValueError as e:
        raise params._fail('events', f"line {event.line}: {e}") from None


def load_scenario(path: Path) -> Scenario:
    """Read a scenario INI file; the strategem section holds the parameters."""
    path = Path(path)
    if not path.exists():
        raise ScenarioError(f"scenario config not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    try:
        parser.read_string(path.read_text(encoding='utf-8'), source=str(path))
    except configparser.Error as e:
        raise ScenarioError(f"{path}: {e}") from None
    if not parser.has_section('scenario'):
        raise ScenarioError(f"{path}: missing [scenario] section")
    head = parser['scenario']
    strategem = head.get('strategem', '').strip()
    if strategem not in STRATEGEMS:
        raise ScenarioError(f"{path}: unknown strategem {strategem!r}; expected one of {', '.join(sorted(STRATEGEMS))}")
    try:
        seed = parse_int(head.get('seed', '0'))
    except ValueError as e:
        raise ScenarioError(f"{path}: seed: {e}") from None
    label = head.get('label', path.stem).strip()
    params = dict(parser[strategem]) if parser.has_section(strategem) else {}
    return Scenario(path, strategem, seed, label, params)


# -- strategem 1: TARGET netting ----------------------------------------------

def day_date(start: date, day: int) -> str:
    return (start + timedelta(days=day)).isoformat()


def _random_payments(rng: random.Random, n: int, count: int, days: int, max_cents: int) -> List[Payment]:
    payments = []
    for _ in range(count):
        payer = rng.randrange(n)
        payee = rng.randrange(n - 1)
        payee += payee >= payer
        payments.append(Payment(payer, payee, rng.randint(1, max_cents), rng.randrange(days)))
    return payments


def _run_target(sc: Scenario, settings) -> ScenarioResult:
    p = _Params(sc, ('participants', 'journal', 'events', 'random_payments', 'random_days',
                     'random_max_cents', 'cumulative', 'start_date', 'reconstruct', 'fix',
                     'lower', 'upper', 'default', 'absorbed_share'))
    participants = p.participants(settings)
    if len(participants) < 2:
        raise p._fail('participants', "need at least 2 participants")
    try:
        start = date.fromisoformat(p.text('start_date', '2024-01-01'))
    except ValueError as e:
        raise p._fail('start_date', str(e)) from None

    payments: List[Payment] = []
    if 'journal' in p.values:
        _, journal = load_payment_journal(p.path('journal'), participants)
        payments.extend(journal)
    for event in p.events(('pay',)):
        if len(event.args) != 3:
            raise p._fail('events', f"line {event.line}: pay needs PAYER PAYEE AMOUNT")
        try:
            payer, payee = participants.index_of(event.args[0]), participants.index_of(event.args[1])
        except ValueError as e:
            raise p._fail('events', f"line {event.line}: {e}") from None
        payments.append(Payment(payer, payee, _event_int(p, event, 2), event.day))
    count = p.integer('random_payments', 0, minimum=0)
    if count:
        rng = random.Random(sc.seed)
        payments.extend(_random_payments(
            rng, len(participants), count,
            p.integer('random_days', 1, minimum=1),
            p.integer('random_max_cents', 10**12, minimum=1),
        ))

    ledger = RunningLedger(participants, p.flag('cumulative', settings.get('running_ledger', True)))
    reports = ledger.run(payments) if payments else [ledger.close_day([], 0)[1]]
    final = reports[-1]

    result = ScenarioResult(sc)
    dated = [(day_date(start, r.day), r) for r in reports]
    result.files['matrix.csv'] = matrix_csv(ledger.current)
    result.files['aggregates.csv'] = aggregate_csv(dated)
    result.files[SERIES_FILE] = timeseries_csv(
        SeriesRow(r.day, label, b) for r in reports for label, b in zip(r.labels, r.balances))

    bilateral, independent = degrees_of_freedom(len(participants))
    summary = result.summary
    summary.update({
        'participants': len(participants),
        'payments': len(payments),
        'days': len(reports),
        'bilateral_balances': bilateral,
        'independent_aggregates': independent,
        'null_dimension': bilateral - independent,
        'aggregate_total': final.total,
    })
    for label, balance in zip(final.labels, final.balances):
        summary[f'balance.{label}'] = balance

    objective = p.values.get('reconstruct')
    if objective:
        objective = objective.strip()
        if objective not in OBJECTIVES:
            raise p._fail('reconstruct', f"unknown objective {objective!r}")
        conditions = []
        for kind in ('fix', 'lower', 'upper'):
            for n, line in p.lines(kind):
                i, j, value = (line.split(',') + ['', '', ''])[:3]
                try:
                    conditions.append(parse_condition([i, j, kind, value], len(participants)))
                except ValueError as e:
                    raise p._fail(kind, f"line {n}: {e}") from None
        rec = constrained_reconstruct(final, ReconstructionConstraints.build(conditions, objective))
        result.files['reconstruction.csv'] = matrix_csv(rec.matrix)
        result.files['reconstruction.csv.meta'] = solution_meta(rec)
        summary['reconstruction.objective'] = rec.objective
        summary['reconstruction.value'] = rec.value

    defaulting = p.values.get('default')
    if defaulting:
        share = p.fraction('absorbed_share', '1', Fraction(0), Fraction(1))
        try:
            loss = allocate_default_loss(final, defaulting.strip(), share)
        except ValueError as e:
            raise p._fail('default', str(e)) from None
        summary['default.participant'] = loss.defaulting
        summary['default.absorbed'] = loss.absorbed
        summary['default.unabsorbed'] = loss.unabsorbed
        for label, amount in loss.shares:
            summary[f'default.share.{label}'] = amount
    return result


# -- strategem 2: love letters ------------------------------------------------

def _run_love_letters(sc: Scenario, settings) -> ScenarioResult:
    p = _Params(sc, ('recovery', 'events'))
    recovery = p.fraction('recovery', str(settings.get('love_letter_recovery', '0')),
                          Fraction(0), Fraction(1))
    schedule = []
    for event in p.events((BORROW, REPAY, PROHIBIT, DEFAULT)):
        if event.kind == DEFAULT:
            schedule.append(TimelineEvent(event.day, DEFAULT, 0, _event_fraction(p, event, 0)))
        else:
            amount = _event_int(p, event, 0, 0 if event.kind == PROHIBIT else None)
            schedule.append(TimelineEvent(event.day, event.kind, amount))
    timeline = replay_love_letter_timeline(schedule, recovery)

    result = ScenarioResult(sc)
    result.files[SERIES_FILE] = timeseries_csv(
        SeriesRow(pt.day, pt.label, pt.exposure) for pt in timeline.points)
    result.summary.update({
        'events': len(schedule),
        'peak_exposure': max(timeline.exposures, default=0),
        'terminal_exposure': timeline.terminal_exposure,
        'loss': timeline.loss,
        'default_day': timeline.default_day if timeline.default_day is not None else 'none',
        'recovery': str(recovery),
    })
    return result


# -- strategem 3: dilution -----------------------------------------------------

def _run_dilution(sc: Scenario, settings) -> ScenarioResult:
    p = _Params(sc, ('banks', 'holdings', 'haircuts', 'mode', 'events', 'debt_cents',
                     'gdp_cents', 'debt_ceiling'))
    banks = tuple(b.strip() for b in p.text('banks').split(',') if b.strip())
    mode = p.text('mode', DILUTION)
    if mode not in (DILUTION, AMEND):
        raise p._fail('mode', f"expected {DILUTION} or {AMEND}, got {mode!r}")

    holdings = []
    for n, line in p.lines('holdings'):
        fields = [f.strip() for f in line.split(',')]
        if len(fields) != 4:
            raise p._fail('holdings', f"line {n}: expected issuer,holder,face_cents,class")
        try:
            holdings.append(Holding(fields[0], fields[1], parse_int(fields[2]), fields[3]))
        except ValueError as e:
            raise p._fail('holdings', f"line {n}: {e}") from None
    haircuts = {}
    for n, line in p.lines('haircuts'):
        cls, _, value = line.partition(',')
        try:
            haircuts[cls.strip()] = parse_fraction(value)
        except ValueError as e:
            raise p._fail('haircuts', f"line {n}: {e}") from None

    net = LoveLetterNetwork(banks, tuple(holdings))
    schedule = HaircutSchedule.of(haircuts)
    events, ceiling_moves = [], []
    for event in p.events(('admit', 'lower', 'set', 'remove', 'ceiling')):
        expected = {'ceiling': 1, 'remove': 1}.get(event.kind, 2)
        if len(event.args) != expected:
            raise p._fail('events', f"line {event.line}: {event.kind} takes {expected} argument(s)")
        if event.kind == 'ceiling':
            ceiling_moves.append(_event_fraction(p, event, 0))
        elif event.kind == 'remove':
            events.append(DilutionEvent(event.args[0], None))
        else:
            events.append(DilutionEvent(event.args[0], _event_fraction(p, event, 1)))
    report = dilution_path(net, schedule, events, mode)

    result = ScenarioResult(sc)
    result.files[SERIES_FILE] = timeseries_csv(
        SeriesRow(step, bank, caps[bank]) for step, caps in enumerate(report.capacities) for bank in banks)
    summary = result.summary
    summary.update({
        'events': len(events),
        'mode': mode,
        'monotone': str(report.monotone).lower(),
        'decreases': len(report.decreases),
        'eligible': ' '.join(sorted(report.schedules[-1].eligibility)),
    })
    for bank in banks:
        summary[f'capacity.{bank}'] = report.capacities[-1][bank]

    if 'debt_cents' in p.values:
        ceiling = DebtCeiling(p.fraction('debt_ceiling', '0.6', Fraction(0)))
        debt, gdp = p.integer('debt_cents', minimum=0), p.integer('gdp_cents', minimum=1)
        summary['ceiling.breached_initially'] = str(ceiling_breached(debt, gdp, ceiling)).lower()
        for limit in ceiling_moves:
            ceiling = relax_ceiling(ceiling, limit, mode)
        summary['ceiling.limit'] = render_fraction(ceiling.limit, 4)
        summary['ceiling.debt_ratio'] = render_fraction(Fraction(debt, gdp), 4)
        summary['ceiling.breached'] = str(ceiling_breached(debt, gdp, ceiling)).lower()
    return result


# -- strategem 4: ELA ----------------------------------------------------------

def _run_ela(sc: Scenario, settings) -> ScenarioResult:
    p = _Params(sc, ('ncb', 'nominal_gdp_cents', 'outstanding_cents', 'members', 'against',
                     'events', 'couple_to_target', 'flight_share', 'destination', 'participants'))
    ncb = p.text('ncb')
    position = ElaPosition(ncb, p.integer('outstanding_cents', 0, minimum=0),
                           p.integer('nominal_gdp_cents', minimum=1))
    members = p.integer('members', minimum=1)
    council = Council(members, p.integer('against', 0, minimum=0))

    coupled = p.flag('couple_to_target', False)
    if coupled:
        participants = p.participants(settings)
        share = p.fraction('flight_share', '1', Fraction(0), Fraction(1))
        try:
            payer, destination = participants.index_of(ncb), participants.index_of(p.text('destination'))
        except ValueError as e:
            raise p._fail('participants', str(e)) from None

    rows, flight, blocked = [], [], 0
    for event in p.events(('issue', 'vote')):
        if event.kind == 'vote':
            council = Council(members, _event_int(p, event, 0))
            continue
        amount = _event_int(p, event, 0)
        outcome = ela_issue(position, amount, council)
        if outcome.blocked:
            blocked += 1
            rows.append(SeriesRow(event.day, 'blocked', amount))
            continue
        position = outcome.position
        rows.append(SeriesRow(event.day, 'outstanding', position.outstanding))
        if coupled:
            flight.extend(ela_capital_flight(position, amount, share, payer, destination, event.day))

    result = ScenarioResult(sc)
    result.files[SERIES_FILE] = timeseries_csv(rows)
    result.summary.update({
        'ncb': ncb,
        'outstanding': position.outstanding,
        'gdp_ratio': format_ratio(ela_gdp_ratio(position)),
        'blocked_requests': blocked,
        'members': members,
        'min_unblockable_support': min_unblockable_support(members),
        'couple_to_target': str(coupled).lower(),
    })
    if coupled:
        ledger = RunningLedger(participants, True)
        reports = ledger.run(flight) if flight else [ledger.close_day([], 0)[1]]
        result.files['target_series.csv'] = timeseries_csv(
            SeriesRow(r.day, label, b) for r in reports for label, b in zip(r.labels, r.balances))
        result.summary['target_balance'] = reports[-1].balance(ncb)
    return result


# -- strategem 5: ANFA ---------------------------------------------------------

def _run_anfa(sc: Scenario, settings) -> ScenarioResult:
    p = _Params(sc, ('ncb', 'ceiling_cents', 'own_assets_cents', 'events'))
    account = AnfaAccount(p.text('ncb'), p.integer('own_assets_cents', 0, minimum=0),
                          p.integer('ceiling_cents', minimum=0))
    events = p.events(('purchase',))
    path = anfa_replay(account, [_event_int(p, e, 0) for e in events])
    final = path[-1] if path else account
    first_breach = next((e.day for e, a in zip(events, path) if a.breached), None)

    result = ScenarioResult(sc)
    result.files[SERIES_FILE] = timeseries_csv(
        SeriesRow(e.day, 'own_assets', a.own_assets) for e, a in zip(events, path))
    result.summary.update({
        'ncb': final.ncb,
        'own_assets': final.own_assets,
        'ceiling': final.ceiling,
        'breached': str(final.breached).lower(),
        'first_breach_day': first_breach if first_breach is not None else 'none',
    })
    return result


# -- strategem 6: rollover -----------------------------------------------------

def _run_rollover(sc: Scenario, settings) -> ScenarioResult:
    p = _Params(sc, ('initial_principal_cents', 'nominal_rate', 'inflation', 'horizon'))
    path = simulate_rollover(
        p.integer('initial_principal_cents', minimum=0),
        p.fraction('nominal_rate', low=Fraction(0)),
        p.fraction('inflation', '0', low=Fraction(0)),
        p.integer('horizon', minimum=0),
    )
    nominal, real = path.nominal_cents(), path.real_cents()

    result = ScenarioResult(sc)
    result.files[SERIES_FILE] = timeseries_csv(
        [SeriesRow(t, 'nominal', v) for t, v in enumerate(nominal)]
        + [SeriesRow(t, 'real', v) for t, v in enumerate(real)])
    result.summary.update({
        'horizon': path.horizon,
        'final_nominal_cents': nominal[-1],
        'final_real_cents': real[-1],
        'final_nominal': render_fraction(path.series[-1].nominal / 100, 2),
        'final_real': render_fraction(path.series[-1].real / 100, 2),
        'log_linear': str(rollover_is_log_linear(path)).lower(),
    })
    return result


STRATEGEMS: Dict[str, Callable[[Scenario, object], ScenarioResult]] = {
    'target': _run_target,
    'love_letters': _run_love_letters,
    'dilution': _run_dilution,
    'ela': _run_ela,
    'anfa': _run_anfa,
    'rollover': _run_rollover,
}


def compute_scenario(config_path: Path, settings=None) -> ScenarioResult:
    """Run a scenario fully in memory."""
    scenario = load_scenario(config_path)
    settings = settings if settings is not None else DEFAULT_CONFIG
    logger.debug("SCENARIO | %s strategem=%s seed=%d", scenario.label, scenario.strategem, scenario.seed)
    result = STRATEGEMS[scenario.strategem](scenario, settings)
    result.summary.setdefault('strategem', scenario.strategem)
    result.summary.setdefault('label', scenario.label)
    return result


def emit_report(result: ScenarioResult, output_dir: Path, fmt: str = FULL,
                command: str = 'report') -> RunManifest:
    """Write a computed result under ``output_dir/<label>`` and its manifest."""
    if fmt not in REPORT_FORMATS:
        raise ScenarioError(f"unknown report format {fmt!r}; expected one of {', '.join(REPORT_FORMATS)}")
    files = dict(result.files) if fmt == FULL else {}
    files[SUMMARY_FILE] = summary_text(result.summary)
    target = Path(output_dir) / result.scenario.label

    names = tuple(sorted(files))
    digests = {name: content_digest(files[name]) for name in names}
    manifest = RunManifest(command, str(result.scenario.path), result.scenario.seed,
                           __version__, names, digests)
    try:
        write_file_set(target, {**files, MANIFEST_FILE: json_text(manifest.as_dict())})
    except OSError as e:
        raise ScenarioError(f"cannot write outputs to {target}: {e}") from None
    return manifest


def run_scenario(config_path: Path, output_dir: Path, settings=None, fmt: str = FULL,
                 command: str = 'report') -> RunManifest:
    """Compute and emit one scenario; nothing is written if the run fails."""
    return emit_report(compute_scenario(config_path, settings), output_dir, fmt, command)


def run_scenarios(config_paths: Sequence[Path], output_dir: Path, settings=None,
                  fmt: str = FULL, workers: int = 1) -> List[RunManifest]:
    """Run independent scenarios, possibly in threads; manifests keep input order.

    Each scenario owns ``output_dir/<label>``, so two configs sharing a label
    are refused before anything runs.
    """
    seen: Dict[str, Path] = {}
    for path in config_paths:
        label = load_scenario(path).label
        if label in seen:
            raise ScenarioError(f"{path} and {seen[label]} both write to label {label!r}")
        seen[label] = Path(path)
    if workers <= 1 or len(config_paths) <= 1:
        return [run_scenario(p, output_dir, settings, fmt) for p in config_paths]
    with ThreadPoolExecutor(max_workers=workers) as executor:
        return list(executor.map(lambda p: run_scenario(p, output_dir, settings, fmt), config_paths))
