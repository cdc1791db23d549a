"""File formats: payment journals, matrix dumps, aggregate series, constraints.

All amounts are decimal integers of cents. Writers return text (so callers
can digest it before anything touches the disk) or write it atomically.
"""

import csv
import io
from dataclasses import dataclass
from datetime import date
from pathlib import Path
from typing import Dict, Iterable, List, Mapping, NamedTuple, Optional, Sequence, Tuple

from .errors import DataError
from .ledger import AggregateReport, BalanceMatrix, Payment
from .participants import ParticipantSet
from .reconstruction import Condition, Reconstruction
from .utils import Money, atomic_write, parse_int

JOURNAL_HEADER = ['day', 'payer', 'payee', 'amount_cents']
AGGREGATE_HEADER = ['date', 'participant', 'balance_cents']
CONSTRAINT_HEADER = ['i', 'j', 'kind', 'value']
TIMESERIES_HEADER = ['t', 'label', 'value_cents']
MATRIX_CORNER = 'participant'

CLAIMS_POSITIVE = 'claims_positive'
LIABILITIES_POSITIVE = 'liabilities_positive'


def _to_csv(header: Sequence[str], rows: Iterable[Sequence[object]]) -> str:
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator='\n')
    writer.writerow(header)
    writer.writerows(rows)
    return buffer.getvalue()


def _read_lines(path: Path) -> List[str]:
    path = Path(path)
    if not path.exists():
        raise DataError(path, [(0, "file not found")])
    return path.read_text(encoding='utf-8').splitlines()


def _records(path: Path, lines: Sequence[str], header: Sequence[str], start: int = 0
             ) -> List[Tuple[int, List[str]]]:
    """(line number, fields) for every non-empty row after a required header."""
    body = lines[start:]
    if not body:
        raise DataError(path, [(start + 1, f"missing header {','.join(header)}")])
    found = [h.strip() for h in next(csv.reader([body[0]]))]
    if found != list(header):
        missing = [h for h in header if h not in found]
        detail = f"missing columns {', '.join(missing)}" if missing else f"expected {','.join(header)}"
        raise DataError(path, [(start + 1, f"bad header {','.join(found)}: {detail}")])
    out = []
    for offset, fields in enumerate(csv.reader(body[1:]), start=start + 2):
        if fields and any(f.strip() for f in fields):
            out.append((offset, [f.strip() for f in fields]))
    return out


# -- payment journal ---------------------------------------------------------

def journal_csv(payments: Sequence[Payment], participants: ParticipantSet) -> str:
    return _to_csv(JOURNAL_HEADER, (
        (p.day, participants.label_of(p.payer), participants.label_of(p.payee), p.amount)
        for p in payments
    ))


def load_payment_journal(path: Path, participants: Optional[ParticipantSet] = None
                         ) -> Tuple[ParticipantSet, List[Payment]]:
    """Parse a journal; without ``participants`` labels are taken in order of appearance."""
    records = _records(path, _read_lines(path), JOURNAL_HEADER)
    if participants is None:
        seen: Dict[str, None] = {}
        for _, fields in records:
            for label in fields[1:3]:
                if label:
                    seen.setdefault(label, None)
        if not seen:
            raise DataError(path, [(1, "empty journal and no participant set given")])
        participants = ParticipantSet(seen)

    issues, payments = [], []
    for line, fields in records:
        if len(fields) != len(JOURNAL_HEADER):
            issues.append((line, f"expected {len(JOURNAL_HEADER)} fields, got {len(fields)}"))
            continue
        day, payer, payee, amount = fields
        try:
            p = Payment(participants.index_of(payer), participants.index_of(payee),
                        parse_int(amount), parse_int(day))
        except ValueError as e:
            issues.append((line, str(e)))
            continue
        if p.payer == p.payee:
            issues.append((line, f"payer and payee are both {payer}"))
        elif p.amount <= 0:
            issues.append((line, f"amount must be positive, got {p.amount}"))
        elif p.day < 0:
            issues.append((line, f"day must be >= 0, got {p.day}"))
        else:
            payments.append(p)
    if issues:
        raise DataError(path, issues)
    return participants, payments


# -- matrix dump -------------------------------------------------------------

def matrix_csv(m: BalanceMatrix) -> str:
    return _to_csv([MATRIX_CORNER, *m.labels],
                   ([label, *row] for label, row in zip(m.labels, m.entries)))


def write_matrix(path: Path, m: BalanceMatrix) -> None:
    atomic_write(path, matrix_csv(m))


def load_matrix(path: Path) -> BalanceMatrix:
    lines = _read_lines(path)
    if not lines:
        raise DataError(path, [(1, "empty matrix file")])
    header = [h.strip() for h in next(csv.reader([lines[0]]))]
    if not header or header[0] != MATRIX_CORNER:
        raise DataError(path, [(1, f"first header cell must be {MATRIX_CORNER!r}")])
    labels = header[1:]
    issues, rows = [], []
    body = [(n, f) for n, f in enumerate(csv.reader(lines[1:]), start=2) if f]
    if len(body) != len(labels):
        issues.append((len(lines), f"expected {len(labels)} rows, got {len(body)}"))
    for (line, fields), expected in zip(body, labels):
        if fields[0].strip() != expected:
            issues.append((line, f"row label {fields[0]!r}, expected {expected!r}"))
        if len(fields) != len(labels) + 1:
            issues.append((line, f"expected {len(labels)} amounts, got {len(fields) - 1}"))
            continue
        try:
            rows.append([parse_int(v) for v in fields[1:]])
        except ValueError as e:
            issues.append((line, str(e)))
    if issues:
        raise DataError(path, issues)
    return BalanceMatrix.from_rows(labels, rows)


def solution_meta(result: Reconstruction) -> str:
    return summary_text({
        'objective': result.objective,
        'value': result.value,
        'null_dimension': result.null_dimension,
        'exact': str(result.exact).lower(),
    })


# -- aggregate series --------------------------------------------------------

class AggregateRow(NamedTuple):
    date: str
    participant: str
    balance: Money


@dataclass(frozen=True)
class AggregateSeries:
    rows: Tuple[AggregateRow, ...]
    sign: str = CLAIMS_POSITIVE
    complete: bool = True
    slack: Money = 0

    def dates(self) -> List[str]:
        return sorted({r.date for r in self.rows})

    def report(self, on: str, day: int = 0) -> AggregateReport:
        """Balances for one date, participants in file order."""
        rows = [r for r in self.rows if r.date == on]
        if not rows:
            raise DataError('<series>', [(0, f"no balances for date {on}")])
        return AggregateReport.of([r.participant for r in rows], [r.balance for r in rows], day)


def aggregate_csv(dated: Sequence[Tuple[str, AggregateReport]]) -> str:
    return _to_csv(AGGREGATE_HEADER, (
        (on, label, balance)
        for on, report in dated
        for label, balance in zip(report.labels, report.balances)
    ))


def _header_block(path: Path, lines: Sequence[str]) -> Tuple[Dict[str, str], int]:
    meta, n = {}, 0
    for n, line in enumerate(lines):
        stripped = line.strip()
        if not stripped.startswith('#'):
            return meta, n
        key, sep, value = stripped[1:].partition(':')
        if not sep:
            raise DataError(path, [(n + 1, f"header line must be '# key: value', got {line!r}")])
        meta[key.strip().lower()] = value.strip()
    return meta, len(lines)


def load_aggregate_csv(path: Path, slack: Optional[Money] = None) -> AggregateSeries:
    """Parse ``date,participant,balance_cents`` with an optional ``# key: value`` block.

    Header keys: ``sign`` (claims_positive | liabilities_positive),
    ``complete`` (true | false), ``slack_cents``. Complete dates must sum to
    zero within the slack (0 unless declared); partial dates are only
    checked when a slack is declared or passed in.
    """
    lines = _read_lines(path)
    meta, start = _header_block(path, lines)
    issues = []

    sign = meta.get('sign', CLAIMS_POSITIVE)
    if sign not in (CLAIMS_POSITIVE, LIABILITIES_POSITIVE):
        issues.append((1, f"unknown sign convention {sign!r}"))
    complete_text = meta.get('complete', 'true').lower()
    if complete_text not in ('true', 'false'):
        issues.append((1, f"complete must be true or false, got {complete_text!r}"))
    complete = complete_text != 'false'
    if 'slack_cents' in meta:
        try:
            slack = parse_int(meta['slack_cents'])
        except ValueError as e:
            issues.append((1, str(e)))
    if issues:
        raise DataError(path, issues)

    rows, seen, first_line = [], set(), {}
    for line, fields in _records(path, lines, AGGREGATE_HEADER, start):
        if len(fields) != len(AGGREGATE_HEADER):
            issues.append((line, f"expected {len(AGGREGATE_HEADER)} fields, got {len(fields)}"))
            continue
        on, participant, balance = fields
        try:
            on = date.fromisoformat(on).isoformat()
        except ValueError:
            issues.append((line, f"not an ISO-8601 date: {on!r}"))
            continue
        try:
            value = parse_int(balance)
        except ValueError as e:
            issues.append((line, str(e)))
            continue
        if (on, participant) in seen:
            issues.append((line, f"duplicate balance for {participant} on {on}"))
            continue
        seen.add((on, participant))
        first_line.setdefault(on, line)
        rows.append(AggregateRow(on, participant, -value if sign == LIABILITIES_POSITIVE else value))

    check = slack if slack is not None else (0 if complete else None)
    if check is not None:
        totals: Dict[str, int] = {}
        for r in rows:
            totals[r.date] = totals.get(r.date, 0) + r.balance
        for on in sorted(totals):
            if abs(totals[on]) > check:
                issues.append((first_line[on], f"balances on {on} sum to {totals[on]}, slack {check}"))
    if issues:
        raise DataError(path, sorted(issues))
    return AggregateSeries(tuple(rows), sign, complete, check or 0)


# -- constraints -------------------------------------------------------------

def load_constraints_csv(path: Path, n: Optional[int] = None) -> List[Condition]:
    """Parse ``i,j,kind,value`` rows; indices are 1-based in the file."""
    issues, conditions = [], []
    for line, fields in _records(path, _read_lines(path), CONSTRAINT_HEADER):
        if len(fields) != len(CONSTRAINT_HEADER):
            issues.append((line, f"expected {len(CONSTRAINT_HEADER)} fields, got {len(fields)}"))
            continue
        try:
            conditions.append(parse_condition(fields, n))
        except ValueError as e:
            issues.append((line, str(e)))
    if issues:
        raise DataError(path, issues)
    return conditions


def parse_condition(fields: Sequence[str], n: Optional[int] = None) -> Condition:
    """``[i, j, kind, value]`` with 1-based indices into a Condition."""
    i, j, kind, value = (f.strip() for f in fields)
    if kind not in ('fix', 'lower', 'upper'):
        raise ValueError(f"kind must be fix, lower or upper, got {kind!r}")
    i, j = parse_int(i) - 1, parse_int(j) - 1
    if i < 0 or j < 0 or (n is not None and (i >= n or j >= n)):
        raise ValueError(f"index out of range: ({i + 1},{j + 1})")
    if i == j:
        raise ValueError(f"diagonal entry ({i + 1},{j + 1}) cannot be constrained")
    return Condition(kind, i, j, parse_int(value))


# -- scenario outputs --------------------------------------------------------

class SeriesRow(NamedTuple):
    t: int
    label: str
    value: Money


def timeseries_csv(rows: Iterable[SeriesRow]) -> str:
    return _to_csv(TIMESERIES_HEADER, rows)


def load_timeseries(path: Path) -> List[SeriesRow]:
    issues, rows = [], []
    for line, fields in _records(path, _read_lines(path), TIMESERIES_HEADER):
        try:
            rows.append(SeriesRow(parse_int(fields[0]), fields[1], parse_int(fields[2])))
        except (ValueError, IndexError) as e:
            issues.append((line, str(e)))
    if issues:
        raise DataError(path, issues)
    return rows


def summary_text(record: Mapping[str, object]) -> str:
    """Plain ``key: value`` lines, sorted by key."""
    return ''.join(f"{key}: {record[key]}\n" for key in sorted(record))
