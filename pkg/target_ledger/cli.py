"""CLI interface using argparse."""

import sys
import argparse
import logging
from datetime import date
from pathlib import Path
from typing import List

from . import __version__
from .config import load_config
from .csvio import (aggregate_csv, load_aggregate_csv, load_constraints_csv, load_matrix,
                    load_payment_journal, matrix_csv, parse_condition, solution_meta)
from .errors import EXIT_DATA, EXIT_USAGE, LedgerError, ScenarioError
from .ledger import (RunningLedger, aggregate, austria_scenario_one, austria_scenario_two,
                     degrees_of_freedom)
from .participants import ParticipantSet
from .reconstruction import (MIN_L1, OBJECTIVES, ReconstructionConstraints,
                             constrained_reconstruct, enumerate_integer_solutions)
from .scenario import (FULL, REPORT_FORMATS, STRATEGEMS, day_date, load_scenario, run_scenario,
                       run_scenarios)
from .utils import format_cents, get_output_dir, parse_int, write_file_set

logger = logging.getLogger(__name__)

EXAMPLES = {
    'austria-one': austria_scenario_one,
    'austria-two': austria_scenario_two,
}


def _write_outputs(out_dir: Path, files: dict) -> None:
    """Write already-rendered files; callers compute everything first."""
    write_file_set(out_dir, files)
    for name in sorted(files):
        print(f"Wrote {out_dir / name}")


def _print_balances(report) -> None:
    for label, balance in zip(report.labels, report.balances):
        print(f"  {label:>4}  {balance:>20}  ({format_cents(balance)})")


def cmd_net(args) -> int:
    """Net a payment journal into a balance matrix and aggregates."""
    if args.example:
        participants, payments = EXAMPLES[args.example]()
    else:
        given = ParticipantSet(args.participants.split(',')) if args.participants else None
        participants, payments = load_payment_journal(Path(args.journal), given)

    cumulative = args.settings_obj.get('running_ledger', True) and not args.per_day
    ledger = RunningLedger(participants, cumulative)
    reports = ledger.run(payments) if payments else [ledger.close_day([], 0)[1]]
    start = date.fromisoformat(args.date)
    dated = [(day_date(start, r.day), r) for r in reports]

    files = {
        'matrix.csv': matrix_csv(ledger.current),
        'aggregates.csv': aggregate_csv(dated),
    }
    _write_outputs(get_output_dir(args.output_dir), files)

    final = reports[-1]
    bilateral, independent = degrees_of_freedom(final.n)
    print(f"\nNetted {len(payments)} payment(s) over {len(reports)} day(s), n={final.n}")
    print(f"Bilateral balances: {bilateral}, published aggregates carry {independent}")
    _print_balances(final)
    return 0


def cmd_aggregate(args) -> int:
    """Aggregate a matrix dump into per-participant balances."""
    matrix = load_matrix(Path(args.matrix))
    report = aggregate(matrix)
    _write_outputs(get_output_dir(args.output_dir), {args.out: aggregate_csv([(args.date, report)])})
    print(f"\nAggregates on {args.date} (total {report.total}):")
    _print_balances(report)
    return 0


def _conditions(args, n: int) -> List:
    conditions = []
    for kind in ('fix', 'lower', 'upper'):
        for text in getattr(args, kind) or []:
            fields = text.split(',')
            if len(fields) != 3:
                raise ScenarioError(f"--{kind} expects i,j,value, got {text!r}")
            try:
                conditions.append(parse_condition([fields[0], fields[1], kind, fields[2]], n))
            except ValueError as e:
                raise ScenarioError(f"--{kind} {text}: {e}") from None
    if args.constraints:
        conditions.extend(load_constraints_csv(Path(args.constraints), n))
    return conditions


def cmd_reconstruct(args) -> int:
    """Recover a bilateral matrix from published aggregates."""
    settings = args.settings_obj
    slack = settings.get('aggregate_slack_cents', 0) or None
    series = load_aggregate_csv(Path(args.aggregates), slack)
    dates = series.dates()
    if args.date:
        on = args.date
    elif len(dates) == 1:
        on = dates[0]
    else:
        raise ScenarioError(f"{args.aggregates} holds {len(dates)} dates; pick one with --date")
    report = series.report(on)
    out_dir = get_output_dir(args.output_dir)

    if args.enumerate:
        if args.bound is None:
            raise ScenarioError("--enumerate needs --bound")
        quantum = args.quantum if args.quantum is not None else settings.get('enumeration_quantum_cents')
        solutions = enumerate_integer_solutions(
            report, args.bound, quantum, settings.get('enumeration_budget'))
        pairs = [(i, j) for i in range(report.n) for j in range(i + 1, report.n)]
        header = ','.join(['solution'] + [f"{i + 1}-{j + 1}" for i, j in pairs])
        lines = [header] + [','.join([str(k)] + [str(v) for v in m.upper()])
                            for k, m in enumerate(solutions, start=1)]
        _write_outputs(out_dir, {'enumeration.csv': '\n'.join(lines) + '\n'})
        print(f"\n{len(solutions)} solution(s) on {on} within +/-{args.bound} in steps of {quantum}")
        return 0

    constraints = ReconstructionConstraints.build(_conditions(args, report.n), args.objective)
    result = constrained_reconstruct(report, constraints, tolerance=settings.get('lp_tolerance'))
    _write_outputs(out_dir, {
        args.out: matrix_csv(result.matrix),
        f"{args.out}.meta": solution_meta(result),
    })
    print(f"\nReconstructed {on}: objective={result.objective} value={result.value} "
          f"null dimension={result.null_dimension}{'' if result.exact else ' (rounded)'}")
    return 0


def cmd_strategem(args) -> int:
    """Run one strategem scenario."""
    scenario = load_scenario(Path(args.config))
    if scenario.strategem != args.name:
        raise ScenarioError(f"{args.config} configures {scenario.strategem!r}, not {args.name!r}")
    manifest = run_scenario(Path(args.config), get_output_dir(args.output_dir),
                            args.settings_obj, args.format, command='strategem')
    for name in manifest.outputs:
        print(f"Wrote {name}  {manifest.digests[name][:12]}")
    return 0


def cmd_report(args) -> int:
    """Run scenario configs, possibly in parallel."""
    workers = args.workers if args.workers is not None else args.settings_obj.get('workers', 1)
    manifests = run_scenarios([Path(p) for p in args.configs], get_output_dir(args.output_dir),
                              args.settings_obj, args.format, workers)
    for manifest in manifests:
        print(f"{manifest.config_path}: {len(manifest.outputs)} output(s)")
    return 0


def create_parser() -> argparse.ArgumentParser:
    """Create CLI argument parser."""
    parser = argparse.ArgumentParser(
        prog='target-ledger',
        description='TARGET balance netting, reconstruction and strategem simulations',
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog="""
Examples:
  target-ledger net --journal payments.csv          Net a payment journal
  target-ledger net --example austria-one           Net the Austria example
  target-ledger aggregate --matrix matrix.csv --date 2024-01-01
  target-ledger reconstruct --aggregates data/austria_aggregates.csv --fix 2,3,0
  target-ledger reconstruct --aggregates agg.csv --enumerate --bound 20000000000000
  target-ledger strategem rollover --config scenarios/rollover.ini
  target-ledger report scenarios/*.ini --workers 4
        """
    )

    parser.add_argument('--settings', help='Engine settings file (default: ./settings.json)')
    parser.add_argument('--output-dir', help='Override output directory')
    parser.add_argument('--verbose', action='store_true', help='Debug logging on stderr')
    parser.add_argument('--version', action='version', version=f'target-ledger {__version__}')

    subparsers = parser.add_subparsers(dest='command', help='Commands')

    # net
    net_parser = subparsers.add_parser('net', help='Net payments into balances')
    source = net_parser.add_mutually_exclusive_group(required=True)
    source.add_argument('--journal', help='Payment journal CSV (day,payer,payee,amount_cents)')
    source.add_argument('--example', choices=sorted(EXAMPLES), help='Built-in example payments')
    net_parser.add_argument('--participants', help='Comma-separated labels (default: journal order)')
    net_parser.add_argument('--per-day', action='store_true', help='Start every day from zero')
    net_parser.add_argument('--date', default='2024-01-01', help='ISO date of day 0')

    # aggregate
    agg_parser = subparsers.add_parser('aggregate', help='Aggregate a matrix dump')
    agg_parser.add_argument('--matrix', required=True, help='Matrix CSV')
    agg_parser.add_argument('--date', required=True, help='ISO date for the rows')
    agg_parser.add_argument('--out', default='aggregates.csv', help='Output file name')

    # reconstruct
    rec_parser = subparsers.add_parser('reconstruct', help='Reconstruct a matrix from aggregates')
    rec_parser.add_argument('--aggregates', required=True, help='Aggregate CSV')
    rec_parser.add_argument('--date', help='Date to reconstruct (default: the only one)')
    rec_parser.add_argument('--objective', choices=OBJECTIVES, default=MIN_L1)
    rec_parser.add_argument('--fix', action='append', help='Pin T(i,j)=value, 1-based: i,j,value')
    rec_parser.add_argument('--lower', action='append', help='T(i,j) >= value: i,j,value')
    rec_parser.add_argument('--upper', action='append', help='T(i,j) <= value: i,j,value')
    rec_parser.add_argument('--constraints', help='Constraint CSV (i,j,kind,value)')
    rec_parser.add_argument('--enumerate', action='store_true', help='List every quantised solution (n <= 4)')
    rec_parser.add_argument('--bound', type=parse_int, help='Entry bound in cents for --enumerate')
    rec_parser.add_argument('--quantum', type=parse_int, help='Step in cents for --enumerate')
    rec_parser.add_argument('--out', default='reconstruction.csv', help='Output file name')

    # strategem
    str_parser = subparsers.add_parser('strategem', help='Run one strategem scenario')
    str_parser.add_argument('name', choices=sorted(STRATEGEMS))
    str_parser.add_argument('--config', required=True, help='Scenario INI file')
    str_parser.add_argument('--format', choices=REPORT_FORMATS, default=FULL)

    # report
    rep_parser = subparsers.add_parser('report', help='Run scenario configs and emit reports')
    rep_parser.add_argument('configs', nargs='+', help='Scenario INI files')
    rep_parser.add_argument('--workers', type=int, help='Worker threads (default: settings)')
    rep_parser.add_argument('--format', choices=REPORT_FORMATS, default=FULL)

    return parser


def main(argv=None) -> int:
    """Main CLI entry point."""
    parser = create_parser()
    args = parser.parse_args(argv)

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.WARNING,
        format='%(levelname)s %(name)s: %(message)s',
        stream=sys.stderr,
    )

    if not args.command:
        parser.print_help()
        return EXIT_USAGE

    commands = {
        'net': cmd_net,
        'aggregate': cmd_aggregate,
        'reconstruct': cmd_reconstruct,
        'strategem': cmd_strategem,
        'report': cmd_report,
    }

    try:
        args.settings_obj = load_config(args.settings)
        logger.debug("CLI | command=%s output_dir=%s", args.command, args.output_dir)
        return commands[args.command](args)
    except LedgerError as e:
        print(f"{e.code}: {e}", file=sys.stderr)
        return e.exit_code
    except ValueError as e:
        print(f"E_USAGE: {e}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as e:
        print(f"E_DATA: {e}", file=sys.stderr)
        return EXIT_DATA


if __name__ == '__main__':
    sys.exit(main())
