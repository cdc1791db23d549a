"""Validation script to smoke-test the target-ledger CLI."""

import subprocess
import sys
import tempfile
from pathlib import Path

ROOT = Path(__file__).parent


def run_command(cmd, out_dir):
    """Run command and return result."""
    result = subprocess.run(
        [sys.executable, '-m', 'target_ledger', '--output-dir', str(out_dir)] + cmd,
        capture_output=True,
        text=True,
        cwd=ROOT
    )
    return result.returncode, result.stdout, result.stderr


def test_basic_commands():
    """Test basic CLI commands."""
    print("=" * 60)
    print("TARGET-LEDGER VALIDATION TEST")
    print("=" * 60)

    tests = [
        ("Version check", ['--version'], 0),
        ("Help command", ['--help'], 0),
        ("Net Austria journal", ['net', '--journal', 'data/austria_payments.csv'], 0),
        ("Reconstruct with pin", ['reconstruct', '--aggregates', 'data/austria_aggregates.csv',
                                  '--fix', '2,3,0'], 0),
        ("Rollover strategem", ['strategem', 'rollover', '--config', 'scenarios/rollover.ini'], 0),
        ("All scenarios", ['report', '--workers', '2'] + sorted(str(p.relative_to(ROOT))
                                                                for p in (ROOT / 'scenarios').glob('*.ini')), 0),
        ("Infeasible pins", ['reconstruct', '--aggregates', 'data/austria_aggregates.csv',
                             '--fix', '2,3,0', '--fix', '1,2,0'], 4),
    ]

    passed = 0
    failed = 0

    with tempfile.TemporaryDirectory() as out_dir:
        for name, cmd, expected in tests:
            print(f"\n[TEST] {name}")
            print(f"  Command: {' '.join(cmd)}")

            code, stdout, stderr = run_command(cmd, out_dir)

            if code == expected:
                print(f"  PASSED (exit code: {code})")
                if stdout.strip():
                    print(f"  Output: {stdout.strip()[:100]}...")
                passed += 1
            else:
                print(f"  FAILED (exit code: {code}, expected {expected})")
                if stderr:
                    print(f"  Error: {stderr.strip()[:200]}")
                failed += 1

    print("\n" + "=" * 60)
    print(f"RESULTS: {passed} passed, {failed} failed")
    print("=" * 60)

    return failed == 0


if __name__ == "__main__":
    success = test_basic_commands()
    sys.exit(0 if success else 1)
