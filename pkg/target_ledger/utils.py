"""Core utilities: money helpers, atomic file writes, digests and paths."""

import os
import json
import shutil
import hashlib
from decimal import Decimal, ROUND_HALF_EVEN
from fractions import Fraction
from pathlib import Path
from typing import Any, Dict, List, Mapping, Optional, Union

# Money is a plain int of euro cents; Python ints are unbounded so the
# +-2**100 range holds without special types.
Money = int

CENTS_PER_EURO = 100
CENTS_PER_BILLION = 100 * 10**9

OUTPUT_DIR_ENV = 'TARGET_LEDGER_OUTPUT_DIR'


def billions(amount: Union[int, str, Fraction]) -> Money:
    """Convert an amount in billions of euro into exact cents."""
    cents = Fraction(amount) * CENTS_PER_BILLION
    if cents.denominator != 1:
        raise ValueError(f"{amount} bn is not a whole number of cents")
    return int(cents)


def to_billions(cents: Money) -> Fraction:
    """Cents back to billions of euro, exactly."""
    return Fraction(cents, CENTS_PER_BILLION)


def parse_int(text: str) -> int:
    """Parse a decimal integer (cents, days, indices); no decimals, no separators."""
    value = text.strip()
    body = value[1:] if value[:1] in '+-' else value
    if not body.isdigit():
        raise ValueError(f"not a decimal integer: {text!r}")
    return int(value)


def parse_fraction(text: str) -> Fraction:
    """Parse a rate or share written as a decimal fraction, exactly."""
    try:
        return Fraction(text.strip())
    except (ValueError, ZeroDivisionError):
        raise ValueError(f"not a decimal fraction: {text!r}") from None


def round_half_even(value: Fraction) -> int:
    """Nearest integer, ties to even."""
    return round(Fraction(value))


def render_fraction(value: Fraction, places: int) -> str:
    """Render an exact rational with a fixed number of decimals, half-to-even."""
    value = Fraction(value)
    quantum = Decimal(1).scaleb(-places)
    exact = Decimal(value.numerator) / Decimal(value.denominator)
    return str(exact.quantize(quantum, rounding=ROUND_HALF_EVEN))


def format_cents(cents: Money) -> str:
    """Human-readable euro amount, e.g. -65000000000.00 EUR -> '-65.00 bn'."""
    return f"{render_fraction(to_billions(cents), 2)} bn"


def get_output_dir(override: Optional[str] = None) -> Path:
    """Output directory: explicit flag, then environment, then ./out."""
    if override:
        return Path(override).resolve()
    env = os.environ.get(OUTPUT_DIR_ENV)
    if env:
        return Path(env).resolve()
    return Path.cwd() / 'out'


def _write_synced(path: Path, content: str) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, 'w', encoding='utf-8', newline='\n') as f:
        f.write(content)
        f.flush()
        os.fsync(f.fileno())


def _remove(path: Path) -> None:
    if path.is_dir() and not path.is_symlink():
        shutil.rmtree(path, ignore_errors=True)
    elif path.exists() or path.is_symlink():
        path.unlink()


def atomic_write(path: Path, content: str) -> None:
    """Atomic write: tmp -> flush+fsync -> rename. Always LF line endings."""
    path = Path(path)
    tmp_path = path.with_suffix(path.suffix + '.tmp')
    try:
        _write_synced(tmp_path, content)
        os.replace(tmp_path, path)
    except OSError:
        _remove(tmp_path)
        raise


def write_file_set(directory: Path, files: Mapping[str, str]) -> None:
    """Write several files so that either all of them land or none do.

    Every file is staged as ``<name>.tmp`` before any is renamed into place.
    On failure the staged files are removed, files already renamed are taken
    back out, and whatever they replaced is restored from ``<name>.bak``.
    """
    directory = Path(directory)
    created = None
    if not directory.exists():
        created = directory
        while not created.parent.exists():
            created = created.parent
    names = sorted(files)
    staged: List[Path] = []
    backups: Dict[Path, Path] = {}
    committed: List[Path] = []
    try:
        for name in names:
            tmp_path = directory / f"{name}.tmp"
            staged.append(tmp_path)
            _write_synced(tmp_path, files[name])
        for name in names:
            path = directory / name
            if path.exists() or path.is_symlink():
                backup = directory / f"{name}.bak"
                _remove(backup)
                os.replace(path, backup)
                backups[path] = backup
            os.replace(directory / f"{name}.tmp", path)
            committed.append(path)
    except OSError:
        for path in committed:
            _remove(path)
        for path, backup in backups.items():
            os.replace(backup, path)
        for tmp_path in staged:
            _remove(tmp_path)
        if created is not None:
            shutil.rmtree(created, ignore_errors=True)
        raise
    for backup in backups.values():
        _remove(backup)


def json_text(data: Dict[str, Any]) -> str:
    """JSON with sorted keys so equal data gives equal bytes."""
    return json.dumps(data, indent=2, sort_keys=True, ensure_ascii=False) + '\n'


def atomic_write_json(path: Path, data: Dict[str, Any]) -> None:
    """Atomic JSON write with sorted keys."""
    atomic_write(path, json_text(data))


def read_json(path: Path, default: Optional[Dict[str, Any]] = None) -> Dict[str, Any]:
    """Read JSON file; return default if not exists."""
    path = Path(path)
    if not path.exists():
        return dict(default or {})
    with open(path, 'r', encoding='utf-8') as f:
        return json.load(f)


def content_digest(content: Union[str, bytes]) -> str:
    """SHA-256 hex digest of text (UTF-8) or bytes."""
    if isinstance(content, str):
        content = content.encode('utf-8')
    return hashlib.sha256(content).hexdigest()


def file_digest(path: Path) -> str:
    """SHA-256 hex digest of a file on disk."""
    return content_digest(Path(path).read_bytes())
