"""Engine settings management."""

from pathlib import Path
from typing import Any, Dict, Optional
from .utils import read_json, atomic_write_json


DEFAULT_SETTINGS_FILE = 'settings.json'

DEFAULT_CONFIG = {
    "participants": "ncb20",
    "include_ecb": False,
    "include_extra_euro_area": False,
    "running_ledger": True,
    "enumeration_quantum_cents": 1_000_000_000,
    "enumeration_budget": 2_000_000,
    "lp_tolerance": 1e-9,
    "love_letter_recovery": "0",
    "aggregate_slack_cents": 0,
    "workers": 1,
}


class Config:
    """Settings overlaid on DEFAULT_CONFIG."""

    def __init__(self, path: Path):
        self.path = Path(path)
        self.data = self._load()

    def _load(self) -> Dict[str, Any]:
        """Load settings from disk; defaults when the file is missing."""
        if not self.path.exists():
            return DEFAULT_CONFIG.copy()
        stored = read_json(self.path)
        unknown = sorted(set(stored) - set(DEFAULT_CONFIG))
        if unknown:
            raise ValueError(f"Unknown settings in {self.path}: {', '.join(unknown)}")
        return {**DEFAULT_CONFIG, **stored}

    def save(self) -> None:
        """Save settings to disk."""
        atomic_write_json(self.path, self.data)

    def get(self, key: str, default: Any = None) -> Any:
        """Get setting value."""
        return self.data.get(key, default)

    def set(self, key: str, value: Any) -> None:
        """Set setting value and save."""
        if key not in DEFAULT_CONFIG:
            raise ValueError(f"Unknown setting: {key}")
        self.data[key] = value
        self.save()


def load_config(path: Optional[str] = None) -> Config:
    """Load engine settings; ./settings.json unless a path is given."""
    if path is None:
        path = Path.cwd() / DEFAULT_SETTINGS_FILE
    return Config(Path(path))
