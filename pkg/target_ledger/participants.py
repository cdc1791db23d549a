"""Participant registry: stable integer ids with presentation labels."""

from typing import Iterable, Iterator, NamedTuple, Tuple

# Euro-area NCBs (20 members since Croatia joined in 2023)
EURO_AREA_NCBS = (
    'AT', 'BE', 'CY', 'DE', 'EE', 'ES', 'FI', 'FR', 'GR', 'HR',
    'IE', 'IT', 'LT', 'LU', 'LV', 'MT', 'NL', 'PT', 'SI', 'SK',
)
ECB_LABEL = 'ECB'
EXTRA_EURO_AREA_LABEL = 'XEA'


class ParticipantId(NamedTuple):
    index: int
    label: str


class ParticipantSet:
    """Ordered, immutable set of participants; index i is row/column i."""

    def __init__(self, labels: Iterable[str]):
        labels = tuple(str(label).strip() for label in labels)
        if not labels:
            raise ValueError("Participant set cannot be empty")
        for label in labels:
            if not label or ',' in label:
                raise ValueError(f"Invalid participant label: {label!r}")
        if len(set(labels)) != len(labels):
            dupes = sorted({l for l in labels if labels.count(l) > 1})
            raise ValueError(f"Duplicate participant labels: {', '.join(dupes)}")
        self._labels = labels
        self._index = {label: i for i, label in enumerate(labels)}

    @property
    def labels(self) -> Tuple[str, ...]:
        return self._labels

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[ParticipantId]:
        return (ParticipantId(i, label) for i, label in enumerate(self._labels))

    def __eq__(self, other: object) -> bool:
        return isinstance(other, ParticipantSet) and other._labels == self._labels

    def __hash__(self) -> int:
        return hash(self._labels)

    def __repr__(self) -> str:
        return f"ParticipantSet({list(self._labels)!r})"

    def index_of(self, label: str) -> int:
        """Resolve a label to its index."""
        try:
            return self._index[label.strip()]
        except KeyError:
            raise ValueError(f"Unknown participant: {label!r}") from None

    def label_of(self, index: int) -> str:
        if not 0 <= index < len(self._labels):
            raise ValueError(f"Participant index out of range: {index}")
        return self._labels[index]

    def get(self, label: str) -> ParticipantId:
        return ParticipantId(self.index_of(label), label.strip())

    def subset(self, labels: Iterable[str]) -> 'ParticipantSet':
        """Participants restricted to ``labels``, in the given order."""
        labels = tuple(labels)
        for label in labels:
            self.index_of(label)
        return ParticipantSet(labels)


def default_participants(include_ecb: bool = False,
                         include_extra_euro_area: bool = False) -> ParticipantSet:
    """The 20 NCBs, optionally with the ECB (n=21) and Extra Euro Area (n=22)."""
    labels = list(EURO_AREA_NCBS)
    if include_ecb:
        labels.append(ECB_LABEL)
    if include_extra_euro_area:
        labels.append(EXTRA_EURO_AREA_LABEL)
    return ParticipantSet(labels)


def participants_from_config(config) -> ParticipantSet:
    """Build the participant set described by engine settings."""
    preset = config.get('participants', 'ncb20')
    if preset != 'ncb20':
        return ParticipantSet(label for label in str(preset).split(',') if label.strip())
    return default_participants(
        include_ecb=bool(config.get('include_ecb', False)),
        include_extra_euro_area=bool(config.get('include_extra_euro_area', False)),
    )
