"""
Labeled (source, target, label) pair sets and their CSV format.
"""

import logging
from pathlib import Path
from typing import IO, Dict, Iterable, Iterator, List, Optional, Tuple, Union

import pandas as pd

from src.errors import DataError

logger = logging.getLogger(__name__)

COLUMNS = ["source", "target", "label"]


class LabeledPairSet:
    """Deduplicated labeled pairs; labels are 0 or 1."""

    def __init__(self, pairs: Iterable[Tuple[str, str, int]] = (), provenance: str = ""):
        self.provenance = provenance
        self._labels: Dict[Tuple[str, str], int] = {}
        self.duplicates_collapsed = 0
        for source, target, label in pairs:
            self.add(source, target, label)

    def add(self, source: str, target: str, label: int, line_number: Optional[int] = None) -> None:
        """
        Add one pair; an exact duplicate is collapsed.

        Raises:
            DataError: label outside {0, 1} or conflicting label for the same pair
        """
        if label not in (0, 1):
            raise DataError(f"label must be 0 or 1, got {label!r}", line_number)
        key = (source, target)
        previous = self._labels.get(key)
        if previous is None:
            self._labels[key] = int(label)
        elif previous == label:
            self.duplicates_collapsed += 1
        else:
            raise DataError(f"conflicting labels for pair ({source}, {target})", line_number)

    def __len__(self) -> int:
        return len(self._labels)

    def __iter__(self) -> Iterator[Tuple[str, str, int]]:
        for (source, target), label in self._labels.items():
            yield source, target, label

    def __contains__(self, key: Tuple[str, str]) -> bool:
        return key in self._labels

    def label_of(self, source: str, target: str) -> int:
        return self._labels[(source, target)]

    @property
    def positives(self) -> int:
        return sum(self._labels.values())

    @property
    def negatives(self) -> int:
        return len(self._labels) - self.positives

    @property
    def counts(self) -> Tuple[int, int]:
        return self.positives, self.negatives

    def sources(self) -> List[str]:
        return sorted({s for s, _ in self._labels})

    def positives_per_source(self) -> Dict[str, int]:
        result: Dict[str, int] = {}
        for (source, _), label in self._labels.items():
            result[source] = result.get(source, 0) + label
        return result

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(list(self), columns=COLUMNS)


def load_labeled_pairs(reader: Union[str, Path, IO[str]]) -> LabeledPairSet:
    """
    Load a ``source,target,label`` CSV.

    Args:
        reader: Path or open text stream

    Returns:
        The parsed pair set, provenance set to the file name when known

    Raises:
        DataError: missing header, bad label (with line number), conflicting duplicate
    """
    provenance = str(reader) if isinstance(reader, (str, Path)) else getattr(reader, "name", "<stream>")
    try:
        frame = pd.read_csv(reader, dtype=str, keep_default_na=False)
    except pd.errors.EmptyDataError:
        raise DataError(f"{provenance}: empty pair file") from None
    except pd.errors.ParserError as e:
        raise DataError(f"{provenance}: cannot parse pair file: {e}") from e

    missing = [c for c in COLUMNS if c not in frame.columns]
    if missing:
        raise DataError(f"{provenance}: header must be source,target,label (missing {', '.join(missing)})", 1)

    pairs = LabeledPairSet(provenance=provenance)
    for offset, (source, target, raw) in enumerate(frame[COLUMNS].itertuples(index=False, name=None)):
        line_number = offset + 2
        raw = raw.strip()
        if raw not in ("0", "1"):
            raise DataError(f"{provenance}: label must be 0 or 1, got {raw!r}", line_number)
        pairs.add(source.strip(), target.strip(), int(raw), line_number)

    logger.info(
        "loaded pairs file=%s positives=%d negatives=%d duplicates=%d",
        provenance, pairs.positives, pairs.negatives, pairs.duplicates_collapsed,
    )
    return pairs


def save_labeled_pairs(pairs: LabeledPairSet, path: Union[str, Path]) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    pairs.to_frame().to_csv(path, index=False, lineterminator="\n")
