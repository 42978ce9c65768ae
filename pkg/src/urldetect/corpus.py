"""URL corpus handling: CSV ingestion, character vocabulary, encoding, splits.

URLs are treated as byte sequences. Every byte in the printable ASCII range
(32..126) has its own vocabulary index; anything else maps to the reserved
out-of-vocabulary index. Index 0 is reserved for padding.
"""

from __future__ import annotations

import csv
from collections import Counter
from dataclasses import dataclass
from enum import IntEnum

import numpy as np

PAD_INDEX = 0
OOV_INDEX = 1


class CorpusError(ValueError):
    """Raised for unreadable or malformed corpus files."""


class UnknownLabelError(CorpusError):
    """Raised when a CSV row carries a label outside the four known classes."""

    def __init__(self, label: str, row: int):
        super().__init__(f"unknown label {label!r} at row {row}")
        self.label = label
        self.row = row


class UrlClass(IntEnum):
    """The four URL categories. Integer codes are stable and serialized."""

    BENIGN = 0
    PHISHING = 1
    DEFACEMENT = 2
    MALWARE = 3

    @property
    def label(self) -> str:
        return self.name.lower()

    @classmethod
    def from_label(cls, text: str, row: int | None = None) -> "UrlClass":
        try:
            return cls[text.strip().upper()]
        except KeyError:
            raise UnknownLabelError(text, -1 if row is None else row) from None


@dataclass(frozen=True)
class UrlRecord:
    url: str
    label: UrlClass

    def __post_init__(self):
        if not self.url.strip():
            raise CorpusError("url is empty after trimming")


class Vocabulary:
    """Character-to-index map with reserved padding and OOV slots.

    `chars` maps single characters to indices in [2, size). The map must be
    injective and may not use the reserved indices 0 (pad) and 1 (oov).
    """

    pad_index = PAD_INDEX
    oov_index = OOV_INDEX

    def __init__(self, chars: dict[str, int]):
        indices = list(chars.values())
        if len(set(indices)) != len(indices):
            raise ValueError("vocabulary map is not injective")
        if any(i in (PAD_INDEX, OOV_INDEX) for i in indices):
            raise ValueError("vocabulary uses a reserved index")
        self.chars = dict(chars)
        self.size = 2 + len(chars)
        if any(not (0 <= i < self.size) for i in indices):
            raise ValueError("vocabulary index out of range")
        # Byte-value lookup table used on the encoding hot path.
        self._table = np.full(256, OOV_INDEX, dtype=np.int32)
        for ch, idx in chars.items():
            code = ord(ch)
            if code < 256:
                self._table[code] = idx

    def index_of(self, ch: str) -> int | None:
        """Index of a single character, or None when absent (encodes as OOV)."""
        return self.chars.get(ch)

    def encode_bytes(self, data: bytes) -> np.ndarray:
        raw = np.frombuffer(data, dtype=np.uint8)
        return self._table[raw]

    def __eq__(self, other) -> bool:
        return isinstance(other, Vocabulary) and self.chars == other.chars


def default_vocabulary() -> Vocabulary:
    """The fixed 97-entry vocabulary: printable ASCII 32..126 at indices 2..96."""
    return Vocabulary({chr(c): 2 + (c - 32) for c in range(32, 127)})


@dataclass
class EncodedSequence:
    """Fixed-length index vector plus the unpadded length."""

    indices: np.ndarray
    valid_len: int


def encode_url(url: str, vocab: Vocabulary, max_len: int) -> EncodedSequence:
    """Encode a URL's bytes to a padded index vector of length max_len.

    The URL is encoded as UTF-8 bytes; bytes outside printable ASCII map to
    the OOV index. Content beyond max_len is tail-truncated. Case preserved.
    """
    if not url:
        raise ValueError("cannot encode an empty url")
    if max_len < 1:
        raise ValueError("max_len must be >= 1")
    data = url.encode("utf-8")[:max_len]
    indices = np.full(max_len, PAD_INDEX, dtype=np.int32)
    indices[: len(data)] = vocab.encode_bytes(data)
    return EncodedSequence(indices=indices, valid_len=len(data))


@dataclass(frozen=True)
class SplitSpec:
    test_fraction: float
    seed: int

    def __post_init__(self):
        if not 0.0 < self.test_fraction < 1.0:
            raise ValueError("test_fraction must be in (0, 1)")


def stratified_split(
    records: list[UrlRecord], spec: SplitSpec
) -> tuple[list[UrlRecord], list[UrlRecord]]:
    """Deterministic per-class split; test gets round(count * fraction) of each class.

    Output preserves the input's relative order within each part, so the same
    (records, spec) pair always yields byte-identical splits.
    """
    by_class: dict[UrlClass, list[int]] = {c: [] for c in UrlClass}
    for pos, rec in enumerate(records):
        by_class[rec.label].append(pos)
    for cls, positions in by_class.items():
        if len(positions) < 2:
            raise ValueError(f"class {cls.label} has fewer than 2 records")

    rng = np.random.default_rng(spec.seed)
    test_positions: list[int] = []
    for cls in UrlClass:
        positions = by_class[cls]
        n_test = round(len(positions) * spec.test_fraction)
        perm = rng.permutation(len(positions))
        test_positions.extend(positions[i] for i in perm[:n_test])

    in_test = set(test_positions)
    test = [records[i] for i in sorted(in_test)]
    train = [records[i] for i in range(len(records)) if i not in in_test]
    return train, test


def class_distribution(records: list[UrlRecord]) -> dict[UrlClass, int]:
    counts = Counter(rec.label for rec in records)
    return {cls: counts.get(cls, 0) for cls in UrlClass}


def load_csv(path: str) -> list[UrlRecord]:
    """Load a `url,type` CSV (header required) into records, order preserved."""
    try:
        fh = open(path, newline="", encoding="utf-8")
    except OSError as exc:
        raise CorpusError(f"cannot read {path}: {exc}") from exc
    records = []
    with fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or not {"url", "type"} <= set(reader.fieldnames):
            raise CorpusError(f"{path}: expected header with 'url' and 'type' columns")
        for row_num, row in enumerate(reader, start=2):
            url = (row.get("url") or "").strip()
            if not url:
                raise CorpusError(f"{path}: missing url field at row {row_num}")
            label_text = row.get("type") or ""
            label = UrlClass.from_label(label_text, row=row_num)
            records.append(UrlRecord(url=url, label=label))
    return records


def dump_csv(records: list[UrlRecord], path: str) -> None:
    """Write records back out in the same `url,type` schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["url", "type"])
        for rec in records:
            writer.writerow([rec.url, rec.label.label])
