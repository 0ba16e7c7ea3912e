"""Multi-scale code histograms."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from typing import Iterable, TextIO, Tuple

import numpy as np

from .kernels import code_bits, code_map
from .raster import build_pyramid

DEFAULT_LEVELS = 3


def histogram(codes, bins: int = 256) -> np.ndarray:
    """L1-normalised histogram of a code map.

    Counts are exact integers; the division by the pixel total is the only
    floating point step.
    """
    flat = np.asarray(codes).ravel()
    if flat.size == 0:
        raise ValueError("cannot build a histogram of an empty code map")
    if flat.max() >= bins:
        raise ValueError(f"code {int(flat.max())} does not fit in {bins} bins")
    counts = np.bincount(flat, minlength=bins)
    return counts / flat.size


@dataclass(frozen=True, eq=False)
class Descriptor:
    """Per-level histograms concatenated, level 0 first."""

    vector: np.ndarray
    kind: str
    levels: int
    params: dict = field(default_factory=dict)

    @property
    def bins(self) -> int:
        return len(self.vector) // self.levels

    def segments(self) -> Tuple[np.ndarray, ...]:
        return tuple(self.vector.reshape(self.levels, self.bins))


def describe(img, kind: str = "loop", levels: int = DEFAULT_LEVELS, k: int = 3,
             rank_key: str = "signed", workers: int = 1, backend=None) -> Descriptor:
    """Descriptor of one image: a code histogram per pyramid level.

    Each level's histogram is normalised on its own so every scale carries
    the same mass whatever its pixel count.
    """
    bins = 1 << code_bits(kind)
    pyramid = build_pyramid(img, levels, backend=backend)
    parts = [
        histogram(code_map(level, kind, k=k, rank_key=rank_key, workers=workers, backend=backend), bins)
        for level in pyramid
    ]
    return Descriptor(np.concatenate(parts), kind, levels, {"k": k, "rank_key": rank_key})


def write_descriptor_csv(rows: Iterable[Tuple[str, Descriptor]], fh: TextIO) -> int:
    """Write ``(path, descriptor)`` rows; returns the number of rows written.

    Columns are ``path, kind, levels, v0 .. vN`` with 9 significant digits.
    The header is written even when there are no rows.
    """
    writer = csv.writer(fh, lineterminator="\n")
    rows = iter(rows)
    first = next(rows, None)
    width = len(first[1].vector) if first is not None else 0
    writer.writerow(["path", "kind", "levels"] + [f"v{i}" for i in range(width)])
    count = 0
    for path, desc in ([first] if first is not None else []) + list(rows):
        writer.writerow([path, desc.kind, desc.levels] + [f"{v:.9g}" for v in desc.vector])
        count += 1
    return count


def read_descriptor_csv(fh: TextIO):
    """Inverse of :func:`write_descriptor_csv`; yields ``(path, kind, levels, vector)``."""
    reader = csv.reader(fh)
    header = next(reader)
    if header[:3] != ["path", "kind", "levels"]:
        raise ValueError(f"not a descriptor CSV: header starts {header[:3]}")
    for row in reader:
        yield row[0], row[1], int(row[2]), np.array([float(v) for v in row[3:]])
