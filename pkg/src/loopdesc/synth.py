"""Seeded synthetic texture corpora for smoke benchmarks and tests."""

from __future__ import annotations

from pathlib import Path
from typing import List, Tuple

import numpy as np

from .raster import save_pgm

TEXTURES = ("stripes", "sawtooth", "diagonal", "bricks")


def _grid(size):
    return np.mgrid[0:size, 0:size].astype(float)


def texture(name: str, size: int, rng: np.random.Generator) -> np.ndarray:
    """One ``size x size`` sample of a named oriented texture."""
    y, x = _grid(size)
    phase = rng.uniform(0, 2 * np.pi)
    if name == "stripes":
        base = 0.5 + 0.4 * np.sin(2 * np.pi * y / rng.uniform(5.0, 7.0) + phase)
    elif name == "sawtooth":
        period = rng.uniform(6.0, 8.0)
        base = 0.1 + 0.8 * (((x + phase * period) / period) % 1.0)
    elif name == "diagonal":
        base = 0.5 + 0.4 * np.sin(2 * np.pi * (x + y) / rng.uniform(7.0, 9.0) + phase)
    elif name == "bricks":
        period = rng.integers(6, 9)
        rows = (y + rng.integers(0, period)) // period
        shift = (rows % 2) * period
        mortar = ((y % period) == 0) | (((x + shift + rng.integers(0, 2 * period)) % (2 * period)) == 0)
        base = np.where(mortar, 0.15, 0.75)
    else:
        raise ValueError(f"unknown texture {name!r}; expected one of {TEXTURES}")
    noisy = base + rng.normal(0.0, 0.06, size=base.shape)
    return np.clip(np.rint(255 * noisy), 0, 255).astype(np.uint8)


def make_corpus(n_per_class: int = 40, size: int = 64, seed: int = 42,
                classes=TEXTURES) -> Tuple[List[np.ndarray], List[str]]:
    """Images in canonical orientation and their labels, class by class."""
    rng = np.random.default_rng(seed)
    images, labels = [], []
    for name in classes:
        for _ in range(n_per_class):
            images.append(texture(name, size, rng))
            labels.append(name)
    return images, labels


def write_corpus(root, images, labels) -> List[str]:
    """Write a directory-per-class PGM corpus; returns the written paths."""
    root = Path(root)
    paths = []
    counts = {}
    for img, label in zip(images, labels):
        (root / label).mkdir(parents=True, exist_ok=True)
        j = counts.get(label, 0)
        counts[label] = j + 1
        path = root / label / f"{label}_{j:03d}.pgm"
        save_pgm(img, path)
        paths.append(str(path))
    return paths
