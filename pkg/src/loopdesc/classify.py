"""Dataset loading, chi-squared nearest neighbour, regularised CRC and
stratified k-fold cross-validation."""

from __future__ import annotations

import logging
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Sequence, Tuple

import numpy as np
from scipy import linalg

from .descriptor import describe
from .raster import load_pgm
from .stats import AccuracyRecord

log = logging.getLogger(__name__)

CLASSIFIERS = ("nn", "crc")
DEFAULT_LAMBDA = 1e-3


@dataclass
class LabeledSet:
    """Descriptor vectors (one row per item) with class labels.

    ``queries``, when set, holds the vectors used when an item is a *test*
    item, e.g. descriptors of rotated copies of the images.
    """

    vectors: np.ndarray
    labels: List[str]
    paths: List[str]
    classes: List[str]
    queries: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vectors = np.atleast_2d(np.asarray(self.vectors, dtype=float))
        if len(self.labels) != len(self.vectors) or len(self.paths) != len(self.vectors):
            raise ValueError("vectors, labels and paths must have the same length")
        if self.queries is not None:
            self.queries = np.atleast_2d(np.asarray(self.queries, dtype=float))
            if self.queries.shape != self.vectors.shape:
                raise ValueError("queries must have the same shape as vectors")
        unknown = set(self.labels) - set(self.classes)
        if unknown:
            raise ValueError(f"labels not among classes: {sorted(unknown)}")

    def __len__(self):
        return len(self.labels)

    @property
    def label_ids(self) -> np.ndarray:
        lookup = {c: i for i, c in enumerate(self.classes)}
        return np.array([lookup[l] for l in self.labels], dtype=int)

    def subset(self, idx) -> "LabeledSet":
        idx = np.asarray(idx, dtype=int)
        return LabeledSet(
            self.vectors[idx], [self.labels[i] for i in idx], [self.paths[i] for i in idx], list(self.classes),
            None if self.queries is None else self.queries[idx],
        )


def scan_dataset(root) -> Tuple[List[Tuple[str, str]], List[str]]:
    """List ``(path, label)`` pairs under a directory-per-class layout.

    Files without a ``.pgm`` extension are skipped and returned in the
    second list.
    """
    root = Path(root)
    if not root.is_dir():
        raise FileNotFoundError(f"dataset root {root} is not a directory")
    classes = sorted(p.name for p in root.iterdir() if p.is_dir())
    if len(classes) < 2:
        raise ValueError(f"need >= 2 classes, found {len(classes)} under {root}")
    items, skipped = [], []
    for label in classes:
        n_before = len(items)
        for path in sorted((root / label).iterdir()):
            if not path.is_file():
                continue
            if path.suffix.lower() != ".pgm":
                log.warning("skipping non-PGM file %s", path)
                skipped.append(str(path))
                continue
            items.append((str(path), label))
        if len(items) == n_before:
            raise ValueError(f"class directory {root / label} contains no PGM images")
    return items, skipped


def quarter_turns(n: int, seed: int) -> np.ndarray:
    """Seeded random multiples of 90 degrees, one per item."""
    return np.random.default_rng([seed, 90]).integers(0, 4, size=n)


def describe_set(images, labels, paths=None, kind: str = "loop", levels: int = 3, k: int = 3,
                 rank_key: str = "signed", rotate_queries: Optional[int] = None, workers: int = 1,
                 backend=None) -> LabeledSet:
    """Describe in-memory images into a :class:`LabeledSet`.

    With ``rotate_queries`` set to a seed, each item also gets a query
    vector computed from its image rotated by a random multiple of 90
    degrees (see :func:`quarter_turns`).
    """
    images = list(images)
    paths = [str(i) for i in range(len(images))] if paths is None else list(paths)

    def one(img):
        return describe(img, kind, levels, k=k, rank_key=rank_key, backend=backend).vector

    work = list(images)
    if rotate_queries is not None:
        turns = quarter_turns(len(images), rotate_queries)
        work += [np.ascontiguousarray(np.rot90(img, int(t))) for img, t in zip(images, turns)]
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            vectors = list(pool.map(one, work))
    else:
        vectors = [one(img) for img in work]
    n = len(images)
    queries = np.vstack(vectors[n:]) if rotate_queries is not None else None
    return LabeledSet(np.vstack(vectors[:n]), list(labels), paths, sorted(set(labels)), queries)


def load_dataset(root, kind: str = "loop", levels: int = 3, k: int = 3, rank_key: str = "signed",
                 rotate_queries: Optional[int] = None, workers: int = 1,
                 backend=None) -> Tuple[LabeledSet, List[str]]:
    """Describe every image of a directory-per-class corpus.

    Returns the labelled set and the list of skipped non-PGM files.
    Class labels are the sorted subdirectory names; items are sorted by
    path within each class.
    """
    items, skipped = scan_dataset(root)
    images = []
    for path, _ in items:
        try:
            images.append(load_pgm(path))
        except (OSError, ValueError) as exc:
            raise ValueError(f"{path}: {exc}") from exc
    data = describe_set(images, [l for _, l in items], [p for p, _ in items], kind, levels, k, rank_key,
                        rotate_queries, workers, backend)
    return data, skipped


def chi2_distance(h, g) -> float:
    """Sum of ``(h - g)^2 / (h + g)`` over bins where ``h + g > 0``."""
    h = np.asarray(h, dtype=float)
    g = np.asarray(g, dtype=float)
    if h.shape != g.shape:
        raise ValueError(f"length mismatch: {h.shape} vs {g.shape}")
    return float(chi2_distances(h[None, :], g)[0])


def chi2_distances(X, y) -> np.ndarray:
    """Chi-squared distance from ``y`` to every row of ``X``."""
    s = X + y
    d = X - y
    # divide before squaring so tiny bins do not underflow to zero
    q = np.divide(d, s, out=np.zeros_like(d), where=s > 0)
    return (q * d).sum(axis=1)


def nn_classify(train: LabeledSet, query) -> str:
    """Label of the chi-squared nearest training item; earliest item wins ties."""
    if len(train) == 0:
        raise ValueError("empty training set")
    return train.labels[int(np.argmin(chi2_distances(train.vectors, np.asarray(query, dtype=float))))]


class CRC:
    """Collaborative representation classifier with ridge regularisation.

    A query is coded over all training vectors jointly and assigned to the
    class whose own vectors and coefficients reconstruct it best.
    """

    def __init__(self, lam: float = DEFAULT_LAMBDA):
        if lam < 0:
            raise ValueError(f"lambda must be >= 0, got {lam}")
        self.lam = lam

    def fit(self, train: LabeledSet) -> "CRC":
        X = train.vectors
        if len(X) == 0:
            raise ValueError("empty training set")
        gram = X @ X.T
        if self.lam == 0 and np.linalg.matrix_rank(gram) < len(X):
            raise np.linalg.LinAlgError("training Gram matrix is singular; use lambda > 0")
        gram[np.diag_indices_from(gram)] += self.lam
        try:
            self._factor = linalg.cho_factor(gram)
        except linalg.LinAlgError as exc:
            raise np.linalg.LinAlgError(f"normal equations are not positive definite ({exc}); use lambda > 0") from None
        self._X = X
        self._ids = train.label_ids
        self.classes = list(train.classes)
        return self

    def coefficients(self, Y) -> np.ndarray:
        """Coding coefficients, one column per query row of ``Y``."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        return linalg.cho_solve(self._factor, self._X @ Y.T)

    def residuals(self, Y) -> np.ndarray:
        """Per-class reconstruction error, shape ``(n_queries, n_classes)``."""
        Y = np.atleast_2d(np.asarray(Y, dtype=float))
        A = self.coefficients(Y)
        out = np.empty((len(Y), len(self.classes)))
        for c in range(len(self.classes)):
            mask = self._ids == c
            recon = A[mask].T @ self._X[mask]
            out[:, c] = np.linalg.norm(Y - recon, axis=1)
        return out

    def predict(self, Y) -> List[str]:
        return [self.classes[i] for i in np.argmin(self.residuals(Y), axis=1)]


def crc_classify(train: LabeledSet, query, lam: float = DEFAULT_LAMBDA) -> str:
    return CRC(lam).fit(train).predict(query)[0]


@dataclass(frozen=True)
class FoldPlan:
    k: int
    assignment: np.ndarray
    seed: int

    def test_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment == fold)

    def train_indices(self, fold: int) -> np.ndarray:
        return np.flatnonzero(self.assignment != fold)


def make_folds(labels: Sequence[str], k: int = 5, seed: int = 42) -> FoldPlan:
    """Stratified fold assignment.

    Each class is shuffled with one seeded generator and dealt round-robin;
    the dealing position carries over between classes so fold sizes also
    stay balanced.
    """
    n = len(labels)
    if k < 2:
        raise ValueError(f"need >= 2 folds, got {k}")
    if k > n:
        raise ValueError(f"{k} folds requested for {n} items")
    rng = np.random.default_rng(seed)
    assignment = np.empty(n, dtype=int)
    labels = list(labels)
    start = 0
    for c in sorted(set(labels)):
        idx = np.array([i for i, l in enumerate(labels) if l == c])
        idx = idx[rng.permutation(len(idx))]
        assignment[idx] = (start + np.arange(len(idx))) % k
        start = (start + len(idx)) % k
    return FoldPlan(k, assignment, seed)


def _run_fold(data, queries, plan, fold, classifier, lam):
    train_idx, test_idx = plan.train_indices(fold), plan.test_indices(fold)
    train = data.subset(train_idx)
    Y = queries[test_idx]
    if classifier == "nn":
        predicted = [nn_classify(train, y) for y in Y]
    else:
        predicted = CRC(lam).fit(train).predict(Y)
    correct = sum(p == data.labels[i] for p, i in zip(predicted, test_idx))
    return correct, len(test_idx)


def cross_validate(data: LabeledSet, plan: FoldPlan, classifier: str = "nn", lam: float = DEFAULT_LAMBDA,
                   descriptor: str = "", dataset: str = "", workers: int = 1) -> List[AccuracyRecord]:
    """Accuracy per fold, training on the complement of each fold.

    Test items are classified by ``data.queries`` when present. Records
    come back in fold order whatever ``workers`` is.
    """
    if classifier not in CLASSIFIERS:
        raise ValueError(f"unknown classifier {classifier!r}; expected one of {CLASSIFIERS}")
    if len(plan.assignment) != len(data):
        raise ValueError("fold plan does not match the data set size")
    queries = data.vectors if data.queries is None else data.queries
    # check for starved classes up front so no fold work is wasted
    for fold in range(plan.k):
        present = {data.labels[i] for i in plan.train_indices(fold)}
        for c in data.classes:
            if c not in present:
                raise ValueError(f"fold {fold} leaves no training items for class {c!r}")

    def run(fold):
        return _run_fold(data, queries, plan, fold, classifier, lam)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            outcomes = list(pool.map(run, range(plan.k)))
    else:
        outcomes = [run(f) for f in range(plan.k)]
    return [
        AccuracyRecord(descriptor, classifier, dataset, fold, 100.0 * correct / total, total, plan.seed)
        for fold, (correct, total) in enumerate(outcomes)
    ]


def dataset_name(root) -> str:
    return os.path.basename(os.path.normpath(str(root)))
