"""Paired sign test with Bonferroni correction over accuracy records."""

from __future__ import annotations

import csv
from dataclasses import asdict, dataclass, fields
from fractions import Fraction
from math import comb
from typing import Iterable, List, Sequence, TextIO

RESULT_COLUMNS = ("descriptor", "classifier", "dataset", "fold", "accuracy_percent", "n_test", "seed")


@dataclass(frozen=True)
class AccuracyRecord:
    descriptor: str
    classifier: str
    dataset: str
    fold: int
    accuracy: float
    n_test: int = 0
    seed: int = 0

    @property
    def key(self):
        return (self.classifier, self.dataset, self.fold)


@dataclass(frozen=True)
class SignTestResult:
    n: int
    wins: int
    ties: int
    p_one_tail: float
    alpha_corrected: float
    significant: bool

    @property
    def informative(self) -> bool:
        return self.n > 0


def binom_tail_exact(n: int, w: int) -> Fraction:
    """P(X >= w) for X ~ Binomial(n, 1/2) as an exact fraction."""
    if n < 0 or not 0 <= w <= n:
        raise ValueError(f"need 0 <= w <= n, got n={n}, w={w}")
    return Fraction(sum(comb(n, j) for j in range(w, n + 1)), 2 ** n)


def binom_one_tail(n: int, w: int) -> float:
    """One-tailed sign-test p-value: probability of at least ``w`` wins in ``n`` fair trials."""
    return float(binom_tail_exact(n, w))


def bonferroni(alpha: float, m: int) -> float:
    if not 0 < alpha < 1:
        raise ValueError(f"alpha must lie in (0, 1), got {alpha}")
    if m < 1:
        raise ValueError(f"number of comparisons must be >= 1, got {m}")
    return alpha / m


class KeyMismatchError(ValueError):
    def __init__(self, only_a, only_b):
        self.only_a = sorted(only_a)
        self.only_b = sorted(only_b)
        parts = []
        if self.only_a:
            parts.append("missing from B: " + ", ".join(map(_fmt_key, self.only_a)))
        if self.only_b:
            parts.append("missing from A: " + ", ".join(map(_fmt_key, self.only_b)))
        super().__init__("record keys differ; " + "; ".join(parts))


def _fmt_key(key) -> str:
    classifier, dataset, fold = key
    return f"{classifier}/{dataset}/fold{fold}"


def _index(records: Iterable[AccuracyRecord], side: str) -> dict:
    out = {}
    for r in records:
        if r.key in out:
            raise ValueError(f"duplicate record {_fmt_key(r.key)} in {side}")
        out[r.key] = r.accuracy
    return out


def sign_test(a: Sequence[AccuracyRecord], b: Sequence[AccuracyRecord],
              alpha: float = 0.05, m: int = 1) -> SignTestResult:
    """Test whether method A beats method B more often than chance.

    Records are paired on (classifier, dataset, fold). A win is a strictly
    higher accuracy; exact ties are dropped before testing. With no
    informative pairs left the result is reported as not significant.
    """
    acc_a, acc_b = _index(a, "A"), _index(b, "B")
    if acc_a.keys() != acc_b.keys():
        raise KeyMismatchError(acc_a.keys() - acc_b.keys(), acc_b.keys() - acc_a.keys())
    wins = sum(acc_a[key] > acc_b[key] for key in acc_a)
    ties = sum(acc_a[key] == acc_b[key] for key in acc_a)
    n = len(acc_a) - ties
    alpha_c = bonferroni(alpha, m)
    p = binom_one_tail(n, wins) if n else 1.0
    return SignTestResult(n, wins, ties, p, alpha_c, bool(n) and p < alpha_c)


def format_report(res: SignTestResult, label_a: str = "A", label_b: str = "B") -> str:
    lines = [
        f"sign test: {label_a} vs {label_b} (one-tailed, ties dropped)",
        f"  n (informative pairs): {res.n}",
        f"  wins for {label_a}: {res.wins}",
        f"  ties dropped: {res.ties}",
        f"  p: {res.p_one_tail:.6f}",
        f"  corrected alpha: {res.alpha_corrected:.6f}",
    ]
    if not res.informative:
        verdict = "no informative pairs; not significant"
    elif res.significant:
        verdict = "significant"
    else:
        verdict = "not significant"
    lines.append(f"  verdict: {verdict}")
    return "\n".join(lines) + "\n"


def write_report_csv(res: SignTestResult, fh: TextIO, label_a: str = "A", label_b: str = "B") -> None:
    writer = csv.writer(fh, lineterminator="\n")
    names = [f.name for f in fields(res)]
    writer.writerow(["method_a", "method_b"] + names)
    row = asdict(res)
    row["p_one_tail"] = f"{res.p_one_tail:.6f}"
    row["alpha_corrected"] = f"{res.alpha_corrected:.6f}"
    writer.writerow([label_a, label_b] + [row[k] for k in names])


def write_results_csv(records: Iterable[AccuracyRecord], fh: TextIO) -> None:
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(RESULT_COLUMNS)
    for r in records:
        writer.writerow([r.descriptor, r.classifier, r.dataset, r.fold, f"{r.accuracy:.2f}", r.n_test, r.seed])


def read_results_csv(fh: TextIO) -> List[AccuracyRecord]:
    reader = csv.DictReader(fh)
    missing = set(RESULT_COLUMNS) - set(reader.fieldnames or ())
    if missing:
        raise ValueError(f"results CSV lacks columns: {', '.join(sorted(missing))}")
    return [
        AccuracyRecord(
            row["descriptor"], row["classifier"], row["dataset"], int(row["fold"]),
            float(row["accuracy_percent"]), int(row["n_test"]), int(row["seed"]),
        )
        for row in reader
    ]
