"""``loopdesc`` command line: encode, describe, classify, stats, bench, synth."""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from . import _backend
from .classify import CLASSIFIERS, DEFAULT_LAMBDA, cross_validate, dataset_name, load_dataset, make_folds
from .descriptor import DEFAULT_LEVELS, describe, write_descriptor_csv
from .kernels import KINDS, RANK_KEYS, code_bits, code_map
from .raster import load_pgm, save_pgm, save_raw16
from .stats import format_report, read_results_csv, sign_test, write_report_csv, write_results_csv

log = logging.getLogger("loopdesc")

MIN_REPEAT = 3


class _Errors:
    """Counts emitted error lines; the exit status is nonzero iff any were."""

    def __init__(self):
        self.count = 0

    def __call__(self, msg):
        self.count += 1
        print(f"error: {msg}", file=sys.stderr)

    @property
    def status(self):
        return 1 if self.count else 0


def _positive_k(text):
    k = int(text)
    if not 1 <= k <= 8:
        raise argparse.ArgumentTypeError("k must be in 1..8")
    return k


def _at_least(n):
    def parse(text):
        v = int(text)
        if v < n:
            raise argparse.ArgumentTypeError(f"must be >= {n}")
        return v

    return parse


def _kernel_flags(p, multi=False):
    kinds = sorted(KINDS)
    if multi:
        p.add_argument("--kind", nargs="+", choices=kinds, default=["loop"], help="descriptor kinds")
    else:
        p.add_argument("--kind", choices=kinds, default="loop", help="descriptor kind (default: loop)")
    p.add_argument("--k", type=_positive_k, default=3, help="LDP threshold rank (default: 3)")
    p.add_argument("--rank-key", choices=RANK_KEYS, default="signed", help="Kirsch ranking key")
    p.add_argument("--workers", type=_at_least(1), default=1, help="threads for per-image / per-row work")


def _coarse_histogram(codes, bits):
    counts = np.bincount(codes.ravel() >> (bits - 4), minlength=16)
    return " ".join(str(c) for c in counts)


def cmd_encode(args, err):
    img = load_pgm(args.input)
    codes = code_map(img, args.kind, k=args.k, rank_key=args.rank_key, workers=args.workers)
    bits = code_bits(args.kind)
    if bits == 8:
        save_pgm(codes, args.out)
    else:
        save_raw16(codes, args.out, bits)
    h, w = codes.shape
    print(f"{args.kind} code map {w}x{h} -> {args.out}")
    print(f"coarse histogram (16 bins): {_coarse_histogram(codes, bits)}")
    return err.status


def _collect_images(inputs):
    paths = []
    for item in inputs:
        p = Path(item)
        if p.is_dir():
            paths.extend(sorted(str(q) for q in p.rglob("*") if q.is_file() and q.suffix.lower() == ".pgm"))
        else:
            paths.append(str(p))
    return paths


def cmd_describe(args, err):
    paths = _collect_images(args.inputs)
    if not paths:
        err("no PGM images found")
        return err.status
    rows = []
    for path in paths:
        try:
            desc = describe(load_pgm(path), args.kind, args.levels, k=args.k, rank_key=args.rank_key,
                            workers=args.workers)
        except (OSError, ValueError) as exc:
            err(f"{path}: {exc}")
            continue
        rows.append((path, desc))
    with open(args.out, "w", newline="") as fh:
        n = write_descriptor_csv(rows, fh)
    print(f"wrote {n} descriptor rows to {args.out}")
    return err.status


def _summary(records):
    groups = {}
    for r in records:
        groups.setdefault((r.descriptor, r.classifier), []).append(r.accuracy)
    lines = [f"{'descriptor':<10} {'classifier':<10} {'mean':>7}   {'std':>6}  folds"]
    for (desc, clf), accs in groups.items():
        a = np.array(accs)
        std = a.std(ddof=1) if len(a) > 1 else 0.0
        lines.append(f"{desc:<10} {clf:<10} {a.mean():7.2f} ± {std:6.2f}  {len(a)}")
    return "\n".join(lines)


def cmd_classify(args, err):
    name = dataset_name(args.root)
    rotate = args.seed if args.rotate_queries else None
    records = []
    for kind in args.kind:
        data, skipped = load_dataset(args.root, kind, args.levels, k=args.k, rank_key=args.rank_key,
                                     rotate_queries=rotate, workers=args.workers)
        if skipped and kind == args.kind[0]:
            print(f"skipped {len(skipped)} non-PGM file(s)")
        plan = make_folds(data.labels, args.folds, args.seed)
        for clf in args.classifier:
            records += cross_validate(data, plan, clf, lam=args.lam, descriptor=kind, dataset=name,
                                      workers=args.workers)
    with open(args.out, "w", newline="") as fh:
        write_results_csv(records, fh)
    print(_summary(records))
    print(f"wrote {len(records)} records to {args.out}")
    return err.status


def _select(records, descriptor, side):
    if descriptor:
        records = [r for r in records if r.descriptor == descriptor]
    names = sorted({r.descriptor for r in records})
    if len(names) != 1:
        raise ValueError(f"{side} must hold exactly one descriptor (found {names or 'none'}); "
                         f"pick one with --{side.lower()}-descriptor")
    return records, names[0]


def cmd_stats(args, err):
    with open(args.a) as fh:
        a = read_results_csv(fh)
    with open(args.b) as fh:
        b = read_results_csv(fh)
    a, name_a = _select(a, args.a_descriptor, "A")
    b, name_b = _select(b, args.b_descriptor, "B")
    res = sign_test(a, b, alpha=args.alpha, m=args.m)
    sys.stdout.write(format_report(res, name_a, name_b))
    if args.out:
        with open(args.out, "w", newline="") as fh:
            write_report_csv(res, fh, name_a, name_b)
    return err.status


def bench(images, kinds, backends, repeat=MIN_REPEAT, k=3, rank_key="signed"):
    """Median code-map throughput in megapixels per second.

    Returns ``{(kind, backend): mp_per_s}``. One untimed pass warms each
    combination before ``repeat`` timed passes.
    """
    if repeat < MIN_REPEAT:
        raise ValueError(f"at least {MIN_REPEAT} repetitions are required, got {repeat}")
    if not images:
        raise ValueError("no images to benchmark")
    megapixels = sum(img.size for img in images) / 1e6
    out = {}
    for kind in kinds:
        for backend in backends:
            for img in images:
                code_map(img, kind, k=k, rank_key=rank_key, backend=backend)
            times = []
            for _ in range(repeat):
                t0 = time.perf_counter()
                for img in images:
                    code_map(img, kind, k=k, rank_key=rank_key, backend=backend)
                times.append(time.perf_counter() - t0)
            out[kind, backend] = megapixels / max(float(np.median(times)), 1e-12)
    return out


def cmd_bench(args, err):
    if args.repeat < MIN_REPEAT:
        err(f"--repeat must be >= {MIN_REPEAT}")
        return err.status
    paths = _collect_images([args.root])
    if not paths:
        err(f"no PGM images under {args.root}")
        return err.status
    images = [load_pgm(p) for p in paths]
    backends = _backend.available() if args.backend == "all" else [args.backend]
    rates = bench(images, args.kind, backends, args.repeat, args.k, args.rank_key)
    print(f"{len(images)} images, {sum(i.size for i in images) / 1e6:.3f} MP, median of {args.repeat} runs")
    print(f"{'descriptor':<10} {'backend':<8} {'MP/s':>10}")
    for (kind, backend), rate in rates.items():
        print(f"{kind:<10} {backend:<8} {rate:10.2f}")
    if len(backends) > 1 and "native" in backends:
        for kind in args.kind:
            print(f"speedup {kind}: native is {rates[kind, 'native'] / rates[kind, 'python']:.1f}x the numpy fallback")
    return err.status


def cmd_synth(args, err):
    from .synth import make_corpus, write_corpus

    images, labels = make_corpus(args.per_class, args.size, args.seed)
    paths = write_corpus(args.root, images, labels)
    print(f"wrote {len(paths)} images in {len(set(labels))} classes under {args.root}")
    return err.status


def build_parser():
    parser = argparse.ArgumentParser(prog="loopdesc", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("encode", help="write the code map of one image")
    p.add_argument("input")
    p.add_argument("--out", required=True, help="output PGM (16-bit raw + .hdr sidecar for mct)")
    _kernel_flags(p)
    p.set_defaults(func=cmd_encode)

    p = sub.add_parser("describe", help="multi-scale descriptor CSV for images or directories")
    p.add_argument("inputs", nargs="+")
    p.add_argument("--out", required=True)
    p.add_argument("--levels", type=_at_least(1), default=DEFAULT_LEVELS)
    _kernel_flags(p)
    p.set_defaults(func=cmd_describe)

    p = sub.add_parser("classify", help="stratified k-fold cross-validation over a class-per-directory corpus")
    p.add_argument("root")
    p.add_argument("--out", default="results.csv")
    p.add_argument("--levels", type=_at_least(1), default=DEFAULT_LEVELS)
    p.add_argument("--folds", type=_at_least(2), default=5)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--lambda", dest="lam", type=float, default=DEFAULT_LAMBDA, help="CRC regulariser")
    p.add_argument("--classifier", nargs="+", choices=CLASSIFIERS, default=list(CLASSIFIERS))
    p.add_argument("--rotate-queries", action="store_true",
                   help="classify test items from copies rotated by seeded random multiples of 90 degrees")
    _kernel_flags(p, multi=True)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("stats", help="one-tailed sign test between two results CSVs")
    p.add_argument("a", help="results CSV for method A")
    p.add_argument("b", help="results CSV for method B")
    p.add_argument("--alpha", type=float, default=0.05)
    p.add_argument("--m", type=_at_least(1), default=1, help="number of comparisons for Bonferroni")
    p.add_argument("--a-descriptor")
    p.add_argument("--b-descriptor")
    p.add_argument("--out", help="also write the report as CSV")
    p.set_defaults(func=cmd_stats)

    p = sub.add_parser("bench", help="code-map throughput per descriptor and backend")
    p.add_argument("root")
    p.add_argument("--repeat", type=int, default=MIN_REPEAT)
    p.add_argument("--backend", choices=["all", "native", "python"], default="all")
    _kernel_flags(p, multi=True)
    p.set_defaults(func=cmd_bench, kind=["lbp", "loop"])

    p = sub.add_parser("synth", help="write a synthetic oriented-texture corpus")
    p.add_argument("root")
    p.add_argument("--per-class", type=_at_least(1), default=40)
    p.add_argument("--size", type=_at_least(8), default=64)
    p.add_argument("--seed", type=int, default=42)
    p.set_defaults(func=cmd_synth)
    return parser


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING,
                        format="%(levelname)s: %(message)s")
    err = _Errors()
    try:
        return args.func(args, err)
    except (OSError, ValueError, np.linalg.LinAlgError) as exc:
        err(str(exc))
        return err.status


if __name__ == "__main__":
    sys.exit(main())
