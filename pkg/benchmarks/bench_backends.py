"""Compare the compiled kernel core with the numpy fallback.

Times code maps for every descriptor kind and the pyramid blur on random
images, reporting median megapixels per second per backend and the
native/fallback ratio.

    python benchmarks/bench_backends.py --size 512 --repeat 5
"""

import argparse
import time

import numpy as np

from loopdesc import _backend
from loopdesc.kernels import KINDS, code_map
from loopdesc.raster import gaussian_blur


def median_rate(fn, img, repeat):
    fn(img)
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(img)
        times.append(time.perf_counter() - t0)
    return img.size / 1e6 / float(np.median(times))


def main(argv=None):
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    img = np.random.default_rng(args.seed).integers(0, 256, (args.size, args.size), dtype=np.uint8)
    backends = _backend.available()
    jobs = {"blur": lambda b: (lambda x: gaussian_blur(x, backend=b))}
    for kind in sorted(KINDS):
        jobs[kind] = lambda b, kind=kind: (lambda x: code_map(x, kind, workers=args.workers, backend=b))

    print(f"{args.size}x{args.size} random image, median of {args.repeat}, workers={args.workers}")
    print(f"{'op':<8}" + "".join(f"{b + ' MP/s':>14}" for b in backends) + ("   speedup" if len(backends) > 1 else ""))
    for name, make in jobs.items():
        rates = [median_rate(make(b), img, args.repeat) for b in backends]
        row = f"{name:<8}" + "".join(f"{r:14.2f}" for r in rates)
        if len(backends) > 1:
            row += f"   {rates[0] / rates[1]:6.1f}x"
        print(row)


if __name__ == "__main__":
    main()
