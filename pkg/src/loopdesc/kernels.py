"""Per-pixel descriptor codes on 3x3 neighbourhoods.

Neighbours are numbered 0..7 clockwise starting at the top-left pixel::

    0 1 2
    7 c 3
    6 5 4

The scalar functions here work on a single :class:`Patch3` and are the
readable reference. :func:`code_map` runs the same rules over a whole image
through the compiled (or numpy fallback) backend.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Iterable, NamedTuple, Sequence, Tuple

import numpy as np

from . import _backend
from ._pure import LBP, LDP, LDP_RI, LGP, LOOP, MCT, OFFSETS
from .raster import check_gray

KINDS = {"lbp": LBP, "mct": MCT, "lgp": LGP, "ldp": LDP, "ldp-ri": LDP_RI, "loop": LOOP}
RANK_KEYS = ("signed", "absolute")


def code_bits(kind: str) -> int:
    """Word length of a descriptor: 9 for MCT, 8 for the rest."""
    _kind_id(kind)
    return 9 if kind == "mct" else 8


def _kind_id(kind: str) -> int:
    try:
        return KINDS[kind]
    except KeyError:
        raise ValueError(f"unknown descriptor kind {kind!r}; expected one of {sorted(KINDS)}") from None


def _check_k(k: int) -> None:
    if not 1 <= k <= 8:
        raise ValueError(f"LDP threshold k must be in 1..8, got {k}")


def _check_rank_key(rank_key: str) -> None:
    if rank_key not in RANK_KEYS:
        raise ValueError(f"rank_key must be one of {RANK_KEYS}, got {rank_key!r}")


class Patch3(NamedTuple):
    """A center intensity and its 8 neighbours in clockwise order."""

    center: int
    neighbors: Tuple[int, ...]

    @classmethod
    def from_array(cls, block) -> "Patch3":
        a = np.asarray(block)
        if a.shape != (3, 3):
            raise ValueError(f"patch must be 3x3, got {a.shape}")
        return cls(int(a[1, 1]), tuple(int(a[1 + dy, 1 + dx]) for dy, dx in OFFSETS))

    def to_array(self) -> np.ndarray:
        a = np.empty((3, 3), dtype=np.uint8)
        a[1, 1] = self.center
        for (dy, dx), v in zip(OFFSETS, self.neighbors):
            a[1 + dy, 1 + dx] = v
        return a

    def rotated(self, quarter_turns: int = 1) -> "Patch3":
        """Rotate by ``quarter_turns`` x 90 degrees (a ring shift by 2 per turn)."""
        s = (2 * quarter_turns) % 8
        nb = self.neighbors
        return Patch3(self.center, tuple(nb[(n - s) % 8] for n in range(8)))


def kirsch_responses(p: Patch3) -> Tuple[int, ...]:
    """Responses of the 8 Kirsch compass masks, mask ``n`` pointing at neighbour ``n``.

    Mask ``n`` weighs neighbours ``n-1, n, n+1`` by 5 and the other five by -3;
    the center has weight 0.
    """
    nb = p.neighbors
    total = sum(nb)
    return tuple(8 * (nb[(n - 1) % 8] + nb[n] + nb[(n + 1) % 8]) - 3 * total for n in range(8))


def lbp_code(p: Patch3) -> int:
    return sum(1 << n for n, v in enumerate(p.neighbors) if v >= p.center)


def mct_code(p: Patch3) -> int:
    """9-bit census word against the mean of all nine pixels; bit 8 is the center."""
    total = sum(p.neighbors) + p.center
    code = sum(1 << n for n, v in enumerate(p.neighbors) if 9 * v >= total)
    if 9 * p.center >= total:
        code |= 1 << 8
    return code


def lgp_code(p: Patch3) -> int:
    g = [abs(v - p.center) for v in p.neighbors]
    total = sum(g)
    return sum(1 << n for n, gn in enumerate(g) if 8 * gn >= total)


def _keys(m: Sequence[int], rank_key: str):
    _check_rank_key(rank_key)
    return [abs(v) for v in m] if rank_key == "absolute" else list(m)


def tie_break(m: Sequence[int], tied: Iterable[int]) -> list:
    """Order tied directions from lowest to highest weight.

    A direction whose response differs more from one of its two circular
    neighbours ranks higher; remaining ties go by direction index.
    """

    def spread(n):
        return max(abs(m[n] - m[(n - 1) % 8]), abs(m[n] - m[(n + 1) % 8]))

    return sorted(tied, key=lambda n: (spread(n), n))


def rank_exponents(m: Sequence[int], rank_key: str = "signed") -> Tuple[int, ...]:
    """Assign each direction a distinct exponent 0..7 by response rank.

    The largest response gets 7. Ties are resolved by :func:`tie_break`.
    """
    key = _keys(m, rank_key)
    order = []
    for value in sorted(set(key)):
        order.extend(tie_break(m, [n for n in range(8) if key[n] == value]))
    w = [0] * 8
    for rank, n in enumerate(order):
        w[n] = rank
    return tuple(w)


def ldp_code(m: Sequence[int], k: int = 3, rank_key: str = "signed") -> int:
    """Set bit ``n`` when response ``n`` reaches the k-th highest response."""
    _check_k(k)
    key = _keys(m, rank_key)
    kth = sorted(key, reverse=True)[k - 1]
    return sum(1 << n for n in range(8) if key[n] >= kth)


def ldp_ri_code(m: Sequence[int], k: int = 3, rank_key: str = "signed") -> int:
    """LDP word rotated so the strongest direction lands on the most significant bit."""
    bits = ldp_code(m, k, rank_key)
    w = rank_exponents(m, rank_key)
    top = w.index(7)
    return sum(1 << (7 - (n - top) % 8) for n in range(8) if bits >> n & 1)


def loop_code(p: Patch3, rank_key: str = "signed") -> int:
    """LBP thresholding with each neighbour's bit weighted by its Kirsch rank."""
    w = rank_exponents(kirsch_responses(p), rank_key)
    return sum(1 << w[n] for n, v in enumerate(p.neighbors) if v >= p.center)


def patch_code(p: Patch3, kind: str, k: int = 3, rank_key: str = "signed") -> int:
    """Dispatch a single-patch code by descriptor name."""
    kid = _kind_id(kind)
    if kid == LBP:
        return lbp_code(p)
    if kid == MCT:
        return mct_code(p)
    if kid == LGP:
        return lgp_code(p)
    if kid == LOOP:
        return loop_code(p, rank_key)
    m = kirsch_responses(p)
    return ldp_code(m, k, rank_key) if kid == LDP else ldp_ri_code(m, k, rank_key)


def code_map(img, kind: str, k: int = 3, rank_key: str = "signed", workers: int = 1, backend=None) -> np.ndarray:
    """Code image of ``img``.

    The output is ``(h - 2, w - 2)``: border pixels are never patch
    centers. Element ``[y, x]`` holds the code of the patch centered on
    input pixel ``[y + 1, x + 1]``. The dtype is uint8 for 8-bit kinds and
    uint16 for MCT.

    ``workers > 1`` splits the rows into bands computed on a thread pool;
    the result does not depend on ``workers``.
    """
    kid = _kind_id(kind)
    _check_k(k)
    _check_rank_key(rank_key)
    arr = check_gray(img)
    impl = _backend.get(backend)
    h, w = arr.shape
    rows = h - 2
    out = np.empty((rows, w - 2), dtype=np.uint16)
    absolute = rank_key == "absolute"
    if workers <= 1 or rows < 2 * workers:
        impl.code_rows(arr, out, kid, k, absolute, 0, rows)
    else:
        edges = np.linspace(0, rows, workers + 1).astype(int)
        with ThreadPoolExecutor(max_workers=workers) as pool:
            jobs = [
                pool.submit(impl.code_rows, arr, out, kid, k, absolute, int(a), int(b))
                for a, b in zip(edges[:-1], edges[1:])
            ]
            for job in jobs:
                job.result()
    return out if kid == MCT else out.astype(np.uint8)
