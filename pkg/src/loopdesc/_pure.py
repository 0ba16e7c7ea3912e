"""Vectorised numpy implementation of the hot kernels.

Used when the compiled ``_native`` extension is unavailable. Must stay
bit-identical to ``_native.pyx``.
"""

import numpy as np

NAME = "python"

# row/col offsets of neighbours 0..7, clockwise from top-left
OFFSETS = ((-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1), (1, 0), (1, -1), (0, -1))

LBP, MCT, LGP, LDP, LDP_RI, LOOP = range(6)

_TAPS = (1, 4, 6, 4, 1)


def blur(src, dst):
    padded = np.pad(src.astype(np.int32), 2, mode="edge")
    h, w = src.shape
    horiz = sum(t * padded[:, i:i + w] for i, t in enumerate(_TAPS))
    full = sum(t * horiz[i:i + h, :] for i, t in enumerate(_TAPS))
    np.clip((full + 128) >> 8, 0, 255, out=full)
    dst[...] = full


def _ring(img, r0, r1):
    w = img.shape[1]
    sub = img[r0:r1 + 2].astype(np.int32)
    rows = r1 - r0
    center = sub[1:1 + rows, 1:w - 1]
    nb = np.stack([sub[1 + dy:1 + dy + rows, 1 + dx:w - 1 + dx] for dy, dx in OFFSETS])
    return center, nb


def _kirsch(nb):
    total = nb.sum(axis=0)
    tri = np.roll(nb, 1, axis=0) + nb + np.roll(nb, -1, axis=0)
    return 8 * tri - 3 * total


def _ranks(m, absolute):
    key = np.abs(m) if absolute else m
    spread = np.maximum(np.abs(m - np.roll(m, 1, axis=0)), np.abs(m - np.roll(m, -1, axis=0)))
    # distinct per-direction sort key ordered by (key, spread, index)
    idx = np.arange(8, dtype=np.int64).reshape((8,) + (1,) * (m.ndim - 1))
    packed = ((key.astype(np.int64) + 4096) << 16) | (spread.astype(np.int64) << 3) | idx
    w = np.zeros(m.shape, dtype=np.int32)
    for n in range(8):
        for j in range(8):
            if j != n:
                w[n] += packed[j] < packed[n]
    return w, key


def _pack(bits, shifts):
    return (bits.astype(np.int32) << shifts).sum(axis=0)


def code_rows(img, out, kind, k, absolute, r0, r1):
    """Fill output rows ``r0:r1`` of the code map ``out``."""
    if r1 <= r0:
        return
    center, nb = _ring(img, r0, r1)
    pos = np.arange(8, dtype=np.int32).reshape(8, 1, 1)
    if kind == LBP:
        code = _pack(nb >= center, pos)
    elif kind == MCT:
        total = nb.sum(axis=0) + center
        code = _pack(9 * nb >= total, pos) | ((9 * center >= total).astype(np.int32) << 8)
    elif kind == LGP:
        g = np.abs(nb - center)
        code = _pack(8 * g >= g.sum(axis=0), pos)
    else:
        m = _kirsch(nb)
        if kind == LOOP:
            w, _ = _ranks(m, absolute)
            code = _pack(nb >= center, w)
        else:
            key = np.abs(m) if absolute else m
            kth = np.sort(key, axis=0)[8 - k]
            bits = key >= kth
            if kind == LDP:
                code = _pack(bits, pos)
            elif kind == LDP_RI:
                w, _ = _ranks(m, absolute)
                top = np.argmax(w, axis=0)
                code = _pack(bits, (7 - pos + top) % 8)
            else:
                raise ValueError(f"unknown kernel id {kind}")
    out[r0:r1] = code
