"""Gray image I/O and Gaussian pyramid construction.

Images are plain 2-D ``numpy.uint8`` arrays indexed ``[row, col]``.
"""

from __future__ import annotations

import os
from typing import List

import numpy as np

from . import _backend

MIN_SIDE = 3


class PGMError(ValueError):
    """Raised when a PGM file cannot be parsed."""


def check_gray(img, name: str = "image") -> np.ndarray:
    """Validate ``img`` as a gray image and return it as a C-contiguous uint8 array."""
    arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{name} must be 2-D, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if arr.size and (arr.min() < 0 or arr.max() > 255):
            raise ValueError(f"{name} values must lie in [0, 255]")
        arr = arr.astype(np.uint8)
    h, w = arr.shape
    if w < MIN_SIDE or h < MIN_SIDE:
        raise ValueError(f"{name} is {w}x{h}; at least {MIN_SIDE}x{MIN_SIDE} is required")
    return np.ascontiguousarray(arr)


def _next_token(buf: bytes, pos: int, field: str):
    n = len(buf)
    while pos < n:
        c = buf[pos]
        if c == ord("#"):
            while pos < n and buf[pos] not in b"\r\n":
                pos += 1
        elif chr(c).isspace():
            pos += 1
        else:
            break
    start = pos
    while pos < n and not chr(buf[pos]).isspace() and buf[pos] != ord("#"):
        pos += 1
    if start == pos:
        raise PGMError(f"missing {field} in PGM header")
    return buf[start:pos], pos


def _int_field(tok: bytes, field: str) -> int:
    try:
        value = int(tok)
    except ValueError:
        raise PGMError(f"malformed {field} {tok!r} in PGM header") from None
    if value <= 0:
        raise PGMError(f"non-positive {field} {value} in PGM header")
    return value


def parse_pgm(buf: bytes) -> np.ndarray:
    """Decode an in-memory binary PGM (P5, maxval 255)."""
    if len(buf) < 2 or buf[:1] != b"P":
        raise PGMError("malformed magic: not a PGM/PNM file")
    magic, pos = _next_token(buf, 0, "magic")
    if magic != b"P5":
        raise PGMError(f"unsupported PGM variant {magic.decode('latin-1')!r} (magic); only P5 is supported")
    tok, pos = _next_token(buf, pos, "width")
    width = _int_field(tok, "width")
    tok, pos = _next_token(buf, pos, "height")
    height = _int_field(tok, "height")
    tok, pos = _next_token(buf, pos, "maxval")
    maxval = _int_field(tok, "maxval")
    if maxval != 255:
        raise PGMError(f"unsupported maxval {maxval}; only 255 is supported")
    # exactly one whitespace byte separates maxval from the payload
    if pos >= len(buf) or not chr(buf[pos]).isspace():
        raise PGMError("truncated pixel data: header not terminated")
    pos += 1
    need = width * height
    payload = buf[pos:pos + need]
    if len(payload) < need:
        raise PGMError(f"truncated pixel data: expected {need} bytes, found {len(payload)}")
    img = np.frombuffer(payload, dtype=np.uint8).reshape(height, width).copy()
    if width < MIN_SIDE or height < MIN_SIDE:
        raise PGMError(f"image is {width}x{height} (width/height); at least {MIN_SIDE}x{MIN_SIDE} is required")
    return img


def load_pgm(path: str | os.PathLike) -> np.ndarray:
    """Read a binary 8-bit PGM file.

    Returns
    -------
    numpy.ndarray
        ``(height, width)`` uint8 array.

    Raises
    ------
    PGMError
        On a bad magic number, a maxval other than 255, a malformed
        header field or a truncated payload. The message names the field.
    """
    with open(path, "rb") as fh:
        return parse_pgm(fh.read())


def encode_pgm(img) -> bytes:
    arr = np.asarray(img)
    if arr.ndim != 2 or arr.dtype != np.uint8:
        raise ValueError("PGM output requires a 2-D uint8 array")
    h, w = arr.shape
    return b"P5\n%d %d\n255\n" % (w, h) + np.ascontiguousarray(arr).tobytes()


def save_pgm(img, path: str | os.PathLike) -> None:
    """Write ``img`` as a P5 PGM.

    Images smaller than 3x3 are written without complaint even though
    :func:`load_pgm` refuses them.
    """
    data = encode_pgm(img)
    with open(path, "wb") as fh:
        fh.write(data)


def gaussian_blur(img, backend=None) -> np.ndarray:
    """Separable 5-tap binomial blur, ``[1, 4, 6, 4, 1] / 16`` per axis.

    Borders are edge-replicated. Both passes run in exact integer
    arithmetic and the result is rounded half-up once, so the output equals
    a dense 2-D convolution with the outer-product kernel.
    """
    arr = check_gray(img)
    out = np.empty_like(arr)
    _backend.get(backend).blur(arr, out)
    return out


def downsample(img) -> np.ndarray:
    h, w = img.shape
    return np.ascontiguousarray(img[: 2 * (h // 2) : 2, : 2 * (w // 2) : 2])


def build_pyramid(img, levels: int, backend=None) -> List[np.ndarray]:
    """Gaussian pyramid; level 0 is ``img`` itself, each next level is
    blurred then decimated to even rows/columns (floor-halved size)."""
    if levels < 1:
        raise ValueError(f"levels must be >= 1, got {levels}")
    base = check_gray(img)
    h, w = base.shape
    for lvl in range(1, levels):
        h, w = h // 2, w // 2
        if h < MIN_SIDE or w < MIN_SIDE:
            raise ValueError(
                f"pyramid level {lvl} would be {w}x{h}, below the {MIN_SIDE}x{MIN_SIDE} minimum"
            )
    out = [base]
    for _ in range(1, levels):
        out.append(downsample(gaussian_blur(out[-1], backend=backend)))
    return out


def save_raw16(codes, path: str | os.PathLike, bits: int = 9) -> str:
    """Write a code map as little-endian uint16 raw data plus a text sidecar.

    The sidecar lives at ``path + ".hdr"`` and holds ``width``, ``height``,
    ``bits`` and ``endian`` as ``key=value`` lines. Returns the sidecar path.
    """
    arr = np.asarray(codes)
    if arr.ndim != 2:
        raise ValueError("code map must be 2-D")
    if arr.size and int(arr.max()) >= 1 << bits:
        raise ValueError(f"code {int(arr.max())} does not fit in {bits} bits")
    h, w = arr.shape
    with open(path, "wb") as fh:
        fh.write(arr.astype("<u2").tobytes())
    header = f"{os.fspath(path)}.hdr"
    with open(header, "w") as fh:
        fh.write(f"width={w}\nheight={h}\nbits={bits}\nendian=little\n")
    return header


def load_raw16(path: str | os.PathLike) -> np.ndarray:
    with open(f"{os.fspath(path)}.hdr") as fh:
        meta = dict(line.strip().split("=", 1) for line in fh if "=" in line)
    w, h = int(meta["width"]), int(meta["height"])
    if meta.get("endian", "little") != "little":
        raise ValueError(f"unsupported endianness {meta['endian']!r}")
    with open(path, "rb") as fh:
        data = fh.read()
    if len(data) != 2 * w * h:
        raise ValueError(f"truncated raw data: expected {2 * w * h} bytes, found {len(data)}")
    return np.frombuffer(data, dtype="<u2").reshape(h, w).astype(np.uint16)
