"""Kernel backend selection.

The compiled ``_native`` extension is preferred. Setting the environment
variable ``LOOPDESC_BACKEND=python`` forces the numpy fallback;
``LOOPDESC_BACKEND=native`` makes a missing extension an error.
"""

import logging
import os

from . import _pure

log = logging.getLogger(__name__)

try:
    from . import _native
except ImportError:  # extension not built
    _native = None

BACKENDS = {"python": _pure}
if _native is not None:
    BACKENDS["native"] = _native


def _default():
    choice = os.environ.get("LOOPDESC_BACKEND", "auto").lower()
    if choice == "auto":
        return _native if _native is not None else _pure
    if choice not in ("python", "native"):
        raise ValueError(f"LOOPDESC_BACKEND must be auto, python or native, not {choice!r}")
    if choice == "native" and _native is None:
        raise ImportError("LOOPDESC_BACKEND=native but the compiled extension is not built")
    return BACKENDS[choice]


DEFAULT = _default()
if DEFAULT is _pure:
    log.debug("using the numpy fallback kernels")


def get(backend=None):
    """Return the kernel module for ``backend`` (a name, a module or None)."""
    if backend is None:
        return DEFAULT
    if isinstance(backend, str):
        try:
            return BACKENDS[backend]
        except KeyError:
            raise ValueError(f"backend {backend!r} is not available; have {sorted(BACKENDS)}") from None
    return backend


def available():
    return sorted(BACKENDS)
