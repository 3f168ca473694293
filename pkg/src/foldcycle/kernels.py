"""Backend selection for the prototypical-field kernel.

The compiled extension is used when importable; set FOLDCYCLE_BACKEND=python to
force the pure-Python implementation.
"""

import os

from . import _kernel_py

_requested = os.environ.get("FOLDCYCLE_BACKEND", "auto").lower()

if _requested == "python":
    _impl = _kernel_py
else:
    try:
        from . import _kernel as _impl  # type: ignore[attr-defined]
    except ImportError:
        if _requested == "cython":
            raise
        _impl = _kernel_py

BACKEND = _impl.BACKEND
EXITED, MAX_STEPS, UNDERFLOW, TIME_LIMIT = 0, 1, 2, 3


def get(name: str = "auto"):
    """Return a backend module by name ('auto', 'cython' or 'python')."""
    if name == "auto":
        return _impl
    if name == "python":
        return _kernel_py
    if name == "cython":
        from . import _kernel  # type: ignore[attr-defined]
        return _kernel
    raise ValueError(f"unknown backend {name!r}")


def compiled_available() -> bool:
    try:
        from . import _kernel  # noqa: F401  # type: ignore[attr-defined]
    except ImportError:
        return False
    return True
