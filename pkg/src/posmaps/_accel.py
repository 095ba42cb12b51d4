"""Backend selection for the compiled kernels.

Set ``POSMAPS_DISABLE_NUMBA=1`` before import to force the pure-numpy
kernels; numba is then never imported. When numba is importable the
backend can also be switched at runtime with :func:`set_backend`.
"""

import contextlib
import os

_TRUTHY = {"1", "true", "yes", "on"}

DISABLED_BY_ENV = os.environ.get("POSMAPS_DISABLE_NUMBA", "").strip().lower() in _TRUTHY

if DISABLED_BY_ENV:
    NUMBA_AVAILABLE = False
else:
    try:
        import numba  # noqa: F401

        NUMBA_AVAILABLE = True
    except ImportError:  # pragma: no cover - numba ships with the dev env
        NUMBA_AVAILABLE = False

if NUMBA_AVAILABLE:
    from numba import njit
else:

    def njit(*args, **kwargs):
        if len(args) == 1 and callable(args[0]) and not kwargs:
            return args[0]
        return lambda fn: fn


_state = {"backend": "numba" if NUMBA_AVAILABLE else "numpy"}


def get_backend():
    return _state["backend"]


def set_backend(name):
    """Select ``"numba"`` or ``"numpy"`` for subsequent kernel calls."""
    if name not in ("numba", "numpy"):
        raise ValueError(f"unknown backend {name!r}")
    if name == "numba" and not NUMBA_AVAILABLE:
        raise RuntimeError("numba backend requested but numba is unavailable or disabled")
    _state["backend"] = name


@contextlib.contextmanager
def use_backend(name):
    old = get_backend()
    set_backend(name)
    try:
        yield
    finally:
        _state["backend"] = old
