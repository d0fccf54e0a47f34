"""Hot numeric kernels.

Two interchangeable implementations live here: ``_jit`` (numba ``@njit``)
and ``_numpy`` (vectorised numpy). The numba path is used when numba
imports and ``THERMAL_BACKDOOR_DISABLE_JIT`` is unset or falsy. Both paths
are tested against each other, and ``benchmarks/bench_kernels.py`` times them.
"""
import os

from . import _numpy

ENV_FLAG = "THERMAL_BACKDOOR_DISABLE_JIT"

try:
    from . import _jit
except ImportError:  # pragma: no cover - numba is a declared dependency
    _jit = None


def _jit_disabled():
    return os.environ.get(ENV_FLAG, "").strip().lower() in ("1", "true", "yes", "on")


def available_backends():
    return ["numpy"] + (["numba"] if _jit is not None else [])


def get_backend(name=None):
    """Return the kernel module for ``name`` (default: the active backend)."""
    if name is None:
        name = "numpy" if (_jit is None or _jit_disabled()) else "numba"
    if name == "numba":
        if _jit is None:
            raise RuntimeError("numba backend requested but numba is not importable")
        return _jit
    if name == "numpy":
        return _numpy
    raise ValueError(f"unknown kernel backend {name!r}")


_active = get_backend()
BACKEND = _active.NAME

iou_matrix = _active.iou_matrix
greedy_match = _active.greedy_match
radius_mask = _active.radius_mask
shared_cells = _active.shared_cells
fill_rects = _active.fill_rects
all_point_ap = _active.all_point_ap

__all__ = [
    "BACKEND",
    "ENV_FLAG",
    "all_point_ap",
    "available_backends",
    "fill_rects",
    "get_backend",
    "greedy_match",
    "iou_matrix",
    "radius_mask",
    "shared_cells",
]
