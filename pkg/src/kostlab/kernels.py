"""Hot-kernel dispatch: the compiled Cython module when present, else pure Python.

Set ``KOSTLAB_PURE_PYTHON=1`` to force the fallback.
"""
import importlib
import os

from . import _kernels_py

_NAMES = ("trace_contours", "label_components", "segment_crossings", "min_pair_distance")


def load_backend(name):
    """Return the kernel module for ``"cython"`` or ``"python"``."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        return importlib.import_module("kostlab._ckernels")
    raise ValueError(f"unknown kernel backend {name!r}")


def available_backends():
    out = ["python"]
    try:
        load_backend("cython")
        out.insert(0, "cython")
    except ImportError:
        pass
    return out


if os.environ.get("KOSTLAB_PURE_PYTHON"):
    BACKEND = "python"
else:
    BACKEND = available_backends()[0]

_impl = load_backend(BACKEND)
trace_contours = _impl.trace_contours
label_components = _impl.label_components
segment_crossings = _impl.segment_crossings
min_pair_distance = _impl.min_pair_distance

__all__ = ["BACKEND", "available_backends", "load_backend", *_NAMES]
