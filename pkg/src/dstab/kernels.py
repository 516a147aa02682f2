"""Backend selection for the hot kernels.

The compiled extension is used when importable; ``DSTAB_PURE_PYTHON=1``
forces the pure-Python implementation.
"""

import os

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

OUTSIDE = _kernels_py.OUTSIDE
BOUNDARY = _kernels_py.BOUNDARY
INSIDE = _kernels_py.INSIDE

_NAMES = ("hull_indices", "locate_origin", "segment_distance", "vertex_polys",
          "images_at", "first_entry", "event_points", "search")


def available_backends():
    return ["python"] + (["cython"] if _compiled is not None else [])


def backend_module(name):
    if name == "python":
        return _kernels_py
    if name == "cython":
        if _compiled is None:
            raise ImportError("compiled kernels are not built")
        return _compiled
    raise ValueError(f"unknown backend {name!r}")


def set_backend(name):
    """Rebind the module-level kernel functions to backend ``name``."""
    global BACKEND
    impl = backend_module(name)
    g = globals()
    for fn in _NAMES:
        g[fn] = getattr(impl, fn)
    BACKEND = name


BACKEND = "python"
if _compiled is not None and os.environ.get("DSTAB_PURE_PYTHON", "") not in ("1", "true", "yes"):
    set_backend("cython")
else:
    set_backend("python")
