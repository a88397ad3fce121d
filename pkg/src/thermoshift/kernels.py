"""Kernel selection: the compiled extension when built, else the Python twin.

Set ``THERMOSHIFT_PURE_PYTHON=1`` to force the fallback.
"""

import os

from . import _kernels_py

if os.environ.get("THERMOSHIFT_PURE_PYTHON"):
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl
    except ImportError:
        _impl = _kernels_py

IMPLEMENTATION = _impl.IMPLEMENTATION
delta_profile = _impl.delta_profile
enumerate_returns = _impl.enumerate_returns


def backend(name: str):
    """Return the kernel module called ``name`` ("cython" or "python")."""
    if name == "python":
        return _kernels_py
    if name == "cython":
        from . import _kernels
        return _kernels
    raise ValueError(f"unknown kernel backend {name!r}")
