"""Backend selection: compiled kernels when the extension built, pure
Python/numpy otherwise.  Set ``INARLIM_BACKEND=python`` to force the
fallback (useful for benchmarking and for debugging kernel parity).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("INARLIM_BACKEND", "").lower() == "python":
    _impl = _kernels_py
else:
    try:
        from . import _kernels as _impl  # type: ignore[no-redef]
    except ImportError:
        _impl = _kernels_py

mc_terminal = _impl.mc_terminal
heavy_tail_product = _impl.heavy_tail_product


def backend_name() -> str:
    return _impl.backend_name()


def both_backends():
    """(name, module) pairs for every importable backend."""
    out = [("python", _kernels_py)]
    try:
        from . import _kernels

        out.append(("cython", _kernels))
    except ImportError:
        pass
    return out
