"""Backend selection for the walk kernels.

The compiled extension (_walk_kernels, Cython) is preferred; the pure-NumPy
module (_kernels_py) is the fallback and the reference implementation.
Selection happens once at import.  Setting SPIRALWALK_FORCE_NUMPY=1 in the
environment forces the fallback, which the benchmark and the cross-backend
agreement tests use.

Contract: for identical inputs the two backends agree to 1e-9 relative
(not bitwise: the compiled dense kernel accumulates dot products in a
different order than BLAS).  Each backend on its own is bitwise
deterministic.
"""

from __future__ import annotations

import os

from . import _kernels_py

_FORCED = os.environ.get("SPIRALWALK_FORCE_NUMPY", "") == "1"

if not _FORCED:
    try:
        from . import _walk_kernels as _impl  # type: ignore[attr-defined]
    except ImportError:
        _impl = _kernels_py
else:
    _impl = _kernels_py


def kernel_backend() -> str:
    """Name of the active backend: 'cython' or 'numpy'."""
    return _impl.BACKEND_NAME


dense_stream_q = _impl.dense_stream_q
radial_chain = _impl.radial_chain
radial_chain_batch = _impl.radial_chain_batch
axis_stream_q = _impl.axis_stream_q

# reference handles for benchmarks and agreement tests
numpy_backend = _kernels_py
active_backend = _impl
