"""Timing comparison between the compiled kernels and the NumPy fallback.

Both backends satisfy the same contract (see kernels.py); this module
measures them side by side on the three hot paths so a build without the
extension knows what it is giving up.  Used by `python3 -m
spiralwalk.benchmarks` and the benchmark test.
"""

from __future__ import annotations

import sys
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from .sampling import SeedSpec, derive_stream


@dataclass(frozen=True)
class BenchResult:
    name: str
    active_backend: str
    active_seconds: float
    numpy_seconds: float
    max_rel_gap: float  # worst relative disagreement between outputs

    @property
    def speedup(self) -> float:
        return self.numpy_seconds / max(self.active_seconds, 1e-12)


def _time_best(fn, repeats: int) -> tuple[float, object]:
    best = float("inf")
    out = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def _rel_gap(a, b) -> float:
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    scale = np.maximum(1.0, np.maximum(np.abs(a), np.abs(b)))
    return float(np.max(np.abs(a - b) / scale)) if a.size else 0.0


def _bench_pair(name: str, active_fn, numpy_fn, repeats: int) -> BenchResult:
    active_s, active_out = _time_best(active_fn, repeats)
    numpy_s, numpy_out = _time_best(numpy_fn, repeats)
    return BenchResult(
        name=name,
        active_backend=kernels.kernel_backend(),
        active_seconds=active_s,
        numpy_seconds=numpy_s,
        max_rel_gap=_rel_gap(active_out, numpy_out),
    )


def run_benchmarks(n: int = 4096, d: int = 512, repeats: int = 3) -> list[BenchResult]:
    """Time dense_stream_q, radial_chain and axis_stream_q on fresh data.

    The dense kernel state (s, box) is advanced in place, so each timed call
    gets its own copy; input draws are shared between backends so the
    residual gap reflects arithmetic order only.
    """
    stream = derive_stream(SeedSpec(20260816, 0))
    x = stream.standard_normal((n, d))
    results = []

    def dense(impl):
        def call():
            s = np.zeros(d)
            return impl.dense_stream_q(x, s)

        return call

    results.append(
        _bench_pair(
            f"dense_stream_q[{n}x{d}]",
            dense(kernels.active_backend),
            dense(kernels.numpy_backend),
            repeats,
        )
    )

    r = np.abs(stream.standard_normal(n)) + 0.1
    c = np.clip(stream.standard_normal(n) * 0.2, -1.0, 1.0)
    results.append(
        _bench_pair(
            f"radial_chain[{n}]",
            lambda: kernels.active_backend.radial_chain(r, c, 0.0),
            lambda: kernels.numpy_backend.radial_chain(r, c, 0.0),
            repeats,
        )
    )

    axes = stream.integers(0, d, size=n)
    values = 2.0 * stream.integers(0, 2, size=n) - 1.0

    def axis(impl):
        def call():
            box = np.zeros(d)
            return impl.axis_stream_q(axes, values, box)

        return call

    results.append(
        _bench_pair(
            f"axis_stream_q[{n}->{d}]",
            axis(kernels.active_backend),
            axis(kernels.numpy_backend),
            repeats,
        )
    )
    return results


def main(argv=None) -> int:
    results = run_benchmarks()
    print(f"active backend: {kernels.kernel_backend()}")
    for res in results:
        print(
            f"{res.name:28s} active {res.active_seconds * 1e3:9.3f} ms   "
            f"numpy {res.numpy_seconds * 1e3:9.3f} ms   "
            f"speedup {res.speedup:6.2f}x   max rel gap {res.max_rel_gap:.2e}"
        )
    worst = max(res.max_rel_gap for res in results)
    return 0 if worst <= 1e-9 else 1


if __name__ == "__main__":
    sys.exit(main())
