"""Pure-NumPy walk kernels: the fallback backend.

Same call signatures as the compiled backend in _walk_kernels.pyx.  Each
function is bitwise deterministic given its inputs; across backends results
agree to 1e-9 relative (summation order differs, exact bit patterns may
not).  See kernels.py for backend selection and the agreement contract.
"""

from __future__ import annotations

import numpy as np

BACKEND_NAME = "numpy"


def dense_stream_q(x_block: np.ndarray, s: np.ndarray) -> np.ndarray:
    """Sequential projections of a dense increment block onto the running sum.

    y[k] = <x_block[k], s + x_block[0] + ... + x_block[k-1]>, and s is
    advanced in place by the whole block.  These y values feed the
    off-diagonal component Q_k = Q_{k-1} + 2 y_k, which must be computed
    BEFORE the step is added to the state.
    """
    m = x_block.shape[0]
    y = np.empty(m)
    for k in range(m):
        row = x_block[k]
        y[k] = row @ s
        s += row
    return y


def radial_chain(r: np.ndarray, c: np.ndarray, nsq0: float) -> np.ndarray:
    """Squared-norm recursion for rotation-invariant walks.

    Given step radii r[k] and projection cosines c[k] (the cosine between
    the fresh unit direction and the current sum), the squared norm obeys

        nsq[k] = nsq[k-1] + r[k]^2 + 2 * r[k] * sqrt(nsq[k-1]) * c[k].

    Returns the n-vector of post-step squared norms.  Rounding can push an
    analytically nonnegative value a hair below zero; it is clamped.
    """
    n = r.shape[0]
    out = np.empty(n)
    cur = nsq0
    for k in range(n):
        rk = r[k]
        cur = cur + rk * rk + 2.0 * rk * np.sqrt(cur) * c[k]
        if cur < 0.0:
            cur = 0.0
        out[k] = cur
    return out


def radial_chain_batch(r: np.ndarray, c: np.ndarray) -> np.ndarray:
    """radial_chain for many replicates at once: r, c are (reps, n).

    Vectorized across replicates, stepping in k; returns (reps, n) of
    squared norms from nsq0 = 0.
    """
    reps, n = r.shape
    out = np.empty((reps, n))
    cur = np.zeros(reps)
    for k in range(n):
        rk = r[:, k]
        cur = cur + rk * rk + 2.0 * rk * np.sqrt(cur) * c[:, k]
        np.maximum(cur, 0.0, out=cur)
        out[:, k] = cur
    return out


def axis_stream_q(axes: np.ndarray, values: np.ndarray, box: np.ndarray) -> np.ndarray:
    """Sequential projections for sparse axis-jump increments.

    y[k] = values[k] * box[axes[k]] evaluated before the jump lands, with
    box (the dense coordinate state) advanced in place.  Group-by
    formulation: within each box the y's are exclusive prefix sums of the
    values, taken in time order; a stable argsort makes that vectorizable
    without a Python loop over steps.
    """
    if axes.shape[0] == 0:
        return np.empty(0)
    order = np.argsort(axes, kind="stable")
    sorted_axes = axes[order]
    sorted_vals = values[order]
    csum = np.cumsum(sorted_vals)
    starts = np.flatnonzero(np.diff(sorted_axes, prepend=sorted_axes[0] - 1) != 0)
    # exclusive prefix sum within each box run
    excl = csum - sorted_vals
    base = np.zeros_like(excl)
    base[starts] = excl[starts]
    run_id = np.cumsum(np.diff(sorted_axes, prepend=sorted_axes[0] - 1) != 0) - 1
    excl_within = excl - base[starts][run_id]
    prior_state = box[sorted_axes]
    y_sorted = sorted_vals * (prior_state + excl_within)
    y = np.empty_like(y_sorted)
    y[order] = y_sorted
    # advance the box state by the total landed in each box (run ids unique)
    totals_idx = np.concatenate([starts[1:] - 1, [len(sorted_axes) - 1]])
    box_ids = sorted_axes[starts]
    run_totals = csum[totals_idx] - (csum[starts] - sorted_vals[starts])
    box[box_ids] += run_totals
    return y
