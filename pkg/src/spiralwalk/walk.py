"""Walk engine: simulate S_k = X_1 + ... + X_k while maintaining the
decomposition ||S_k||^2 = T_k + Q_k in one streaming pass.

    T_k = sum of ||X_i||^2          (diagonal part, monotone)
    Q_k = Q_{k-1} + 2 <X_k, S_{k-1}>  (off-diagonal part, a martingale)

The projection <X_k, S_{k-1}> is evaluated BEFORE the step lands; that
ordering is what makes Q a martingale and is asserted against a direct
||S_k||^2 recomputation at every block boundary and grid point.

Increments are drawn in fixed-size blocks (BLOCK_STEPS) so that the stream
consumption order depends only on (model, n, d) - never on the snapshot
grid or the kernel backend.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from .linalg import PointCloud
from .models import ModelSpec, draw_axis_block, draw_iid_block, draw_rotinv_block
from .sampling import stable_scale_for_pareto


class WalkError(ValueError):
    """Bad walk parameters or a violated decomposition invariant."""


class CapacityError(WalkError):
    """Requested simulation exceeds the configured memory budget."""


DEFAULT_ELEMENT_BUDGET = 10**8
DECOMP_RTOL = 1e-9
BLOCK_STEPS = 1024


@dataclass(frozen=True)
class OccupancyStats:
    """Box occupancy after n axis jumps: counts of boxes holding exactly
    one, exactly two, and three-or-more balls."""

    mu1: int
    mu2: int
    mu_ge3: int

    def __post_init__(self):
        if min(self.mu1, self.mu2, self.mu_ge3) < 0:
            raise WalkError("occupancy counts must be nonnegative")


@dataclass(frozen=True)
class WalkSummary:
    norm_sq_final: float
    t_final: float
    q_final: float
    sup_deviation: float  # sup_t |  ||S_[nt]||^2 / n - t |
    max_step_norm: float
    occupancy: OccupancyStats | None = None


@dataclass(frozen=True)
class WalkPath:
    n: int
    d: int
    grid: np.ndarray  # step indices 0 = k_0 < ... < k_m = n
    snapshots: PointCloud | None  # rows S_{k_j} / sqrt(n); None if not kept
    norm_sq_trace: np.ndarray  # length n+1
    t_trace: np.ndarray
    q_trace: np.ndarray


def time_grid(n: int, grid_size: int) -> np.ndarray:
    """Snapshot step indices floor(j*n/grid_size), deduplicated, with 0 and n."""
    if grid_size < 1:
        raise WalkError(f"grid_size must be >= 1, got {grid_size}")
    return np.unique([(j * n) // grid_size for j in range(grid_size + 1)]).astype(np.int64)


def _check_direct(nsq_running: float, state_norm_sq: float, t_running: float, where: str):
    tol = DECOMP_RTOL * max(1.0, t_running)
    if abs(nsq_running - state_norm_sq) > tol:
        raise WalkError(
            f"decomposition drift at {where}: streamed ||S||^2 = {nsq_running!r} "
            f"vs direct {state_norm_sq!r} (tol {tol:.3e})"
        )


def _assert_block_decomposition(nsq_block, t_block, q_block, k0: int):
    # per-step identity ||S_k||^2 = T_k + Q_k, tolerance 1e-9 * max(1, T_k)
    tol = DECOMP_RTOL * np.maximum(1.0, t_block)
    bad = np.abs(nsq_block - (t_block + q_block)) > tol
    if bad.any():
        k = int(np.argmax(bad))
        raise WalkError(
            f"decomposition identity violated at step {k0 + k + 1}: "
            f"{nsq_block[k]!r} != {t_block[k]!r} + {q_block[k]!r}"
        )


def run_walk(
    model: ModelSpec,
    n: int,
    d: int,
    grid_size: int,
    stream: np.random.Generator,
    *,
    with_snapshots: bool = True,
    element_budget: int = DEFAULT_ELEMENT_BUDGET,
) -> tuple[WalkPath, WalkSummary]:
    """Simulate n steps in dimension d; see the module docstring.

    Snapshots are kept at the grid steps, scaled by 1/sqrt(n) (scale 1 when
    n = 0).  The memory guard applies only when snapshots are requested:
    n * d may then not exceed element_budget.
    """
    if n < 0 or d < 1:
        raise WalkError(f"need n >= 0 and d >= 1, got n={n}, d={d}")
    grid = time_grid(n, grid_size)
    if with_snapshots and n * d > element_budget:
        raise CapacityError(
            f"snapshots for n={n}, d={d} exceed the element budget "
            f"({n * d:.2e} > {element_budget:.2e}); rerun without snapshots"
        )

    nsq = np.zeros(n + 1)
    t = np.zeros(n + 1)
    q = np.zeros(n + 1)
    scale = 1.0 / math.sqrt(n) if n > 0 else 1.0
    snap_rows: list[np.ndarray] | None = None

    if model.is_sparse:
        box = np.zeros(d)
        counts = np.zeros(d, dtype=np.int64)
    else:
        s = np.zeros(d)

    if with_snapshots:
        snap_rows = []
        grid_set = set(int(g) for g in grid)
        if 0 in grid_set:
            snap_rows.append(np.zeros(d))
    max_step = 0.0

    for k0 in range(0, n, BLOCK_STEPS):
        m = min(BLOCK_STEPS, n - k0)
        if model.kind == "iid":
            block = draw_iid_block(model, m, d, stream)
        elif model.kind == "rotinv":
            block = draw_rotinv_block(model, m, d, stream)
        else:
            axes, values = draw_axis_block(model, m, d, stream)
            axes = axes.astype(np.int64, copy=False)

        # kernel calls are split at grid points so interior snapshot states
        # are exact; the split changes no arithmetic for the compiled
        # kernels and only the summation grouping for the numpy axis kernel
        if with_snapshots:
            cuts = [g - k0 for g in range(k0 + 1, k0 + m + 1) if g in grid_set]
        else:
            cuts = []
        bounds = [0] + cuts + ([m] if not cuts or cuts[-1] != m else [])

        if model.is_sparse:
            step_norm_sq = values * values
            y_parts = []
            for a, b in zip(bounds[:-1], bounds[1:]):
                y_parts.append(kernels.axis_stream_q(axes[a:b], values[a:b], box))
                if with_snapshots and (k0 + b) in grid_set:
                    snap_rows.append(box.copy())
            y = np.concatenate(y_parts) if len(y_parts) > 1 else y_parts[0]
            counts += np.bincount(axes, minlength=d)
            max_step = max(max_step, float(np.abs(values).max(initial=0.0)))
        else:
            step_norm_sq = np.einsum("ij,ij->i", block, block)
            y_parts = []
            for a, b in zip(bounds[:-1], bounds[1:]):
                y_parts.append(kernels.dense_stream_q(block[a:b], s))
                if with_snapshots and (k0 + b) in grid_set:
                    snap_rows.append(s.copy())
            y = np.concatenate(y_parts) if len(y_parts) > 1 else y_parts[0]
            max_step = max(max_step, math.sqrt(float(step_norm_sq.max())))

        lo, hi = k0 + 1, k0 + m + 1
        t[lo:hi] = t[k0] + np.cumsum(step_norm_sq)
        q[lo:hi] = q[k0] + 2.0 * np.cumsum(y)
        nsq[lo:hi] = nsq[k0] + np.cumsum(2.0 * y + step_norm_sq)
        _assert_block_decomposition(nsq[lo:hi], t[lo:hi], q[lo:hi], k0)

        state_norm_sq = float(box @ box) if model.is_sparse else float(s @ s)
        _check_direct(float(nsq[k0 + m]), state_norm_sq, float(t[k0 + m]), f"step {k0 + m}")

    snapshots = None
    if with_snapshots:
        snapshots = PointCloud(np.asarray(snap_rows) * scale, label=model.describe())

    occupancy = None
    if model.is_sparse:
        occupancy = OccupancyStats(
            mu1=int((counts == 1).sum()),
            mu2=int((counts == 2).sum()),
            mu_ge3=int((counts >= 3).sum()),
        )

    path = WalkPath(n=n, d=d, grid=grid, snapshots=snapshots,
                    norm_sq_trace=nsq, t_trace=t, q_trace=q)
    summary = WalkSummary(
        norm_sq_final=float(nsq[n]),
        t_final=float(t[n]),
        q_final=float(q[n]),
        sup_deviation=sup_norm_deviation(path),
        max_step_norm=max_step,
        occupancy=occupancy,
    )
    return path, summary


def walk_from_dense_increments(x: np.ndarray, grid_size: int = 1) -> tuple[WalkPath, WalkSummary]:
    """Engine entry for explicitly supplied dense increments (oracle tests,
    deterministic walks).  Same trace/summary semantics as run_walk."""
    x = np.ascontiguousarray(np.asarray(x, dtype=np.float64))
    if x.ndim != 2:
        raise WalkError(f"increments must be (n, d), got shape {x.shape}")
    n, d = x.shape
    if n * d > DEFAULT_ELEMENT_BUDGET:
        raise CapacityError(f"explicit increment matrix {n} x {d} over budget")
    grid = time_grid(n, grid_size)
    s = np.zeros(d)
    step_norm_sq = np.einsum("ij,ij->i", x, x)
    y = kernels.dense_stream_q(x, s)
    nsq = np.zeros(n + 1)
    t = np.zeros(n + 1)
    q = np.zeros(n + 1)
    t[1:] = np.cumsum(step_norm_sq)
    q[1:] = 2.0 * np.cumsum(y)
    nsq[1:] = np.cumsum(2.0 * y + step_norm_sq)
    _assert_block_decomposition(nsq[1:], t[1:], q[1:], 0)
    _check_direct(float(nsq[n]), float(s @ s), float(t[n]), f"step {n}")
    scale = 1.0 / math.sqrt(n) if n > 0 else 1.0
    snaps = PointCloud(np.cumsum(np.vstack([np.zeros(d), x]), axis=0)[grid] * scale)
    path = WalkPath(n=n, d=d, grid=grid, snapshots=snaps,
                    norm_sq_trace=nsq, t_trace=t, q_trace=q)
    summary = WalkSummary(
        norm_sq_final=float(nsq[n]),
        t_final=float(t[n]),
        q_final=float(q[n]),
        sup_deviation=sup_norm_deviation(path),
        max_step_norm=float(np.sqrt(step_norm_sq.max(initial=0.0))),
    )
    return path, summary


def sup_norm_deviation(path: WalkPath) -> float:
    """Exact max over k of | ||S_k||^2 / n - k/n |; 0 for the empty walk."""
    if path.n == 0:
        return 0.0
    k = np.arange(path.n + 1)
    return float(np.abs(path.norm_sq_trace / path.n - k / path.n).max())


@dataclass(frozen=True)
class NormalizedStats:
    clt_stat: float  # (||S_n||^2 - n) / sqrt(2 n^2 / d)
    t_stat: float  # (T_n - n) / tau
    q_stat: float  # Q_n / sqrt(2 n^2 / d)
    tau: float


def normalized_statistics(
    summary: WalkSummary, n: int, d: int, model: ModelSpec, tau: float | None = None
) -> NormalizedStats:
    """Normalize the endpoint statistics for the limit-law experiments.

    tau defaults per the model's tail class: sqrt(n) for finite-variance
    radial laws, n^(1/alpha) * sigma(alpha) for heavy-tail radial models,
    and d^(-1) * (n d)^(1/alpha) * sigma(alpha) for the heavy-tail iid
    model (whose diagonal part aggregates n*d component tails).
    """
    if n < 2:
        raise WalkError(f"normalization needs n >= 2, got n={n}")
    denom = math.sqrt(2.0 * n * n / d)
    if tau is None:
        alpha = model.heavy_tail_alpha
        if alpha is None:
            tau = math.sqrt(n)
        elif model.kind == "iid":
            tau = (n * d) ** (1.0 / alpha) * stable_scale_for_pareto(alpha) / d
        else:
            tau = n ** (1.0 / alpha) * stable_scale_for_pareto(alpha)
    return NormalizedStats(
        clt_stat=(summary.norm_sq_final - n) / denom,
        t_stat=(summary.t_final - n) / tau,
        q_stat=summary.q_final / denom,
        tau=tau,
    )
