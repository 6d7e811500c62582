"""Metric-geometry toolkit: the square-root-of-time reference curve,
distortion bounds, Hausdorff distance, eps-nets, and a Gram-based
alignment estimator for Hausdorff distance up to isometry.

The spiral is the interval [0,1] with metric d(s,t) = sqrt(|t-s|); its
l^2 realization used here is

    w(t)[k] = (2*sqrt(2)/pi) * sin(pi*(k - 1/2)*t) / (2k - 1),   k = 1..K,

whose pairwise distances reproduce sqrt(|t-s|) up to a truncation error
that decays like 1/K (pre-build sweep values are frozen in the tests).

Alignment idea: a cloud shifted so one point is the origin is determined
up to orthogonal maps by the Gram matrix of the shifted points, so both
clouds are re-embedded via the PSD square roots of their Gram matrices
and compared by plain Hausdorff distance in that common coordinate frame.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .linalg import LinalgError, PointCloud, gram_from_cloud, psd_sqrt
from .walk import WalkPath


class GeometryError(ValueError):
    """Domain violations in the geometry layer."""


_CHUNK_ELEMS = 2**24


def _sq_dists_exact(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Pairwise squared distances via direct differences, chunked over rows
    of a.  Slower than the inner-product expansion but free of cancellation:
    identical rows give exactly 0, which the Hausdorff contract relies on."""
    rows = max(1, _CHUNK_ELEMS // max(1, b.shape[0] * b.shape[1]))
    out = np.empty((a.shape[0], b.shape[0]))
    for lo in range(0, a.shape[0], rows):
        hi = min(lo + rows, a.shape[0])
        diff = a[lo:hi, None, :] - b[None, :, :]
        out[lo:hi] = np.einsum("ijk,ijk->ij", diff, diff)
    return out


def spiral_metric(s: float, t: float) -> float:
    """sqrt(|t - s|) on [0, 1]."""
    if not (0.0 <= s <= 1.0 and 0.0 <= t <= 1.0):
        raise GeometryError(f"spiral metric needs s, t in [0, 1], got ({s}, {t})")
    return math.sqrt(abs(t - s))


def spiral_embedding(t: float, truncation_terms: int = 10**4) -> np.ndarray:
    """Truncated l^2 embedding of the spiral point at time t (see module doc)."""
    if not 0.0 <= t <= 1.0:
        raise GeometryError(f"time must be in [0, 1], got {t}")
    if truncation_terms < 1:
        raise GeometryError(f"need at least one series term, got {truncation_terms}")
    k = np.arange(1, truncation_terms + 1)
    odd = 2.0 * k - 1.0
    return (2.0 * math.sqrt(2.0) / math.pi) * np.sin(math.pi * (k - 0.5) * t) / odd


@dataclass(frozen=True)
class SpiralRef:
    """A finite reference sample of the spiral: times and their embeddings."""

    grid: tuple
    truncation_terms: int = 10**4

    def __post_init__(self):
        g = tuple(float(t) for t in self.grid)
        if len(g) == 0 or any(not 0.0 <= t <= 1.0 for t in g):
            raise GeometryError("grid must be nonempty, within [0, 1]")
        if list(g) != sorted(g):
            raise GeometryError("grid must be sorted ascending")
        if self.truncation_terms < 1:
            raise GeometryError("truncation_terms must be >= 1")
        object.__setattr__(self, "grid", g)

    def cloud(self) -> PointCloud:
        k = np.arange(1, self.truncation_terms + 1)
        odd = 2.0 * k - 1.0
        t = np.asarray(self.grid)
        pts = (2.0 * math.sqrt(2.0) / math.pi) * np.sin(
            math.pi * np.outer(t, k - 0.5)
        ) / odd
        return PointCloud(pts, label="spiral")


def path_distortion(path: WalkPath) -> float:
    """Max over snapshot pairs of | ||P_j - P_i|| - sqrt((k_j - k_i)/n) |.

    Snapshots are already scaled by 1/sqrt(n), so this is the distortion of
    the rescaled-path-to-spiral correspondence k/n <-> t; twice this value
    upper-bounds the Gromov-Hausdorff distance to the spiral restricted to
    the same grid.
    """
    if path.snapshots is None or len(path.snapshots) < 2:
        raise GeometryError("path_distortion needs at least 2 snapshots")
    pts = path.snapshots.points
    dists = np.sqrt(_sq_dists_exact(pts, pts))
    times = path.grid / path.n if path.n > 0 else path.grid.astype(float)
    target = np.sqrt(np.abs(times[:, None] - times[None, :]))
    return float(np.abs(dists - target).max())


def hausdorff_distance(a: PointCloud, b: PointCloud) -> float:
    """Exact Hausdorff distance: max of the two directed max-min distances."""
    if a.dim != b.dim:
        raise GeometryError(f"dimension mismatch: {a.dim} vs {b.dim}")
    d2 = _sq_dists_exact(a.points, b.points)
    directed_ab = d2.min(axis=1).max()
    directed_ba = d2.min(axis=0).max()
    return float(np.sqrt(max(directed_ab, directed_ba)))


def eps_net(a: PointCloud, eps: float) -> list[int]:
    """Greedy farthest-point eps-net indices; starts at index 0, ties to the
    lowest index; every point ends within eps of a selected one."""
    if eps <= 0.0:
        raise GeometryError(f"eps must be positive, got {eps}")
    pts = a.points
    n = len(a)
    selected = [0]
    d2 = np.square(pts - pts[0]).sum(axis=1)
    eps2 = eps * eps
    while True:
        far = int(np.argmax(d2))  # argmax takes the lowest index on ties
        if d2[far] <= eps2:
            return selected
        selected.append(far)
        np.minimum(d2, np.square(pts - pts[far]).sum(axis=1), out=d2)


@dataclass(frozen=True)
class AlignmentResult:
    hausdorff_upper: float
    anchor_indices: tuple
    eps_used: float

    def __post_init__(self):
        if not (math.isfinite(self.hausdorff_upper) and self.hausdorff_upper >= 0.0):
            raise GeometryError("hausdorff_upper must be finite and nonnegative")


def _covering_radius(cloud: PointCloud, rep_points: np.ndarray) -> float:
    d2 = _sq_dists_exact(cloud.points, rep_points)
    return float(np.sqrt(d2.min(axis=1).max()))


def _aligned_coordinates(points: np.ndarray) -> np.ndarray:
    """Isometry-free coordinates of an anchored net: rows are the base point
    (origin) followed by the columns of the Gram square root."""
    cloud = PointCloud(points)
    if len(cloud) == 1:
        return np.zeros((1, 1))
    g = gram_from_cloud(cloud, base_index=0)
    s = psd_sqrt(g)
    m = s.shape[0]
    return np.vstack([np.zeros(m), s])


def _pad_to(points: np.ndarray, dim: int) -> np.ndarray:
    if points.shape[1] == dim:
        return points
    out = np.zeros((points.shape[0], dim))
    out[:, : points.shape[1]] = points
    return out


def _greedy_profile_match(net_points: np.ndarray, b: PointCloud) -> list[int]:
    """Match net points to B greedily by centroid-distance profile (an
    isometry-invariant signature), ties to the lowest index."""
    prof_a = np.linalg.norm(net_points - net_points.mean(axis=0), axis=1)
    prof_b = np.linalg.norm(b.points - b.points.mean(axis=0), axis=1)
    taken = np.zeros(len(b), dtype=bool)
    out = []
    for pa in prof_a:
        gap = np.abs(prof_b - pa)
        gap[taken] = np.inf
        j = int(np.argmin(gap))
        out.append(j)
        if taken.sum() < len(b) - 1:
            taken[j] = True
    return out


def align_and_hausdorff(
    a: PointCloud, b: PointCloud, eps: float, matching: str = "index"
) -> AlignmentResult:
    """Upper bound on the Hausdorff distance between the isometry classes.

    (1) greedy eps-net in A; correspondence points in B either by relative
    index (exact index for equal-size clouds - the path-snapshot case,
    where row order is time order) or by greedy metric matching on
    centroid-distance profiles (matching="greedy", for unordered clouds);
    (2) both nets re-embedded through their Gram square roots (anchored at
    the first net point), which strips the ambient isometry;
    (3) Hausdorff distance between the re-embedded nets, plus both sides'
    actual covering radii, is the reported bound.

    Any correspondence yields a valid bound; the choice only affects
    tightness. Degenerate case (a single-point net on either side, e.g.
    all points coincide): falls back to the Hausdorff distance of the
    translated clouds, zero-padded to a common dimension.
    """
    if matching not in ("index", "greedy"):
        raise GeometryError(f"unknown matching mode {matching!r}")
    net_a = eps_net(a, eps)
    rep_a = a.points[net_a]
    if matching == "greedy":
        rel = _greedy_profile_match(rep_a, b)
    elif len(a) == 1:
        rel = [0] * len(net_a)
    else:
        rel = [round(i * (len(b) - 1) / (len(a) - 1)) for i in net_a]
    rep_b = b.points[rel]

    radius_a = _covering_radius(a, rep_a)
    radius_b = _covering_radius(b, rep_b)

    if len(net_a) == 1:
        # degenerate net: compare plain translates
        dim = max(a.dim, b.dim)
        ta = _pad_to(a.points - a.points[0], dim)
        tb = _pad_to(b.points - b.points[0], dim)
        upper = hausdorff_distance(PointCloud(ta), PointCloud(tb))
        return AlignmentResult(upper, tuple(net_a), eps)

    try:
        coords_a = _aligned_coordinates(rep_a)
        coords_b = _aligned_coordinates(rep_b)
    except LinalgError as exc:
        raise GeometryError(f"alignment failed on a degenerate Gram matrix: {exc}") from exc
    dim = max(coords_a.shape[1], coords_b.shape[1])
    aligned = hausdorff_distance(
        PointCloud(_pad_to(coords_a, dim)), PointCloud(_pad_to(coords_b, dim))
    )
    return AlignmentResult(aligned + radius_a + radius_b, tuple(net_a), eps)
