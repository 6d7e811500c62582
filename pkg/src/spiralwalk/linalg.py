"""Small dense symmetric linear algebra for the alignment machinery.

Everything here operates on anchored Gram matrices of point clouds.  Two
clouds with equal Gram matrices (after shifting a base point to the origin)
differ by an orthogonal map, so Gram square roots give coordinates of a
cloud that are canonical up to isometry.  Matrices are small (the number of
net points, m <= ~256), so a dependency-free cyclic Jacobi eigensolver is
accurate and fast enough; we deliberately do not call a LAPACK eigensolver
so that the alignment path is self-contained and easy to audit.

All floating point in this project is 64-bit.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

# Symmetry / PSD tolerances for Gram matrices.
SYMMETRY_RTOL = 1e-12
EIGENVALUE_CLAMP_REL = 1e-9
JACOBI_OFFDIAG_REL = 1e-13
PSD_SQRT_RTOL = 1e-8


class LinalgError(ValueError):
    """Structural error: bad shapes, asymmetric or indefinite input."""


@dataclass(frozen=True)
class PointCloud:
    """An ordered finite set of points in a common R^dim.

    Order matters: walk snapshots are time-ordered and the alignment
    correspondence uses that order.
    """

    points: np.ndarray  # shape (m, dim), float64
    label: str = field(default="", compare=False)

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2:
            raise LinalgError(f"point cloud must be 2-d (m, dim), got shape {pts.shape}")
        if pts.shape[0] == 0:
            raise LinalgError("point cloud must be nonempty")
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def diameter(self) -> float:
        d2 = pairwise_sq_dists(self.points, self.points)
        return float(np.sqrt(d2.max()))


def pairwise_sq_dists(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Squared Euclidean distances, shape (len(a), len(b)).

    Uses the expanded form with a clamp at zero; the clamp only removes
    negative rounding residue of order eps*scale.
    """
    aa = np.einsum("ij,ij->i", a, a)
    bb = np.einsum("ij,ij->i", b, b)
    d2 = aa[:, None] + bb[None, :] - 2.0 * (a @ b.T)
    np.maximum(d2, 0.0, out=d2)
    return d2


def check_gram(g: np.ndarray) -> np.ndarray:
    """Validate a Gram matrix: square, symmetric to 1e-12 relative."""
    g = np.asarray(g, dtype=np.float64)
    if g.ndim != 2 or g.shape[0] != g.shape[1]:
        raise LinalgError(f"gram matrix must be square, got shape {g.shape}")
    scale = max(1.0, float(np.abs(g).max()))
    if np.abs(g - g.T).max() > SYMMETRY_RTOL * scale:
        raise LinalgError("gram matrix is not symmetric within 1e-12 relative tolerance")
    return g


def gram_from_cloud(cloud: PointCloud, base_index: int = 0) -> np.ndarray:
    """G[i][j] = <x_i - x_base, x_j - x_base> over the non-base points.

    The base point is removed, so an m+1 point cloud yields an m x m matrix.
    Translation invariant by construction.
    """
    pts = cloud.points
    if not 0 <= base_index < len(cloud):
        raise LinalgError(f"base_index {base_index} out of range for cloud of {len(cloud)}")
    anchored = np.delete(pts, base_index, axis=0) - pts[base_index]
    g = anchored @ anchored.T
    # exact symmetrization: A @ A.T is symmetric up to rounding only
    return 0.5 * (g + g.T)


def jacobi_eigh(g: np.ndarray, max_sweeps: int = 64) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of a symmetric matrix by cyclic Jacobi rotations.

    Returns (w, V) with g = V @ diag(w) @ V.T and V orthogonal.  Sweeps are
    full upper-triangle passes; convergence once the off-diagonal Frobenius
    norm drops below 1e-13 * ||g||_F.  Row/column updates are vectorized so
    each rotation is O(m) in NumPy rather than a Python loop.
    """
    a = check_gram(g).copy()
    m = a.shape[0]
    v = np.eye(m)
    if m == 1:
        return a.diagonal().copy(), v
    fro = float(np.linalg.norm(a))
    if fro == 0.0:
        return np.zeros(m), v
    tol = JACOBI_OFFDIAG_REL * fro
    for _ in range(max_sweeps):
        off = float(np.sqrt(max(0.0, fro * fro - np.einsum("ii,ii->", a, a))))
        if off < tol:
            break
        for p in range(m - 1):
            for q in range(p + 1, m):
                apq = a[p, q]
                if abs(apq) < 1e-300:
                    continue
                phi = 0.5 * np.arctan2(2.0 * apq, a[q, q] - a[p, p])
                c = np.cos(phi)
                s = np.sin(phi)
                # rotate rows/cols p and q of a
                ap = a[p, :].copy()
                aq = a[q, :].copy()
                a[p, :] = c * ap - s * aq
                a[q, :] = s * ap + c * aq
                ap = a[:, p].copy()
                aq = a[:, q].copy()
                a[:, p] = c * ap - s * aq
                a[:, q] = s * ap + c * aq
                a[p, q] = 0.0
                a[q, p] = 0.0
                vp = v[:, p].copy()
                vq = v[:, q].copy()
                v[:, p] = c * vp - s * vq
                v[:, q] = s * vp + c * vq
        fro = float(np.linalg.norm(a))
    return a.diagonal().copy(), v


def psd_sqrt(g: np.ndarray) -> np.ndarray:
    """Symmetric PSD square root S with S @ S = G to 1e-8 relative Frobenius.

    Eigenvalues in [-1e-9 * lambda_max, 0) are rounding noise and clamp to 0;
    anything below that threshold means the input was not a Gram matrix.
    """
    g = check_gram(g)
    w, v = jacobi_eigh(g)
    w_max = float(w.max(initial=0.0))
    clamp_floor = -EIGENVALUE_CLAMP_REL * max(w_max, np.finfo(np.float64).tiny)
    if w.min(initial=0.0) < clamp_floor:
        raise LinalgError(
            f"matrix is not PSD: eigenvalue {w.min():.3e} below {clamp_floor:.3e}"
        )
    np.maximum(w, 0.0, out=w)
    s = (v * np.sqrt(w)) @ v.T
    return 0.5 * (s + s.T)
