"""Random-stream plumbing and the distribution samplers used by all models.

Streams are derived counter-style: (master_seed, replicate_index) maps to an
independent PCG64 generator through NumPy's SeedSequence spawn keys, so
replicate k gets the same stream no matter which worker asks first.

Heavy-tail conventions used throughout the project:

* ParetoSquared(alpha): W = x_m * U^(-1/alpha) with x_m = (alpha-1)/alpha,
  so P[W > w] = (x_m / w)^alpha for w >= x_m and E W = 1 exactly.
* The spectrally positive alpha-stable reference law is sampled by the
  Chambers-Mallows-Stuck construction with skew +1 in the parameterization
  that is continuous in alpha and has zero mean for alpha > 1.
* stable_scale_for_pareto(alpha) returns the sigma(alpha) for which
  (sum of m Pareto draws - m) / m^(1/alpha) converges to that stable law
  with scale sigma(alpha); it comes from the classical tail-constant
  formula, and was cross-checked pre-build by quantile matching against
  the CMS sampler (see tests/test_sampling.py for the frozen fit values).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np


class SamplingError(ValueError):
    """Invalid sampler parameters."""


@dataclass(frozen=True)
class SeedSpec:
    """Identity of one reproducible stream: experiment seed plus replicate."""

    master_seed: int
    replicate_index: int = 0

    def __post_init__(self):
        if self.master_seed < 0 or self.replicate_index < 0:
            raise SamplingError("seed and replicate index must be nonnegative")


def derive_stream(spec: SeedSpec) -> np.random.Generator:
    """Independent generator for one replicate.

    spawn_key=(replicate_index,) gives counter-based derivation: requesting
    replicate 5 after replicate 7 yields the same stream as in order.
    """
    seq = np.random.SeedSequence(spec.master_seed, spawn_key=(spec.replicate_index,))
    return np.random.Generator(np.random.PCG64(seq))


def sample_unit_sphere(d: int, stream: np.random.Generator, size: int | None = None):
    """Uniform point(s) on the unit sphere in R^d: normalized Gaussians.

    Returns shape (d,) for size=None, else (size, d).  ||U|| = 1 to 1e-12.
    """
    if d < 1:
        raise SamplingError(f"dimension must be >= 1, got {d}")
    m = 1 if size is None else size
    g = stream.standard_normal((m, d))
    norms = np.linalg.norm(g, axis=1)
    # a zero row has probability ~0 but would poison the normalization
    while (bad := norms < 1e-150).any():
        g[bad] = stream.standard_normal((int(bad.sum()), d))
        norms = np.linalg.norm(g, axis=1)
    u = g / norms[:, None]
    return u[0] if size is None else u


# ---------------------------------------------------------------------------
# Radial laws (Models 2 and 3)
# ---------------------------------------------------------------------------

_RADIAL_KINDS = {"constant", "symmetric_sign", "two_point", "pareto_squared", "signed_pareto_squared"}


@dataclass(frozen=True)
class RadialLaw:
    """Law of the step length R.  All laws satisfy E R^2 = 1 exactly.

    kind            R                                E R    Var(R^2)
    constant        1                                 1       0
    symmetric_sign  +1 or -1, equal odds              0       0
    two_point       s * sqrt(1 + a*t), s,t = +-1      0       a^2
    pareto_squared  sqrt(W), W Pareto tail alpha      >0      infinite
    signed_pareto_squared  s * sqrt(W)                0       infinite
    """

    kind: str
    spread: float = 0.0  # two_point only, 0 <= a < 1
    alpha: float = 0.0  # pareto kinds only, 1 < alpha < 2

    def __post_init__(self):
        if self.kind not in _RADIAL_KINDS:
            raise SamplingError(f"unknown radial law {self.kind!r}")
        if self.kind == "two_point" and not 0.0 <= self.spread < 1.0:
            raise SamplingError(f"two_point spread must be in [0, 1), got {self.spread}")
        if self.kind.endswith("pareto_squared") and not 1.0 < self.alpha < 2.0:
            raise SamplingError(
                f"pareto_squared tail index must be in (1, 2), got {self.alpha}"
            )

    @staticmethod
    def constant() -> "RadialLaw":
        return RadialLaw("constant")

    @staticmethod
    def symmetric_sign() -> "RadialLaw":
        return RadialLaw("symmetric_sign")

    @staticmethod
    def two_point(spread: float) -> "RadialLaw":
        return RadialLaw("two_point", spread=spread)

    @staticmethod
    def pareto_squared(alpha: float) -> "RadialLaw":
        return RadialLaw("pareto_squared", alpha=alpha)

    @staticmethod
    def signed_pareto_squared(alpha: float) -> "RadialLaw":
        return RadialLaw("signed_pareto_squared", alpha=alpha)

    @property
    def mean_is_zero(self) -> bool:
        return self.kind in ("symmetric_sign", "two_point", "signed_pareto_squared")

    @property
    def var_r_sq(self) -> float:
        """Var(R^2); infinite for the heavy-tail laws."""
        if self.kind in ("constant", "symmetric_sign"):
            return 0.0
        if self.kind == "two_point":
            return self.spread * self.spread
        return math.inf


def pareto_w(alpha: float, size, stream: np.random.Generator) -> np.ndarray:
    """Pareto variates with tail index alpha, scaled so E W = 1.

    W = x_m * U^(-1/alpha), x_m = (alpha-1)/alpha, U uniform on (0, 1].
    """
    if not 1.0 < alpha < 2.0:
        raise SamplingError(f"pareto tail index must be in (1, 2), got {alpha}")
    x_m = (alpha - 1.0) / alpha
    u = 1.0 - stream.random(size)  # (0, 1]: excludes the U=0 overflow point
    return x_m * u ** (-1.0 / alpha)


def _signs(size, stream: np.random.Generator) -> np.ndarray:
    return 2.0 * stream.integers(0, 2, size=size) - 1.0


def sample_radial(law: RadialLaw, stream: np.random.Generator, size: int | None = None):
    """Draw(s) of R under the given law; scalar float when size is None.

    Stream consumption per draw is fixed by law kind (documented here so the
    walk kernels can reproduce it): constant none, symmetric_sign one integer,
    two_point two integers, pareto kinds one uniform (+ one integer if signed).
    """
    m = 1 if size is None else size
    if law.kind == "constant":
        out = np.ones(m)
    elif law.kind == "symmetric_sign":
        out = _signs(m, stream)
    elif law.kind == "two_point":
        t = _signs(m, stream)
        s = _signs(m, stream)
        out = s * np.sqrt(1.0 + law.spread * t)
    elif law.kind == "pareto_squared":
        out = np.sqrt(pareto_w(law.alpha, m, stream))
    else:  # signed_pareto_squared
        w = pareto_w(law.alpha, m, stream)
        out = _signs(m, stream) * np.sqrt(w)
    return float(out[0]) if size is None else out


# ---------------------------------------------------------------------------
# Spectrally positive alpha-stable reference law
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class StableLawRef:
    """Zero-mean spectrally positive alpha-stable law with a scale.

    alpha = 2 is allowed and degenerates to Normal(0, 2*scale^2).
    """

    alpha: float
    scale: float = 1.0

    def __post_init__(self):
        if not 1.0 < self.alpha <= 2.0:
            raise SamplingError(
                f"stable reference needs alpha in (1, 2], got {self.alpha}"
            )
        if not self.scale > 0.0:
            raise SamplingError(f"scale must be positive, got {self.scale}")


def sample_stable(ref: StableLawRef, stream: np.random.Generator, size: int | None = None):
    """Chambers-Mallows-Stuck draw(s) from the skew +1 stable law.

    Uses the zero-mean-for-alpha>1 parameterization:

        B = atan(beta * tan(pi*alpha/2)) / alpha
        S = (1 + beta^2 * tan^2(pi*alpha/2))^(1/(2*alpha))
        Z = S * sin(alpha*(V+B)) / cos(V)^(1/alpha)
              * (cos(V - alpha*(V+B)) / W)^((1-alpha)/alpha)

    with V uniform on (-pi/2, pi/2) and W standard exponential.  alpha = 2
    is special-cased to sqrt(2)*N(0,1): the generic formula hits fractional
    powers of cos values that graze zero from below near |V| = pi/2 there.
    """
    m = 1 if size is None else size
    alpha, sigma = ref.alpha, ref.scale
    if alpha == 2.0:
        out = math.sqrt(2.0) * sigma * stream.standard_normal(m)
        return float(out[0]) if size is None else out
    beta = 1.0
    ta = math.tan(math.pi * alpha / 2.0)
    b = math.atan(beta * ta) / alpha
    s = (1.0 + beta * beta * ta * ta) ** (1.0 / (2.0 * alpha))
    v = (stream.random(m) - 0.5) * math.pi
    w = stream.standard_exponential(m)
    avb = alpha * (v + b)
    out = (
        s
        * np.sin(avb)
        / np.cos(v) ** (1.0 / alpha)
        * (np.cos(v - avb) / w) ** ((1.0 - alpha) / alpha)
    )
    out *= sigma
    return float(out[0]) if size is None else out


def stable_scale_for_pareto(alpha: float) -> float:
    """Scale sigma(alpha) of the stable limit of centered Pareto sums.

    For W in the exact-Pareto family above, (W_1 + ... + W_m - m)/m^(1/alpha)
    converges to the skew +1 stable law with this scale.  Classical
    tail-constant formula, with x_m = (alpha-1)/alpha:

        sigma^alpha = x_m^alpha * Gamma(2-alpha) * cos(pi*alpha/2) / (1-alpha)

    (both Gamma(2-alpha)*cos(pi*alpha/2) and 1-alpha are sign-coherent on
    (1,2), so the ratio is positive).
    """
    if not 1.0 < alpha < 2.0:
        raise SamplingError(f"alpha must be in (1, 2), got {alpha}")
    x_m = (alpha - 1.0) / alpha
    val = (
        x_m**alpha
        * math.gamma(2.0 - alpha)
        * math.cos(math.pi * alpha / 2.0)
        / (1.0 - alpha)
    )
    return val ** (1.0 / alpha)


def hill_tail_exponent(sample: np.ndarray, top_fraction: float = 0.01) -> float:
    """Hill estimator of the upper-tail exponent from the top order statistics.

    Used as an independent oracle for the heavy-tail samplers.
    """
    x = np.sort(np.asarray(sample, dtype=np.float64))
    k = max(int(top_fraction * len(x)), 10)
    if k >= len(x):
        raise SamplingError("sample too small for Hill estimation")
    tail = x[-k:]
    threshold = x[-k - 1]
    if threshold <= 0.0:
        raise SamplingError("Hill estimator needs a positive tail threshold")
    return 1.0 / float(np.mean(np.log(tail / threshold)))
