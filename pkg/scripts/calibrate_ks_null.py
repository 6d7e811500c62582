"""Monte Carlo calibration of KS null quantiles at the exact sample sizes
used by the verdict machinery (asymptotic Kolmogorov quantiles are off at
these N).  One-sample nulls are distribution-free, so uniforms suffice; the
D statistics are computed inline (same formulas as stats.ks_one_sample /
ks_two_sample, which the test suite checks against oracles) for speed.
Results are frozen into src/spiralwalk/fixtures.py.
"""

import time

import numpy as np

from spiralwalk.sampling import SeedSpec, derive_stream

CONFIDENCE = 0.999


def one_sample_null(n: int, salt: int, reps: int) -> float:
    stream = derive_stream(SeedSpec(411, salt))
    i = np.arange(1, n + 1)
    ds = np.empty(reps)
    for r in range(reps):
        u = np.sort(stream.random(n))
        ds[r] = max((i / n - u).max(), (u - (i - 1) / n).max())
    return float(np.quantile(ds, CONFIDENCE))


def two_sample_null(na: int, nb: int, salt: int, reps: int) -> float:
    stream = derive_stream(SeedSpec(412, salt))
    ds = np.empty(reps)
    for r in range(reps):
        a = np.sort(stream.random(na))
        b = np.sort(stream.random(nb))
        pts = np.concatenate([a, b])
        fa = np.searchsorted(a, pts, side="right") / na
        fb = np.searchsorted(b, pts, side="right") / nb
        ds[r] = np.abs(fa - fb).max()
    return float(np.quantile(ds, CONFIDENCE))


def main():
    jobs = [
        ("one_sample", 10**4, None, 2 * 10**4),
        ("one_sample", 64, None, 10**5),
        ("one_sample", 10**5, None, 5000),
        ("two_sample", 2000, 2000, 2 * 10**4),
        ("two_sample", 10**4, 10**4, 10**4),
    ]
    for i, (kind, a, b, reps) in enumerate(jobs):
        t0 = time.time()
        if kind == "one_sample":
            q = one_sample_null(a, i, reps)
            print(f"one_sample N={a}: q999={q:.6f} reps={reps}  ({time.time() - t0:.0f}s)", flush=True)
        else:
            q = two_sample_null(a, b, i, reps)
            print(f"two_sample N=({a},{b}): q999={q:.6f} reps={reps}  ({time.time() - t0:.0f}s)", flush=True)


if __name__ == "__main__":
    main()
