"""Pilot calibration for the Monte Carlo acceptance fixtures.

Runs every fixture-gated acceptance configuration at its published size
over three disjoint master seeds and prints the fixture entries to freeze
into spiralwalk/fixtures.py:

  PILOT_KS[(experiment, regime, replicates)]   KS fixtures for the
      normal-limit verdicts.  Rule: 1.3 * max over the three seeds,
      floored at the 99.9% one-sample KS null quantile, so the fixture
      absorbs the deterministic finite-size bias the null table ignores
      but never dips into pure-noise territory.

  PILOT_TOP_MEDIAN[(experiment, model, law)]   top-rung median bounds for
      the ladder experiments, rule 1.3 * max over seeds.

Usage: python3 scripts/calibrate_pilots.py [--quick]
  --quick cuts replicate counts 20x for a smoke pass (never freeze those).
"""

import sys
import time

import numpy as np

from spiralwalk import fixtures
from spiralwalk.experiments import ExperimentConfig, run_experiment

SEEDS = (1001, 2002, 3003)

# (experiment, regime, kwargs) at acceptance sizes; replicates is read from
# kwargs so the printed key matches what the verdict layer will look up
KS_CONFIGS = [
    ("clt_model1", "offdiag_gaussian", dict(law="rademacher", n=500, d=500, replicates=10**4)),
    ("clt_model2", "diag", dict(law="twopoint", spread=0.5, n=100, d=10**4, replicates=10**4)),
    ("clt_model2", "offdiag", dict(law="twopoint", spread=0.5, n=10**4, d=100, replicates=10**4)),
    (
        "clt_model2",
        "balanced",
        dict(law="twopoint", spread=0.5, n=2000, d=2000, gamma=1.0, replicates=10**4),
    ),
    ("clt_model3", "diag", dict(law="twopoint", spread=0.5, n=100, d=10**4, replicates=10**4)),
    ("clt_model3", "offdiag", dict(law="twopoint", spread=0.5, n=10**4, d=100, replicates=10**4)),
    (
        "clt_model3",
        "balanced",
        dict(law="twopoint", spread=0.5, n=2000, d=2000, gamma=1.0, replicates=10**4),
    ),
    ("poisson_simple_rw", "diffuse", dict(law="sign", n=10**4, d=100, replicates=10**4)),
    (
        "stable_model2",
        "offdiag_gaussian",
        dict(law="pareto", alpha=1.5, n=10**4, d=100, replicates=10**4),
    ),
]

# (experiment, model, law, kwargs); median of the last ladder column
MEDIAN_CONFIGS = [
    ("fwlln", "iid", "rademacher", dict(replicates=64)),
    ("fwlln", "rotinv", "twopoint", dict(spread=0.5, replicates=64)),
    ("distortion_ladder", "iid", "rademacher", dict(replicates=64)),
    ("distortion_ladder", "rotinv", "twopoint", dict(spread=0.5, replicates=64)),
]


def ks_statistic(experiment, regime, kwargs, seed):
    config = ExperimentConfig(experiment=experiment, master_seed=seed, **kwargs)
    report = run_experiment(config)
    assert report.regime == regime, (report.regime, regime)
    verdict = dict(report.verdicts)["ks_vs_normal_limit"]
    return verdict.statistic


def top_median(experiment, model, law, kwargs, seed):
    config = ExperimentConfig(
        experiment=experiment, model=model, law=law, master_seed=seed, **kwargs
    )
    report = run_experiment(config)
    prefix = {"fwlln": "supdev_", "distortion_ladder": "gh_bound_"}[experiment]
    cols = [c for c in report.columns if c.startswith(prefix)]
    return float(np.median(report.rows[cols[-1]]))


def main(argv):
    quick = "--quick" in argv
    shrink = 20 if quick else 1

    print("# PILOT_KS entries")
    for experiment, regime, kwargs in KS_CONFIGS:
        kwargs = dict(kwargs)
        kwargs["replicates"] = max(100, kwargs["replicates"] // shrink)
        values = []
        for seed in SEEDS:
            t0 = time.perf_counter()
            d_stat = ks_statistic(experiment, regime, kwargs, seed)
            values.append(d_stat)
            print(
                f"#   {experiment}/{regime} seed={seed}: KS={d_stat:.6f} "
                f"({time.perf_counter() - t0:.1f}s)",
                flush=True,
            )
        floor = fixtures.ks_threshold_one_sample(kwargs["replicates"])
        fixture = max(1.3 * max(values), floor)
        print(
            f'    ("{experiment}", "{regime}", {kwargs["replicates"]}): {fixture:.6f},',
            flush=True,
        )

    print("# PILOT_TOP_MEDIAN entries")
    for experiment, model, law, kwargs in MEDIAN_CONFIGS:
        kwargs = dict(kwargs)
        kwargs["replicates"] = max(8, kwargs["replicates"] // shrink)
        values = []
        for seed in SEEDS:
            t0 = time.perf_counter()
            med = top_median(experiment, model, law, kwargs, seed)
            values.append(med)
            print(
                f"#   {experiment}/{model}/{law} seed={seed}: median={med:.6f} "
                f"({time.perf_counter() - t0:.1f}s)",
                flush=True,
            )
        fixture = 1.3 * max(values)
        print(
            f'    ("{experiment}", "{model}", "{law}"): {fixture:.6f},',
            flush=True,
        )
    return 0


if __name__ == "__main__":
    sys.exit(main(sys.argv[1:]))
