"""One-shot dry run of every acceptance configuration at the acceptance
seed, printing verdict statistics so the frozen expectations in
tests/test_acceptance.py can be checked against reality before freezing.

Usage: python3 scripts/acceptance_dry_run.py
"""

import sys
import time

import numpy as np

from spiralwalk.experiments import ExperimentConfig, run_experiment, run_raw_walks

SEED = 0


def show(tag, config, runner=run_experiment, extra_keys=()):
    t0 = time.perf_counter()
    rep = runner(config)
    dt = time.perf_counter() - t0
    bits = [f"{name}={v.statistic:.6f}({'P' if v.passed else 'F'}@{v.threshold:.6f})"
            for name, v in rep.verdicts]
    for key in extra_keys:
        bits.append(f"{key}={rep.extras.get(key)}")
    print(f"{tag:34s} {dt:7.1f}s  {' '.join(bits)}", flush=True)
    return rep


def ladder_medians(rep, prefix):
    cols = [c for c in rep.columns if c.startswith(prefix)]
    return [float(np.median(rep.rows[c])) for c in cols]


def main():
    # ladders
    rep = show("fwlln iid/rademacher 64",
               ExperimentConfig(experiment="fwlln", model="iid", law="rademacher",
                                replicates=64, master_seed=SEED))
    print("   medians:", ladder_medians(rep, "supdev_"), flush=True)
    rep = show("fwlln rotinv/twopoint 64",
               ExperimentConfig(experiment="fwlln", model="rotinv", law="twopoint",
                                spread=0.5, replicates=64, master_seed=SEED))
    print("   medians:", ladder_medians(rep, "supdev_"), flush=True)
    rep = show("distortion iid/rademacher 64",
               ExperimentConfig(experiment="distortion_ladder", model="iid",
                                law="rademacher", replicates=64, master_seed=SEED))
    print("   medians:", ladder_medians(rep, "gh_bound_"), flush=True)
    rep = show("distortion rotinv/twopoint 64",
               ExperimentConfig(experiment="distortion_ladder", model="rotinv",
                                law="twopoint", spread=0.5, replicates=64,
                                master_seed=SEED))
    print("   medians:", ladder_medians(rep, "gh_bound_"), flush=True)
    rep = show("brownian 64",
               ExperimentConfig(experiment="brownian_instance", replicates=64,
                                master_seed=SEED))
    print("   medians:", ladder_medians(rep, "distortion_"), flush=True)
    rep = show("align iid/rademacher 16",
               ExperimentConfig(experiment="align_check", model="iid",
                                law="rademacher", replicates=16, master_seed=SEED))
    print("   medians:", ladder_medians(rep, "align_"), flush=True)

    # finite-variance limits
    show("clt1 n=d=500 1e4",
         ExperimentConfig(experiment="clt_model1", law="rademacher", n=500, d=500,
                          replicates=10**4, master_seed=SEED))
    show("clt2 diag 100/1e4",
         ExperimentConfig(experiment="clt_model2", law="twopoint", spread=0.5,
                          n=100, d=10**4, replicates=10**4, master_seed=SEED),
         extra_keys=("limit_variance",))
    show("clt2 offdiag 1e4/100",
         ExperimentConfig(experiment="clt_model2", law="twopoint", spread=0.5,
                          n=10**4, d=100, replicates=10**4, master_seed=SEED))
    show("clt2 balanced 2000/2000",
         ExperimentConfig(experiment="clt_model2", law="twopoint", spread=0.5,
                          n=2000, d=2000, gamma=1.0, replicates=10**4,
                          master_seed=SEED),
         extra_keys=("limit_variance",))
    show("clt3 diag 100/1e4",
         ExperimentConfig(experiment="clt_model3", law="twopoint", spread=0.5,
                          n=100, d=10**4, replicates=10**4, master_seed=SEED))
    show("clt3 offdiag 1e4/100",
         ExperimentConfig(experiment="clt_model3", law="twopoint", spread=0.5,
                          n=10**4, d=100, replicates=10**4, master_seed=SEED))
    show("clt3 balanced 2000/2000",
         ExperimentConfig(experiment="clt_model3", law="twopoint", spread=0.5,
                          n=2000, d=2000, gamma=1.0, replicates=10**4,
                          master_seed=SEED))

    # simple walk
    show("poisson collisionless 10/1e6",
         ExperimentConfig(experiment="poisson_simple_rw", law="sign", n=10, d=10**6,
                          replicates=10**4, master_seed=SEED))
    show("poisson sparse c=1 1e5",
         ExperimentConfig(experiment="poisson_simple_rw", law="sign", n=100, d=10**4,
                          c=1.0, replicates=10**5, master_seed=SEED),
         extra_keys=("tv_vs_collision_correction",))
    show("poisson diffuse 1e4/100",
         ExperimentConfig(experiment="poisson_simple_rw", law="sign", n=10**4, d=100,
                          replicates=10**4, master_seed=SEED))

    # heavy-tail limits
    show("stable2 diag 200/100 2e4",
         ExperimentConfig(experiment="stable_model2", law="pareto", alpha=1.5,
                          n=200, d=100, replicates=2 * 10**4, master_seed=SEED))
    show("stable3 diag 200/100 2e4",
         ExperimentConfig(experiment="stable_model3", law="pareto", alpha=1.5,
                          n=200, d=100, replicates=2 * 10**4, master_seed=SEED))
    show("stable2 offdiag 1e4/100 1e4",
         ExperimentConfig(experiment="stable_model2", law="pareto", alpha=1.5,
                          n=10**4, d=100, replicates=10**4, master_seed=SEED))
    show("stable1 diag 20/4e4 2e4",
         ExperimentConfig(experiment="stable_model1", law="pareto", alpha=1.5,
                          n=20, d=4 * 10**4, replicates=2 * 10**4, master_seed=SEED))

    # raw-walk variance identities at (32, 16), 1e5 replicates
    for model, law in (("iid", "rademacher"), ("rotinv", "twopoint"), ("axis", "sign")):
        exp = {"iid": "clt_model1", "rotinv": "clt_model2", "axis": "clt_model3"}[model]
        t0 = time.perf_counter()
        config = ExperimentConfig(experiment=exp, model=model, law=law, spread=0.5,
                                  n=32, d=16, gamma=2.0 if model != "iid" else None,
                                  replicates=10**5, master_seed=SEED)
        rep = run_raw_walks(config)
        q = rep.rows["q_final"]
        bracket = rep.rows["bracket_over_d"]
        var_q = float(np.var(q, ddof=1))
        mean_b = float(np.mean(bracket))
        se_b = float(np.std(bracket, ddof=1)) / len(bracket) ** 0.5
        print(f"raw {model:6s} {time.perf_counter()-t0:7.1f}s  VarQ={var_q:.3f} "
              f"(target 124, rel {abs(var_q/124-1):.4f})  bracket={mean_b:.4f} "
              f"(target 31, gap/SE={(mean_b-31)/se_b:+.2f})", flush=True)
    return 0


if __name__ == "__main__":
    sys.exit(main())
