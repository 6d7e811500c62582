"""Experiment layer: config validation, regime inference, the exact-in-law
endpoint samplers against the walk engine, determinism across thread counts,
and the shape of every runner's output."""

import math

import numpy as np
import pytest

from spiralwalk import fixtures
from spiralwalk.experiments import (
    EXPERIMENT_NAMES,
    REGIME_TABLE,
    ConfigError,
    ExperimentConfig,
    build_model_spec,
    endpoint_statistic,
    infer_regime,
    probe_dimension,
    run_experiment,
    run_raw_walks,
)
from spiralwalk.report import render_csv, render_json
from spiralwalk.sampling import SeedSpec, derive_stream
from spiralwalk.walk import run_walk

# ------------------------------------------------------------- validation


def cfg(**kw) -> ExperimentConfig:
    return ExperimentConfig(**kw)


def test_unknown_experiment_lists_choices():
    with pytest.raises(ConfigError, match="unknown experiment"):
        cfg(experiment="clt_model9")


def test_basic_bounds():
    with pytest.raises(ConfigError, match="n must be"):
        cfg(experiment="clt_model1", n=-1, d=4)
    with pytest.raises(ConfigError, match="d must be"):
        cfg(experiment="clt_model1", n=4, d=0)
    with pytest.raises(ConfigError, match="replicates"):
        cfg(experiment="clt_model1", n=4, d=4, replicates=0)
    with pytest.raises(ConfigError, match="threads"):
        cfg(experiment="clt_model1", n=4, d=4, threads=0)
    with pytest.raises(ConfigError, match="format"):
        cfg(experiment="clt_model1", n=4, d=4, format="xml")
    with pytest.raises(ConfigError, match="master_seed"):
        cfg(experiment="clt_model1", n=4, d=4, master_seed=2**64)
    with pytest.raises(ConfigError, match="ladder rungs"):
        cfg(experiment="fwlln", ladder=((0, 4),))


def test_law_parameter_gates():
    with pytest.raises(ConfigError, match="alpha in"):
        cfg(experiment="stable_model1", law="pareto", alpha=2.5, n=100, d=4)
    with pytest.raises(ConfigError, match="spread"):
        cfg(experiment="clt_model2", model="rotinv", law="twopoint", spread=1.0, n=4, d=400)


def test_model_law_compatibility():
    # the poisson experiment is the unit sign walk and nothing else
    with pytest.raises(ConfigError, match="sign"):
        cfg(experiment="poisson_simple_rw", law="twopoint", n=2, d=400)
    # heavy-tail experiments need the pareto squared-length law
    with pytest.raises(ConfigError, match="pareto"):
        cfg(experiment="stable_model2", law="twopoint", n=4, d=400)
    # finite-fourth-moment experiments reject it, pointing at the right name
    with pytest.raises(ConfigError, match="stable_model1"):
        cfg(experiment="clt_model1", law="pareto", alpha=1.5, n=4, d=4)
    # axis jumps with a constant length never have mean-zero steps
    with pytest.raises(ConfigError, match="mean-zero"):
        cfg(experiment="clt_model3", law="constant", n=4, d=400)
    # component laws and step-length laws do not cross
    with pytest.raises(ConfigError, match="not valid for model"):
        cfg(experiment="clt_model2", model="rotinv", law="rademacher", n=4, d=400)
    with pytest.raises(ConfigError, match="not valid for model"):
        cfg(experiment="clt_model1", model="iid", law="twopoint", n=4, d=4)


def test_forced_model_mismatch():
    with pytest.raises(ConfigError, match="fixes the model"):
        cfg(experiment="clt_model1", model="rotinv", n=4, d=4)
    with pytest.raises(ConfigError, match="takes no model"):
        cfg(experiment="spiral_check", model="iid")
    with pytest.raises(ConfigError, match="takes no law"):
        cfg(experiment="brownian_instance", law="gaussian")


def test_gamma_scope_and_consistency():
    with pytest.raises(ConfigError, match="gamma only applies"):
        cfg(experiment="clt_model1", n=4, d=4, gamma=1.0)
    with pytest.raises(ConfigError, match="gamma must be"):
        cfg(experiment="clt_model2", n=8, d=8, gamma=-1.0)
    with pytest.raises(ConfigError, match="close to gamma"):
        cfg(experiment="clt_model2", n=100, d=10, gamma=1.0)
    ok = cfg(experiment="clt_model2", n=32, d=16, gamma=2.0)
    assert infer_regime(ok) == "balanced"


def test_c_scope_and_consistency():
    with pytest.raises(ConfigError, match="c only applies"):
        cfg(experiment="clt_model1", n=4, d=4, c=1.0)
    with pytest.raises(ConfigError, match="c must be"):
        cfg(experiment="poisson_simple_rw", law="sign", n=8, d=64, c=-2.0)
    with pytest.raises(ConfigError, match="close to c"):
        cfg(experiment="poisson_simple_rw", law="sign", n=100, d=64, c=1.0)
    ok = cfg(experiment="poisson_simple_rw", law="sign", n=8, d=64, c=1.0)
    assert infer_regime(ok) == "sparse"


def test_probe_validation():
    with pytest.raises(ConfigError, match="gamma > 0"):
        cfg(experiment="critical_conjecture_probe", law="pareto", alpha=1.5, n=100)
    with pytest.raises(ConfigError, match="n >= 2"):
        cfg(experiment="critical_conjecture_probe", law="pareto", alpha=1.5, n=1, gamma=1.0)
    derived = probe_dimension(400, 1.0, 1.5)
    ok = cfg(
        experiment="critical_conjecture_probe",
        law="pareto",
        alpha=1.5,
        n=400,
        d=derived,
        gamma=1.0,
    )
    assert infer_regime(ok) == "critical"
    with pytest.raises(ConfigError, match="derived from"):
        cfg(
            experiment="critical_conjecture_probe",
            law="pareto",
            alpha=1.5,
            n=400,
            d=derived + 7,
            gamma=1.0,
        )


def test_probe_dimension_formula():
    n, gamma, alpha = 400, 1.0, 1.5
    from spiralwalk.sampling import stable_scale_for_pareto

    sigma = stable_scale_for_pareto(alpha)
    want = max(1, round(2.0 * n ** (2.0 - 2.0 / alpha) / (gamma * gamma * sigma * sigma)))
    assert probe_dimension(n, gamma, alpha) == want


def test_config_echo_drops_execution_fields():
    c = cfg(experiment="clt_model1", n=4, d=4, threads=8, format="json")
    echo = c.echo()
    assert "threads" not in echo and "output" not in echo and "format" not in echo
    assert echo["n"] == 4 and echo["experiment"] == "clt_model1"


# ------------------------------------------------------- regime inference


def test_regime_table_is_total():
    assert len(REGIME_TABLE) == 16
    per_family = {}
    for exp, regime in REGIME_TABLE:
        per_family.setdefault(exp, set()).add(regime)
    assert per_family == {
        "clt_model1": {"offdiag_gaussian"},
        "stable_model1": {"offdiag_gaussian", "diag_stable"},
        "clt_model2": {"diag", "offdiag", "balanced"},
        "stable_model2": {"offdiag_gaussian", "diag_stable"},
        "clt_model3": {"diag", "offdiag", "balanced"},
        "stable_model3": {"offdiag_gaussian", "diag_stable"},
        "poisson_simple_rw": {"collisionless", "sparse", "diffuse"},
    }


# one concrete config per (experiment, regime) key; alpha = 1.5 puts the
# stable_model1 edge at d^0.5 and the model2/3 edge at d^1.5
REGIME_CASES = [
    ("clt_model1", "offdiag_gaussian", dict(n=16, d=16)),
    ("stable_model1", "offdiag_gaussian", dict(law="pareto", alpha=1.5, n=100, d=16)),
    ("stable_model1", "diag_stable", dict(law="pareto", alpha=1.5, n=16, d=10**4)),
    ("clt_model2", "diag", dict(n=16, d=400)),
    ("clt_model2", "offdiag", dict(n=400, d=16)),
    ("clt_model2", "balanced", dict(n=32, d=16, gamma=2.0)),
    ("stable_model2", "offdiag_gaussian", dict(law="pareto", alpha=1.5, n=200, d=16)),
    ("stable_model2", "diag_stable", dict(law="pareto", alpha=1.5, n=16, d=100)),
    ("clt_model3", "diag", dict(law="twopoint", n=16, d=400)),
    ("clt_model3", "offdiag", dict(n=400, d=16)),
    ("clt_model3", "balanced", dict(n=32, d=16, gamma=2.0)),
    ("stable_model3", "offdiag_gaussian", dict(law="pareto", alpha=1.5, n=200, d=16)),
    ("stable_model3", "diag_stable", dict(law="pareto", alpha=1.5, n=16, d=100)),
    ("poisson_simple_rw", "collisionless", dict(law="sign", n=2, d=400)),
    ("poisson_simple_rw", "sparse", dict(law="sign", n=8, d=64, c=1.0)),
    ("poisson_simple_rw", "diffuse", dict(law="sign", n=150, d=64)),
]


@pytest.mark.parametrize("exp,regime,params", REGIME_CASES, ids=lambda v: str(v)[:40])
def test_every_regime_reachable(exp, regime, params):
    assert infer_regime(cfg(experiment=exp, **params)) == regime


def test_stable_critical_band_rejected():
    # alpha = 1.5, model2/3 edge d^1.5: d = 16 puts it at 64
    with pytest.raises(ConfigError, match="critical band"):
        infer_regime(cfg(experiment="stable_model2", law="pareto", alpha=1.5, n=64, d=16))


def test_clt23_ambiguous_band_rejected():
    with pytest.raises(ConfigError, match="pass gamma"):
        infer_regime(cfg(experiment="clt_model2", n=40, d=40))


def test_model2_deterministic_length_always_offdiag():
    # deterministic R kills the diagonal term, so even n/d -> 0 stays offdiag
    c = cfg(experiment="clt_model2", law="constant", n=16, d=400)
    assert infer_regime(c) == "offdiag"


def test_model3_degenerate_diag_redirects():
    with pytest.raises(ConfigError, match="poisson_simple_rw"):
        infer_regime(cfg(experiment="clt_model3", law="sign", n=16, d=400))


def test_poisson_gap_band_rejected():
    with pytest.raises(ConfigError, match="pass c"):
        infer_regime(cfg(experiment="poisson_simple_rw", law="sign", n=30, d=400))


# ------------------------------------- endpoint samplers vs the walk engine


def _walk_nsq(config: ExperimentConfig, count: int, seed_offset: int) -> np.ndarray:
    model = build_model_spec(config)
    out = np.empty(count)
    for i in range(count):
        stream = derive_stream(SeedSpec(config.master_seed, seed_offset + i))
        _, summary = run_walk(
            model, config.n, config.d, 1, stream, with_snapshots=False
        )
        out[i] = summary.norm_sq_final
    return out


SAMPLER_CASES = [
    ("clt_model1", dict(law="rademacher", n=24, d=12)),
    ("clt_model1", dict(law="gaussian", n=24, d=12)),
    ("stable_model1", dict(law="pareto", alpha=1.5, n=24, d=9)),
    ("clt_model2", dict(law="twopoint", n=24, d=12, gamma=2.0)),
    ("clt_model3", dict(law="twopoint", n=24, d=12, gamma=2.0)),
    ("stable_model3", dict(law="pareto", alpha=1.5, n=10, d=100)),
    ("poisson_simple_rw", dict(law="sign", n=8, d=64, c=1.0)),
]


@pytest.mark.parametrize("exp,params", SAMPLER_CASES, ids=lambda v: str(v)[:44])
def test_endpoint_sampler_matches_walk_engine(exp, params):
    # the fast per-replicate sampler must agree in law with the full walk;
    # 2000 vs 2000 two-sample KS at the frozen 99.9% null threshold
    config = cfg(experiment=exp, master_seed=417, **params)
    count = 2000
    fast = np.array([endpoint_statistic(config, i, 1.0) for i in range(count)])
    slow = _walk_nsq(config, count, seed_offset=10**6) - config.n
    from spiralwalk.stats import ks_two_sample

    d_stat = ks_two_sample(np.sort(fast), np.sort(slow))
    assert d_stat <= fixtures.ks_threshold_two_sample(count, count)


def test_endpoint_statistic_zero_steps():
    c = cfg(experiment="clt_model1", n=0, d=4)
    assert endpoint_statistic(c, 0, 1.0) == 0.0


def test_endpoint_statistic_deterministic_per_replicate():
    c = cfg(experiment="clt_model1", n=16, d=8, master_seed=11)
    a = endpoint_statistic(c, 3, 2.0)
    assert endpoint_statistic(c, 3, 2.0) == a
    assert endpoint_statistic(c, 4, 2.0) != a


# ------------------------------------------------------------ determinism


def _render_pair(report):
    return render_csv(report, include_wall_clock=False), render_json(
        report, include_wall_clock=False
    )


@pytest.mark.parametrize(
    "params",
    [
        dict(experiment="clt_model1", n=16, d=8, replicates=64),
        dict(
            experiment="stable_model2",
            law="pareto",
            alpha=1.5,
            n=8,
            d=100,
            replicates=48,
        ),
        dict(experiment="fwlln", ladder=((32, 32), (64, 64)), replicates=12),
    ],
    ids=["clt1", "stable2", "fwlln"],
)
def test_thread_count_never_changes_bytes(params):
    rep1 = run_experiment(cfg(master_seed=99, threads=1, **params))
    rep8 = run_experiment(cfg(master_seed=99, threads=8, **params))
    assert _render_pair(rep1) == _render_pair(rep8)


def test_same_seed_same_bytes_raw():
    params = dict(experiment="clt_model2", n=24, d=12, gamma=2.0, replicates=32)
    a = run_raw_walks(cfg(master_seed=5, threads=1, **params))
    b = run_raw_walks(cfg(master_seed=5, threads=4, **params))
    assert _render_pair(a) == _render_pair(b)
    c = run_raw_walks(cfg(master_seed=6, threads=1, **params))
    assert _render_pair(a) != _render_pair(c)


# ------------------------------------------------------------ runner shapes


def test_limit_family_report_shape():
    rep = run_experiment(cfg(experiment="clt_model1", n=32, d=32, replicates=256, master_seed=2))
    assert rep.experiment == "clt_model1"
    assert rep.regime == "offdiag_gaussian"
    assert rep.columns == ("statistic",)
    assert len(rep.rows["statistic"]) == 256
    assert [name for name, _ in rep.verdicts] == ["ks_vs_normal_limit"]
    assert rep.extras["limit_variance"] == 1.0
    assert rep.extras["tau"] == pytest.approx(math.sqrt(2.0 * 32 * 32 / 32))
    assert rep.histogram is not None and rep.qq is not None
    assert rep.aggregates["statistic"].sample_size == 256


def test_stable_family_uses_reference_sample():
    rep = run_experiment(
        cfg(
            experiment="stable_model2",
            law="pareto",
            alpha=1.5,
            n=8,
            d=100,
            replicates=128,
            master_seed=3,
        )
    )
    assert rep.regime == "diag_stable"
    assert [name for name, _ in rep.verdicts] == ["ks_vs_stable_reference"]
    assert rep.extras["reference_size"] == fixtures.REFERENCE_SAMPLE_SIZE
    assert "_reference_quantiles" not in rep.extras
    # threshold floor: never tighter than the documented two-sample gate
    assert rep.verdicts[0][1].threshold >= fixtures.STABLE_TWO_SAMPLE_GATE


def test_poisson_sparse_reports_both_laws():
    rep = run_experiment(
        cfg(
            experiment="poisson_simple_rw",
            law="sign",
            n=8,
            d=64,
            c=1.0,
            replicates=400,
            master_seed=4,
        )
    )
    assert [name for name, _ in rep.verdicts] == ["tv_vs_poisson_diff"]
    assert "tv_vs_collision_correction" in rep.extras
    assert rep.extras["c"] == 1.0
    # the documented reference law has odd-integer mass the walk cannot
    # produce, so its TV distance sits far above the even-support variant
    assert rep.extras["tv_vs_collision_correction"] < rep.verdicts[0][1].statistic


def test_poisson_collisionless_point_mass():
    rep = run_experiment(
        cfg(
            experiment="poisson_simple_rw",
            law="sign",
            n=2,
            d=10**4,
            replicates=500,
            master_seed=5,
        )
    )
    assert [name for name, _ in rep.verdicts] == ["norm_identity_failure_fraction"]
    assert rep.verdicts[0][1].passed


def test_probe_reports_without_verdict():
    rep = run_experiment(
        cfg(
            experiment="critical_conjecture_probe",
            law="pareto",
            alpha=1.5,
            n=100,
            gamma=1.0,
            replicates=64,
            master_seed=6,
        )
    )
    assert rep.verdicts == []
    assert rep.extras["derived_d"] == probe_dimension(100, 1.0, 1.5)
    assert 0.0 <= rep.extras["ks_vs_conjectured_convolution"] <= 1.0
    assert rep.qq is not None  # built from the convolution reference sample


def test_ladder_columns_and_monotonicity_verdict():
    rep = run_experiment(
        cfg(
            experiment="fwlln",
            ladder=((64, 64), (256, 256)),
            replicates=24,
            master_seed=7,
        )
    )
    assert rep.columns == ("supdev_n64_d64", "supdev_n256_d256")
    names = [name for name, _ in rep.verdicts]
    assert "supdev_median_decreasing" in names


def test_distortion_ladder_has_max_step_gate():
    rep = run_experiment(
        cfg(
            experiment="distortion_ladder",
            ladder=((256, 256), (1024, 1024)),
            replicates=8,
            master_seed=8,
        )
    )
    names = [name for name, _ in rep.verdicts]
    assert "gh_bound_median_decreasing" in names
    assert "max_step_over_sqrt_n" in names
    assert "gh_bound_n1024_d1024" in rep.columns
    assert "max_step_n1024_d1024" in rep.columns


def test_distortion_heavy_tail_drops_max_step_gate():
    rep = run_experiment(
        cfg(
            experiment="distortion_ladder",
            model="iid",
            law="pareto",
            alpha=1.5,
            ladder=((128, 128), (256, 256)),
            replicates=6,
            master_seed=9,
        )
    )
    names = [name for name, _ in rep.verdicts]
    assert "max_step_over_sqrt_n" not in names


def test_align_check_includes_isometry_selfcheck():
    rep = run_experiment(
        cfg(
            experiment="align_check",
            ladder=((128, 128), (256, 256)),
            replicates=6,
            grid_size=16,
            master_seed=10,
        )
    )
    names = [name for name, _ in rep.verdicts]
    assert "isometry_self_check_rel" in names
    self_check = dict(rep.verdicts)["isometry_self_check_rel"]
    assert self_check.passed


def test_brownian_ladder_distortion_decreases_in_d():
    rep = run_experiment(
        cfg(
            experiment="brownian_instance",
            ladder=((64, 8), (64, 512)),
            grid_size=64,
            replicates=12,
            master_seed=11,
        )
    )
    med_lo = float(np.median(rep.rows["distortion_n64_d8"]))
    med_hi = float(np.median(rep.rows["distortion_n64_d512"]))
    assert med_hi < med_lo
    assert dict(rep.verdicts)["distortion_median_decreasing"].passed


def test_spiral_check_rows_and_verdicts():
    rep = run_experiment(cfg(experiment="spiral_check"))
    assert set(rep.columns) == {"truncation_terms", "grid_max_error", "unit_norm_gap"}
    assert rep.regime == "sweep"
    for name, verdict in rep.verdicts:
        assert verdict.passed, name
    terms = rep.rows["truncation_terms"]
    errors = rep.rows["grid_max_error"]
    assert np.all(np.diff(terms) > 0) and np.all(np.diff(errors) < 0)


def test_raw_runner_columns_and_identities():
    config = cfg(experiment="clt_model1", n=32, d=16, replicates=500, master_seed=12)
    rep = run_raw_walks(config)
    assert rep.regime == "raw"
    assert set(rep.columns) == {
        "norm_sq_final",
        "t_final",
        "q_final",
        "sup_deviation",
        "max_step_norm",
        "bracket_over_d",
    }
    nsq = rep.rows["norm_sq_final"]
    t = rep.rows["t_final"]
    q = rep.rows["q_final"]
    assert np.allclose(nsq, t + q, rtol=0, atol=1e-9)
    # rademacher components: ||X_i||^2 = 1 exactly, so t_final = n
    assert np.allclose(t, 32.0)
    # E[bracket] = sum_{k<n} k/d = n(n-1)/(2d) = 31; allow 5 sigma of noise
    bracket = rep.rows["bracket_over_d"]
    se = float(np.std(bracket, ddof=1)) / math.sqrt(len(bracket))
    assert abs(float(np.mean(bracket)) - 31.0) <= 5.0 * se


def test_run_experiment_seed_provenance_mentions_layout():
    rep = run_experiment(cfg(experiment="clt_model1", n=8, d=8, replicates=4))
    assert "SeedSpec(master_seed, i)" in rep.seed_provenance
    assert str(fixtures.REFERENCE_SALT) in rep.seed_provenance
