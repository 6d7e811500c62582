"""Command-line interface.

One subcommand per experiment family plus `simulate` (raw per-replicate
walk summaries) and `check-conditions` (increment-law diagnostics).  Flags
shared across subcommands mirror ExperimentConfig; a flat key=value config
file can prefill any flag, with explicit flags taking precedence.

Exit codes: 0 when every verdict passes (or there are none), 2 on a
configuration error, 3 when any verdict fails.
"""

from __future__ import annotations

import argparse
import sys

from .experiments import (
    ConfigError,
    ExperimentConfig,
    run_experiment,
    run_raw_walks,
)
from .models import ModelError, check_conditions
from .report import Report, ReportError, emit_report
from .sampling import SamplingError, SeedSpec, derive_stream
from .walk import WalkError

_EXPERIMENT_OF = {
    "clt": {"iid": "clt_model1", "rotinv": "clt_model2", "axis": "clt_model3"},
    "stable": {"iid": "stable_model1", "rotinv": "stable_model2", "axis": "stable_model3"},
}

_SIMPLE_COMMANDS = {
    "poisson": "poisson_simple_rw",
    "fwlln": "fwlln",
    "distortion": "distortion_ladder",
    "spiral": "spiral_check",
    "align": "align_check",
    "brownian": "brownian_instance",
    "probe-conjecture": "critical_conjecture_probe",
}

_CONFIG_KEYS = (
    "model",
    "law",
    "alpha",
    "spread",
    "n",
    "d",
    "ladder",
    "gamma",
    "c",
    "reps",
    "seed",
    "threads",
    "grid",
    "out",
    "format",
)


def _add_common_flags(sub: argparse.ArgumentParser):
    sub.add_argument("--model", choices=["iid", "rotinv", "axis"], default=None)
    sub.add_argument(
        "--law",
        default=None,
        help="rademacher | gaussian | constant | sign | twopoint:a | pareto:alpha",
    )
    sub.add_argument("--alpha", type=float, default=None, help="pareto tail index")
    sub.add_argument("--n", type=int, default=None)
    sub.add_argument("--d", type=int, default=None)
    sub.add_argument("--ladder", default=None, help="comma list of rungs, e.g. 256x256,1024x1024")
    sub.add_argument("--gamma", type=float, default=None)
    sub.add_argument("--c", type=float, default=None)
    sub.add_argument("--reps", type=int, default=None)
    sub.add_argument("--seed", type=int, default=None)
    sub.add_argument("--threads", type=int, default=None)
    sub.add_argument("--grid", type=int, default=None, help="snapshot grid size")
    sub.add_argument("--out", default=None, help="report output path")
    sub.add_argument("--format", choices=["csv", "json"], default=None)
    sub.add_argument("--config", default=None, help="flat key=value file; flags override")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="spiralwalk",
        description="High-dimensional random walk experiments: limit laws for "
        "the squared norm and convergence of rescaled paths to the "
        "square-root-time reference curve.",
    )
    subs = parser.add_subparsers(dest="command", required=True)
    for name, text in [
        ("simulate", "raw per-replicate walk summaries at one (n, d)"),
        ("clt", "finite-variance limit of the squared norm (model via --model)"),
        ("stable", "heavy-tail limit of the squared norm (model via --model)"),
        ("poisson", "unit-step axis walk occupancy regimes"),
        ("fwlln", "sup-norm deviation ladder"),
        ("distortion", "snapshot distortion ladder"),
        ("spiral", "reference-curve truncation sweep"),
        ("align", "walk-vs-reference-curve alignment ladder"),
        ("brownian", "coordinate-scaled Brownian snapshot ladder"),
        ("probe-conjecture", "critical-regime convolution probe (no verdict)"),
        ("check-conditions", "increment-law diagnostics for one model at one d"),
    ]:
        sub = subs.add_parser(name, help=text)
        _add_common_flags(sub)
    return parser


def _read_config_file(path: str) -> dict:
    values = {}
    try:
        with open(path, encoding="utf-8") as fh:
            for lineno, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
                key, _, value = line.partition("=")
                key = key.strip()
                if key not in _CONFIG_KEYS:
                    raise ConfigError(
                        f"{path}:{lineno}: unknown key {key!r}; valid keys: "
                        f"{', '.join(_CONFIG_KEYS)}"
                    )
                values[key] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return values


_INT_KEYS = {"n", "d", "reps", "seed", "threads", "grid"}
_FLOAT_KEYS = {"alpha", "gamma", "c"}


def _merged_options(args: argparse.Namespace) -> dict:
    """Config-file values fill flags the command line left unset."""
    merged = {k: getattr(args, k.replace("-", "_"), None) for k in _CONFIG_KEYS}
    if args.config:
        for key, text in _read_config_file(args.config).items():
            if merged.get(key) is not None:
                continue
            if key in _INT_KEYS:
                merged[key] = int(text)
            elif key in _FLOAT_KEYS:
                merged[key] = float(text)
            else:
                merged[key] = text
    return merged


def _parse_law(opts: dict) -> tuple[str, float, float]:
    """Split twopoint:a / pareto:alpha forms into (law, alpha, spread)."""
    law = opts.get("law") or ""
    alpha = opts.get("alpha")
    spread = None
    if ":" in law:
        law, _, arg = law.partition(":")
        try:
            value = float(arg)
        except ValueError:
            raise ConfigError(f"law parameter must be numeric, got {arg!r}") from None
        if law == "twopoint":
            spread = value
        elif law == "pareto":
            alpha = value
        else:
            raise ConfigError(f"law {law!r} takes no ':' parameter")
    return law, (0.0 if alpha is None else alpha), (0.5 if spread is None else spread)


def _parse_ladder(text: str | None) -> tuple:
    if not text:
        return ()
    rungs = []
    for piece in text.split(","):
        piece = piece.strip().lower()
        if "x" not in piece:
            raise ConfigError(f"ladder rung must look like 256x256, got {piece!r}")
        a, _, b = piece.partition("x")
        try:
            rungs.append((int(a), int(b)))
        except ValueError:
            raise ConfigError(f"ladder rung must be integers, got {piece!r}") from None
    return tuple(rungs)


def _experiment_name(command: str, opts: dict) -> str:
    if command in _SIMPLE_COMMANDS:
        return _SIMPLE_COMMANDS[command]
    model = opts.get("model") or "iid"
    try:
        return _EXPERIMENT_OF[command][model]
    except KeyError:
        raise ConfigError(f"model must be iid, rotinv or axis, got {model!r}") from None


def _build_config(command: str, opts: dict) -> ExperimentConfig:
    law, alpha, spread = _parse_law(opts)
    experiment = (
        "clt_model1" if command == "simulate" else _experiment_name(command, opts)
    )
    kwargs = dict(
        experiment=experiment,
        law=law,
        alpha=alpha,
        spread=spread,
        n=opts.get("n") or 0,
        d=opts.get("d") or 1,
        ladder=_parse_ladder(opts.get("ladder")),
        gamma=opts.get("gamma"),
        c=opts.get("c"),
        replicates=opts.get("reps") or 1,
        master_seed=opts.get("seed") or 0,
        threads=opts.get("threads") or 1,
        output=opts.get("out"),
        format=opts.get("format") or "csv",
    )
    if command == "simulate":
        # raw summaries have no regime constraints; model chosen freely
        kwargs["experiment"] = {
            "iid": "clt_model1",
            "rotinv": "clt_model2",
            "axis": "clt_model3",
        }[opts.get("model") or "iid"]
        if law == "pareto":
            kwargs["experiment"] = kwargs["experiment"].replace("clt", "stable")
    if opts.get("grid") is not None:
        kwargs["grid_size"] = opts["grid"]
    return ExperimentConfig(**kwargs)


def _print_report(rep: Report, out_stream) -> None:
    print(f"experiment: {rep.experiment}", file=out_stream)
    print(f"regime: {rep.regime} ({rep.regime_condition})", file=out_stream)
    print(f"replicates: {rep.replicates}", file=out_stream)
    for name, summary in rep.aggregates.items():
        print(
            f"  {name}: mean={summary.mean:.6g} variance={summary.variance:.6g}",
            file=out_stream,
        )
    for key in sorted(rep.extras):
        print(f"  {key}: {rep.extras[key]}", file=out_stream)
    for name, verdict in rep.verdicts:
        flag = "PASS" if verdict.passed else "FAIL"
        print(
            f"  [{flag}] {name}: statistic={verdict.statistic:.6g} "
            f"threshold={verdict.threshold:.6g} (N={verdict.sample_size})",
            file=out_stream,
        )
    print(f"wall clock: {rep.wall_clock_seconds:.3f} s", file=out_stream)


def _run_check_conditions(opts: dict) -> int:
    law, alpha, spread = _parse_law(opts)
    probe = ExperimentConfig(
        experiment="fwlln",
        model=opts.get("model") or "iid",
        law=law,
        alpha=alpha,
        spread=spread,
        n=1,
        d=opts.get("d") or 1,
    )
    from .experiments import build_model_spec

    model = build_model_spec(probe)
    d = opts.get("d") or 1
    count = opts.get("reps") or 4000
    stream = derive_stream(SeedSpec(opts.get("seed") or 0, 0))
    result = check_conditions(model, d, count, stream)
    for line in result.lines():
        print(line)
    return 0 if result.all_pass else 3


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        opts = _merged_options(args)
        if args.command == "check-conditions":
            return _run_check_conditions(opts)
        config = _build_config(args.command, opts)
        if args.command == "simulate":
            rep = run_raw_walks(config)
        else:
            rep = run_experiment(config)
        if config.output:
            path = emit_report(rep, config.format, config.output)
            print(f"report written: {path}")
        _print_report(rep, sys.stdout)
    except (ConfigError, ModelError, SamplingError, WalkError, ReportError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    return 0 if rep.all_verdicts_pass() else 3


if __name__ == "__main__":
    sys.exit(main())
