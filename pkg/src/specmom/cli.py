"""Command-line front end: gen-data, fit, bench, diagnose."""

import argparse
import json
import sys

import numpy as np

from . import baselines
from .datagen import AttackKind, GenSpec, generate, second_moment_matrix
from .descent import DescentConfig, ProblemSpec, robust_regression
from .diagnostics import check_init_event, check_multiplier_event, check_quadratic_event
from .errors import SpecmomError
from .harness import ExperimentConfig, emit_outputs, run_sweep
from .io import load_dataset, parse_keyvalue_file, save_dataset

EXIT_OK = 0
EXIT_CONFIG = 1
EXIT_RUNTIME = 2


def _attack(name):
    try:
        return AttackKind(name)
    except ValueError:
        raise ValueError(
            f"unknown attack {name!r}; choose from "
            + ", ".join(a.value for a in AttackKind)
        )


def cmd_gen_data(args):
    spec = GenSpec(
        n=args.n,
        d=args.d,
        sigma=args.sigma,
        student_df=args.student_df,
        epsilon=args.epsilon,
        attack=_attack(args.attack),
        seed=args.seed,
        dist=args.dist,
    )
    data = generate(spec)
    save_dataset(
        data,
        args.out,
        meta={
            "sigma": spec.sigma,
            "epsilon": spec.epsilon,
            "seed": spec.seed,
            "attack": spec.attack.value,
            "dist": spec.dist,
            "student_df": spec.student_df,
        },
    )
    print(f"wrote {data.n} samples in dimension {data.d} to {args.out}")
    return EXIT_OK


def _sigma_from_meta(meta, d):
    gen = GenSpec(
        n=1,
        d=d,
        student_df=float(meta.get("student_df", 3.0)),
        dist=meta.get("dist", "student"),
    )
    return second_moment_matrix(gen)


def cmd_fit(args):
    data, meta = load_dataset(args.data)
    K = args.k if args.k is not None else data.d
    rng = np.random.default_rng(args.seed)
    if args.method == "spectral":
        spec = ProblemSpec(sigma=_sigma_from_meta(meta, data.d), K=K)
        cfg = DescentConfig(T_des=args.t_des, seed=args.seed)
        beta, trace = robust_regression(data, spec, cfg)
        if args.trace:
            trace.to_jsonl(args.trace)
    elif args.method == "ols":
        beta = baselines.ols(data).beta
    elif args.method == "huber":
        beta = baselines.huber(data).beta
    elif args.method == "ransac":
        beta = baselines.ransac(data, rng=rng).beta
    else:
        beta = baselines.metric_mom(data, K).beta
    out = {"method": args.method, "beta": [float(b) for b in beta]}
    if data.truth is not None:
        out["param_error_l2"] = float(np.linalg.norm(beta - data.truth))
    print(json.dumps(out))
    return EXIT_OK


def _bench_config(args):
    raw = parse_keyvalue_file(args.config)
    known = {
        "sweep": str,
        "grid": str,
        "methods": str,
        "seeds": int,
        "n_rule": int,
        "d": int,
        "n": int,
        "K": int,
        "sigma": float,
        "epsilon": float,
        "attack": str,
        "dist": str,
        "student_df": float,
        "t_des": int,
        "mwu_t": int,
        "step_scale": float,
        "round_trials": int,
    }
    vals = {}
    for key, value in raw.items():
        if key not in known:
            raise ValueError(f"unknown config key {key!r}")
        vals[key] = known[key](value)
    if "sweep" not in vals or "grid" not in vals:
        raise ValueError("config must define 'sweep' and 'grid'")
    descent = DescentConfig(
        T_des=vals.get("t_des", 60),
        mwu_T=vals.get("mwu_t"),
        round_trials=vals.get("round_trials", 50),
    )
    if "step_scale" in vals:
        descent.step_scale = vals["step_scale"]
    cfg = ExperimentConfig(
        sweep=vals["sweep"],
        grid=[float(v) for v in vals["grid"].split(",")],
        methods=vals.get("methods", "spectral,ols").split(","),
        seeds=vals.get("seeds", 50),
        n_rule=vals.get("n_rule", 50),
        d=vals.get("d", 50),
        n=vals.get("n"),
        K=vals.get("K"),
        sigma=vals.get("sigma", 1.0),
        epsilon=vals.get("epsilon", 0.0),
        attack=_attack(vals.get("attack", "mixed")),
        dist=vals.get("dist", "student"),
        student_df=vals.get("student_df", 3.0),
        master_seed=args.seed,
        output_dir=args.out,
        threads=args.threads,
        descent=descent,
    )
    return cfg


def cmd_bench(args):
    cfg = _bench_config(args)
    table = run_sweep(cfg)
    paths = emit_outputs(table, cfg.output_dir, sweep_name=cfg.sweep)
    print(json.dumps(paths))
    return EXIT_OK


def cmd_diagnose(args):
    spec = GenSpec(
        n=args.k * args.m,
        d=args.d,
        sigma=args.sigma,
        epsilon=args.epsilon,
        dist=args.dist,
        seed=args.seed,
    )
    rng = np.random.default_rng(args.seed)
    if args.event == "multiplier":
        report = check_multiplier_event(spec, args.k, args.num_dirs, args.trials, rng)
    elif args.event == "quadratic":
        report = check_quadratic_event(spec, args.k, args.num_dirs, args.trials, rng)
    else:
        grid = [
            np.ones(args.d) + v / np.linalg.norm(v)
            for v in rng.standard_normal((args.grid_size, args.d))
        ]
        report = check_init_event(spec, args.k, grid, args.trials, rng)
    text = json.dumps(report.to_dict(), indent=2)
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(text + "\n")
    print(text)
    return EXIT_OK


def build_parser():
    parser = argparse.ArgumentParser(
        prog="specmom",
        description="Robust linear regression via spectral median-of-means descent",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen-data", help="write a synthetic dataset as CSV")
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--d", type=int, required=True)
    gen.add_argument("--sigma", type=float, default=1.0)
    gen.add_argument("--student-df", type=float, default=3.0)
    gen.add_argument("--epsilon", type=float, default=0.0)
    gen.add_argument("--attack", default="mixed")
    gen.add_argument("--dist", default="student")
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", required=True)
    gen.set_defaults(func=cmd_gen_data)

    fit = sub.add_parser("fit", help="fit one estimator on a CSV dataset")
    fit.add_argument("--data", required=True)
    fit.add_argument(
        "--method",
        default="spectral",
        choices=["spectral", "ols", "huber", "ransac", "metric-mom"],
    )
    fit.add_argument("--k", type=int, default=None)
    fit.add_argument("--t-des", type=int, default=100)
    fit.add_argument("--seed", type=int, default=0)
    fit.add_argument("--trace", default=None, help="write per-iteration JSON lines")
    fit.set_defaults(func=cmd_fit)

    bench = sub.add_parser("bench", help="run a benchmark sweep from a config file")
    bench.add_argument("--config", required=True)
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--out", default="results")
    bench.add_argument("--threads", type=int, default=1)
    bench.set_defaults(func=cmd_bench)

    diag = sub.add_parser("diagnose", help="Monte-Carlo check of a concentration event")
    diag.add_argument("--event", required=True, choices=["multiplier", "quadratic", "init"])
    diag.add_argument("--d", type=int, default=2)
    diag.add_argument("--k", type=int, default=100)
    diag.add_argument("--m", type=int, default=100)
    diag.add_argument("--num-dirs", type=int, default=50)
    diag.add_argument("--trials", type=int, default=100)
    diag.add_argument("--sigma", type=float, default=1.0)
    diag.add_argument("--epsilon", type=float, default=0.0)
    diag.add_argument("--dist", default="gaussian")
    diag.add_argument("--grid-size", type=int, default=20)
    diag.add_argument("--seed", type=int, default=0)
    diag.add_argument("--out", default=None)
    diag.set_defaults(func=cmd_diagnose)
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code not in (0, None) else EXIT_OK
    try:
        return args.func(args)
    except (ValueError, KeyError, FileNotFoundError) as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SpecmomError as exc:
        print(f"runtime failure: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
