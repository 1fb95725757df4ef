"""Benchmark sweeps: generate / contaminate / fit over a grid, persist results."""

import concurrent.futures
import json
import math
import os
import time
from dataclasses import dataclass, field, replace
from typing import List, Optional

import numpy as np

from . import baselines
from .datagen import AttackKind, GenSpec, contaminate, generate_clean, second_moment_matrix
from .descent import DescentConfig, ProblemSpec, robust_regression

METHODS = ("spectral", "ols", "huber", "ransac", "metric-mom")
SWEEPS = ("error_vs_d", "error_vs_sigma", "error_vs_K")


@dataclass
class ExperimentConfig:
    sweep: str
    grid: List[float]
    methods: List[str] = field(default_factory=lambda: ["spectral", "ols"])
    seeds: int = 50
    n_rule: int = 50  # samples per dimension when n is not fixed
    d: int = 50
    n: Optional[int] = None
    K: Optional[int] = None  # None: K = d for spectral and metric-mom
    sigma: float = 1.0
    epsilon: float = 0.0
    attack: AttackKind = AttackKind.MIXED
    dist: str = "student"
    student_df: float = 3.0
    master_seed: int = 0
    output_dir: str = "results"
    threads: int = 1
    descent: DescentConfig = field(default_factory=lambda: DescentConfig(T_des=60))

    def __post_init__(self):
        if self.sweep not in SWEEPS:
            raise ValueError(f"unknown sweep {self.sweep!r}")
        if not self.grid:
            raise ValueError("grid must be nonempty")
        if self.seeds < 1:
            raise ValueError("seeds must be >= 1")
        for m in self.methods:
            if m not in METHODS:
                raise ValueError(f"unknown method {m!r}")


@dataclass
class ResultRow:
    sweep_value: float
    method: str
    seed: int
    error: float  # ||beta_hat - beta*||_2, NaN on failure
    wall_ms: float


@dataclass
class ResultTable:
    rows: List[ResultRow] = field(default_factory=list)

    def aggregates(self):
        cells = {}
        for row in self.rows:
            cells.setdefault((row.sweep_value, row.method), []).append(
                (row.error, row.wall_ms)
            )
        out = {}
        for (value, method), pairs in cells.items():
            arr = np.array([e for e, _ in pairs], dtype=float)
            walls = np.array([w for _, w in pairs], dtype=float)
            ok = arr[np.isfinite(arr)]
            out[(value, method)] = {
                "mean": float(ok.mean()) if ok.size else float("nan"),
                "median": float(np.median(ok)) if ok.size else float("nan"),
                "max": float(ok.max()) if ok.size else float("nan"),
                "failures": int(arr.size - ok.size),
                "mean_wall_ms": float(walls.mean()),
            }
        return out


def _value_key(value):
    """Stable 64-bit key for a grid value, for counter-based seed splitting."""
    return int(np.float64(value).view(np.uint64))


def cell_seed(master_seed, sweep_value, seed_index, stream):
    seq = np.random.SeedSequence(
        [int(master_seed), _value_key(sweep_value), int(seed_index), int(stream)]
    )
    return int(seq.generate_state(1)[0])


def _cell_params(cfg, value):
    if cfg.sweep == "error_vs_d":
        d = int(value)
        n = cfg.n_rule * d
        K = cfg.K if cfg.K is not None else d
        sigma = cfg.sigma
    elif cfg.sweep == "error_vs_sigma":
        d = cfg.d
        n = cfg.n if cfg.n is not None else cfg.n_rule * d
        K = cfg.K if cfg.K is not None else d
        sigma = float(value)
    else:  # error_vs_K
        d = cfg.d
        n = cfg.n if cfg.n is not None else cfg.n_rule * d
        K = int(value)
        sigma = cfg.sigma
    return d, n, K, sigma


def run_cell(cfg, value, seed_index):
    """Generate the cell's dataset and fit every configured method on it."""
    d, n, K, sigma = _cell_params(cfg, value)
    gen = GenSpec(
        n=n,
        d=d,
        sigma=sigma,
        student_df=cfg.student_df,
        epsilon=cfg.epsilon,
        attack=cfg.attack,
        dist=cfg.dist,
    )
    data_rng = np.random.default_rng(cell_seed(cfg.master_seed, value, seed_index, 0))
    data = generate_clean(gen, data_rng)
    if cfg.epsilon > 0:
        data = contaminate(data, cfg.epsilon, cfg.attack, data_rng)
    rows = []
    for mi, method in enumerate(cfg.methods):
        fit_seed = cell_seed(cfg.master_seed, value, seed_index, 1 + mi)
        t0 = time.perf_counter()
        try:
            beta = _fit(method, data, gen, K, fit_seed, cfg.descent)
            err = float(np.linalg.norm(beta - data.truth))
        except Exception:
            err = float("nan")
        rows.append(
            ResultRow(
                sweep_value=float(value),
                method=method,
                seed=seed_index,
                error=err,
                wall_ms=(time.perf_counter() - t0) * 1e3,
            )
        )
    return rows


def _fit(method, data, gen, K, fit_seed, descent_cfg):
    if method == "spectral":
        spec = ProblemSpec(sigma=second_moment_matrix(gen), K=K)
        cfg = replace(descent_cfg, seed=fit_seed)
        beta, _ = robust_regression(data, spec, cfg)
        return beta
    if method == "ols":
        return baselines.ols(data).beta
    if method == "huber":
        return baselines.huber(data).beta
    if method == "ransac":
        return baselines.ransac(data, rng=np.random.default_rng(fit_seed)).beta
    if method == "metric-mom":
        return baselines.metric_mom(data, K).beta
    raise ValueError(f"unknown method {method!r}")


def _run_cell_star(args):
    cfg, value, seed_index = args
    return run_cell(cfg, value, seed_index)


def run_sweep(cfg):
    """All grid values x seeds; failures are recorded per cell, never raised."""
    jobs = [(cfg, value, s) for value in cfg.grid for s in range(cfg.seeds)]
    if cfg.threads > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=cfg.threads) as pool:
            results = list(pool.map(_run_cell_star, jobs))
    else:
        results = [_run_cell_star(job) for job in jobs]
    table = ResultTable()
    for rows in results:  # job order is deterministic
        table.rows.extend(rows)
    return table


def emit_outputs(table, output_dir, sweep_name="sweep"):
    """Write results.csv, timings.csv, summary.json and a native SVG chart.

    results.csv is the reproducible artifact: identical config + master seed
    must reproduce it byte for byte, so its wall_ms column is a fixed 0
    placeholder. Measured wall times are inherently run-dependent and live in
    timings.csv (same row layout) and in summary.json's mean_wall_ms.
    """
    if not table.rows:
        raise ValueError("table is empty")
    os.makedirs(output_dir, exist_ok=True)
    csv_path = os.path.join(output_dir, "results.csv")
    with open(csv_path, "w", encoding="utf-8") as fh:
        fh.write("sweep_value,method,seed,error,wall_ms\n")
        for row in table.rows:
            fh.write(
                f"{row.sweep_value:.17g},{row.method},{row.seed},"
                f"{row.error:.17g},0\n"
            )
    timings_path = os.path.join(output_dir, "timings.csv")
    with open(timings_path, "w", encoding="utf-8") as fh:
        fh.write("sweep_value,method,seed,error,wall_ms\n")
        for row in table.rows:
            fh.write(
                f"{row.sweep_value:.17g},{row.method},{row.seed},"
                f"{row.error:.17g},{row.wall_ms:.17g}\n"
            )
    aggs = table.aggregates()
    summary = [
        {"sweep_value": value, "method": method, **stats}
        for (value, method), stats in sorted(aggs.items(), key=lambda kv: (kv[0][1], kv[0][0]))
    ]
    with open(os.path.join(output_dir, "summary.json"), "w", encoding="utf-8") as fh:
        json.dump({"sweep": sweep_name, "cells": summary}, fh, indent=2)
    svg_path = os.path.join(output_dir, "plot.svg")
    _write_svg(aggs, svg_path, sweep_name)
    return {
        "results": csv_path,
        "timings": timings_path,
        "summary": os.path.join(output_dir, "summary.json"),
        "plot": svg_path,
    }


def load_results_csv(path):
    table = ResultTable()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().strip()
        if header != "sweep_value,method,seed,error,wall_ms":
            raise ValueError(f"unexpected header {header!r}")
        for line in fh:
            value, method, seed, error, wall = line.strip().split(",")
            table.rows.append(
                ResultRow(float(value), method, int(seed), float(error), float(wall))
            )
    return table


_PALETTE = ("#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#8c564b", "#e377c2")


def _write_svg(aggs, path, title, width=640, height=420):
    """Mean error per method as a polyline, max error as cross markers."""
    methods = sorted({method for (_, method) in aggs})
    values = sorted({value for (value, _) in aggs})
    pad = 55.0
    xs, ys = [], []
    for (value, method), stats in aggs.items():
        xs.append(value)
        for key in ("mean", "max"):
            if math.isfinite(stats[key]):
                ys.append(stats[key])
    x_lo, x_hi = min(xs), max(xs)
    y_lo, y_hi = (min(ys), max(ys)) if ys else (0.0, 1.0)
    if x_hi == x_lo:
        x_hi = x_lo + 1.0
    if y_hi == y_lo:
        y_hi = y_lo + 1.0

    def px(v):
        return pad + (v - x_lo) / (x_hi - x_lo) * (width - 2 * pad)

    def py(v):
        return height - pad - (v - y_lo) / (y_hi - y_lo) * (height - 2 * pad)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{height}">',
        f'<rect width="{width}" height="{height}" fill="white"/>',
        f'<text x="{width / 2}" y="20" text-anchor="middle" font-size="14">{title}</text>',
        f'<line x1="{pad}" y1="{height - pad}" x2="{width - pad}" y2="{height - pad}" stroke="black"/>',
        f'<line x1="{pad}" y1="{pad}" x2="{pad}" y2="{height - pad}" stroke="black"/>',
    ]
    for vi, v in enumerate(values):
        parts.append(
            f'<text x="{px(v):.1f}" y="{height - pad + 18:.1f}" text-anchor="middle" '
            f'font-size="11">{v:g}</text>'
        )
    for frac in (0.0, 0.5, 1.0):
        yv = y_lo + frac * (y_hi - y_lo)
        parts.append(
            f'<text x="{pad - 6:.1f}" y="{py(yv) + 4:.1f}" text-anchor="end" '
            f'font-size="11">{yv:.3g}</text>'
        )
    for mi, method in enumerate(methods):
        color = _PALETTE[mi % len(_PALETTE)]
        pts = []
        for v in values:
            stats = aggs.get((v, method))
            if stats and math.isfinite(stats["mean"]):
                pts.append(f"{px(v):.1f},{py(stats['mean']):.1f}")
        if pts:
            parts.append(
                f'<polyline points="{" ".join(pts)}" fill="none" stroke="{color}" stroke-width="2"/>'
            )
        for v in values:
            stats = aggs.get((v, method))
            if stats and math.isfinite(stats["max"]):
                x, y = px(v), py(stats["max"])
                parts.append(
                    f'<path d="M {x - 4:.1f} {y - 4:.1f} L {x + 4:.1f} {y + 4:.1f} '
                    f'M {x - 4:.1f} {y + 4:.1f} L {x + 4:.1f} {y - 4:.1f}" '
                    f'stroke="{color}" stroke-width="1.5"/>'
                )
        parts.append(
            f'<text x="{width - pad + 4:.1f}" y="{pad + 16 * mi:.1f}" font-size="12" '
            f'fill="{color}">{method}</text>'
        )
    parts.append("</svg>")
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n".join(parts) + "\n")
