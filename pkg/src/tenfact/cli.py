"""Command-line driver: simulate, estimate, bench, and capm.

The commands are thin wrappers over the library; parallelism lives in the
benchmark harness and is capped by ``--threads``.  Every command is
deterministic under (inputs, flags, seed).  Failures exit nonzero after a
single diagnostic line on stderr of the form ``tenfact: <category>:
<message>``, where the category is one of ``config``, ``format``,
``degenerate-data``, ``io``, or ``invalid-input``.
"""

from __future__ import annotations

import argparse
import csv
import logging
import os
import sys

import numpy as np

from .bench import ESTIMATORS, run_benchmark, write_replication_csv, write_summary_csv
from .dgp import DgpConfig, capm_betas, capm_residuals, simulate_setting
from .io import (
    ConfigError,
    FormatError,
    fold_rows,
    parse_bool,
    parse_float_rows,
    parse_floats,
    parse_ints,
    parse_names,
    read_config,
    read_tensor_series,
    write_labeled_matrices,
    write_tensor_series,
)
from .preaverage import DegenerateSampleError, PreaverageConfig, preaverage_direction
from .projection import estimate_loading_space, refine_directions
from .rank import RankConfig, estimate_rank
from .tensor_ops import DegenerateDataError

log = logging.getLogger("tenfact")

# The series shape uses the same short keys as the file header (K, T, d);
# every other key matches the simulation config field of the same name.
_SIMULATE_SCHEMA = {
    "setting": str,
    "K": int,
    "T": int,
    "d": parse_ints,
    "ranks": parse_ints,
    "seed": int,
    "r_common": int,
    "loading_low": float,
    "loading_high": float,
    "strength_exponents": parse_float_rows,
    "factor_ar": parse_floats,
    "common_ar": parse_floats,
    "idio_ar": parse_floats,
    "mixing_sparsity": float,
    "noise_eig_low": float,
    "noise_eig_high": float,
    "noise_scale": float,
}

_BENCH_SCHEMA = {
    "setting": str,
    "dims": parse_ints,
    "T": int,
    "R": int,
    "estimators": parse_names,
    "seed": int,
    "ranks": parse_ints,
    "timings": parse_bool,
}


def _require(values, key):
    if key not in values:
        raise ConfigError(f"missing required key {key!r}")
    return values[key]


def cmd_simulate(config_path, out_path):
    """Simulate one dataset and write it with a ground-truth sidecar."""
    values = read_config(config_path, _SIMULATE_SCHEMA)
    dims = _require(values, "d")
    if "K" in values and values["K"] != len(dims):
        raise ConfigError(f"K={values['K']} but d lists {len(dims)} sizes")
    kwargs = {"dims": dims, "t_steps": _require(values, "T")}
    for key in _SIMULATE_SCHEMA:
        if key in values and key not in ("setting", "K", "T", "d"):
            kwargs[key] = values[key]
    try:
        cfg = DgpConfig(**kwargs)
    except ValueError as exc:
        raise ConfigError(str(exc))
    truth = simulate_setting(cfg, values.get("setting", "custom"))
    write_tensor_series(truth.series, out_path)
    sidecar = f"{out_path}.truth"
    write_labeled_matrices(
        sidecar,
        [(f"loading mode {k + 1}", a) for k, a in enumerate(truth.loadings)],
    )
    print(f"wrote {out_path}")
    print(f"wrote {sidecar}")


def cmd_estimate(series_path, *, ranks=None, m0=200, m=5, n_frac=0.5, iters=30,
                 n_boot=50, p=0.5, c_grid=None, seed=0, out_prefix=None):
    """Estimate per-mode ranks and loading spaces of a stored series."""
    x = read_tensor_series(series_path)
    if x.shape[0] < 2:
        raise ValueError("need at least 2 time steps to estimate anything")
    n_modes = x.ndim - 1
    if ranks is not None and len(ranks) != n_modes:
        raise ValueError(f"--ranks lists {len(ranks)} values for {n_modes} modes")
    pre_cfg = PreaverageConfig(n_draws=m0, n_keep=m, frac=n_frac)
    rank_cfg = RankConfig(n_boot=n_boot, p=p, c_grid=c_grid)
    rng = np.random.default_rng(seed)
    inits = [preaverage_direction(x, k, pre_cfg, rng)[0].columns[:, 0] for k in range(n_modes)]
    state = refine_directions(x, inits, iters=iters)
    if out_prefix is None:
        out_prefix = os.path.splitext(str(series_path))[0]
    for k in range(n_modes):
        if ranks is None:
            decision = estimate_rank(x, k, state, rank_cfg, rng)
            rank, origin = decision.rank_hat, f"C={decision.c_hat:.6g}"
        else:
            rank, origin = ranks[k], "given"
        if rank == 0:
            print(f"mode {k + 1}: rank 0 ({origin}), no loading columns")
            continue
        estimate = estimate_loading_space(x, k, state, rank)
        shown = " ".join(format(v, ".6g") for v in estimate.eigenvalues)
        print(f"mode {k + 1}: rank {rank} ({origin}), eigenvalues {shown}")
        out_path = f"{out_prefix}_loading_mode{k + 1}.csv"
        _write_loading_csv(estimate.columns, out_path)
        print(f"wrote {out_path}")


def _write_loading_csv(columns, path):
    with open(path, "w", encoding="ascii", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow([f"q{j + 1}" for j in range(columns.shape[1])])
        for row in columns:
            writer.writerow([format(v, ".17g") for v in row])


def cmd_bench(config_path, out_dir, threads=1):
    """Run a Monte Carlo benchmark and write its CSVs."""
    values = read_config(config_path, _BENCH_SCHEMA)
    result = run_benchmark(
        _require(values, "setting"),
        _require(values, "dims"),
        _require(values, "T"),
        _require(values, "R"),
        estimators=values.get("estimators", ESTIMATORS),
        seed=values.get("seed", 0),
        ranks=values.get("ranks"),
        workers=threads,
    )
    os.makedirs(out_dir, exist_ok=True)
    timings = values.get("timings", False)
    replication_path = os.path.join(out_dir, "replications.csv")
    summary_path = os.path.join(out_dir, "summary.csv")
    write_replication_csv(result, replication_path, timings=timings)
    write_summary_csv(result, summary_path, timings=timings)
    if result.rank_estimates is not None:
        print(f"correct-rank proportion: {result.correct_proportion():.6g}")
    print(f"failures: {len(result.failures)}")
    print(f"wrote {replication_path}")
    print(f"wrote {summary_path}")


def cmd_capm(panel_path, market_path, dims, out_path):
    """Residualize a return panel against a market series and store tensors."""
    panel = np.loadtxt(panel_path, delimiter=",", ndmin=2)
    market = np.loadtxt(market_path).ravel()
    n_columns = int(np.prod(dims))
    if panel.shape[1] != n_columns:
        raise ValueError(
            f"panel has {panel.shape[1]} columns but dims imply {n_columns}"
        )
    betas = capm_betas(panel, market)
    residuals = capm_residuals(panel, market)
    for j, beta in enumerate(betas):
        log.info("beta[%d] = %.17g", j, beta)
    write_tensor_series(fold_rows(residuals, dims), out_path)
    print(f"wrote {out_path}")


def _parse_grid(text):
    """Parse a threshold grid given as ``lo:hi:step``."""
    parts = text.split(":")
    if len(parts) != 3:
        raise ValueError(f"expected lo:hi:step, got {text!r}")
    lo, hi, step = (float(part) for part in parts)
    if step <= 0.0 or hi < lo:
        raise ValueError("need step > 0 and hi >= lo")
    count = int(np.floor((hi - lo) / step + 1e-9)) + 1
    return np.round(lo + step * np.arange(count), 10)


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="tenfact",
        description="Factor analysis for tensor-valued time series.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a dataset from a config file")
    p.add_argument("config", help="key=value config file")
    p.add_argument("out", help="output series path")

    p = sub.add_parser("estimate", help="estimate ranks and loading spaces")
    p.add_argument("series", help="stored series path")
    p.add_argument("--ranks", type=parse_ints, default=None,
                   help="skip rank estimation and use these per-mode ranks")
    p.add_argument("--m0", type=int, default=200,
                   help="fibre groups drawn per mode (default 200)")
    p.add_argument("--m", type=int, default=5,
                   help="fibre groups kept per mode (default 5)")
    p.add_argument("--n-frac", type=float, default=0.5,
                   help="subset size as a fraction of each mode length (default 0.5)")
    p.add_argument("--iters", type=int, default=30,
                   help="refinement sweeps (default 30)")
    p.add_argument("--B", type=int, default=50, dest="n_boot",
                   help="bootstrap draws (default 50)")
    p.add_argument("--p", type=float, default=0.5,
                   help="bootstrap keep probability (default 0.5)")
    p.add_argument("--c-grid", type=_parse_grid, default=None,
                   help="threshold grid as lo:hi:step (default 0.1:100:0.1)")
    p.add_argument("--seed", type=int, default=0, help="sampling seed (default 0)")
    p.add_argument("--out-prefix", default=None,
                   help="prefix for loading CSVs (default: series path without extension)")

    p = sub.add_parser("bench", help="run a Monte Carlo benchmark")
    p.add_argument("config", help="key=value config file")
    p.add_argument("outdir", help="directory for the output CSVs")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads across replications (default 1)")

    p = sub.add_parser("capm", help="residualize a return panel against a market series")
    p.add_argument("panel", help="T x n CSV of returns")
    p.add_argument("market", help="market return series, one value per row")
    p.add_argument("out", help="output series path")
    p.add_argument("--dims", type=parse_ints, required=True,
                   help="tensor shape per time step, e.g. 40,40")

    return parser


def main(argv=None):
    logging.basicConfig(stream=sys.stderr, level=logging.INFO,
                        format="%(name)s: %(message)s")
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "simulate":
            cmd_simulate(args.config, args.out)
        elif args.command == "estimate":
            cmd_estimate(args.series, ranks=args.ranks, m0=args.m0, m=args.m,
                         n_frac=args.n_frac, iters=args.iters, n_boot=args.n_boot,
                         p=args.p, c_grid=args.c_grid, seed=args.seed,
                         out_prefix=args.out_prefix)
        elif args.command == "bench":
            cmd_bench(args.config, args.outdir, threads=args.threads)
        else:
            cmd_capm(args.panel, args.market, args.dims, args.out)
    except ConfigError as exc:
        return _fail("config", exc)
    except FormatError as exc:
        return _fail("format", exc)
    except (DegenerateDataError, DegenerateSampleError) as exc:
        return _fail("degenerate-data", exc)
    except OSError as exc:
        return _fail("io", exc)
    except ValueError as exc:
        return _fail("invalid-input", exc)
    return 0


def _fail(category, exc):
    print(f"tenfact: {category}: {exc}", file=sys.stderr)
    return 1
