"""Monte Carlo benchmark harness.

Runs the full estimation pipeline over many simulated replications of one
setting, scores loading estimates against the ground truth and rank
decisions against the true ranks, and aggregates the results into tables
and CSV files.

Each replication draws its own generator seeded from ``(seed, replication
index)``, so results do not depend on execution order or worker count; BLAS
is pinned to one thread inside the run for bitwise reproducibility.
"""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from time import perf_counter

import numpy as np
from threadpoolctl import threadpool_limits

from .baselines import hooi, hosvd
from .dgp import DgpConfig, simulate_setting
from .preaverage import PreaverageConfig, preaverage_direction
from .projection import estimate_loading_space, refine_directions
from .rank import RankConfig, estimate_rank

ESTIMATORS = ("pre", "proj", "hosvd", "hooi", "rank")
_LOADING_ESTIMATORS = ("pre", "proj", "hosvd", "hooi")


@dataclass
class BenchResult:
    """All per-replication scores of one benchmark run.

    ``errors[name]`` is an ``(n_reps, K)`` array of loading-space errors
    (NaN where a replication failed); ``rank_estimates`` is ``(n_reps, K)``
    with -1 for failures; ``elapsed[name]`` holds per-replication seconds.
    """

    setting: str
    dims: tuple[int, ...]
    t_steps: int
    n_reps: int
    true_ranks: tuple[int, ...]
    estimators: tuple[str, ...]
    seed: int
    errors: dict[str, np.ndarray]
    rank_estimates: np.ndarray | None
    elapsed: dict[str, np.ndarray]
    failures: list[tuple[int, str, str]]

    def error_summary(self):
        """Per (estimator, mode): mean, sd, median over successful reps."""
        rows = []
        for name in self.estimators:
            if name not in self.errors:
                continue
            samples = self.errors[name]
            for k in range(len(self.dims)):
                col = samples[:, k]
                ok = col[np.isfinite(col)]
                rows.append(
                    {
                        "estimator": name,
                        "mode": k,
                        "mean": float(np.mean(ok)) if ok.size else math.nan,
                        "sd": float(np.std(ok, ddof=1)) if ok.size > 1 else math.nan,
                        "median": float(np.median(ok)) if ok.size else math.nan,
                    }
                )
        return rows

    def rank_summary(self):
        """Per mode: mean and sd of the estimated rank over successful reps."""
        if self.rank_estimates is None:
            return []
        rows = []
        for k in range(len(self.dims)):
            col = self.rank_estimates[:, k]
            ok = col[col >= 0]
            rows.append(
                {
                    "mode": k,
                    "mean": float(np.mean(ok)) if ok.size else math.nan,
                    "sd": float(np.std(ok, ddof=1)) if ok.size > 1 else math.nan,
                }
            )
        return rows

    def correct_proportion(self):
        """Fraction of replications with every mode's rank exactly right."""
        if self.rank_estimates is None:
            return math.nan
        hits = np.all(self.rank_estimates == np.asarray(self.true_ranks), axis=1)
        return float(np.mean(hits))


def projection_error(est, truth):
    """Spectral-norm distance between the estimated and true projectors.

    ``est`` may be a LoadingEstimate or a plain column matrix; ``truth`` is
    the orthonormal basis of the true loading space with the same shape.
    """
    columns = np.asarray(getattr(est, "columns", est), dtype=float)
    truth = np.asarray(truth, dtype=float)
    if columns.ndim == 1:
        columns = columns[:, None]
    if truth.ndim == 1:
        truth = truth[:, None]
    if columns.shape != truth.shape:
        raise ValueError(f"shape mismatch: estimate {columns.shape}, truth {truth.shape}")
    gap = columns @ columns.T - truth @ truth.T
    return float(np.linalg.norm(gap, 2))


def run_benchmark(
    setting,
    dims,
    t_steps,
    n_reps,
    estimators=ESTIMATORS,
    seed=0,
    ranks=None,
    r_common=10,
    sweeps=30,
    pre_cfg=None,
    rank_cfg=None,
    noise_scale=1.0,
    workers=1,
):
    """Score the chosen estimators over ``n_reps`` simulated replications.

    ``estimators`` selects what to score: any of ``pre`` (pre-averaging with
    one column per true factor), ``proj`` (refined loading space), ``hosvd``,
    ``hooi``, and ``rank`` (bootstrap rank selection).  Prerequisites are
    computed as needed (``proj`` and ``rank`` imply the pre-averaging start).
    Replication ``r`` runs on ``default_rng(SeedSequence((seed, r)))``.
    """
    dims = tuple(int(d) for d in dims)
    if n_reps < 1:
        raise ValueError("n_reps must be positive")
    estimators = tuple(estimators)
    unknown = [e for e in estimators if e not in ESTIMATORS]
    if unknown:
        raise ValueError(f"unknown estimators {unknown}; choose from {ESTIMATORS}")
    if workers < 1:
        raise ValueError("workers must be positive")
    true_ranks = tuple(int(r) for r in (ranks if ranks is not None else (2,) * len(dims)))
    base_cfg = DgpConfig(
        dims=dims, t_steps=int(t_steps), ranks=true_ranks, r_common=r_common,
        noise_scale=noise_scale, seed=seed,
    )
    pre_cfg = pre_cfg if pre_cfg is not None else PreaverageConfig()
    rank_cfg = rank_cfg if rank_cfg is not None else RankConfig()

    n_modes = len(dims)
    errors = {
        name: np.full((n_reps, n_modes), np.nan)
        for name in estimators
        if name in _LOADING_ESTIMATORS
    }
    rank_estimates = (
        np.full((n_reps, n_modes), -1, dtype=np.int64) if "rank" in estimators else None
    )
    elapsed = {name: np.zeros(n_reps) for name in estimators}
    failures = []

    def one_replication(rep):
        rng = np.random.default_rng(np.random.SeedSequence((seed, rep)))
        out_err = {}
        out_rank = None
        out_time = {}
        out_fail = []
        truth = simulate_setting(base_cfg, setting, rng=rng)
        x = truth.series

        need_start = any(e in estimators for e in ("pre", "proj", "rank"))
        inits = None
        if need_start:
            start = perf_counter()
            try:
                pre_ests = []
                for k in range(n_modes):
                    cfg_k = replace(pre_cfg, sizes=dict(pre_cfg.sizes),
                                    n_directions=true_ranks[k])
                    est, _ = preaverage_direction(x, k, cfg_k, rng)
                    pre_ests.append(est)
                inits = [e.columns[:, 0] for e in pre_ests]
                if "pre" in estimators:
                    out_err["pre"] = [
                        projection_error(pre_ests[k], truth.bases[k]) for k in range(n_modes)
                    ]
            except Exception as exc:  # noqa: BLE001 - record and move on
                out_fail.append(("pre", repr(exc)))
            if "pre" in estimators:
                out_time["pre"] = perf_counter() - start

        state = None
        if any(e in estimators for e in ("proj", "rank")) and inits is not None:
            start = perf_counter()
            try:
                state = refine_directions(x, inits, iters=sweeps)
            except Exception as exc:  # noqa: BLE001
                out_fail.append(("proj", repr(exc)))
            refine_time = perf_counter() - start
        else:
            refine_time = 0.0

        if "proj" in estimators:
            start = perf_counter()
            if state is not None:
                try:
                    out_err["proj"] = [
                        projection_error(
                            estimate_loading_space(x, k, state, true_ranks[k]), truth.bases[k]
                        )
                        for k in range(n_modes)
                    ]
                except Exception as exc:  # noqa: BLE001
                    out_fail.append(("proj", repr(exc)))
            out_time["proj"] = refine_time + (perf_counter() - start)

        for name, runner in (("hosvd", hosvd), ("hooi", hooi)):
            if name not in estimators:
                continue
            start = perf_counter()
            try:
                ests = runner(x, true_ranks) if name == "hosvd" else runner(
                    x, true_ranks, iters=sweeps
                )
                out_err[name] = [
                    projection_error(ests[k], truth.bases[k]) for k in range(n_modes)
                ]
            except Exception as exc:  # noqa: BLE001
                out_fail.append((name, repr(exc)))
            out_time[name] = perf_counter() - start

        if "rank" in estimators:
            start = perf_counter()
            if state is not None:
                try:
                    out_rank = [
                        estimate_rank(x, k, state, rank_cfg, rng).rank_hat
                        for k in range(n_modes)
                    ]
                except Exception as exc:  # noqa: BLE001
                    out_fail.append(("rank", repr(exc)))
            out_time["rank"] = perf_counter() - start
        return rep, out_err, out_rank, out_time, out_fail

    with threadpool_limits(limits=1):
        if workers == 1:
            results = [one_replication(rep) for rep in range(n_reps)]
        else:
            with ThreadPoolExecutor(max_workers=workers) as pool:
                results = list(pool.map(one_replication, range(n_reps)))

    # deterministic fold in replication order
    results.sort(key=lambda item: item[0])
    for rep, out_err, out_rank, out_time, out_fail in results:
        for name, values in out_err.items():
            errors[name][rep] = values
        if out_rank is not None:
            rank_estimates[rep] = out_rank
        for name, seconds in out_time.items():
            elapsed[name][rep] = seconds
        for name, message in out_fail:
            failures.append((rep, name, message))

    return BenchResult(
        setting=setting,
        dims=dims,
        t_steps=int(t_steps),
        n_reps=int(n_reps),
        true_ranks=true_ranks,
        estimators=estimators,
        seed=int(seed),
        errors=errors,
        rank_estimates=rank_estimates,
        elapsed=elapsed,
        failures=failures,
    )


def _format(value):
    if value is None:
        return ""
    if isinstance(value, float):
        value = float(value)
        if math.isnan(value):
            return ""
        return repr(round(value, 12))
    return str(value)


def write_replication_csv(result, path, timings=False):
    """One row per (replication, estimator, mode).

    Columns: rep, estimator, mode (1-based), error, rank_hat, elapsed_ms.
    Timing cells are blank unless ``timings`` is set, keeping default output
    byte-identical across reruns with the same seed.
    """
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(["rep", "estimator", "mode", "error", "rank_hat", "elapsed_ms"])
        for rep in range(result.n_reps):
            for name in result.estimators:
                for k in range(len(result.dims)):
                    error = None
                    rank_hat = None
                    if name == "rank":
                        if result.rank_estimates is not None and result.rank_estimates[rep, k] >= 0:
                            rank_hat = int(result.rank_estimates[rep, k])
                    elif name in result.errors:
                        error = float(result.errors[name][rep, k])
                        if math.isnan(error):
                            error = None
                    ms = 1000.0 * result.elapsed[name][rep] if timings else None
                    writer.writerow(
                        [rep, name, k + 1, _format(error), _format(rank_hat), _format(ms)]
                    )


def write_summary_csv(result, path, timings=False):
    """Aggregate table: one row per (estimator, mode).

    Columns: setting, estimator, mode, mean, sd_x100, median, correct_prop,
    runtime_s.  Loading estimators report error statistics; the rank row
    reports rank statistics and the all-modes-correct proportion.  Runtime
    cells are blank unless ``timings`` is set.
    """
    rank_rows = {row["mode"]: row for row in result.rank_summary()}
    with open(path, "w", newline="") as handle:
        writer = csv.writer(handle)
        writer.writerow(
            ["setting", "estimator", "mode", "mean", "sd_x100", "median", "correct_prop",
             "runtime_s"]
        )
        for row in result.error_summary():
            name = row["estimator"]
            runtime = float(np.mean(result.elapsed[name])) if timings else None
            writer.writerow(
                [result.setting, name, row["mode"] + 1, _format(row["mean"]),
                 _format(100.0 * row["sd"]), _format(row["median"]), "", _format(runtime)]
            )
        if result.rank_estimates is not None:
            proportion = result.correct_proportion()
            runtime = float(np.mean(result.elapsed["rank"])) if timings else None
            for k, row in sorted(rank_rows.items()):
                writer.writerow(
                    [result.setting, "rank", k + 1, _format(row["mean"]),
                     _format(100.0 * row["sd"]), "", _format(proportion), _format(runtime)]
                )
