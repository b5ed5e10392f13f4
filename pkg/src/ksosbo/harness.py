"""Experiment orchestration, metrics, and persistence.

Runs the (benchmark x optimizer x seed) grid, writes one run CSV per
(benchmark, optimizer) pair plus a summary CSV and a manifest, and provides
the metric functions the summary is built from. Every float is serialized
as a decimal with 17 significant digits, so parsing a written file recovers
the exact binary values and the whole summary is byte-for-byte recomputable
from the raw run CSVs (the `verify_outputs` check).

Summary reference convention: for each (benchmark, optimizer) row, the
reference regret r_ref is the best final mean regret among the OTHER
optimizers of the same benchmark (lexicographic tie-break on the name).
For the winner this is the second-best optimizer; for everyone else it is
the winner. improvement_pct compares finals against r_ref, and
time_to_threshold_s is the first mean cumulative wall-clock time at which
the row's mean regret reaches r_ref (written as inf when it never does).
runtime_improvement_pct compares that hitting time against the reference
optimizer's own first hit of the same level. Cells with no defined value
(single-optimizer experiments, r_ref = 0, or an unreached threshold in the
runtime comparison) hold the marker `undefined`.
"""

from __future__ import annotations

import csv
import json
import logging
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.stats import t as student_t

from .acquisition import AcquisitionObjective, acquisition_min_batch, ei_value_batch
from .baselines import CMAESConfig, DEConfig
from .benchmarks import Benchmark, make_benchmark
from .bo import BOConfig, RunRecord, bo_config_to_dict, run_bo
from .errors import ConfigurationError, InputError
from .gp import Dataset, fit_gp, posterior_batch
from .kernels import KernelSpec
from .ksos import KSOSConfig, ksos_minimize, smoothing_sigma, sos_model_values

logger = logging.getLogger(__name__)

RUN_CSV_COLUMNS = (
    "benchmark",
    "dim",
    "optimizer",
    "acquisition",
    "seed",
    "iteration",
    "query",
    "observed",
    "best_so_far",
    "regret",
    "iter_wall_seconds",
    "cum_wall_seconds",
)
SUMMARY_CSV_COLUMNS = (
    "benchmark",
    "dim",
    "optimizer",
    "final_mean_regret",
    "ci_half_width",
    "rank",
    "improvement_pct",
    "time_to_threshold_s",
    "runtime_improvement_pct",
)
SURROGATE_CSV_COLUMNS = ("x", "ei", "sos_model", "is_recovered")
UNDEFINED_MARKER = "undefined"
SUMMARY_FILE = "summary.csv"
MANIFEST_FILE = "manifest.json"
RUNS_SUBDIR = "runs"


def fmt17(x: float) -> str:
    """Decimal serialization with 17 significant digits (exact round-trip)."""
    return format(float(x), ".17g")


def simple_regret(best_so_far: float, f_star: float) -> float:
    """Gap between the best value found and the true optimal value."""
    return float(best_so_far) - float(f_star)


@dataclass(frozen=True)
class AggregateSeries:
    """Per-iteration mean regret, 95% CI half-width, and mean wall time."""

    iterations: tuple
    mean_regret: tuple
    ci_half_width: tuple
    mean_cum_wall_seconds: tuple
    n_runs: int
    degenerate: bool  # single run: the CI is identically zero, not informative


def _aggregate_arrays(regrets: np.ndarray, cum_walls: np.ndarray) -> AggregateSeries:
    n, length = regrets.shape
    mean_regret = np.mean(regrets, axis=0)
    mean_wall = np.mean(cum_walls, axis=0)
    if n >= 2:
        sd = np.std(regrets, axis=0, ddof=1)
        half = float(student_t.ppf(0.975, n - 1)) * sd / np.sqrt(n)
        degenerate = False
    else:
        half = np.zeros(length)
        degenerate = True
    return AggregateSeries(
        iterations=tuple(range(1, length + 1)),
        mean_regret=tuple(float(v) for v in mean_regret),
        ci_half_width=tuple(float(v) for v in half),
        mean_cum_wall_seconds=tuple(float(v) for v in mean_wall),
        n_runs=n,
        degenerate=degenerate,
    )


def aggregate(runs: list) -> AggregateSeries:
    """Student-t 95% interval of regret across runs, per iteration."""
    if not runs:
        raise InputError("aggregate requires at least one run")
    lengths = {len(r.rows) for r in runs}
    if len(lengths) != 1:
        raise InputError("all runs must have the same number of rows")
    regrets = np.array([[row.regret for row in r.rows] for r in runs])
    cum_walls = np.array([[row.cum_wall_seconds for row in r.rows] for r in runs])
    return _aggregate_arrays(regrets, cum_walls)


def improvement_pct(r_k: float, r_ref: float) -> float | None:
    """(r_ref - r_k) / |r_ref| * 100; None when the reference regret is zero."""
    if r_ref == 0:
        return None
    return (r_ref - r_k) / abs(r_ref) * 100.0


def time_to_threshold(cum_times, regrets, r_ref: float) -> float | None:
    """Earliest recorded time at which regret first reaches r_ref.

    Step-function reading of the series: the first row with
    regret <= r_ref wins; None when the level is never reached.
    """
    times = np.asarray(cum_times, dtype=float)
    values = np.asarray(regrets, dtype=float)
    if times.shape != values.shape or times.size == 0:
        raise InputError("cum_times and regrets must be equal-length and non-empty")
    if np.any(np.diff(times) < 0):
        raise InputError("cum_times must be non-decreasing")
    hits = np.nonzero(values <= r_ref)[0]
    if hits.size == 0:
        return None
    return float(times[hits[0]])


def rank_optimizers(final_mean_regrets: dict) -> dict:
    """Dense ascending ranks; equal finals share a rank."""
    if not final_mean_regrets:
        raise InputError("rank_optimizers requires a non-empty mapping")
    distinct = sorted(set(final_mean_regrets.values()))
    position = {value: i + 1 for i, value in enumerate(distinct)}
    return {name: position[value] for name, value in final_mean_regrets.items()}


@dataclass(frozen=True)
class ExperimentSpec:
    """Fully resolved experiment grid.

    optimizers holds one BOConfig per inner optimizer, identical except for
    the optimizer selection; the optimizer kinds must be distinct because
    they key the output files and the ranking.
    """

    benchmarks: tuple
    optimizers: tuple
    seeds: tuple = (0, 1, 2, 3, 4)

    def __post_init__(self):
        if not self.benchmarks:
            raise ConfigurationError("benchmarks must be non-empty")
        if not self.optimizers:
            raise ConfigurationError("optimizers must be non-empty")
        if not self.seeds:
            raise ConfigurationError("seeds must be non-empty")
        if len(set(self.seeds)) != len(self.seeds):
            raise ConfigurationError("seeds must be distinct")
        kinds = [cfg.optimizer for cfg in self.optimizers]
        if len(set(kinds)) != len(kinds):
            raise ConfigurationError("optimizer kinds must be distinct")
        for name, dim in self.benchmarks:
            make_benchmark(name, dim)  # raises on inadmissible combinations


def _reject_unknown_keys(mapping: dict, allowed, context: str) -> None:
    unknown = sorted(set(mapping) - set(allowed))
    if unknown:
        raise ConfigurationError(f"unknown {context} keys: {', '.join(unknown)}")


_TOP_LEVEL_KEYS = (
    "benchmarks",
    "optimizers",
    "acquisition",
    "n_init",
    "n_iters",
    "budget",
    "seeds",
    "init_design",
    "inject_observation_noise",
    "ksos",
    "gp",
)


def _parse_ksos_block(block: dict) -> KSOSConfig:
    _reject_unknown_keys(block, ("kernel", "lambda_scale", "radius_factor", "lambda_reg"), "ksos")
    kwargs = {}
    if "kernel" in block:
        kwargs["kernel_kind"] = block["kernel"]
    if "lambda_scale" in block:
        kwargs["lambda_scale"] = float(block["lambda_scale"])
    if "radius_factor" in block:
        kwargs["radius_factor"] = float(block["radius_factor"])
    if "lambda_reg" in block:
        kwargs["lambda_reg"] = None if block["lambda_reg"] is None else float(block["lambda_reg"])
    return KSOSConfig(**kwargs)


def _parse_optimizer_entry(entry: dict, base: BOConfig) -> BOConfig:
    if "kind" not in entry:
        raise ConfigurationError("each optimizer entry needs a 'kind'")
    kind = entry["kind"]
    if kind in ("ksos", "sobol"):
        _reject_unknown_keys(entry, ("kind",), f"optimizer[{kind}]")
        return replace(base, optimizer=kind)
    if kind == "cmaes":
        _reject_unknown_keys(entry, ("kind", "pop_size", "sigma0_factor"), "optimizer[cmaes]")
        cmaes = CMAESConfig(
            pop_size=int(entry.get("pop_size", 8)),
            sigma0_factor=float(entry.get("sigma0_factor", 0.3)),
            budget=base.budget,
        )
        return replace(base, optimizer="cmaes", cmaes=cmaes)
    if kind == "de":
        _reject_unknown_keys(
            entry,
            ("kind", "popsize_multiplier", "maxiter", "mutation_range", "recombination"),
            "optimizer[de]",
        )
        de = DEConfig(
            popsize_multiplier=int(entry.get("popsize_multiplier", 2)),
            maxiter=int(entry.get("maxiter", 5)),
            mutation_range=tuple(float(v) for v in entry.get("mutation_range", (0.5, 1.0))),
            recombination=float(entry.get("recombination", 0.7)),
        )
        return replace(base, optimizer="de", de=de)
    raise ConfigurationError(f"unknown optimizer kind {kind!r}")


def parse_config(raw: dict) -> ExperimentSpec:
    """Build an ExperimentSpec from a parsed JSON config; unknown keys rejected."""
    if not isinstance(raw, dict):
        raise ConfigurationError("config must be a JSON object")
    _reject_unknown_keys(raw, _TOP_LEVEL_KEYS, "config")
    for key in ("benchmarks", "optimizers"):
        if key not in raw:
            raise ConfigurationError(f"config requires {key!r}")

    benchmarks = []
    for entry in raw["benchmarks"]:
        _reject_unknown_keys(entry, ("name", "dim"), "benchmark")
        if "name" not in entry or "dim" not in entry:
            raise ConfigurationError("each benchmark entry needs 'name' and 'dim'")
        benchmarks.append((str(entry["name"]), int(entry["dim"])))

    acquisition = raw.get("acquisition", {"kind": "ei"})
    if "kind" not in acquisition:
        raise ConfigurationError("acquisition needs a 'kind'")
    acq_kind = acquisition["kind"]
    if acq_kind == "ei":
        _reject_unknown_keys(acquisition, ("kind", "xi"), "acquisition[ei]")
        acq_kwargs = {"acquisition": "ei", "xi": float(acquisition.get("xi", 0.01))}
    elif acq_kind == "lcb":
        _reject_unknown_keys(acquisition, ("kind", "beta"), "acquisition[lcb]")
        acq_kwargs = {"acquisition": "lcb", "beta": float(acquisition.get("beta", 2.0))}
    else:
        raise ConfigurationError(f"unknown acquisition kind {acq_kind!r}")

    gp_block = raw.get("gp", {})
    _reject_unknown_keys(gp_block, ("noise_factor",), "gp")

    base = BOConfig(
        n_init=int(raw.get("n_init", 12)),
        n_iters=int(raw.get("n_iters", 400)),
        budget=int(raw.get("budget", 128)),
        noise_factor=float(gp_block.get("noise_factor", 0.05)),
        inject_observation_noise=bool(raw.get("inject_observation_noise", False)),
        init_design=str(raw.get("init_design", "uniform")),
        ksos=_parse_ksos_block(raw.get("ksos", {})),
        **acq_kwargs,
    )
    optimizers = tuple(_parse_optimizer_entry(entry, base) for entry in raw["optimizers"])
    seeds = tuple(int(s) for s in raw.get("seeds", (0, 1, 2, 3, 4)))
    return ExperimentSpec(benchmarks=tuple(benchmarks), optimizers=optimizers, seeds=seeds)


def load_config(path) -> ExperimentSpec:
    """Parse the experiment config JSON file at path."""
    with open(path, encoding="utf-8") as fh:
        try:
            raw = json.load(fh)
        except json.JSONDecodeError as ex:
            raise ConfigurationError(f"config {path} is not valid JSON: {ex}") from ex
    return parse_config(raw)


def _run_file_name(name: str, dim: int, optimizer: str) -> str:
    return f"{name}_d{dim}_{optimizer}.csv"


def _write_run_csv(path: Path, records: list) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(RUN_CSV_COLUMNS)
        for record in records:
            h = record.header
            for row in record.rows:
                writer.writerow(
                    [
                        h.benchmark,
                        h.dim,
                        h.optimizer,
                        h.acquisition,
                        h.seed,
                        row.iteration,
                        ";".join(fmt17(v) for v in row.query),
                        fmt17(row.observed),
                        fmt17(row.best_so_far),
                        fmt17(row.regret),
                        fmt17(row.iter_wall_seconds),
                        fmt17(row.cum_wall_seconds),
                    ]
                )


def read_run_csv(path) -> dict:
    """Parse one run CSV into {seed: {"regret": array, "cum_wall": array, ...}}.

    Rows are grouped by seed in file order; the column layout is validated
    against the documented schema.
    """
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or tuple(header) != RUN_CSV_COLUMNS:
            raise InputError(f"{path}: header does not match the run CSV schema")
        by_seed: dict[int, dict] = {}
        for row in reader:
            if len(row) != len(RUN_CSV_COLUMNS):
                raise InputError(f"{path}: row with {len(row)} cells, expected {len(RUN_CSV_COLUMNS)}")
            seed = int(row[4])
            slot = by_seed.setdefault(
                seed,
                {"iteration": [], "query": [], "observed": [], "best_so_far": [], "regret": [], "iter_wall": [], "cum_wall": []},
            )
            slot["iteration"].append(int(row[5]))
            slot["query"].append(tuple(float(v) for v in row[6].split(";")))
            slot["observed"].append(float(row[7]))
            slot["best_so_far"].append(float(row[8]))
            slot["regret"].append(float(row[9]))
            slot["iter_wall"].append(float(row[10]))
            slot["cum_wall"].append(float(row[11]))
    for slot in by_seed.values():
        for key in ("observed", "best_so_far", "regret", "iter_wall", "cum_wall"):
            slot[key] = np.asarray(slot[key])
    return by_seed


def _summary_rows(per_pair_series: dict, benchmark_order: list) -> list:
    """Assemble summary rows from {(name, dim): {optimizer: AggregateSeries}}."""
    rows = []
    for name, dim in benchmark_order:
        series_by_opt = per_pair_series.get((name, dim), {})
        if not series_by_opt:
            continue
        finals = {opt: s.mean_regret[-1] for opt, s in series_by_opt.items()}
        ranks = rank_optimizers(finals)
        for opt in sorted(series_by_opt, key=lambda o: (ranks[o], o)):
            series = series_by_opt[opt]
            others = {o: r for o, r in finals.items() if o != opt}
            if others:
                ref_name = min(others, key=lambda o: (others[o], o))
                r_ref = finals[ref_name]
                improvement = improvement_pct(finals[opt], r_ref)
                t_own = time_to_threshold(series.mean_cum_wall_seconds, series.mean_regret, r_ref)
                ref_series = series_by_opt[ref_name]
                t_ref = time_to_threshold(
                    ref_series.mean_cum_wall_seconds, ref_series.mean_regret, r_ref
                )
                if t_own is None or t_ref is None or t_ref == 0:
                    runtime_improvement = None
                else:
                    runtime_improvement = (t_ref - t_own) / t_ref * 100.0
            else:
                improvement = None
                t_own = None
                runtime_improvement = None
            rows.append(
                {
                    "benchmark": name,
                    "dim": dim,
                    "optimizer": opt,
                    "final_mean_regret": fmt17(finals[opt]),
                    "ci_half_width": fmt17(series.ci_half_width[-1]),
                    "rank": str(ranks[opt]),
                    "improvement_pct": UNDEFINED_MARKER if improvement is None else fmt17(improvement),
                    "time_to_threshold_s": "inf" if t_own is None else fmt17(t_own),
                    "runtime_improvement_pct": UNDEFINED_MARKER
                    if runtime_improvement is None
                    else fmt17(runtime_improvement),
                }
            )
    return rows


def _summary_text(rows: list) -> str:
    lines = [",".join(SUMMARY_CSV_COLUMNS)]
    for row in rows:
        lines.append(",".join(str(row[col]) for col in SUMMARY_CSV_COLUMNS))
    return "\n".join(lines) + "\n"


def _pool_task(payload):
    name, dim, cfg, seed = payload
    benchmark = make_benchmark(name, dim)
    return run_bo(benchmark, cfg, seed)


def run_experiment(spec: ExperimentSpec, out_dir, workers: int = 1) -> dict:
    """Execute the grid and persist run CSVs, summary.csv, and manifest.json.

    Returns {"runs": [paths], "summary": path, "manifest": path}. Re-running
    with an identical spec overwrites the same files; everything except the
    wall-clock columns is byte-for-byte reproducible. Failed runs keep their
    partial rows out of the CSVs, are listed in the manifest, and are skipped
    by the aggregates with a logged warning.
    """
    if workers < 1:
        raise ConfigurationError("workers must be >= 1")
    out = Path(out_dir)
    runs_dir = out / RUNS_SUBDIR
    runs_dir.mkdir(parents=True, exist_ok=True)

    tasks = [
        (name, dim, cfg, seed)
        for name, dim in spec.benchmarks
        for cfg in spec.optimizers
        for seed in spec.seeds
    ]
    if workers == 1:
        results = [_pool_task(t) for t in tasks]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_pool_task, tasks))

    grouped: dict[tuple, list] = {}
    failed = []
    for (name, dim, cfg, seed), record in zip(tasks, results):
        if record.failed:
            failed.append(
                {
                    "benchmark": name,
                    "dim": dim,
                    "optimizer": cfg.optimizer,
                    "seed": seed,
                    "error": record.failure_message,
                }
            )
            logger.warning(
                "run failed (excluded from aggregates): %s d=%d %s seed=%d: %s",
                name,
                dim,
                cfg.optimizer,
                seed,
                record.failure_message,
            )
            continue
        grouped.setdefault((name, dim, cfg.optimizer), []).append(record)

    run_paths = []
    per_pair_series: dict[tuple, dict] = {}
    manifest_runs = []
    for (name, dim), cfg in ((b, c) for b in spec.benchmarks for c in spec.optimizers):
        records = grouped.get((name, dim, cfg.optimizer), [])
        if not records:
            continue
        path = runs_dir / _run_file_name(name, dim, cfg.optimizer)
        _write_run_csv(path, records)
        run_paths.append(path)
        per_pair_series.setdefault((name, dim), {})[cfg.optimizer] = aggregate(records)
        manifest_runs.append(
            {
                "benchmark": name,
                "dim": dim,
                "optimizer": cfg.optimizer,
                "file": f"{RUNS_SUBDIR}/{path.name}",
                "seeds": [r.header.seed for r in records],
                "config_fingerprint": records[0].header.config_fingerprint,
            }
        )

    summary_rows = _summary_rows(per_pair_series, list(spec.benchmarks))
    summary_path = out / SUMMARY_FILE
    summary_path.write_text(_summary_text(summary_rows), encoding="utf-8")

    manifest = {
        "benchmarks": [{"name": n, "dim": d} for n, d in spec.benchmarks],
        "optimizers": [bo_config_to_dict(cfg) for cfg in spec.optimizers],
        "seeds": list(spec.seeds),
        "runs": manifest_runs,
        "failed_runs": failed,
    }
    manifest_path = out / MANIFEST_FILE
    manifest_path.write_text(json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8")

    return {"runs": run_paths, "summary": summary_path, "manifest": manifest_path}


def verify_outputs(out_dir) -> list:
    """Recompute every summary metric from the raw run CSVs.

    Returns a list of human-readable discrepancy strings; empty means the
    stored summary matches the recomputation exactly.
    """
    out = Path(out_dir)
    manifest_path = out / MANIFEST_FILE
    summary_path = out / SUMMARY_FILE
    if not manifest_path.exists():
        raise InputError(f"missing {MANIFEST_FILE} in {out}")
    if not summary_path.exists():
        raise InputError(f"missing {SUMMARY_FILE} in {out}")
    manifest = json.loads(manifest_path.read_text(encoding="utf-8"))

    per_pair_series: dict[tuple, dict] = {}
    benchmark_order = [(b["name"], int(b["dim"])) for b in manifest["benchmarks"]]
    for entry in manifest["runs"]:
        by_seed = read_run_csv(out / entry["file"])
        regrets = np.array([by_seed[s]["regret"] for s in sorted(by_seed)])
        cum_walls = np.array([by_seed[s]["cum_wall"] for s in sorted(by_seed)])
        series = _aggregate_arrays(regrets, cum_walls)
        key = (entry["benchmark"], int(entry["dim"]))
        per_pair_series.setdefault(key, {})[entry["optimizer"]] = series

    expected = _summary_text(_summary_rows(per_pair_series, benchmark_order))
    stored = summary_path.read_text(encoding="utf-8")
    if stored == expected:
        return []

    discrepancies = []
    stored_lines = stored.splitlines()
    expected_lines = expected.splitlines()
    for i in range(max(len(stored_lines), len(expected_lines))):
        got = stored_lines[i] if i < len(stored_lines) else "<missing>"
        want = expected_lines[i] if i < len(expected_lines) else "<missing>"
        if got == want:
            continue
        got_cells = got.split(",")
        want_cells = want.split(",")
        for j in range(max(len(got_cells), len(want_cells))):
            g = got_cells[j] if j < len(got_cells) else "<missing>"
            w = want_cells[j] if j < len(want_cells) else "<missing>"
            if g != w:
                column = SUMMARY_CSV_COLUMNS[j] if j < len(SUMMARY_CSV_COLUMNS) else f"col{j}"
                discrepancies.append(f"{SUMMARY_FILE} line {i + 1} {column}: stored {g!r}, recomputed {w!r}")
    return discrepancies


def surrogate_scan_1d(
    benchmark_name: str,
    steps: int = 9,
    kernel_kind: str = "gaussian",
    seed: int = 0,
    budget: int = 128,
    n_grid: int = 10_000,
) -> list:
    """Data for the 1D acquisition-vs-surrogate figure.

    Runs `steps` BO iterations on the 1D version of the named benchmark
    (n_init = 12, EI, KSOS inner optimizer with the given kernel), then
    evaluates the resulting expected-improvement curve on a dense grid next
    to the SOS surrogate model of the final acquisition solve. Returns rows
    of (x, ei, sos_model, is_recovered): n_grid grid rows plus one final row
    for the point the KSOS solve recovered. sos_model approximates the
    minimized objective (negated EI), so its argmin marks the proposal.
    """
    if steps < 0:
        raise InputError("steps must be >= 0")
    if n_grid < 2:
        raise InputError("n_grid must be >= 2")
    benchmark = make_benchmark(benchmark_name, 1)
    ksos_cfg = KSOSConfig(kernel_kind=kernel_kind)
    cfg = BOConfig(optimizer="ksos", n_init=12, n_iters=steps, budget=budget, ksos=ksos_cfg)
    record = run_bo(benchmark, cfg, seed)
    if record.failed:
        raise InputError(f"underlying BO run failed: {record.failure_message}")

    X = np.array([row.query for row in record.rows])
    y = np.array([row.observed for row in record.rows])
    model = fit_gp(Dataset(X, y), noise_factor=cfg.noise_factor, rng=np.random.default_rng(seed))
    objective = AcquisitionObjective(
        model=model, kind="ei", f_best=float(np.min(y)), xi=cfg.xi
    )

    def batch_objective(P):
        return acquisition_min_batch(objective, np.atleast_2d(np.asarray(P, dtype=float)))

    x_rec, solution = ksos_minimize(
        batch_objective, benchmark.box, budget, ksos_cfg, np.random.default_rng(seed)
    )

    box = benchmark.box
    grid = np.linspace(box.lower[0], box.upper[0], n_grid)[:, None]
    mean, std = posterior_batch(model, grid)
    ei_grid = ei_value_batch(mean, std, objective.f_best, objective.xi)

    radius = ksos_cfg.radius_factor * float(np.mean(box.range_array))
    sigma = smoothing_sigma(radius, budget, 1, ksos_cfg.lambda_scale)
    spec = KernelSpec(kernel_kind, lengthscale_or_sigma=sigma)
    sos_grid = sos_model_values(solution, spec, grid)

    rows = [
        (float(grid[i, 0]), float(ei_grid[i]), float(sos_grid[i]), 0) for i in range(n_grid)
    ]
    mean_rec, std_rec = posterior_batch(model, x_rec[None, :])
    ei_rec = float(ei_value_batch(mean_rec, std_rec, objective.f_best, objective.xi)[0])
    sos_rec = float(sos_model_values(solution, spec, x_rec[None, :])[0])
    rows.append((float(x_rec[0]), ei_rec, sos_rec, 1))
    return rows


def write_surrogate_csv(path, rows) -> None:
    """Persist surrogate_scan_1d rows under the documented schema."""
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(SURROGATE_CSV_COLUMNS)
        for x, ei, sos, flag in rows:
            writer.writerow([fmt17(x), fmt17(ei), fmt17(sos), int(flag)])
