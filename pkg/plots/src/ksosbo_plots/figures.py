"""Figure rendering from experiment output files.

Four figure kinds: regret-vs-iteration and regret-vs-wall-clock curves on a
log axis with shaded 95% confidence bands, total-runtime bar charts with one
standard deviation error bars, and the 1D acquisition-vs-surrogate overlay.
Optimizer colors are assigned from a fixed table so the same optimizer keeps
its color across every figure.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
# deterministic files: stable SVG element ids, text kept as text instead of glyph paths
matplotlib.rcParams["svg.hashsalt"] = "ksosbo-plots"
matplotlib.rcParams["svg.fonttype"] = "none"

import matplotlib.pyplot as plt
import numpy as np
from scipy.stats import t as student_t

from .errors import PlotError, SchemaError
from .io import load_experiment, read_surrogate_csv

PLOT_KINDS = ("regret_vs_iter", "regret_vs_time", "runtime_bars", "surrogate_1d")
LOG_FLOOR = 1e-12
_CLAMP_FOOTNOTE = f"regret values <= 0 clamped to {LOG_FLOOR:g} for log display"

# Stable optimizer -> color table; unknown names fall back to a deterministic
# assignment from the remaining tab10 slots in sorted-name order.
OPTIMIZER_COLORS = {
    "ksos": "tab:blue",
    "sobol": "tab:orange",
    "cmaes": "tab:green",
    "de": "tab:red",
}
_FALLBACK_COLORS = ("tab:purple", "tab:brown", "tab:pink", "tab:gray", "tab:olive", "tab:cyan")


@dataclass(frozen=True)
class PlotJob:
    """One figure request: where to read, what to draw, where to write."""

    input_path: str
    kind: str
    out_path: str
    benchmark: str | None = None
    optimizer: str | None = None
    dpi: int = 150

    def __post_init__(self):
        if self.kind not in PLOT_KINDS:
            raise PlotError(f"unknown figure kind {self.kind!r}; choose from {', '.join(PLOT_KINDS)}")
        if self.dpi < 10:
            raise PlotError("dpi must be >= 10")
        suffix = Path(self.out_path).suffix.lower()
        if suffix not in (".png", ".svg"):
            raise PlotError(f"output must be .png or .svg, got {suffix or '(none)'}")


def color_for(optimizer: str, all_names) -> str:
    if optimizer in OPTIMIZER_COLORS:
        return OPTIMIZER_COLORS[optimizer]
    unknown = sorted(n for n in all_names if n not in OPTIMIZER_COLORS)
    return _FALLBACK_COLORS[unknown.index(optimizer) % len(_FALLBACK_COLORS)]


def _aggregate(per_seed: dict, column: str):
    """Across-seed mean and 95% t half-width of one run-CSV column."""
    seeds = sorted(per_seed)
    series = [per_seed[s][column] for s in seeds]
    lengths = {len(s) for s in series}
    if len(lengths) != 1:
        raise SchemaError(
            f"column {column!r}: seeds disagree on row count ({sorted(lengths)}); "
            "the file mixes runs of different lengths"
        )
    stacked = np.vstack(series)
    mean = stacked.mean(axis=0)
    n = stacked.shape[0]
    if n >= 2:
        half = float(student_t.ppf(0.975, n - 1)) * stacked.std(axis=0, ddof=1) / math.sqrt(n)
    else:
        half = np.zeros_like(mean)
    return mean, half


def _clamped(values: np.ndarray) -> tuple[np.ndarray, bool]:
    clamped = np.maximum(values, LOG_FLOOR)
    return clamped, bool(np.any(values < LOG_FLOOR))


def _new_figure(n_panels: int):
    cols = min(n_panels, 2)
    rows = math.ceil(n_panels / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(6.4 * cols, 4.2 * rows), squeeze=False)
    flat = [ax for row in axes for ax in row]
    for ax in flat[n_panels:]:
        ax.set_visible(False)
    return fig, flat[:n_panels]


def _grouped_by_benchmark(loaded):
    groups: dict[tuple, list] = {}
    for entry, per_seed in loaded:
        groups.setdefault((entry["benchmark"], entry["dim"]), []).append((entry, per_seed))
    return groups


def _save(fig, job: PlotJob) -> None:
    out = Path(job.out_path)
    out.parent.mkdir(parents=True, exist_ok=True)
    kwargs = {"dpi": job.dpi}
    if out.suffix.lower() == ".svg":
        kwargs["metadata"] = {"Date": None}  # keep bytes independent of run time
    fig.savefig(out, **kwargs)
    plt.close(fig)


def _render_regret(job: PlotJob, against: str) -> None:
    loaded = load_experiment(job.input_path, job.benchmark, job.optimizer)
    groups = _grouped_by_benchmark(loaded)
    fig, axes = _new_figure(len(groups))
    all_names = sorted({entry["optimizer"] for entry, _ in loaded})
    any_clamped = False
    for ax, ((name, dim), members) in zip(axes, sorted(groups.items())):
        for entry, per_seed in sorted(members, key=lambda m: m[0]["optimizer"]):
            mean, half = _aggregate(per_seed, "regret")
            if against == "iteration":
                x = np.arange(1, len(mean) + 1)
            else:
                x, _ = _aggregate(per_seed, "cum_wall_seconds")
            lower, c1 = _clamped(mean - half)
            upper, c2 = _clamped(mean + half)
            center, c3 = _clamped(mean)
            any_clamped = any_clamped or c1 or c2 or c3
            color = color_for(entry["optimizer"], all_names)
            ax.plot(x, center, label=entry["optimizer"], color=color)
            ax.fill_between(x, lower, upper, color=color, alpha=0.2, linewidth=0)
        ax.set_yscale("log")
        ax.set_title(f"{name} (d={dim})")
        ax.set_xlabel("iteration" if against == "iteration" else "mean wall-clock seconds")
        ax.set_ylabel("mean simple regret (95% CI)")
        ax.legend()
        ax.grid(True, which="both", alpha=0.25)
    if any_clamped:
        fig.text(0.01, 0.005, _CLAMP_FOOTNOTE, fontsize=7, alpha=0.8)
    fig.tight_layout(rect=(0, 0.02, 1, 1) if any_clamped else None)
    _save(fig, job)


def render_regret_vs_iter(job: PlotJob) -> None:
    _render_regret(job, against="iteration")


def render_regret_vs_time(job: PlotJob) -> None:
    _render_regret(job, against="time")


def render_runtime_bars(job: PlotJob) -> None:
    loaded = load_experiment(job.input_path, job.benchmark, job.optimizer)
    groups = _grouped_by_benchmark(loaded)
    all_names = sorted({entry["optimizer"] for entry, _ in loaded})
    fig, ax = plt.subplots(figsize=(1.8 + 1.6 * len(groups) * max(1, len(all_names)) / 2, 4.2))
    group_keys = sorted(groups)
    width = 0.8 / len(all_names)
    for j, optimizer in enumerate(all_names):
        positions, means, stds = [], [], []
        for i, key in enumerate(group_keys):
            match = [m for m in groups[key] if m[0]["optimizer"] == optimizer]
            if not match:
                continue
            _, per_seed = match[0]
            totals = [per_seed[s]["cum_wall_seconds"][-1] for s in sorted(per_seed)]
            positions.append(i + (j - (len(all_names) - 1) / 2) * width)
            means.append(float(np.mean(totals)))
            stds.append(float(np.std(totals)))  # error bars: one standard deviation
        if positions:
            ax.bar(
                positions,
                means,
                width=width,
                yerr=stds,
                capsize=3,
                label=optimizer,
                color=color_for(optimizer, all_names),
            )
    ax.set_xticks(range(len(group_keys)))
    ax.set_xticklabels([f"{name}\n(d={dim})" for name, dim in group_keys])
    ax.set_ylabel("total wall-clock seconds (mean ± 1 sd)")
    ax.legend()
    ax.grid(True, axis="y", alpha=0.25)
    fig.tight_layout()
    _save(fig, job)


def render_surrogate_1d(job: PlotJob) -> None:
    path = Path(job.input_path)
    if path.is_dir():
        path = path / "surrogate.csv"
        if not path.exists():
            raise PlotError(f"{job.input_path}: directory has no surrogate.csv; pass the CSV path")
    data = read_surrogate_csv(path)
    recovered = data["recovered"]
    fig, (ax_top, ax_bottom) = plt.subplots(2, 1, figsize=(7.0, 6.0), sharex=True)
    ax_top.plot(data["x"], data["ei"], color="tab:blue", label="expected improvement")
    ax_top.axvline(recovered["x"], color="tab:red", linestyle="--", linewidth=1)
    ax_top.plot([recovered["x"]], [recovered["ei"]], "o", color="tab:red", label="recovered point")
    ax_top.set_ylabel("EI")
    ax_top.legend()
    ax_top.grid(True, alpha=0.25)
    ax_bottom.plot(data["x"], data["sos_model"], color="tab:green", label="SOS model of -EI")
    ax_bottom.axvline(recovered["x"], color="tab:red", linestyle="--", linewidth=1)
    ax_bottom.plot(
        [recovered["x"]], [recovered["sos_model"]], "o", color="tab:red", label="recovered point"
    )
    ax_bottom.set_xlabel("x")
    ax_bottom.set_ylabel("surrogate value")
    ax_bottom.legend()
    ax_bottom.grid(True, alpha=0.25)
    fig.tight_layout()
    _save(fig, job)


_RENDERERS = {
    "regret_vs_iter": render_regret_vs_iter,
    "regret_vs_time": render_regret_vs_time,
    "runtime_bars": render_runtime_bars,
    "surrogate_1d": render_surrogate_1d,
}


def render(job: PlotJob) -> str:
    """Render one figure and return the written path."""
    _RENDERERS[job.kind](job)
    return job.out_path
