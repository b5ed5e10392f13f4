"""Schema-validated readers for the experiment output files.

This package consumes the documented CSV/JSON schemas only; it shares no code
or in-memory types with the library that produced them, so it stays usable on
any directory with conforming files.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .errors import PlotError, SchemaError

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
SURROGATE_CSV_COLUMNS = ("x", "ei", "sos_model", "is_recovered")
MANIFEST_FILE = "manifest.json"

_RUN_FLOAT_COLUMNS = ("regret", "cum_wall_seconds", "iter_wall_seconds", "best_so_far")
_RUN_INT_COLUMNS = ("seed", "iteration", "dim")


def _check_header(found, expected, path) -> None:
    if tuple(found) == tuple(expected):
        return
    missing = [c for c in expected if c not in found]
    unexpected = [c for c in found if c not in expected]
    parts = [f"{path}: header does not match the documented schema"]
    if missing:
        parts.append(f"missing columns: {', '.join(missing)}")
    if unexpected:
        parts.append(f"unexpected columns: {', '.join(unexpected)}")
    if not missing and not unexpected:
        parts.append(f"column order must be: {', '.join(expected)}")
    raise SchemaError("; ".join(parts))


def _cell(row_map: dict, column: str, row_number: int, path, kind=float):
    raw = row_map[column]
    try:
        return kind(raw)
    except ValueError as ex:
        raise SchemaError(
            f"{path}: column {column!r}, row {row_number}: cannot parse {raw!r}"
        ) from ex


def read_manifest(directory) -> dict:
    directory = Path(directory)
    path = directory / MANIFEST_FILE
    if not path.exists():
        raise PlotError(f"{directory} does not contain {MANIFEST_FILE}")
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as ex:
        raise SchemaError(f"{path}: not valid JSON: {ex}") from ex
    if not isinstance(manifest, dict) or "runs" not in manifest:
        raise SchemaError(f"{path}: manifest must be an object with a 'runs' list")
    for i, entry in enumerate(manifest["runs"]):
        for key in ("benchmark", "dim", "optimizer", "file"):
            if key not in entry:
                raise SchemaError(f"{path}: runs[{i}] is missing {key!r}")
    return manifest


def read_run_csv(path) -> dict:
    """Parse one run CSV into {seed: {"iteration", "regret", "cum_wall", ...}}."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a run CSV header")
        _check_header(header, RUN_CSV_COLUMNS, path)
        by_seed: dict[int, dict] = {}
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(RUN_CSV_COLUMNS):
                raise SchemaError(
                    f"{path}: row {row_number} has {len(row)} cells, expected {len(RUN_CSV_COLUMNS)}"
                )
            row_map = dict(zip(RUN_CSV_COLUMNS, row))
            seed = _cell(row_map, "seed", row_number, path, int)
            slot = by_seed.setdefault(
                seed, {c: [] for c in ("iteration", *_RUN_FLOAT_COLUMNS)}
            )
            slot["iteration"].append(_cell(row_map, "iteration", row_number, path, int))
            for column in _RUN_FLOAT_COLUMNS:
                slot[column].append(_cell(row_map, column, row_number, path))
    if not by_seed:
        raise SchemaError(f"{path}: no data rows")
    out = {}
    for seed, slot in by_seed.items():
        out[seed] = {key: np.asarray(vals) for key, vals in slot.items()}
    return out


def read_surrogate_csv(path) -> dict:
    """Parse a surrogate scan CSV into grid arrays plus the recovered row."""
    path = Path(path)
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None:
            raise SchemaError(f"{path}: empty file, expected a surrogate CSV header")
        _check_header(header, SURROGATE_CSV_COLUMNS, path)
        grid = {"x": [], "ei": [], "sos_model": []}
        recovered = []
        for row_number, row in enumerate(reader, start=2):
            if len(row) != len(SURROGATE_CSV_COLUMNS):
                raise SchemaError(
                    f"{path}: row {row_number} has {len(row)} cells, expected {len(SURROGATE_CSV_COLUMNS)}"
                )
            row_map = dict(zip(SURROGATE_CSV_COLUMNS, row))
            flag = _cell(row_map, "is_recovered", row_number, path, int)
            values = {c: _cell(row_map, c, row_number, path) for c in ("x", "ei", "sos_model")}
            if flag == 1:
                recovered.append(values)
            elif flag == 0:
                for c in grid:
                    grid[c].append(values[c])
            else:
                raise SchemaError(
                    f"{path}: column 'is_recovered', row {row_number}: must be 0 or 1, got {flag}"
                )
    if len(grid["x"]) < 2:
        raise SchemaError(f"{path}: needs at least 2 grid rows")
    if len(recovered) != 1:
        raise SchemaError(f"{path}: expected exactly one is_recovered=1 row, found {len(recovered)}")
    return {
        "x": np.asarray(grid["x"]),
        "ei": np.asarray(grid["ei"]),
        "sos_model": np.asarray(grid["sos_model"]),
        "recovered": recovered[0],
    }


def load_experiment(directory, benchmark: str | None = None, optimizer: str | None = None) -> list:
    """Load all (manifest entry, per-seed data) pairs, optionally filtered."""
    directory = Path(directory)
    manifest = read_manifest(directory)
    loaded = []
    for entry in manifest["runs"]:
        if benchmark is not None and entry["benchmark"] != benchmark:
            continue
        if optimizer is not None and entry["optimizer"] != optimizer:
            continue
        loaded.append((entry, read_run_csv(directory / entry["file"])))
    if not loaded:
        scope = []
        if benchmark is not None:
            scope.append(f"benchmark {benchmark!r}")
        if optimizer is not None:
            scope.append(f"optimizer {optimizer!r}")
        detail = f" matching {' and '.join(scope)}" if scope else ""
        raise PlotError(f"{directory}: no runs{detail} in the manifest")
    return loaded
