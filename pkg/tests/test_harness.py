"""Experiment harness: metrics, config parsing, persistence, verification."""

import json
import math

import numpy as np
import pytest

from ksosbo import (
    MANIFEST_FILE,
    RUN_CSV_COLUMNS,
    RUNS_SUBDIR,
    SUMMARY_CSV_COLUMNS,
    SUMMARY_FILE,
    UNDEFINED_MARKER,
    BOConfig,
    ConfigurationError,
    ExperimentSpec,
    InputError,
    IterationRow,
    RunHeader,
    RunRecord,
    aggregate,
    fmt17,
    improvement_pct,
    load_config,
    make_benchmark,
    parse_config,
    rank_optimizers,
    read_run_csv,
    run_bo,
    run_experiment,
    simple_regret,
    time_to_threshold,
    verify_outputs,
)

T_QUANTILE_DF1 = 12.70620473617471  # Student-t 0.975 quantile at 1 dof


def _record(regrets, walls=None, seed=0):
    walls = walls if walls is not None else np.cumsum(np.ones(len(regrets)))
    header = RunHeader("sphere", 2, "ksos", "ei", seed, "abc")
    rows = [
        IterationRow(
            iteration=i + 1,
            query=(0.0, 0.0),
            observed=float(g),
            best_so_far=float(g),
            regret=float(g),
            iter_wall_seconds=1.0,
            cum_wall_seconds=float(w),
        )
        for i, (g, w) in enumerate(zip(regrets, walls))
    ]
    return RunRecord(header=header, rows=rows)


class TestMetrics:
    def test_simple_regret(self):
        assert simple_regret(-200.0, -210.0) == pytest.approx(10.0)
        assert simple_regret(3.0, 0.0) == 3.0

    def test_improvement_pct(self):
        assert improvement_pct(5.0, 10.0) == pytest.approx(50.0)
        assert improvement_pct(20.0, 10.0) == pytest.approx(-100.0)
        assert improvement_pct(1.0, 0.0) is None
        # negative reference regret normalizes by magnitude
        assert improvement_pct(-5.0, -10.0) == pytest.approx(-50.0)

    def test_time_to_threshold(self):
        assert time_to_threshold([1.0, 2.0, 3.0], [5.0, 3.0, 1.0], 3.0) == 2.0
        assert time_to_threshold([1.0, 2.0, 3.0], [5.0, 3.0, 1.0], 0.5) is None
        assert time_to_threshold([1.0, 2.0], [5.0, 5.0], 5.0) == 1.0
        with pytest.raises(InputError):
            time_to_threshold([2.0, 1.0], [5.0, 3.0], 3.0)
        with pytest.raises(InputError):
            time_to_threshold([], [], 1.0)

    def test_rank_dense_with_ties(self):
        ranks = rank_optimizers({"a": 1.0, "b": 2.0, "c": 1.0, "d": 5.0})
        assert ranks == {"a": 1, "c": 1, "b": 2, "d": 3}
        with pytest.raises(InputError):
            rank_optimizers({})

    def test_aggregate_two_runs_t_interval(self):
        agg = aggregate([_record([0.0, 4.0]), _record([2.0, 0.0])])
        assert agg.n_runs == 2 and not agg.degenerate
        assert agg.mean_regret == (1.0, 2.0)
        # sd ddof=1 of {0,2} is sqrt(2); half width t * sd / sqrt(2)
        assert agg.ci_half_width[0] == pytest.approx(T_QUANTILE_DF1 * math.sqrt(2.0) / math.sqrt(2.0))

    def test_aggregate_identical_runs_zero_width(self):
        agg = aggregate([_record([3.0, 1.0]), _record([3.0, 1.0]), _record([3.0, 1.0])])
        assert agg.ci_half_width == (0.0, 0.0)

    def test_aggregate_single_run_degenerate(self):
        agg = aggregate([_record([3.0, 1.0])])
        assert agg.degenerate and agg.n_runs == 1
        assert agg.ci_half_width == (0.0, 0.0)

    def test_aggregate_validation(self):
        with pytest.raises(InputError):
            aggregate([])
        with pytest.raises(InputError):
            aggregate([_record([1.0, 2.0]), _record([1.0])])

    def test_fmt17_round_trips(self):
        for value in (0.1, 1 / 3, 1e-17, -2.5e300, 12.70620473617471):
            assert float(fmt17(value)) == value


def _full_raw():
    return {
        "benchmarks": [{"name": "sphere", "dim": 2}],
        "optimizers": [{"kind": "ksos"}, {"kind": "sobol"}],
        "acquisition": {"kind": "ei", "xi": 0.02},
        "n_init": 4,
        "n_iters": 2,
        "budget": 16,
        "seeds": [0, 1],
        "init_design": "uniform",
        "inject_observation_noise": False,
        "ksos": {"kernel": "gaussian", "lambda_scale": 1.0, "radius_factor": 0.5, "lambda_reg": None},
        "gp": {"noise_factor": 0.05},
    }


class TestConfigParsing:
    def test_full_config(self):
        spec = parse_config(_full_raw())
        assert spec.benchmarks == (("sphere", 2),)
        assert tuple(c.optimizer for c in spec.optimizers) == ("ksos", "sobol")
        assert spec.seeds == (0, 1)
        assert spec.optimizers[0].xi == 0.02
        assert spec.optimizers[0].ksos.lambda_reg is None

    def test_defaults(self):
        spec = parse_config({"benchmarks": [{"name": "sphere", "dim": 2}], "optimizers": [{"kind": "ksos"}]})
        cfg = spec.optimizers[0]
        assert (cfg.n_init, cfg.n_iters, cfg.budget) == (12, 400, 128)
        assert (cfg.acquisition, cfg.xi) == ("ei", 0.01)
        assert spec.seeds == (0, 1, 2, 3, 4)

    @pytest.mark.parametrize(
        "mutate",
        [
            lambda r: r.update(extra=1),
            lambda r: r["benchmarks"][0].update(extra=1),
            lambda r: r["optimizers"][0].update(extra=1),
            lambda r: r["acquisition"].update(beta=2.0),
            lambda r: r["ksos"].update(bandwidth=1.0),
            lambda r: r["gp"].update(jitter=1e-9),
        ],
    )
    def test_unknown_keys_rejected_everywhere(self, mutate):
        raw = _full_raw()
        mutate(raw)
        with pytest.raises(ConfigurationError):
            parse_config(raw)

    def test_lcb_block(self):
        raw = _full_raw()
        raw["acquisition"] = {"kind": "lcb", "beta": 3.0}
        spec = parse_config(raw)
        assert spec.optimizers[0].acquisition == "lcb"
        assert spec.optimizers[0].beta == 3.0
        raw["acquisition"] = {"kind": "lcb", "xi": 0.01}
        with pytest.raises(ConfigurationError):
            parse_config(raw)

    def test_optimizer_specific_blocks(self):
        raw = _full_raw()
        raw["budget"] = 64
        raw["optimizers"] = [
            {"kind": "ksos"},
            {"kind": "cmaes", "pop_size": 4, "sigma0_factor": 0.2},
            {"kind": "de", "popsize_multiplier": 3, "maxiter": 4, "recombination": 0.9},
        ]
        spec = parse_config(raw)
        cmaes_cfg = spec.optimizers[1]
        assert cmaes_cfg.cmaes.pop_size == 4
        assert cmaes_cfg.resolved_cmaes().budget == 64
        de_cfg = spec.optimizers[2]
        assert (de_cfg.de.popsize_multiplier, de_cfg.de.maxiter, de_cfg.de.recombination) == (3, 4, 0.9)
        # bare kinds refuse tuning payloads
        raw["optimizers"] = [{"kind": "sobol", "pop_size": 4}]
        with pytest.raises(ConfigurationError):
            parse_config(raw)

    def test_required_sections(self):
        with pytest.raises(ConfigurationError):
            parse_config({"optimizers": [{"kind": "ksos"}]})
        with pytest.raises(ConfigurationError):
            parse_config({"benchmarks": [{"name": "sphere", "dim": 2}]})
        with pytest.raises(ConfigurationError):
            parse_config([1, 2])

    def test_duplicate_kind_and_seed_rejection(self):
        raw = _full_raw()
        raw["optimizers"] = [{"kind": "ksos"}, {"kind": "ksos"}]
        with pytest.raises(ConfigurationError):
            parse_config(raw)
        raw = _full_raw()
        raw["seeds"] = [0, 0]
        with pytest.raises(ConfigurationError):
            parse_config(raw)

    def test_inadmissible_benchmark_combination(self):
        raw = _full_raw()
        raw["benchmarks"] = [{"name": "michalewicz", "dim": 3}]
        with pytest.raises(ConfigurationError):
            parse_config(raw)

    def test_load_config_bad_json(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ConfigurationError):
            load_config(path)

    def test_load_config_round_trip(self, tmp_path):
        path = tmp_path / "cfg.json"
        path.write_text(json.dumps(_full_raw()), encoding="utf-8")
        assert load_config(path) == parse_config(_full_raw())


@pytest.fixture(scope="module")
def mini_out(tmp_path_factory):
    out = tmp_path_factory.mktemp("experiment")
    spec = parse_config(_full_raw())
    paths = run_experiment(spec, out)
    return out, spec, paths


class TestExperiment:
    def test_file_accounting(self, mini_out):
        out, _, paths = mini_out
        assert len(paths["runs"]) == 2
        names = sorted(p.name for p in paths["runs"])
        assert names == ["sphere_d2_ksos.csv", "sphere_d2_sobol.csv"]
        assert (out / SUMMARY_FILE).exists()
        assert (out / MANIFEST_FILE).exists()
        assert (out / RUNS_SUBDIR).is_dir()

    def test_run_csv_schema_and_round_trip(self, mini_out):
        out, spec, _ = mini_out
        path = out / RUNS_SUBDIR / "sphere_d2_ksos.csv"
        header = path.read_text(encoding="utf-8").splitlines()[0]
        assert header == ",".join(RUN_CSV_COLUMNS)
        data = read_run_csv(path)
        assert sorted(data) == [0, 1]
        ksos_cfg = next(c for c in spec.optimizers if c.optimizer == "ksos")
        rerun = run_bo(make_benchmark("sphere", 2), ksos_cfg, 1)
        # deterministic columns round-trip through .17g exactly
        assert np.array_equal(data[1]["regret"], np.array([r.regret for r in rerun.rows]))
        assert np.array_equal(data[1]["observed"], np.array([r.observed for r in rerun.rows]))
        assert data[1]["query"] == [r.query for r in rerun.rows]

    def test_summary_schema_and_ranks(self, mini_out):
        out, _, _ = mini_out
        lines = (out / SUMMARY_FILE).read_text(encoding="utf-8").splitlines()
        assert lines[0] == ",".join(SUMMARY_CSV_COLUMNS)
        rows = [dict(zip(SUMMARY_CSV_COLUMNS, line.split(","))) for line in lines[1:]]
        assert len(rows) == 2
        assert {r["optimizer"] for r in rows} == {"ksos", "sobol"}
        ranks = sorted(int(r["rank"]) for r in rows)
        assert ranks[0] == 1
        # sorted by rank: the winner prints first and improves on the other
        assert int(rows[0]["rank"]) <= int(rows[1]["rank"])
        if rows[0]["improvement_pct"] != UNDEFINED_MARKER:
            assert float(rows[0]["improvement_pct"]) >= 0.0

    def test_manifest_contents(self, mini_out):
        out, _, _ = mini_out
        manifest = json.loads((out / MANIFEST_FILE).read_text(encoding="utf-8"))
        assert manifest["benchmarks"] == [{"name": "sphere", "dim": 2}]
        assert manifest["seeds"] == [0, 1]
        assert manifest["failed_runs"] == []
        assert len(manifest["runs"]) == 2
        for entry in manifest["runs"]:
            assert (out / entry["file"]).exists()
            assert entry["seeds"] == [0, 1]

    def test_verify_clean(self, mini_out):
        out, _, _ = mini_out
        assert verify_outputs(out) == []

    def test_rerun_reproduces_deterministic_columns(self, mini_out, tmp_path):
        out, spec, _ = mini_out
        rerun_out = tmp_path / "again"
        run_experiment(spec, rerun_out)
        for name in ("sphere_d2_ksos.csv", "sphere_d2_sobol.csv"):
            a = read_run_csv(out / RUNS_SUBDIR / name)
            b = read_run_csv(rerun_out / RUNS_SUBDIR / name)
            for seed in a:
                assert np.array_equal(a[seed]["regret"], b[seed]["regret"])
                assert a[seed]["query"] == b[seed]["query"]

    def test_tampered_summary_detected(self, mini_out, tmp_path):
        out, spec, _ = mini_out
        tampered = tmp_path / "tampered"
        run_experiment(spec, tampered)
        summary = tampered / SUMMARY_FILE
        lines = summary.read_text(encoding="utf-8").splitlines()
        cells = lines[1].split(",")
        cells[5] = "99" if cells[5] != "99" else "98"  # rank column
        lines[1] = ",".join(cells)
        summary.write_text("\n".join(lines) + "\n", encoding="utf-8")
        problems = verify_outputs(tampered)
        assert problems
        assert any("rank" in p for p in problems)

    def test_workers_two_matches_serial(self, tmp_path):
        raw = _full_raw()
        raw["seeds"] = [0]
        raw["n_iters"] = 1
        spec = parse_config(raw)
        serial = tmp_path / "serial"
        parallel = tmp_path / "parallel"
        run_experiment(spec, serial, workers=1)
        run_experiment(spec, parallel, workers=2)
        for name in ("sphere_d2_ksos.csv", "sphere_d2_sobol.csv"):
            a = read_run_csv(serial / RUNS_SUBDIR / name)
            b = read_run_csv(parallel / RUNS_SUBDIR / name)
            assert np.array_equal(a[0]["regret"], b[0]["regret"])
        with pytest.raises(ConfigurationError):
            run_experiment(spec, tmp_path / "bad", workers=0)

    def test_verify_missing_manifest_is_an_error(self, tmp_path):
        with pytest.raises(InputError):
            verify_outputs(tmp_path)
