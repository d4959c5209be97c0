"""Tests for experiment configuration, the instance pool and the Monte-Carlo studies."""

from __future__ import annotations

import math

import pytest
import tomli_w

from discnn.csvio import format_cell, read_csv
from discnn.errors import ConfigError, DiscnnError, StudyAbortedError
from discnn.experiments import studies
from discnn.experiments.config import (
    PRESETS,
    STUDIES,
    ExperimentConfig,
    load_config_file,
    normalize_keys,
    resolve_config,
)
from discnn.experiments.output import write_study
from discnn.experiments.pool import InstancePool
from discnn.experiments.records import (
    AGGREGATE_COLUMNS,
    INSTANCE_COLUMNS,
    McRecord,
    aggregate,
)
from discnn.experiments.studies import run_study


def tiny(study: str = "olfactory", **overrides) -> ExperimentConfig:
    """A study small enough to run in a unit test."""
    values = {
        "N": 8,
        "n_instances": 3,
        "snr_db": (40.0,),
        "sparsities": (1,),
        "max_time": 1e4,
        "n_alphas": 5,
        "master_seed": 5,
    }
    if study not in ("olfactory", "pruning"):
        values.update(N=12, m_values=(6,), sparsities=(2,), max_time=50.0)
    values.update(overrides)
    return resolve_config(study, cli_values=values)


# ── Configuration ─────────────────────────────────────────────


class TestResolveConfig:
    def test_desk_preset(self):
        cfg = resolve_config("olfactory", "paper-desk")
        assert (cfg.M, cfg.N, cfg.n_instances) == (50, 50, 200)
        assert cfg.kinds == ("rect", "gaussian")
        assert cfg.snr_db == (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
        assert cfg.sparsities == (1, 3, 5, 10)

    def test_paper_preset(self):
        cfg = resolve_config("sparse-comparison", "paper")
        assert (cfg.N, cfg.n_instances) == (200, 5000)

    def test_every_preset_resolves(self):
        for preset in PRESETS:
            for study in STUDIES:
                assert resolve_config(study, preset).study == study

    def test_precedence(self):
        cfg = resolve_config(
            "olfactory",
            "paper-desk",
            file_values={"n_instances": 20, "master_seed": 3},
            cli_values={"n_instances": 7, "master_seed": None},
        )
        assert cfg.n_instances == 7
        assert cfg.master_seed == 3

    def test_study_from_file(self):
        cfg = resolve_config(None, file_values={"study": "pruning", "ratios": (0.0, 0.5)})
        assert cfg.study == "pruning"
        assert cfg.ratios == (0.0, 0.5)

    def test_square_study_takes_m_from_n(self):
        cfg = resolve_config("olfactory", cli_values={"N": 20})
        assert cfg.M == 20

    def test_square_study_rejects_other_m(self):
        with pytest.raises(ConfigError, match="square"):
            resolve_config("olfactory", cli_values={"N": 20, "m_values": (10,)})

    def test_missing_study(self):
        with pytest.raises(ConfigError, match="no study"):
            resolve_config(None)

    def test_unknown_preset(self):
        with pytest.raises(ConfigError, match="preset"):
            resolve_config("olfactory", "huge")

    def test_validation(self):
        with pytest.raises(ConfigError):
            resolve_config("olfactory", cli_values={"n_instances": 0})
        with pytest.raises(ConfigError):
            resolve_config("pruning", cli_values={"ratios": (0.95,)})
        with pytest.raises(ConfigError):
            resolve_config("olfactory", cli_values={"N": 5, "sparsities": (5,)})


class TestConfigFile:
    def test_flat_toml(self, tmp_path):
        path = tmp_path / "study.toml"
        path.write_text('study = "olfactory"\nsnr-db = [10, 40]\nn = 4\nout = "here"\n')
        values = load_config_file(str(path))
        assert values == {
            "study": "olfactory",
            "snr_db": (10.0, 40.0),
            "n_instances": 4,
            "output_dir": "here",
        }

    def test_unknown_key(self, tmp_path):
        path = tmp_path / "study.toml"
        path.write_text("colour = 1\n")
        with pytest.raises(ConfigError, match="colour"):
            load_config_file(str(path))

    def test_tables_rejected(self, tmp_path):
        path = tmp_path / "study.toml"
        path.write_text("[solver]\nxi = 1.0\n")
        with pytest.raises(ConfigError, match="flat"):
            load_config_file(str(path))

    def test_invalid_toml(self, tmp_path):
        path = tmp_path / "study.toml"
        path.write_text("study = \n")
        with pytest.raises(ConfigError, match="invalid TOML"):
            load_config_file(str(path))

    def test_missing_file(self, tmp_path):
        with pytest.raises(ConfigError):
            load_config_file(str(tmp_path / "absent.toml"))

    def test_bad_value(self):
        with pytest.raises(ConfigError, match="n_instances"):
            normalize_keys({"n": 2.5})

    def test_round_trip_through_toml(self, tmp_path):
        cfg = resolve_config("sparse-comparison", "paper-desk", cli_values={"master_seed": 9})
        path = tmp_path / "cfg.toml"
        path.write_bytes(tomli_w.dumps(cfg.to_toml_dict()).encode())
        again = resolve_config(None, file_values=load_config_file(str(path)))
        assert again == cfg


# ── Instance pool ─────────────────────────────────────────────


class TestInstancePool:
    @pytest.mark.asyncio
    async def test_map_preserves_order(self):
        pool = InstancePool(threads=4)
        assert await pool.map(lambda v: v * v, list(range(20))) == [v * v for v in range(20)]

    def test_run_from_sync_code(self):
        assert InstancePool(2).run(str, [1, 2, 3]) == ["1", "2", "3"]

    def test_rejects_zero_threads(self):
        with pytest.raises(ValueError):
            InstancePool(0)


# ── Studies ───────────────────────────────────────────────────


class TestOlfactory:
    def test_high_snr_point_converges(self):
        result = run_study(tiny(snr_db=(60.0,)))
        assert len(result.records) == 3
        (row,) = result.aggregates
        assert row.failures == 0
        assert row.converged == 3
        assert math.isfinite(row.rel_err_mean)
        assert row.kkt_max <= 1e-8

    def test_noiseless_point_survives_toml(self, tmp_path):
        cfg = tiny(snr_db=(math.inf, 40.0))
        path = tmp_path / "cfg.toml"
        path.write_bytes(tomli_w.dumps(cfg.to_toml_dict()).encode())
        assert load_config_file(str(path))["snr_db"] == (math.inf, 40.0)

    def test_records_carry_sweep_point(self):
        result = run_study(tiny(kinds=("rect", "gaussian"), sparsities=(1, 2)))
        assert len(result.points) == 4
        assert len(result.aggregates) == 4
        assert [r.instance for r in result.records[:3]] == [0, 1, 2]
        assert all(r.solver == "dynamical" for r in result.records)

    def test_converged_rows_meet_tolerance(self):
        result = run_study(tiny())
        for rec in result.records:
            assert rec.failed or not rec.converged or rec.kkt_residual <= 1e-8


class TestPruning:
    def test_zero_ratio_reproduces_olfactory(self):
        olf = run_study(tiny())
        pr = run_study(tiny("pruning", ratios=(0.0, 0.3)))
        unpruned = [r for r in pr.records if r.point.ratio == 0.0]
        assert [r.rel_err_support for r in unpruned] == [r.rel_err_support for r in olf.records]
        assert {r.point.ratio for r in pr.records} == {0.0, 0.3}


class TestComparison:
    def test_two_solvers_per_instance(self):
        result = run_study(tiny("sparse-comparison"))
        assert [r.solver for r in result.records[:2]] == ["dynamical", "nnbpdn"]
        assert len(result.records) == 2 * 3
        nnbpdn = [r for r in result.records if r.solver == "nnbpdn"]
        assert all(math.isfinite(r.alpha) and r.alpha > 0 for r in nnbpdn)
        assert [a.solver for a in result.aggregates] == ["dynamical", "nnbpdn"]

    @pytest.mark.parametrize("study", ["sparsity-sweep", "model-comparison"])
    def test_other_comparison_studies(self, study):
        result = run_study(tiny(study, kinds=("rect", "gaussian")))
        assert {r.point.kind for r in result.records} == {"rect", "gaussian"}


class TestFailures:
    def test_abort_above_threshold(self, monkeypatch):
        def boom(cfg, job):
            raise DiscnnError("synthetic failure")

        monkeypatch.setattr(studies, "_olfactory_job", boom)
        with pytest.raises(StudyAbortedError, match="3 of 3"):
            run_study(tiny())

    def test_isolated_failure_is_recorded(self, monkeypatch):
        real = studies._olfactory_job

        def flaky(cfg, job):
            if job[1] == 0:
                raise ArithmeticError("synthetic failure")
            return real(cfg, job)

        monkeypatch.setattr(studies, "_olfactory_job", flaky)
        result = run_study(tiny(n_instances=12))
        failed = [r for r in result.records if r.failed]
        assert len(failed) == 1
        assert "synthetic failure" in failed[0].error
        assert result.aggregates[0].failures == 1
        assert result.aggregates[0].n == 11


# ── Recovery trends ───────────────────────────────────────────


def rows_by(result, **match) -> list:
    return [
        row
        for row in result.aggregates
        if all(getattr(row, key) == value for key, value in match.items())
    ]


def snr_exceeds_input(row, input_snr_db: float) -> bool:
    # Rows where every instance separated its support exactly have no finite mean.
    if row.output_snr_excluded == row.n:
        return True
    return row.output_snr_mean > 10.0 ** (input_snr_db / 10.0)


class TestRecoveryTrends:
    def test_olfactory_square_recovery(self):
        cfg = resolve_config(
            "olfactory",
            cli_values={
                "N": 50,
                "n_instances": 20,
                "kinds": ("rect", "gaussian"),
                "sparsities": (1, 3),
                "snr_db": (40.0, 60.0),
            },
        )
        result = run_study(cfg)

        for snr in (40.0, 60.0):
            (row,) = rows_by(result, kind="rect", s=1, snr_db=snr)
            assert row.rel_err_mean < 0.1
        for s in (1, 3):
            (row,) = rows_by(result, kind="rect", s=s, snr_db=40.0)
            assert snr_exceeds_input(row, 40.0)
        (rect,) = rows_by(result, kind="rect", s=3, snr_db=40.0)
        (gauss,) = rows_by(result, kind="gaussian", s=3, snr_db=40.0)
        assert gauss.rel_err_mean > rect.rel_err_mean

    def test_pruning_degrades_gracefully(self):
        cfg = resolve_config(
            "pruning",
            cli_values={
                "N": 50,
                "n_instances": 20,
                "sparsities": (1,),
                "snr_db": (40.0,),
                "ratios": (0.0, 0.25, 0.5),
            },
        )
        result = run_study(cfg)
        rows = sorted(rows_by(result, kind="rect"), key=lambda r: r.ratio)
        assert [r.ratio for r in rows] == [0.0, 0.25, 0.5]

        assert snr_exceeds_input(rows[-1], 40.0)
        finite = [r for r in rows if math.isfinite(r.output_snr_mean)]
        for a, b in zip(finite, finite[1:]):
            slack = 2.0 * math.hypot(a.output_snr_stderr, b.output_snr_stderr)
            assert b.output_snr_mean <= a.output_snr_mean + slack

    def test_nnls_keeps_up_with_best_nnbpdn(self):
        cfg = resolve_config(
            "sparse-comparison",
            cli_values={
                "M": 50,
                "N": 100,
                "m_values": (25, 50, 75),
                "n_instances": 10,
                "sparsities": (5,),
                "snr_db": (40.0,),
                "n_alphas": 20,
            },
        )
        result = run_study(cfg)
        for M in (25, 50, 75):
            (nnls,) = rows_by(result, M=M, solver="dynamical")
            (bpdn,) = rows_by(result, M=M, solver="nnbpdn")
            assert 0.1 <= nnls.mse_mean / bpdn.mse_mean <= 10.0
            assert bpdn.recovery_fraction >= nnls.recovery_fraction - 0.05


# ── Output ────────────────────────────────────────────────────


class TestOutput:
    def test_files_and_headers(self, tmp_path):
        result = run_study(tiny())
        paths = write_study(result, str(tmp_path))
        rows = read_csv(paths.instances)
        assert list(rows[0]) == INSTANCE_COLUMNS
        assert list(read_csv(paths.aggregate)[0]) == AGGREGATE_COLUMNS
        assert load_config_file(paths.config)["study"] == "olfactory"

    def test_timings_are_opt_in(self, tmp_path):
        result = run_study(tiny(include_timings=True))
        paths = write_study(result, str(tmp_path))
        assert list(read_csv(paths.instances)[0])[-1] == "wall_time"

    def test_deterministic_across_thread_counts(self, tmp_path):
        one = write_study(run_study(tiny("sparse-comparison", threads=1)), str(tmp_path / "a"))
        three = write_study(run_study(tiny("sparse-comparison", threads=3)), str(tmp_path / "b"))
        with open(one.instances, "rb") as a, open(three.instances, "rb") as b:
            assert a.read() == b.read()
        with open(one.aggregate, "rb") as a, open(three.aggregate, "rb") as b:
            assert a.read() == b.read()

    def test_aggregates_recomputed_from_csv(self, tmp_path):
        result = run_study(tiny(sparsities=(1, 2)))
        paths = write_study(result, str(tmp_path))
        records = [McRecord.from_row(row) for row in read_csv(paths.instances)]
        recomputed = aggregate(records, result.points)
        assert len(recomputed) == len(result.aggregates)
        for ours, theirs in zip(recomputed, result.aggregates):
            for col in AGGREGATE_COLUMNS:
                assert format_cell(getattr(ours, col)) == format_cell(getattr(theirs, col))
