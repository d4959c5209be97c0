"""Tests for solver options and environment settings."""

import pytest

from discnn.config import OracleOptions, RuntimeSettings, SolverOptions
from discnn.errors import ConfigError


def test_solver_defaults():
    opts = SolverOptions()
    assert opts.integrator == "euler"
    assert opts.kkt_tol == 1e-8
    assert opts.max_time == 1e3
    assert opts.dt is None


@pytest.mark.parametrize(
    "kwargs",
    [
        {"integrator": "rk4"},
        {"kkt_tol": 0.0},
        {"max_time": -1.0},
        {"zero_tol": -1e-9},
        {"dt": 0.0},
        {"check_every": 0},
        {"sample_every": 0},
    ],
)
def test_solver_options_rejected(kwargs):
    with pytest.raises(ValueError):
        SolverOptions(**kwargs)


def test_oracle_defaults():
    opts = OracleOptions()
    assert opts.n_alphas == 50
    assert opts.alpha_span == 1e-4


def test_runtime_defaults(monkeypatch):
    for name in ("DISCNN_THREADS", "DISCNN_LOG_LEVEL", "DISCNN_OUTPUT_DIR"):
        monkeypatch.delenv(name, raising=False)
    settings = RuntimeSettings.from_env()
    assert settings == RuntimeSettings(threads=1, log_level="INFO", output_dir="results")


def test_runtime_from_env(monkeypatch):
    monkeypatch.setenv("DISCNN_THREADS", "6")
    monkeypatch.setenv("DISCNN_LOG_LEVEL", "debug")
    monkeypatch.setenv("DISCNN_OUTPUT_DIR", "/tmp/out")

    settings = RuntimeSettings.from_env()
    assert settings.threads == 6
    assert settings.log_level == "DEBUG"
    assert settings.output_dir == "/tmp/out"


def test_zero_threads_means_one(monkeypatch):
    monkeypatch.setenv("DISCNN_THREADS", "0")
    assert RuntimeSettings.from_env().threads == 1


def test_non_integer_threads_is_config_error(monkeypatch):
    monkeypatch.setenv("DISCNN_THREADS", "abc")
    with pytest.raises(ConfigError, match="DISCNN_THREADS"):
        RuntimeSettings.from_env()
