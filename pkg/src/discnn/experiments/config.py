"""Experiment configuration: presets, flat TOML files and CLI overrides.

Values are resolved in three layers. A preset supplies a complete study setup, a
config file overrides it key by key, and command-line flags override both. Keys use
the CLI flag names (``n``, ``m``, ``nn``, ``s``, ``snr_db``, ``seed``, ``out`` ...).
"""

from __future__ import annotations

import math
import tomllib
from dataclasses import asdict, dataclass, field
from typing import Any, Literal

from discnn.config import INTEGRATORS, IntegratorName, OracleOptions, SolverOptions
from discnn.datagen import DATA_KINDS, DataKind, DataModelSpec
from discnn.errors import ConfigError

Study = Literal["olfactory", "pruning", "sparse-comparison", "sparsity-sweep", "model-comparison"]
STUDIES: tuple[Study, ...] = (
    "olfactory",
    "pruning",
    "sparse-comparison",
    "sparsity-sweep",
    "model-comparison",
)
SQUARE_STUDIES: tuple[Study, ...] = ("olfactory", "pruning")

# Reconstructed sweep grid for the olfactory study.
SNR_GRID_DB = (0.0, 10.0, 20.0, 30.0, 40.0, 50.0, 60.0)
SPARSITY_GRID = (1, 3, 5, 10)
PRUNING_GRID = (0.0, 0.1, 0.2, 0.3, 0.4, 0.5, 0.6, 0.7, 0.8, 0.9)


@dataclass(frozen=True)
class ExperimentConfig:
    study: Study
    kinds: tuple[DataKind, ...] = ("rect",)
    M: int = 50
    N: int = 50
    n_instances: int = 200
    master_seed: int = 0
    snr_db: tuple[float, ...] = (40.0,)
    sparsities: tuple[int, ...] = (5,)
    m_values: tuple[int, ...] = ()  # empty means (M,)
    ratios: tuple[float, ...] = (0.0,)
    integrator: IntegratorName = "auto"
    kkt_tol: float = 1e-8
    max_time: float = 1e5
    xi: float = 1.0
    n_alphas: int = 50
    alpha_span: float = 1e-4
    threads: int = 1
    output_dir: str = "results"
    include_timings: bool = False
    preset: str | None = field(default=None, compare=False)

    def __post_init__(self) -> None:
        if self.study not in STUDIES:
            raise ConfigError(f"unknown study {self.study!r}; expected one of {STUDIES}")
        if not self.kinds or any(k not in DATA_KINDS for k in self.kinds):
            raise ConfigError(f"kinds must be a non-empty subset of {DATA_KINDS}, got {self.kinds}")
        if self.n_instances < 1:
            raise ConfigError("n_instances must be at least 1")
        if not self.snr_db or not self.sparsities or not self.ratios:
            raise ConfigError("sweep lists must be non-empty")
        if any(math.isnan(v) for v in self.snr_db):
            raise ConfigError("SNR values must be numbers (inf allowed)")
        if any(not 0.0 <= r <= 0.9 for r in self.ratios):
            raise ConfigError(f"pruning ratios must lie in [0, 0.9], got {self.ratios}")
        if any(not 1 <= s < self.N for s in self.sparsities):
            raise ConfigError(f"sparsities must lie in [1, N={self.N}), got {self.sparsities}")
        if any(m < 1 for m in self.matrix_rows):
            raise ConfigError(f"M values must be positive, got {self.matrix_rows}")
        if self.study in SQUARE_STUDIES:
            if self.M != self.N or (self.m_values and set(self.m_values) != {self.N}):
                raise ConfigError(f"the {self.study} study uses a square matrix; set M = N")
        if self.integrator not in INTEGRATORS:
            raise ConfigError(f"unknown integrator {self.integrator!r}")
        if self.kkt_tol <= 0 or self.max_time <= 0 or self.xi <= 0:
            raise ConfigError("kkt_tol, max_time and xi must be positive")
        if self.n_alphas < 2 or not 0 < self.alpha_span < 1:
            raise ConfigError("n_alphas must be >= 2 and alpha_span in (0, 1)")
        if self.threads < 1:
            raise ConfigError("threads must be at least 1")

    @property
    def matrix_rows(self) -> tuple[int, ...]:
        return self.m_values or (self.M,)

    def data_spec(self, kind: DataKind, M: int, s: int, snr_db: float) -> DataModelSpec:
        return DataModelSpec(kind=kind, M=M, N=self.N, s=s, input_snr_db=snr_db)

    def solver_options(self) -> SolverOptions:
        return SolverOptions(
            integrator=self.integrator, kkt_tol=self.kkt_tol, max_time=self.max_time
        )

    def oracle_options(self) -> OracleOptions:
        return OracleOptions(n_alphas=self.n_alphas, alpha_span=self.alpha_span)

    def to_toml_dict(self) -> dict[str, Any]:
        """Flat mapping in CLI key names, suitable for ``tomli_w``."""
        data = asdict(self)
        out: dict[str, Any] = {}
        for name, key in FIELD_TO_KEY.items():
            value = data[name]
            if value is None:
                continue
            out[key] = list(value) if isinstance(value, tuple) else value
        out["m"] = list(self.matrix_rows)
        return out


# ── Key mapping ──────────────────────────────────────────────────

KEY_TO_FIELD: dict[str, str] = {
    "study": "study",
    "preset": "preset",
    "kind": "kinds",
    "kinds": "kinds",
    "m": "m_values",
    "nn": "N",
    "n": "n_instances",
    "seed": "master_seed",
    "snr_db": "snr_db",
    "s": "sparsities",
    "ratios": "ratios",
    "integrator": "integrator",
    "kkt_tol": "kkt_tol",
    "max_time": "max_time",
    "xi": "xi",
    "n_alphas": "n_alphas",
    "alpha_span": "alpha_span",
    "threads": "threads",
    "out": "output_dir",
    "include_timings": "include_timings",
}

FIELD_TO_KEY: dict[str, str] = {
    name: key for key, name in KEY_TO_FIELD.items() if key != "kind"
}

_TUPLE_FIELDS = {"kinds": str, "snr_db": float, "sparsities": int, "m_values": int, "ratios": float}
_SCALAR_FIELDS = {
    "study": str,
    "preset": str,
    "N": int,
    "n_instances": int,
    "master_seed": int,
    "integrator": str,
    "kkt_tol": float,
    "max_time": float,
    "xi": float,
    "n_alphas": int,
    "alpha_span": float,
    "threads": int,
    "output_dir": str,
    "include_timings": bool,
}


def _coerce(name: str, value: Any) -> Any:
    try:
        if name in _TUPLE_FIELDS:
            cast = _TUPLE_FIELDS[name]
            items = value if isinstance(value, (list, tuple)) else [value]
            return tuple(cast(v) for v in items)
        cast = _SCALAR_FIELDS[name]
        if cast is bool and not isinstance(value, bool):
            raise TypeError(f"expected true/false, got {value!r}")
        if cast is int and isinstance(value, float) and not value.is_integer():
            raise TypeError(f"expected an integer, got {value!r}")
        return cast(value)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad value for {name}: {exc}") from exc


def normalize_keys(values: dict[str, Any]) -> dict[str, Any]:
    """Map CLI-style keys (dashes or underscores) to typed dataclass fields."""
    out: dict[str, Any] = {}
    for raw_key, value in values.items():
        key = raw_key.replace("-", "_")
        if key not in KEY_TO_FIELD:
            raise ConfigError(f"unknown configuration key {raw_key!r}")
        name = KEY_TO_FIELD[key]
        out[name] = _coerce(name, value)
    return out


def load_config_file(path: str) -> dict[str, Any]:
    try:
        with open(path, "rb") as f:
            data = tomllib.load(f)
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise ConfigError(f"invalid TOML in {path}: {exc}") from exc
    nested = [k for k, v in data.items() if isinstance(v, dict)]
    if nested:
        raise ConfigError(f"config file must be flat key = value pairs; found tables {nested}")
    return normalize_keys(data)


# ── Presets ──────────────────────────────────────────────────────


def _square(n: int) -> dict[str, Any]:
    return {"M": n, "N": n}


PRESETS: dict[str, dict[Study, dict[str, Any]]] = {
    "paper-desk": {
        "olfactory": {
            **_square(50),
            "n_instances": 200,
            "kinds": DATA_KINDS,
            "snr_db": SNR_GRID_DB,
            "sparsities": SPARSITY_GRID,
        },
        "pruning": {
            **_square(50),
            "n_instances": 200,
            "kinds": DATA_KINDS,
            "snr_db": (40.0,),
            "sparsities": (1, 3),
            "ratios": PRUNING_GRID,
        },
        "sparse-comparison": {
            "M": 50,
            "N": 100,
            "m_values": (25, 50, 75),
            "n_instances": 200,
            "snr_db": (40.0,),
            "sparsities": (5,),
        },
        "sparsity-sweep": {
            "M": 50,
            "N": 100,
            "n_instances": 200,
            "snr_db": (10.0, 40.0),
            "sparsities": (1, 3, 5, 10, 15),
        },
        "model-comparison": {
            "M": 50,
            "N": 100,
            "m_values": (25, 50, 75),
            "n_instances": 200,
            "kinds": DATA_KINDS,
            "snr_db": (40.0,),
            "sparsities": (5,),
        },
    },
    "paper": {
        "olfactory": {
            **_square(200),
            "n_instances": 5000,
            "kinds": DATA_KINDS,
            "snr_db": SNR_GRID_DB,
            "sparsities": SPARSITY_GRID,
        },
        "pruning": {
            **_square(200),
            "n_instances": 5000,
            "kinds": DATA_KINDS,
            "snr_db": (40.0,),
            "sparsities": (1, 3),
            "ratios": PRUNING_GRID,
        },
        "sparse-comparison": {
            "M": 50,
            "N": 200,
            "m_values": (25, 50, 75, 100, 125, 150),
            "n_instances": 5000,
            "snr_db": (40.0,),
            "sparsities": (5,),
        },
        "sparsity-sweep": {
            "M": 50,
            "N": 200,
            "n_instances": 5000,
            "snr_db": (10.0, 40.0),
            "sparsities": (1, 3, 5, 10, 15, 20),
        },
        "model-comparison": {
            "M": 50,
            "N": 200,
            "m_values": (25, 50, 75, 100, 125, 150),
            "n_instances": 5000,
            "kinds": DATA_KINDS,
            "snr_db": (40.0,),
            "sparsities": (5,),
        },
    },
}


def resolve_config(
    study: str | None,
    preset: str | None = None,
    file_values: dict[str, Any] | None = None,
    cli_values: dict[str, Any] | None = None,
) -> ExperimentConfig:
    """Merge preset < file < CLI into a validated :class:`ExperimentConfig`.

    ``file_values`` and ``cli_values`` use dataclass field names (see
    :func:`normalize_keys`). Square studies always take M = N.
    """
    file_values = dict(file_values or {})
    cli_values = {k: v for k, v in (cli_values or {}).items() if v is not None}

    study = cli_values.pop("study", None) or study or file_values.get("study")
    preset = cli_values.pop("preset", None) or preset or file_values.get("preset")
    file_values.pop("study", None)
    file_values.pop("preset", None)
    if study is None:
        raise ConfigError("no study given")
    if study not in STUDIES:
        raise ConfigError(f"unknown study {study!r}; expected one of {STUDIES}")

    merged: dict[str, Any] = {}
    if preset is not None:
        if preset not in PRESETS:
            raise ConfigError(f"unknown preset {preset!r}; expected one of {sorted(PRESETS)}")
        merged.update(PRESETS[preset][study])  # type: ignore[index]
    merged.update(file_values)
    merged.update(cli_values)

    if study in SQUARE_STUDIES:
        n = merged.get("N", 50)
        merged["M"] = n
        rows = merged.pop("m_values", ())
        if rows and set(rows) != {n}:
            raise ConfigError(f"the {study} study uses a square matrix; M must equal N={n}")

    return ExperimentConfig(study=study, preset=preset, **merged)  # type: ignore[arg-type]
