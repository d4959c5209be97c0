"""Seeded instances of the two non-negative data models.

Both models draw the ground truth x0 with s non-zeros ~ Uniform[0, sqrt(12)] on a
uniformly drawn support, a matrix with i.i.d. entries (Uniform[0, sqrt(12)] for
``rect``, Normal(5, 1) for ``gaussian``) normalized to unit column norm, and additive
noise calibrated to a target input SNR.

Every instance is generated from its own Philox stream keyed by
``(master_seed, index)``, so instances can be produced in any order or in parallel
and still come out bit-identical.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from discnn.numerics import RealMatrix, RealVector, normalize_columns

logger = logging.getLogger(__name__)

DataKind = Literal["rect", "gaussian"]
DATA_KINDS: tuple[DataKind, ...] = ("rect", "gaussian")

SQRT12 = math.sqrt(12.0)

# Non-zero entries of x0: Uniform[0, sqrt(12)].
MU_X = math.sqrt(3.0)
VAR_X = 1.0

# Pre-normalization matrix entry moments per model.
MATRIX_MOMENTS: dict[str, tuple[float, float]] = {
    "rect": (math.sqrt(3.0), 1.0),
    "gaussian": (5.0, 1.0),
}


@dataclass(frozen=True)
class DataModelSpec:
    kind: DataKind
    M: int
    N: int
    s: int
    input_snr_db: float = 40.0  # math.inf means noiseless

    def __post_init__(self) -> None:
        if self.kind not in DATA_KINDS:
            raise ValueError(f"unknown data model {self.kind!r}; expected one of {DATA_KINDS}")
        if self.M < 1 or self.N < 1:
            raise ValueError(f"M and N must be positive, got M={self.M}, N={self.N}")
        if not 1 <= self.s <= self.N:
            raise ValueError(f"sparsity s={self.s} must lie in [1, N={self.N}]")
        if math.isnan(self.input_snr_db) or self.input_snr_db == -math.inf:
            raise ValueError(f"input SNR must be a number or +inf, got {self.input_snr_db}")

    @property
    def mu_A(self) -> float:
        return MATRIX_MOMENTS[self.kind][0]

    @property
    def var_A(self) -> float:
        return MATRIX_MOMENTS[self.kind][1]

    @property
    def noiseless(self) -> bool:
        return self.input_snr_db == math.inf


@dataclass(frozen=True)
class NoiseLevel:
    var: float
    gamma: float | None  # half-width of the uniform noise (rect model only)

    @property
    def std(self) -> float:
        return math.sqrt(self.var)


@dataclass(frozen=True)
class Instance:
    A: RealMatrix
    x0: RealVector
    support: np.ndarray
    y0: RealVector
    eta: RealVector
    y: RealVector
    seed: int
    index: int
    spec: DataModelSpec


def _signal_factor(spec: DataModelSpec) -> float:
    mu2, var = spec.mu_A**2, spec.var_A
    return VAR_X + MU_X**2 * (spec.s * mu2 + var) / (mu2 + var)


def input_snr_theoretical(spec: DataModelSpec, noise_var: float) -> float:
    """Expected y0^T y0 over expected eta^T eta (linear, not dB)."""
    if not noise_var > 0:
        raise ValueError(f"noise variance must be positive, got {noise_var}")
    return spec.s / (spec.M * noise_var) * _signal_factor(spec)


def noise_var_for_snr(spec: DataModelSpec) -> NoiseLevel:
    """Noise variance hitting ``spec.input_snr_db``; ``var`` is 0 for a noiseless spec."""
    if spec.noiseless:
        return NoiseLevel(var=0.0, gamma=0.0 if spec.kind == "rect" else None)
    snr = 10.0 ** (spec.input_snr_db / 10.0)
    var = spec.s * _signal_factor(spec) / (spec.M * snr)
    gamma = math.sqrt(3.0 * var) if spec.kind == "rect" else None
    return NoiseLevel(var=var, gamma=gamma)


def instance_rng(seed: int, index: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, index])))


def generate(spec: DataModelSpec, seed: int, index: int = 0) -> Instance:
    """Draw one instance: support, x0, matrix, noise, in that order."""
    rng = instance_rng(seed, index)
    support = np.sort(rng.choice(spec.N, size=spec.s, replace=False))
    x0 = np.zeros(spec.N)
    x0[support] = SQRT12 * rng.random(spec.s)

    if spec.kind == "rect":
        raw = SQRT12 * rng.random((spec.M, spec.N))
    else:
        raw = rng.normal(spec.mu_A, math.sqrt(spec.var_A), size=(spec.M, spec.N))
        negatives = int(np.count_nonzero(raw < 0.0))
        if negatives:
            logger.warning(
                "gaussian matrix (seed=%d, index=%d) has %d negative entries; kept as drawn",
                seed,
                index,
                negatives,
            )
    A = normalize_columns(raw)

    noise = noise_var_for_snr(spec)
    if spec.noiseless:
        eta = np.zeros(spec.M)
    elif spec.kind == "rect":
        assert noise.gamma is not None
        eta = rng.uniform(-noise.gamma, noise.gamma, size=spec.M)
    else:
        eta = rng.normal(0.0, noise.std, size=spec.M)

    y0 = A @ x0
    for arr in (x0, support, y0, eta):
        arr.flags.writeable = False
    y = y0 + eta
    y.flags.writeable = False
    return Instance(
        A=A, x0=x0, support=support, y0=y0, eta=eta, y=y, seed=seed, index=index, spec=spec
    )


def prune(A: RealMatrix, ratio: float) -> RealMatrix:
    """Zero the floor(ratio * M * N) smallest entries; ties go to the lower flat index."""
    if not 0.0 <= ratio <= 0.9:
        raise ValueError(f"pruning ratio must lie in [0, 0.9], got {ratio}")
    flat = np.array(A, dtype=np.float64).ravel()
    k = int(math.floor(ratio * flat.size + 1e-9))
    if k:
        flat[np.argsort(flat, kind="stable")[:k]] = 0.0
    out = flat.reshape(A.shape)
    out.flags.writeable = False
    return out


# ── Serialization ────────────────────────────────────────────────


def save_instance(inst: Instance, path: str) -> None:
    """Write an instance as an ``.npz`` archive (schema in the README)."""
    np.savez(
        path,
        A=inst.A,
        x0=inst.x0,
        support=inst.support,
        y0=inst.y0,
        eta=inst.eta,
        y=inst.y,
        seed=np.int64(inst.seed),
        index=np.int64(inst.index),
        kind=np.str_(inst.spec.kind),
        M=np.int64(inst.spec.M),
        N=np.int64(inst.spec.N),
        s=np.int64(inst.spec.s),
        input_snr_db=np.float64(inst.spec.input_snr_db),
    )


def load_instance(path: str) -> Instance:
    with np.load(path, allow_pickle=False) as data:
        spec = DataModelSpec(
            kind=str(data["kind"]),  # type: ignore[arg-type]
            M=int(data["M"]),
            N=int(data["N"]),
            s=int(data["s"]),
            input_snr_db=float(data["input_snr_db"]),
        )
        arrays = {k: np.array(data[k]) for k in ("A", "x0", "support", "y0", "eta", "y")}
        seed, index = int(data["seed"]), int(data["index"])
    for arr in arrays.values():
        arr.flags.writeable = False
    return Instance(**arrays, seed=seed, index=index, spec=spec)
