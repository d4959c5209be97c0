"""The discontinuous network: system, index partition and right-hand side.

Each coordinate runs through a limited integrator. While the state is positive
the integrator passes its input x~ = A^T u - A^T A x through; at zero only a
non-negative input is integrated; a negative state recovers at constant rate xi.
"""

from __future__ import annotations

from collections.abc import Iterable
from dataclasses import dataclass, field

import numpy as np
from numpy.typing import ArrayLike, NDArray

from discnn.errors import DimensionMismatchError
from discnn.events import NEG, PARTITION_SETS, PLUS, ZERO, SwitchEvent, label_name
from discnn.numerics import RealMatrix, RealVector, as_matrix, as_vector, gershgorin_bound, gram


@dataclass(frozen=True)
class DiscSystem:
    """System matrix, cached Gram matrix, recovery rate xi and constant input."""

    A: RealMatrix
    gramA: RealMatrix
    xi: float
    input: RealVector
    atb: RealVector = field(repr=False)  # A^T input, cached with the Gram matrix

    @classmethod
    def build(cls, A: ArrayLike, y: ArrayLike, xi: float = 1.0) -> DiscSystem:
        A = as_matrix(A, name="A")
        y = as_vector(y, name="input", length=A.shape[0])
        if not xi > 0:
            raise ValueError(f"xi must be positive, got {xi}")
        atb = A.T @ y
        atb.flags.writeable = False
        return cls(A=A, gramA=gram(A), xi=float(xi), input=y, atb=atb)

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def with_input(self, y: ArrayLike) -> DiscSystem:
        """Same network, new constant input; the Gram matrix is reused."""
        y = as_vector(y, name="input", length=self.A.shape[0])
        atb = self.A.T @ y
        atb.flags.writeable = False
        return DiscSystem(A=self.A, gramA=self.gramA, xi=self.xi, input=y, atb=atb)

    def integrator_input(self, x: RealVector) -> RealVector:
        return self.atb - self.gramA @ x

    def default_dt(self) -> float:
        return 1.0 / (2.0 * gershgorin_bound(self.gramA))


class IndexPartition:
    """The sets I+, I0 and I- stored as one label array (0 = plus, 1 = zero, 2 = neg)."""

    __slots__ = ("labels",)

    def __init__(self, labels: NDArray[np.int8]) -> None:
        self.labels = np.array(labels, dtype=np.int8, copy=True)
        self.labels.flags.writeable = False

    @classmethod
    def classify(cls, x: RealVector, xtilde: RealVector, zero_tol: float) -> IndexPartition:
        at_zero = np.abs(x) <= zero_tol
        labels = np.full(x.shape[0], PLUS, dtype=np.int8)
        labels[at_zero & (xtilde < 0.0)] = ZERO
        labels[x < -zero_tol] = NEG
        return cls(labels)

    @property
    def plus(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.labels == PLUS)

    @property
    def zero(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.labels == ZERO)

    @property
    def neg(self) -> NDArray[np.intp]:
        return np.flatnonzero(self.labels == NEG)

    def set_of(self, index: int) -> str:
        return label_name(int(self.labels[index]))

    def apply(self, events: Iterable[SwitchEvent]) -> IndexPartition:
        """Return the partition obtained by replaying switch events on this one."""
        labels = self.labels.copy()
        for ev in events:
            if PARTITION_SETS[labels[ev.index]] != ev.from_set:
                raise ValueError(
                    f"event moves index {ev.index} from {ev.from_set} but it is in "
                    f"{PARTITION_SETS[labels[ev.index]]}"
                )
            labels[ev.index] = PARTITION_SETS.index(ev.to_set)
        return IndexPartition(labels)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, IndexPartition):
            return NotImplemented
        return np.array_equal(self.labels, other.labels)

    def __hash__(self) -> int:
        return hash(self.labels.tobytes())

    def __repr__(self) -> str:
        return (
            f"IndexPartition(plus={self.plus.tolist()}, zero={self.zero.tolist()}, "
            f"neg={self.neg.tolist()})"
        )


@dataclass(frozen=True)
class SystemState:
    t: float
    x: RealVector
    xtilde: RealVector
    partition: IndexPartition

    @classmethod
    def at(
        cls, sys: DiscSystem, x: ArrayLike, t: float = 0.0, zero_tol: float = 1e-12
    ) -> SystemState:
        x = np.array(x, dtype=np.float64, copy=True)
        if x.shape != (sys.n,):
            raise DimensionMismatchError(f"state has shape {x.shape}, expected ({sys.n},)")
        xtilde = sys.integrator_input(x)
        x.flags.writeable = False
        xtilde.flags.writeable = False
        return cls(t=t, x=x, xtilde=xtilde, partition=IndexPartition.classify(x, xtilde, zero_tol))


def switch_events(
    before: IndexPartition, after: IndexPartition, times: float | NDArray[np.float64]
) -> list[SwitchEvent]:
    """Events for every coordinate whose label differs; ``times`` is scalar or per-coordinate."""
    changed = np.flatnonzero(before.labels != after.labels)
    ts = np.broadcast_to(np.asarray(times, dtype=np.float64), before.labels.shape)
    return [
        SwitchEvent(
            time=float(ts[i]),
            index=int(i),
            from_set=label_name(int(before.labels[i])),
            to_set=label_name(int(after.labels[i])),
        )
        for i in changed
    ]


def integrator_rhs(
    sys: DiscSystem, x: RealVector, zero_tol: float = 1e-12
) -> tuple[RealVector, IndexPartition]:
    """Time derivative of the state and the partition it induces."""
    if x.shape != (sys.n,):
        raise DimensionMismatchError(f"state has shape {x.shape}, expected ({sys.n},)")
    xtilde = sys.integrator_input(x)
    return _rhs(x, xtilde, sys.xi, zero_tol), IndexPartition.classify(x, xtilde, zero_tol)


def _rhs(x: RealVector, xtilde: RealVector, xi: float, zero_tol: float) -> RealVector:
    at_zero = np.abs(x) <= zero_tol
    xdot = np.where(at_zero, np.maximum(xtilde, 0.0), xtilde)
    return np.where(x < -zero_tol, xi, xdot)
