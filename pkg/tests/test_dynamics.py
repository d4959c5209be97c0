"""Tests for the network right-hand side, projected Euler and the solve driver."""

from __future__ import annotations

import logging

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from discnn.config import SolverOptions
from discnn.csvio import read_csv
from discnn.datagen import DataModelSpec, generate
from discnn.dynamics.integrators import EulerIntegrator, step_projected_euler
from discnn.dynamics.solve import count_switches, lyapunov_value, solve
from discnn.dynamics.system import DiscSystem, IndexPartition, SystemState, integrator_rhs
from discnn.errors import DimensionMismatchError
from discnn.events import NEG, PLUS, ZERO, SwitchEvent
from discnn.solvers.nnls import nnls_active_set


def scalar(y: float, xi: float = 1.0) -> DiscSystem:
    """A = [1]: the integrator input is y - x."""
    return DiscSystem.build([[1.0]], [y], xi=xi)


def small_instance(seed: int, M: int = 20, N: int = 5, s: int = 2):
    return generate(DataModelSpec("rect", M, N, s, 40.0), seed, 0)


# ── Right-hand side ───────────────────────────────────────────


class TestRhs:
    def test_positive_state_passes_input(self):
        xdot, part = integrator_rhs(scalar(-1.0), np.array([2.0]))
        assert xdot[0] == -3.0
        assert part.set_of(0) == "plus"

    def test_zero_state_drops_negative_input(self):
        xdot, part = integrator_rhs(scalar(-3.0), np.array([0.0]))
        assert xdot[0] == 0.0
        assert part.set_of(0) == "zero"

    def test_zero_state_keeps_positive_input(self):
        xdot, part = integrator_rhs(scalar(2.0), np.array([0.0]))
        assert xdot[0] == 2.0
        assert part.set_of(0) == "plus"

    def test_negative_state_recovers_at_xi(self):
        xdot, part = integrator_rhs(scalar(-50.0, xi=1.0), np.array([-0.5]))
        assert xdot[0] == 1.0
        assert part.set_of(0) == "neg"

    def test_recovery_rate_follows_xi(self):
        xdot, _ = integrator_rhs(scalar(0.0, xi=2.5), np.array([-0.5]))
        assert xdot[0] == 2.5

    def test_shape_checked(self):
        with pytest.raises(DimensionMismatchError):
            integrator_rhs(scalar(1.0), np.array([1.0, 2.0]))


class TestSystem:
    def test_rejects_non_positive_xi(self):
        with pytest.raises(ValueError):
            DiscSystem.build(np.eye(2), [1.0, 1.0], xi=0.0)

    def test_with_input_reuses_gram(self):
        sys = DiscSystem.build(np.eye(2), [1.0, 1.0])
        other = sys.with_input([2.0, -1.0])
        assert other.gramA is sys.gramA
        np.testing.assert_array_equal(other.atb, [2.0, -1.0])

    def test_default_dt(self):
        sys = DiscSystem.build(np.eye(3), np.ones(3))
        assert sys.default_dt() == 0.5


class TestPartition:
    def test_classify(self):
        part = IndexPartition.classify(
            np.array([1.0, 0.0, 0.0, -2.0]), np.array([-1.0, -1.0, 1.0, 5.0]), 1e-12
        )
        assert part.plus.tolist() == [0, 2]
        assert part.zero.tolist() == [1]
        assert part.neg.tolist() == [3]

    def test_labels_are_copied(self):
        labels = np.array([PLUS, ZERO, NEG], dtype=np.int8)
        part = IndexPartition(labels)
        labels[0] = NEG
        assert part.set_of(0) == "plus"

    def test_apply_replays_events(self):
        part = IndexPartition(np.array([PLUS, ZERO], dtype=np.int8))
        moved = part.apply([SwitchEvent(0.5, 0, "plus", "zero")])
        assert moved == IndexPartition(np.array([ZERO, ZERO], dtype=np.int8))

    def test_apply_rejects_wrong_origin(self):
        part = IndexPartition(np.array([PLUS], dtype=np.int8))
        with pytest.raises(ValueError, match="index 0"):
            part.apply([SwitchEvent(0.5, 0, "neg", "plus")])


def test_switch_event_must_change_set():
    with pytest.raises(ValueError):
        SwitchEvent(0.0, 0, "plus", "plus")


# ── Projected Euler ───────────────────────────────────────────


class TestProjectedEuler:
    def test_clamps_at_crossing(self):
        sys = scalar(-9.0)  # input -10 at x = 1
        state = SystemState.at(sys, [1.0])
        new, events = step_projected_euler(sys, state, 0.2)
        assert new.x[0] == 0.0
        assert new.t == pytest.approx(0.2)
        assert len(events) == 1
        assert events[0].from_set == "plus"
        assert events[0].to_set == "zero"
        assert events[0].time == pytest.approx(0.1)

    def test_constant_rate_recovery(self):
        sys = scalar(1.0)
        new, events = step_projected_euler(sys, SystemState.at(sys, [-1.0]), 0.25)
        assert new.x[0] == pytest.approx(-0.75)
        assert events == []

    def test_equilibrium_is_fixed(self):
        sys = DiscSystem.build(np.eye(2), [1.0, -1.0])
        state = SystemState.at(sys, [1.0, 0.0])
        new, events = step_projected_euler(sys, state, 0.3)
        np.testing.assert_allclose(new.x, [1.0, 0.0], atol=1e-12)
        assert events == []

    def test_rejects_non_positive_dt(self):
        sys = scalar(1.0)
        with pytest.raises(ValueError):
            step_projected_euler(sys, SystemState.at(sys, [0.0]), 0.0)

    def test_negative_start_reaches_zero_at_one(self):
        sys = scalar(1.0)
        dt = 0.01
        integrator = EulerIntegrator(dt=dt)
        _, events = integrator.advance(sys, SystemState.at(sys, [-1.0]), 2.0)
        first = events[0]
        assert first.from_set == "neg"
        assert abs(first.time - 1.0) <= dt

    @settings(max_examples=50, deadline=None)
    @given(
        A=arrays(np.float64, (3, 3), elements=st.floats(-2.0, 2.0, allow_subnormal=False)),
        y=arrays(np.float64, 3, elements=st.floats(-2.0, 2.0, allow_subnormal=False)),
        x=arrays(np.float64, 3, elements=st.floats(-1.0, 1.0, allow_subnormal=False)),
    )
    def test_events_replay_to_new_partition(self, A, y, x):
        sys = DiscSystem.build(A, y)
        state = SystemState.at(sys, x)
        new, events = step_projected_euler(sys, state, 0.05)
        assert state.partition.apply(events) == new.partition
        assert all(state.t <= ev.time <= new.t for ev in events)

    @settings(max_examples=50, deadline=None)
    @given(
        A=arrays(np.float64, (4, 3), elements=st.floats(-2.0, 2.0, allow_subnormal=False)),
        x=arrays(np.float64, 3, elements=st.floats(0.0, 1.0, allow_subnormal=False)),
    )
    def test_non_negative_states_stay_non_negative(self, A, x):
        sys = DiscSystem.build(A, np.ones(4))
        new, _ = step_projected_euler(sys, SystemState.at(sys, x), 0.1)
        assert np.all(new.x >= 0.0)


# ── Solve driver ──────────────────────────────────────────────


class TestSolve:
    def test_identity_example(self):
        sys = DiscSystem.build(np.eye(2), [1.0, -1.0])
        result, _ = solve(sys, np.zeros(2))
        assert result.converged
        assert result.method == "euler"
        np.testing.assert_allclose(result.x_eq, [1.0, 0.0], atol=1e-7)
        np.testing.assert_allclose(result.lambda_eq, [0.0, 1.0], atol=1e-7)
        assert result.kkt_residual <= 1e-8

    def test_consistent_system_recovers_truth(self):
        rng = np.random.default_rng(3)
        A = rng.random((12, 4)) + 0.1
        x0 = np.array([0.5, 0.0, 1.5, 0.2])
        sys = DiscSystem.build(A, A @ x0)
        result, _ = solve(sys, np.zeros(4), SolverOptions(kkt_tol=1e-10, max_time=1e4))
        assert result.converged
        np.testing.assert_allclose(result.x_eq, x0, atol=1e-6)

    def test_matches_active_set_oracle(self):
        for seed in range(3):
            inst = small_instance(seed)
            sys = DiscSystem.build(inst.A, inst.y)
            result, _ = solve(sys, np.zeros(sys.n), SolverOptions(kkt_tol=1e-10, max_time=1e4))
            oracle = nnls_active_set(inst.A, inst.y)
            assert result.converged
            rel = np.linalg.norm(result.x_eq - oracle.x_eq) / np.linalg.norm(oracle.x_eq)
            assert rel <= 1e-5

    def test_lyapunov_non_increasing(self):
        for seed in range(3):
            inst = small_instance(seed)
            sys = DiscSystem.build(inst.A, inst.y)
            oracle = nnls_active_set(inst.A, inst.y)
            opts = SolverOptions(kkt_tol=1e-10, max_time=1e4, sample_every=20)
            _, traj = solve(sys, np.zeros(sys.n), opts, reference=oracle.x_eq)
            values = [v for _, v in traj.lyapunov]
            assert len(values) > 2
            assert all(b <= a + 1e-10 for a, b in zip(values, values[1:]))

    def test_underdetermined_converges_and_stops_switching(self):
        A = np.hstack([np.eye(2), np.eye(2)])
        sys = DiscSystem.build(A, [1.0, 2.0])
        opts = SolverOptions(integrator="auto", kkt_tol=1e-10)
        first, _ = solve(sys, np.zeros(4), opts)
        assert first.converged
        assert first.method == "exact"
        np.testing.assert_allclose(first.x_eq, [0.5, 1.0, 0.5, 1.0], atol=1e-8)

        longer = SolverOptions(
            integrator="euler", max_time=10 * first.t_final, stop_on_convergence=False
        )
        extended, _ = solve(sys, np.zeros(4), longer)
        assert extended.switches == first.switches

    def test_non_convergence_is_reported_not_raised(self, caplog):
        inst = small_instance(0)
        sys = DiscSystem.build(inst.A, inst.y)
        with caplog.at_level(logging.WARNING, logger="discnn.dynamics.solve"):
            result, _ = solve(sys, np.zeros(sys.n), SolverOptions(max_time=0.01))
        assert not result.converged
        assert result.t_final == pytest.approx(0.01)
        assert "did not converge" in caplog.text

    def test_start_at_equilibrium_has_no_switches(self):
        sys = DiscSystem.build(np.eye(2), [1.0, -1.0])
        result, traj = solve(sys, [1.0, 0.0])
        assert result.converged
        assert count_switches(traj) == 0

    def test_x0_shape_checked(self):
        sys = DiscSystem.build(np.eye(2), [1.0, -1.0])
        with pytest.raises(DimensionMismatchError):
            solve(sys, np.zeros(3))


class TestLyapunovValue:
    def test_zero_at_equilibrium(self):
        assert lyapunov_value([1.0, 2.0], [1.0, 2.0]) == 0.0

    def test_half_squared_norm(self):
        assert lyapunov_value([3.0, 4.0], [0.0, 0.0]) == 12.5

    def test_shape_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            lyapunov_value([1.0], [1.0, 2.0])


class TestTrajectoryExport:
    def test_csv_columns(self, tmp_path):
        sys = scalar(1.0)
        _, traj = solve(sys, [-1.0], SolverOptions(integrator="exact"), reference=[1.0])
        path = tmp_path / "traj.csv"
        traj.to_csv(str(path))
        rows = read_csv(str(path))
        assert list(rows[0]) == ["t", "x_1", "V"]
        assert float(rows[0]["t"]) == 0.0
        assert float(rows[0]["V"]) == 2.0

    def test_events_csv(self, tmp_path):
        sys = scalar(1.0)
        _, traj = solve(sys, [-1.0], SolverOptions(integrator="exact"))
        path = tmp_path / "events.csv"
        traj.events_to_csv(str(path))
        rows = read_csv(str(path))
        assert rows == [{"t": "1.0", "index": "0", "from": "neg", "to": "plus"}]
