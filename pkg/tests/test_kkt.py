"""Tests for the KKT residuals."""

from __future__ import annotations

import numpy as np
import pytest

from discnn.dynamics.box import BoxSystem
from discnn.errors import DimensionMismatchError
from discnn.kkt import box_kkt, nnls_kkt, nnls_kkt_gram

A = np.eye(2)
Y = np.array([1.0, -1.0])


class TestNnlsKkt:
    def test_solution_has_zero_residual(self):
        report = nnls_kkt(A, Y, np.array([1.0, 0.0]))
        assert report.total == 0.0

    def test_zero_start_violates_dual_feasibility(self):
        report = nnls_kkt(A, Y, np.zeros(2))
        assert report.dual_violation == 1.0
        assert report.primal_violation == 0.0

    def test_negative_entry_is_primal_violation(self):
        report = nnls_kkt(A, Y, np.array([1.0, -0.25]))
        assert report.primal_violation == 0.25

    def test_total_is_largest_component(self):
        report = nnls_kkt(A, Y, np.array([2.0, 0.0]))
        assert report.comp_slack == 2.0
        assert report.total == max(
            report.stationarity, report.primal_violation, report.dual_violation, report.comp_slack
        )

    def test_gram_form_returns_multiplier(self):
        report, lam = nnls_kkt_gram(A.T @ A, A.T @ Y, np.array([1.0, 0.0]))
        np.testing.assert_array_equal(lam, [0.0, 1.0])
        assert report.total == 0.0

    def test_dimension_mismatch(self):
        with pytest.raises(DimensionMismatchError):
            nnls_kkt(A, Y, np.zeros(3))

    def test_as_row(self):
        row = nnls_kkt(A, Y, np.zeros(2)).as_row()
        assert row["kkt_total"] == 1.0
        assert set(row) == {
            "kkt_stationarity",
            "kkt_primal",
            "kkt_dual",
            "kkt_comp_slack",
            "kkt_total",
        }


class TestBoxKkt:
    def test_interior_optimum(self):
        Q = np.array([[2.0, 0.5], [0.5, 1.0]])
        q = np.array([0.3, -0.2])
        sys = BoxSystem.build(Q, q, [-10.0, -10.0], [10.0, 10.0])
        assert box_kkt(sys, np.linalg.solve(Q, q)).total == pytest.approx(0.0, abs=1e-14)

    def test_upper_bound_with_outward_gradient_is_compliant(self):
        sys = BoxSystem.build([[1.0]], [1.3], [0.0], [1.0])
        report = box_kkt(sys, np.array([1.0]))
        assert report.total == 0.0

    def test_upper_bound_with_inward_gradient_is_dual_violation(self):
        sys = BoxSystem.build([[1.0]], [0.5], [0.0], [1.0])
        assert box_kkt(sys, np.array([1.0])).dual_violation == pytest.approx(0.5)

    def test_outside_box_is_primal_violation(self):
        sys = BoxSystem.build([[1.0]], [1.3], [0.0], [1.0])
        assert box_kkt(sys, np.array([1.1])).primal_violation == pytest.approx(0.1)

    def test_dimension_mismatch(self):
        sys = BoxSystem.build([[1.0]], [1.3], [0.0], [1.0])
        with pytest.raises(DimensionMismatchError):
            box_kkt(sys, np.zeros(2))
