"""Tests for the recovery metrics."""

from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from discnn.errors import DimensionMismatchError, IllPosedInstanceError
from discnn.metrics import (
    RecoveryMetrics,
    finite_mean,
    mse,
    mse_support,
    output_snr,
    rel_err_support,
    support_recovered,
    to_db,
)

entries = st.floats(-10.0, 10.0, allow_subnormal=False).filter(lambda v: v == 0 or abs(v) > 1e-3)
# Powers of two scale without rounding.
scales = st.sampled_from([0.25, 0.5, 2.0, 4.0, 8.0])


class TestOutputSnr:
    def test_hand_arithmetic(self):
        assert output_snr([1.0, 1.0, 0.1, 0.0], [0, 1]) == pytest.approx(200.0)

    def test_exact_support_is_infinite(self):
        assert output_snr([1.0, 0.0, 2.0], [0, 2]) == math.inf

    def test_zero_vector_is_undefined(self):
        assert math.isnan(output_snr(np.zeros(4), [1]))

    def test_support_out_of_range(self):
        with pytest.raises(DimensionMismatchError):
            output_snr([1.0, 2.0], [2])

    @given(x=arrays(np.float64, 6, elements=entries), c=scales)
    def test_scale_invariant(self, x, c):
        a, b = output_snr(x, [0, 2]), output_snr(c * x, [0, 2])
        if math.isnan(a) or math.isinf(a):
            assert (math.isnan(a) and math.isnan(b)) or a == b
        else:
            assert b == pytest.approx(a, rel=1e-9)


class TestSupportRecovered:
    def test_separated(self):
        assert support_recovered([0.5, 0.0, 0.1, 0.0], [0, 2])

    def test_not_separated(self):
        assert not support_recovered([0.5, 0.2, 0.1, 0.0], [0, 2])

    def test_tie_is_not_recovery(self):
        assert not support_recovered([0.5, 0.1, 0.1, 0.0], [0, 2])

    def test_needs_proper_subset(self):
        with pytest.raises(ValueError):
            support_recovered([1.0, 2.0], [0, 1])

    @given(x=arrays(np.float64, 5, elements=entries), c=scales)
    def test_invariant_under_positive_scaling(self, x, c):
        assert support_recovered(x, [1, 3]) == support_recovered(c * x, [1, 3])


class TestErrors:
    def test_rel_err_zero_at_truth(self):
        assert rel_err_support([1.0, 0.0, 2.0], [1.0, 0.0, 2.0], [0, 2]) == 0.0

    def test_rel_err_homogeneous(self):
        x0 = np.array([1.0, 0.0, 2.0])
        assert rel_err_support(1.1 * x0, x0, [0, 2]) == pytest.approx(0.1)

    def test_rel_err_hand_arithmetic(self):
        assert rel_err_support([3.0, 9.0, 3.0], [3.0, 0.0, 4.0], [0, 2]) == pytest.approx(0.2)

    def test_rel_err_ill_posed(self):
        with pytest.raises(IllPosedInstanceError):
            rel_err_support([1.0, 1.0], [0.0, 1.0], [0])

    def test_mse_single_error(self):
        x0 = np.arange(1.0, 6.0)
        x = x0.copy()
        x[2] += 0.5
        assert mse_support(x, x0, np.arange(5)) == pytest.approx(0.05)

    def test_mse_constant_shift(self):
        x0 = np.array([1.0, 0.0, 2.0, 3.0])
        support = [0, 2, 3]
        x = x0.copy()
        x[support] += 0.3
        assert mse_support(x, x0, support) == pytest.approx(0.09)

    def test_mse_full_vector(self):
        assert mse([1.0, 1.0], [0.0, 0.0]) == 1.0

    @given(
        x=arrays(np.float64, 6, elements=entries),
        x0=arrays(np.float64, 6, elements=entries),
    )
    def test_mse_bounded_by_worst_coordinate(self, x, x0):
        support = [0, 1, 4]
        worst = float(np.max(np.abs(x[support] - x0[support])))
        assert mse_support(x, x0, support) <= worst**2 * (1 + 1e-12)


class TestAggregation:
    def test_finite_mean_skips_sentinels(self):
        m = finite_mean([1.0, 3.0, math.inf, math.nan])
        assert m.mean == 2.0
        assert m.n == 2
        assert m.excluded == 2
        assert m.stderr == pytest.approx(1.0)

    def test_finite_mean_of_nothing(self):
        m = finite_mean([math.inf])
        assert math.isnan(m.mean)
        assert m.excluded == 1

    def test_to_db(self):
        assert to_db(1e4) == pytest.approx(40.0)
        assert to_db(0.0) == -math.inf
        assert to_db(math.inf) == math.inf
        assert math.isnan(to_db(math.nan))


def test_evaluate_bundles_metrics():
    m = RecoveryMetrics.evaluate([3.0, 0.0, 3.0, 0.1], [3.0, 0.0, 4.0, 0.0], [0, 2])
    assert m.rel_err_support == pytest.approx(0.2)
    assert m.mse_support == pytest.approx(0.5)
    assert m.output_snr == pytest.approx(18.0 / 0.01)
    assert m.support_recovered
