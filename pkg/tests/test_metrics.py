import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from mobsurrogate.exceptions import LengthMismatch, ZeroSpread
from mobsurrogate.metrics import (
    ReferenceSurface,
    class_accuracies,
    mae,
    r2,
    regression_metrics,
    rmae,
    rmse,
)


def test_hand_values():
    assert mae([0, 0], [1, -1]) == 1.0
    assert mae([1, 2, 3], [1.5, 2, 2]) == pytest.approx(0.5)
    assert rmse([0, 0], [1, -1]) == 1.0
    assert rmse([0, 0, 0], [3, 0, 0]) == pytest.approx(math.sqrt(3))
    assert rmae([0, 2], [0, 3]) == pytest.approx(1.0)
    assert r2([0, 1, 2], [0, 1, 1]) == pytest.approx(0.5)
    assert r2([0, 1, 2], [1, 1, 1]) == pytest.approx(0.0)


def test_perfect_prediction():
    y = np.array([0.3, 1.2, -0.7, 2.0])
    m = regression_metrics(y, y)
    assert m == {"mae": 0.0, "rmse": 0.0, "rmae": 0.0, "r2": 1.0}


def test_rmae_scale_invariant():
    rng = np.random.default_rng(0)
    y, yh = rng.normal(size=20), rng.normal(size=20)
    assert rmae(3.5 * y, 3.5 * yh) == pytest.approx(rmae(y, yh))


def test_errors():
    with pytest.raises(LengthMismatch):
        mae([1, 2], [1])
    with pytest.raises(LengthMismatch):
        rmse([], [])
    with pytest.raises(ZeroSpread):
        rmae([1, 1], [1, 2])
    with pytest.raises(ZeroSpread):
        r2([1, 1], [1, 2])
    with pytest.raises(LengthMismatch):
        class_accuracies([1, 0], [1])


def test_class_accuracies():
    assert class_accuracies([1, 0, 1, 0], [1, 0, 1, 0]) == (100.0, 100.0)
    assert class_accuracies([1, 1, 0, 0], [0, 0, 0, 0]) == (0.0, 100.0)
    assert class_accuracies([1, 1, 0, 0], [1, 0, 0, 0]) == (50.0, 100.0)
    a_pos, a_neg = class_accuracies([0, 0, 0], [0, 1, 0])
    assert math.isnan(a_pos)
    assert a_neg == pytest.approx(200 / 3)


def test_reference_surface():
    ref = ReferenceSurface(np.array([0.1, 0.2, 0.3]), [1.0, 2.0, 3.0], [0, 1, 1])
    assert ref.x_ref.shape == (3, 1) and len(ref) == 3
    with pytest.raises(LengthMismatch):
        ReferenceSurface(np.zeros((2, 2)), [1.0])
    with pytest.raises(ValueError):
        ReferenceSurface(np.zeros((1, 1)), [np.nan])


finite = st.floats(-1e6, 1e6, allow_nan=False)


@settings(max_examples=100, deadline=None)
@given(a=arrays(float, 8, elements=finite), b=arrays(float, 8, elements=finite))
def test_mae_le_rmse(a, b):
    assert mae(a, b) <= rmse(a, b) * (1 + 1e-12) + 1e-12


@settings(max_examples=50, deadline=None)
@given(labels=arrays(int, 12, elements=st.integers(0, 1)), seed=st.integers(0, 1000))
def test_class_accuracies_permutation_invariant(labels, seed):
    rng = np.random.default_rng(seed)
    hat = rng.integers(0, 2, 12)
    perm = rng.permutation(12)
    a = class_accuracies(labels, hat)
    b = class_accuracies(labels[perm], hat[perm])
    np.testing.assert_array_equal(a, b)
