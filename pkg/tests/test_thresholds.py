import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from varthresh import DataError, ThresholdGrid, binarize, build_grid, ordinal_grid
from varthresh.thresholds import default_k


class TestBuildGrid:
    def test_equal_spacing(self):
        g = build_grid([0, 1, 2, 3, 4], k=4, strategy="equal-spacing")
        np.testing.assert_allclose(g.thetas, [0, 1, 2, 3, 4])
        assert g.k == 4 and not g.collapsed

    def test_equal_mass_collapse(self):
        # type-1 median of [0,0,0,1,10] is the 3rd order statistic, 0
        g = build_grid([0, 0, 0, 1, 10], k=2, strategy="equal-mass")
        np.testing.assert_array_equal(g.thetas, [0, 10])
        assert g.k == 1
        assert g.collapsed

    def test_type1_positions(self):
        y = np.arange(1.0, 11.0)[::-1]
        g = build_grid(y, k=4)
        # ceil(10 j / 4) = 3, 5, 8
        np.testing.assert_array_equal(g.interior, [3, 5, 8])

    def test_endpoints(self, rng):
        y = rng.normal(size=200)
        g = build_grid(y, k=10)
        assert g.thetas[0] == y.min() and g.thetas[-1] == y.max()
        assert np.all(np.diff(g.thetas) > 0)

    def test_constant_response(self):
        with pytest.raises(DataError):
            build_grid([2.0, 2.0, 2.0], k=2)

    def test_k_too_small(self):
        with pytest.raises(DataError):
            build_grid([0.0, 1.0, 2.0], k=1)

    def test_unknown_strategy(self):
        with pytest.raises(DataError):
            build_grid([0.0, 1.0, 2.0], k=2, strategy="random")

    def test_default_k(self, rng):
        assert default_k(rng.normal(size=500)) == 20
        assert default_k([1, 2, 3, 3, 4]) == 3
        assert build_grid(rng.normal(size=500)).k == 20

    @settings(max_examples=50, deadline=None)
    @given(n=st.integers(30, 300), k=st.integers(2, 12), seed=st.integers(0, 10_000))
    def test_equal_mass_side_counts(self, n, k, seed):
        y = np.random.default_rng(seed).normal(size=n)
        g = build_grid(y, k=k)
        floor = n // k - 1
        for th in g.interior:
            assert np.sum(y <= th) >= floor
            assert np.sum(y > th) >= floor

    def test_json_round_trip(self):
        g = build_grid(np.arange(12.0), k=3)
        back = ThresholdGrid.from_json(g.to_json())
        np.testing.assert_array_equal(back.thetas, g.thetas)
        assert back.kind == g.kind


class TestOrdinalGrid:
    def test_ten_categories(self):
        g = ordinal_grid(10)
        np.testing.assert_array_equal(g.interior, np.arange(1, 10))
        assert g.interior.size == 9
        assert g.kind == "ordinal"

    def test_two_categories(self):
        np.testing.assert_array_equal(ordinal_grid(2).interior, [1.0])

    def test_one_category(self):
        with pytest.raises(DataError):
            ordinal_grid(1)


class TestBinarize:
    def test_strict(self):
        np.testing.assert_array_equal(binarize([1, 2, 3], 2), [0, 0, 1])

    def test_below_min(self):
        assert binarize([1, 2, 3], 0.5).all()

    def test_at_max(self):
        assert not binarize([1, 2, 3], 3).any()

    @settings(max_examples=50, deadline=None)
    @given(hnp.arrays(np.float64, st.integers(5, 60), elements=st.floats(-100, 100)))
    def test_monotone_labels(self, y):
        if np.ptp(y) == 0:
            return
        g = build_grid(y, k=min(5, max(2, np.unique(y).size - 1)), strategy="equal-spacing")
        labels = np.array([binarize(y, t) for t in g.thetas])
        assert np.all(np.diff(labels, axis=0) <= 0)
