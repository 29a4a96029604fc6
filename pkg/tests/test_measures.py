import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ipm_pacbayes import (
    DiracMeasure,
    DiscreteMeasure,
    FiniteMetricSpace,
    GaussianMeasure,
    InvalidArgumentError,
    ProjectedGaussianMeasure,
    RandomSource,
    project_ball,
    sample_gaussian,
    sample_uniform_ball,
)

finite = st.floats(-1e3, 1e3, allow_nan=False, allow_infinity=False)
vectors = arrays(np.float64, st.integers(1, 6), elements=finite)


class TestMeasureTypes:
    def test_gaussian_rejects_negative_sigma(self):
        with pytest.raises(InvalidArgumentError):
            GaussianMeasure(np.zeros(2), -1.0)

    def test_gaussian_rejects_nonfinite_mean(self):
        with pytest.raises(InvalidArgumentError):
            GaussianMeasure(np.array([0.0, np.nan]), 1.0)

    def test_dirac_is_zero_variance_gaussian(self):
        g = DiracMeasure(np.array([1.0, 2.0])).as_gaussian()
        assert g.sigma == 0 and np.array_equal(g.mean, [1.0, 2.0])

    def test_projected_needs_positive_radius(self):
        with pytest.raises(InvalidArgumentError):
            ProjectedGaussianMeasure(GaussianMeasure(np.zeros(2), 1.0), 0.0)

    def test_discrete_weights_must_sum_to_one(self):
        with pytest.raises(InvalidArgumentError):
            DiscreteMeasure(np.array([0.5, 0.6]))
        with pytest.raises(InvalidArgumentError):
            DiscreteMeasure(np.array([1.5, -0.5]))
        assert DiscreteMeasure.normalized([2.0, 2.0]).weights.tolist() == [0.5, 0.5]


class TestFiniteMetricSpace:
    def test_from_points(self):
        space = FiniteMetricSpace.from_points(np.array([[0.0, 0.0], [3.0, 4.0]]))
        assert space.dist[0, 1] == pytest.approx(5.0)

    @pytest.mark.parametrize("bad", [
        [[0, 1], [2, 0]],                     # asymmetric
        [[1, 1], [1, 0]],                     # non-zero diagonal
        [[0, -1], [-1, 0]],                   # negative
        [[0, 1, 5], [1, 0, 1], [5, 1, 0]],    # triangle violated
    ])
    def test_rejects_invalid(self, bad):
        with pytest.raises(InvalidArgumentError):
            FiniteMetricSpace(np.array(bad, dtype=float))

    @settings(max_examples=60, deadline=None)
    @given(st.integers(3, 6), st.integers(0, 2**32 - 1))
    def test_fuzzed_perturbation_breaking_triangle_is_rejected(self, n, seed):
        gen = np.random.default_rng(seed)
        D = FiniteMetricSpace.from_points(gen.random((n, 2))).dist.copy()
        i, j = 0, 1
        k = 2
        # make d(i, j) exceed the two-hop path through k
        D[i, j] = D[j, i] = D[i, k] + D[k, j] + 0.1
        with pytest.raises(InvalidArgumentError):
            FiniteMetricSpace(D)


class TestProjectBall:
    @pytest.mark.parametrize("v, expected", [
        ([0.0, 0.0], [0.0, 0.0]),
        ([3.0, 4.0], [0.6, 0.8]),
        ([0.5, 0.0], [0.5, 0.0]),
    ])
    def test_examples(self, v, expected):
        np.testing.assert_allclose(project_ball(np.array(v), 1.0), expected, rtol=1e-14)

    @given(vectors, st.floats(1e-3, 10))
    def test_idempotent_bitwise(self, v, r):
        once = project_ball(v, r)
        assert np.array_equal(project_ball(once, r), once)
        assert np.linalg.norm(once) <= r

    @given(st.integers(1, 6).flatmap(
        lambda d: st.tuples(arrays(np.float64, d, elements=finite),
                            arrays(np.float64, d, elements=finite))))
    def test_non_expansive(self, pair):
        u, v = pair
        lhs = np.linalg.norm(project_ball(u, 1.0) - project_ball(v, 1.0))
        assert lhs <= np.linalg.norm(u - v) * (1 + 1e-12) + 1e-12


class TestSamplers:
    def test_uniform_ball_support_and_moments(self):
        d, r, n = 10, 0.1, 100_000
        x = sample_uniform_ball(RandomSource(1), d, r, size=n)
        assert np.all(np.linalg.norm(x, axis=1) <= r)
        assert np.linalg.norm(x.mean(axis=0)) <= 0.01 * r
        second = np.mean(np.sum(x**2, axis=1))
        assert second == pytest.approx(r**2 * d / (d + 2), rel=0.02)

    def test_uniform_ball_advances_state(self):
        rng = RandomSource(3)
        assert not np.array_equal(sample_uniform_ball(rng, 3, 1.0), sample_uniform_ball(rng, 3, 1.0))

    def test_gaussian_degenerate(self):
        g = GaussianMeasure(np.array([1.0, 2.0]), 0.0)
        assert np.array_equal(sample_gaussian(RandomSource(0), g), [1.0, 2.0])

    def test_gaussian_moments(self):
        sigma = 0.3
        g = GaussianMeasure(np.array([1.0, -2.0, 0.5]), sigma)
        x = sample_gaussian(RandomSource(7), g, size=100_000)
        assert np.all(np.abs(x.mean(axis=0) - g.mean) <= 0.01 * sigma)
        np.testing.assert_allclose(x.var(axis=0), sigma**2, rtol=0.03)


class TestRandomSource:
    def test_same_seed_same_stream(self):
        a = RandomSource(11).generator.random(5)
        b = RandomSource(11).generator.random(5)
        assert np.array_equal(a, b)

    def test_derive_is_deterministic_and_distinct(self):
        base = RandomSource(5)
        assert base.derive(1, 2).seed == RandomSource(5).derive(1, 2).seed
        assert base.derive(1, 2).seed != base.derive(2, 1).seed
