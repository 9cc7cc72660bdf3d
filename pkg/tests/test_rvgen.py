"""Variate generators: reproducibility, analytic moments, and densities."""

import numpy as np
import pytest
import scipy.stats

from dplab import DirichletParams, ParameterError, RngStream, dirichlet_density
from dplab.rvgen import sample_beta, sample_dirichlet, sample_gamma


class TestRngStream:
    def test_identical_coordinates_reproduce_bitwise(self):
        a = RngStream(123456789, 7).uniform(1000)
        b = RngStream(123456789, 7).uniform(1000)
        assert np.array_equal(a, b)

    def test_distinct_indices_differ(self):
        a = RngStream(123456789, 0).uniform(1000)
        b = RngStream(123456789, 1).uniform(1000)
        assert not np.array_equal(a, b)

    def test_gamma_sequence_reproducible_through_rejection(self):
        a = sample_gamma(2.7, RngStream(5, 3), size=5000)
        b = sample_gamma(2.7, RngStream(5, 3), size=5000)
        assert np.array_equal(a, b)

    def test_invalid_coordinates(self):
        with pytest.raises(ParameterError):
            RngStream(1.5, 0)
        with pytest.raises(ParameterError):
            RngStream(1, -1)


class TestSampleGamma:
    def test_shape_one_is_exponential_reduction(self):
        """A unit-shape draw equals -log(U) for the stream's uniform U."""
        draw = sample_gamma(1.0, RngStream(9, 3))
        u = RngStream(9, 3).uniform()
        assert draw == -np.log(u)

    def test_mean_matches_shape(self):
        draws = sample_gamma(5.0, RngStream(42, 0), size=100_000)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - 5.0) <= 3 * se

    @pytest.mark.parametrize("shape", [0.5, 0.05])
    def test_small_shapes_keep_correct_mean(self, shape):
        """Boosted draws must stay unbiased well below shape 1."""
        draws = sample_gamma(shape, RngStream(42, 1), size=100_000)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - shape) <= 4 * se

    @pytest.mark.parametrize("shape", [0.0, -1.0, np.nan, np.inf])
    def test_invalid_shape(self, shape):
        with pytest.raises(ParameterError):
            sample_gamma(shape, RngStream(0, 0))


class TestSampleBeta:
    def test_flat_beta_is_uniform(self):
        draws = sample_beta(1.0, 1.0, RngStream(11, 0), size=10_000)
        stat, p = scipy.stats.kstest(draws, "uniform")
        assert p > 0.01

    def test_mean(self):
        draws = sample_beta(2.0, 3.0, RngStream(11, 1), size=100_000)
        se = draws.std(ddof=1) / np.sqrt(draws.size)
        assert abs(draws.mean() - 0.4) <= 3 * se

    def test_variance_matches_cell_mass_formula(self):
        """Beta(a*H(A), a*(1-H(A))) variance is H(A)(1-H(A))/(1+a):
        a=10, H(A)=0.3 gives 0.21/11."""
        draws = sample_beta(3.0, 7.0, RngStream(11, 2), size=100_000)
        var = draws.var(ddof=1)
        centered = draws - draws.mean()
        se = np.sqrt((np.mean(centered**4) - var**2) / draws.size)
        assert abs(var - 0.21 / 11.0) <= 3 * se

    def test_extreme_parameter_ratio_stays_in_unit_interval(self):
        draws = sample_beta(1.0, 1e4, RngStream(11, 3), size=1000)
        assert np.all(draws >= 0.0) and np.all(draws <= 1.0)
        assert draws.mean() < 0.01

    def test_invalid_parameters(self):
        with pytest.raises(ParameterError):
            sample_beta(0.0, 1.0, RngStream(0, 0))
        with pytest.raises(ParameterError):
            sample_beta(1.0, -2.0, RngStream(0, 0))


class TestSampleDirichlet:
    @pytest.mark.parametrize(
        "alphas", [(2.0, 2.0), (1.0, 2.0, 3.0), (0.01, 0.005, 5.0), (0.3, 0.7)]
    )
    def test_simplex_constraint(self, alphas):
        draws = sample_dirichlet(DirichletParams(alphas), RngStream(3, 0), size=2000)
        assert np.all(draws >= 0.0)
        np.testing.assert_allclose(draws.sum(axis=1), 1.0, atol=1e-12)

    def test_symmetric_mean(self):
        draws = sample_dirichlet(DirichletParams((2.0, 2.0)), RngStream(3, 1), size=100_000)
        se = draws[:, 0].std(ddof=1) / np.sqrt(draws.shape[0])
        assert abs(draws[:, 0].mean() - 0.5) <= 3 * se

    def test_first_moment(self):
        draws = sample_dirichlet(DirichletParams((1.0, 2.0, 3.0)), RngStream(3, 2), size=100_000)
        se = draws[:, 0].std(ddof=1) / np.sqrt(draws.shape[0])
        assert abs(draws[:, 0].mean() - 1.0 / 6.0) <= 3 * se

    @pytest.mark.parametrize("alphas", [(1.0, 2.0, 3.0), (0.5, 0.5), (2.0, 3.0, 4.0, 5.0)])
    def test_pairwise_covariance(self, alphas):
        """Empirical covariances against -a_i a_j / (A^2 (A + 1))."""
        draws = sample_dirichlet(DirichletParams(alphas), RngStream(3, 3), size=100_000)
        total = sum(alphas)
        n = draws.shape[0]
        for i in range(len(alphas)):
            for j in range(i + 1, len(alphas)):
                target = -alphas[i] * alphas[j] / (total**2 * (total + 1.0))
                prod = (draws[:, i] - draws[:, i].mean()) * (draws[:, j] - draws[:, j].mean())
                cov = prod.sum() / (n - 1)
                se = prod.std(ddof=1) / np.sqrt(n)
                assert abs(cov - target) <= 4 * se, (alphas, i, j)

    def test_invalid_params(self):
        with pytest.raises(ParameterError):
            DirichletParams((1.0,))
        with pytest.raises(ParameterError):
            DirichletParams((1.0, 0.0))
        with pytest.raises(ParameterError):
            DirichletParams((1.0, -1.0, 2.0))


def _simpson(values, h):
    w = np.ones(values.size)
    w[1:-1:2] = 4.0
    w[2:-1:2] = 2.0
    return float(w @ values * h / 3.0)


class TestDirichletDensity:
    def test_flat_density_is_one(self):
        assert dirichlet_density([0.3, 0.7], DirichletParams((1.0, 1.0))) == pytest.approx(1.0)

    def test_linear_density_value(self):
        # (2, 1): density is 2*y1; at y1 = 0.5 that is 1.0
        assert dirichlet_density([0.5, 0.5], DirichletParams((2.0, 1.0))) == pytest.approx(1.0)

    def test_off_simplex_is_zero(self):
        params = DirichletParams((1.0, 1.0))
        assert dirichlet_density([0.5, 0.6], params) == 0.0
        assert dirichlet_density([1.2, -0.2], params) == 0.0

    def test_wrong_length(self):
        with pytest.raises(ParameterError):
            dirichlet_density([0.5, 0.3, 0.2], DirichletParams((1.0, 1.0)))

    @pytest.mark.parametrize("alphas", [(2.0, 3.0), (1.5, 3.5)])
    def test_integrates_to_one_k2(self, alphas):
        params = DirichletParams(alphas)
        y1 = np.linspace(0.0, 1.0, 4001)[1:-1]
        vals = np.array([dirichlet_density([y, 1.0 - y], params) for y in y1])
        vals = np.concatenate(([0.0], vals, [0.0]))
        integral = _simpson(vals, 1.0 / 4000)
        assert abs(integral - 1.0) <= 1e-3

    def test_integrates_to_one_k3(self):
        """Iterated tensor Simpson over the triangle y1 + y2 < 1."""
        params = DirichletParams((1.5, 2.0, 2.5))
        n = 401
        y1 = np.linspace(0.0, 1.0, n)
        inner = np.zeros(n)
        for i, a in enumerate(y1[:-1]):
            width = 1.0 - a
            y2 = np.linspace(0.0, width, n)
            vals = np.array(
                [dirichlet_density([a, b, 1.0 - a - b], params) for b in y2]
            )
            inner[i] = _simpson(vals, width / (n - 1))
        integral = _simpson(inner, 1.0 / (n - 1))
        assert abs(integral - 1.0) <= 1e-3

    def test_huge_concentration_stays_finite(self):
        """Log-space evaluation must survive concentrations around 1e5."""
        a = 1e5
        params = DirichletParams((a / 3.0, a / 3.0, a / 3.0))
        val = dirichlet_density([1 / 3, 1 / 3, 1 / 3], params)
        assert np.isfinite(val) and val > 0.0
