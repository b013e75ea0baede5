import itertools
import math
from fractions import Fraction as F

import numpy as np
import pytest
from scipy import stats

from gfgm import (
    AtomDriver,
    DenseDriver,
    DiscreteMargin,
    ExchangeableDriver,
    ExponentialMargin,
    GfgmSpec,
    UniformMargin,
    comonotone_pmf,
    conditional_cdfs,
    copula_cdf,
    independence_pmf,
    min_convex,
    pearson_x,
    sample_u,
    sample_x,
    sigma_cx_smallest_blocks,
    spearman_bounds,
    spearman_rho,
)
from gfgm.bernoulli import BernoulliPmf
from gfgm.reference import EXAMPLE_FINAL_VERTICES, example_final_margins
from gfgm.sums import SumPmf


def spec_d2_comonotone():
    return GfgmSpec(("1/2", "1/2"), DenseDriver(comonotone_pmf(["1/2", "1/2"])))


def spec_independent(p):
    return GfgmSpec(tuple(p), DenseDriver(independence_pmf(p)))


def r1_spec():
    pmf = BernoulliPmf(3, tuple(F(v) for v in EXAMPLE_FINAL_VERTICES["r1"]))
    return GfgmSpec(("1/2", "1/3", "2/3"), DenseDriver(pmf))


class TestSpecValidation:
    def test_margin_mismatch_rejected(self):
        with pytest.raises(ValueError):
            GfgmSpec(("1/3", "1/3"), DenseDriver(comonotone_pmf(["1/2", "1/2"])))

    def test_b_parameters(self):
        spec = r1_spec()
        assert spec.b(1) == 1 and spec.b(2) == F(1, 2) and spec.b(3) == 2

    def test_json_round_trip(self):
        spec = r1_spec()
        again = GfgmSpec.from_json(spec.to_json())
        assert again.p == spec.p
        assert again.driver.atoms() == spec.driver.atoms()

    def test_atom_driver_json_round_trip(self):
        blocks = sigma_cx_smallest_blocks(7, F(1, 7))
        driver = AtomDriver.from_blocks(blocks)
        from gfgm import driver_from_json

        again = driver_from_json(driver.to_json())
        assert again.atoms() == driver.atoms()

    def test_exchangeable_driver_json_round_trip(self):
        from gfgm import driver_from_json

        driver = ExchangeableDriver(min_convex(12, F(1, 3)))
        again = driver_from_json(driver.to_json())
        assert again.sum_pmf() == driver.sum_pmf()


class TestCopulaCdf:
    def test_independence_is_product(self):
        spec = spec_independent([F(1, 3), F(1, 2), F(2, 3)])
        rng = np.random.default_rng(1)
        pts = rng.random((20, 3))
        assert np.allclose(copula_cdf(spec, pts), pts.prod(axis=1), atol=1e-13)

    def test_comonotone_d2_at_half(self):
        # nu_12 = 1: u1 u2 (1 + (1-u1)(1-u2)) = 5/16 at (1/2, 1/2)
        assert copula_cdf(spec_d2_comonotone(), [0.5, 0.5]) == pytest.approx(5 / 16, abs=1e-14)

    def test_uniform_margins(self):
        spec = r1_spec()
        for j in range(3):
            for u in (0.0, 0.2, 0.7, 1.0):
                point = np.ones(3)
                point[j] = u
                assert copula_cdf(spec, point) == pytest.approx(u, abs=1e-13)

    def test_nu_and_mixture_paths_agree(self):
        rng = np.random.default_rng(5)
        specs = [
            r1_spec(),
            spec_d2_comonotone(),
            spec_independent([F(1, 4), F(2, 5)]),
            GfgmSpec.common(
                "1/2",
                ExchangeableDriver(SumPmf(6, tuple(F(x) for x in ["1/6", "0", "1/3", "0", "1/3", "0", "1/6"]))),
            ),
        ]
        for spec in specs:
            pts = rng.random((40, spec.d))
            a = copula_cdf(spec, pts, method="mixture")
            b = copula_cdf(spec, pts, method="nu")
            assert np.max(np.abs(a - b)) < 1e-12

    def test_exchangeable_route_matches_dense_expansion(self):
        g = SumPmf(5, tuple(F(x) for x in ["1/6", "0", "0", "5/6", "0", "0"]))
        drv = ExchangeableDriver(g)
        spec = GfgmSpec.common("1/2", drv)
        dense_vals = [F(0)] * 32
        for m, w in drv.atoms():
            dense_vals[m] += w
        spec_dense = GfgmSpec.common("1/2", DenseDriver(BernoulliPmf(5, tuple(dense_vals))))
        pts = np.random.default_rng(2).random((30, 5))
        assert np.allclose(copula_cdf(spec, pts), copula_cdf(spec_dense, pts), atol=1e-13)

    def test_frechet_hull(self):
        rng = np.random.default_rng(9)
        for spec in (r1_spec(), spec_d2_comonotone()):
            pts = rng.random((50, spec.d))
            c = copula_cdf(spec, pts)
            lower = np.clip(pts.sum(axis=1) - (spec.d - 1), 0.0, None)
            upper = pts.min(axis=1)
            assert np.all(c >= lower - 1e-12)
            assert np.all(c <= upper + 1e-12)

    def test_rejects_points_outside_cube(self):
        with pytest.raises(ValueError):
            copula_cdf(spec_d2_comonotone(), [0.5, 1.5])


class TestConditionalCdfs:
    def test_half_closed_forms(self):
        f0, f1 = conditional_cdfs(0.5)
        u = np.linspace(0, 1, 11)
        assert np.allclose(f0(u), u**2, atol=1e-15)
        assert np.allclose(f1(u), 2 * u - u**2, atol=1e-15)

    def test_boundary_values(self):
        for p in (0.2, 1 / 3, 0.75):
            f0, f1 = conditional_cdfs(p)
            assert f0(0.0) == 0.0 and f1(0.0) == pytest.approx(0.0)
            assert f0(1.0) == pytest.approx(1.0) and f1(1.0) == pytest.approx(1.0)

    def test_mixture_identity(self):
        p = 1 / 3
        f0, f1 = conditional_cdfs(p)
        u = np.linspace(0.0, 1.0, 101)
        assert np.allclose(p * f1(u) + (1 - p) * f0(u), u, atol=1e-14)
        assert p * f1(0.3) + (1 - p) * f0(0.3) == pytest.approx(0.3, abs=1e-15)

    def test_monotone(self):
        for p in (0.1, 0.5, 0.9):
            f0, f1 = conditional_cdfs(p)
            u = np.linspace(0, 1, 200)
            assert np.all(np.diff(f0(u)) >= 0)
            assert np.all(np.diff(f1(u)) >= 0)


class TestSampling:
    def test_deterministic_given_seed(self):
        spec = r1_spec()
        a = sample_u(spec, 1000, seed=123)
        b = sample_u(spec, 1000, seed=123)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, sample_u(spec, 1000, seed=124))

    def test_uniform_margins_gof(self):
        spec = r1_spec()
        u = sample_u(spec, 10**5, seed=5)
        for j in range(3):
            ks = stats.kstest(u[:, j], "uniform").statistic
            assert ks < 1.628 / math.sqrt(10**5)

    def test_empirical_copula_close_to_analytic(self):
        spec = spec_d2_comonotone()
        n = 10**5
        u = sample_u(spec, n, seed=11)
        grid = np.linspace(0.1, 0.9, 10)
        pts = np.array([[a, b] for a in grid for b in grid])
        emp = np.array([np.mean((u[:, 0] <= a) & (u[:, 1] <= b)) for a, b in pts])
        assert np.max(np.abs(emp - copula_cdf(spec, pts))) < 1.628 / math.sqrt(n)

    def test_independent_spec_spearman_near_zero(self):
        spec = spec_independent([F(1, 2), F(1, 3)])
        n = 10**5
        u = sample_u(spec, n, seed=21)
        rho = stats.spearmanr(u[:, 0], u[:, 1]).statistic
        assert abs(rho) < 3 / math.sqrt(n)

    def test_exchangeable_driver_sampling(self):
        g = min_convex(10, F(1, 3))
        spec = GfgmSpec.common(F(1, 3), ExchangeableDriver(g))
        u = sample_u(spec, 20000, seed=3)
        assert u.shape == (20000, 10)
        ks = stats.kstest(u[:, 4], "uniform").statistic
        assert ks < 1.628 / math.sqrt(20000)

    def test_sample_x_exponential_means(self):
        spec = r1_spec()
        margins = [ExponentialMargin(0.5), ExponentialMargin(1.0), ExponentialMargin(2.0)]
        n = 10**5
        x = sample_x(spec, margins, n, seed=8)
        for j, margin in enumerate(margins):
            se = math.sqrt(margin.var / n)
            assert abs(x[:, j].mean() - margin.mean) < 3 * se

    def test_sample_x_exponential_pearson_matches_indicator_covariance(self):
        # At p = 1/2 the additive exponential split and the quantile coupling
        # induce the same pair law, so the correlation equals Cov(I1, I2).
        spec = spec_d2_comonotone()
        margins = [ExponentialMargin(0.1)] * 2
        x = sample_x(spec, margins, 2 * 10**5, seed=13)
        emp = np.corrcoef(x[:, 0], x[:, 1])[0, 1]
        assert emp == pytest.approx(float(spec.cov_indicators(1, 2)), abs=0.012)

    def test_sample_x_quantile_coupling_correlation_off_half(self):
        # For p != 1/2 the quantile coupling's correlation carries the
        # quadrature gap factors, not the additive-split value Cov(I1, I2).
        from gfgm import QuantileMargin

        spec = r1_spec()
        rate = 0.1
        margins = [ExponentialMargin(rate)] * 3
        quantile_margins = [
            QuantileMargin(lambda u, r=rate: -np.log1p(-u) / r, mean=1 / rate, var=1 / rate**2)
            for _ in range(3)
        ]
        gaps = [
            quantile_margins[j].z_means(spec.p[j])[1] - quantile_margins[j].z_means(spec.p[j])[0]
            for j in range(3)
        ]
        predicted = float(spec.cov_indicators(1, 2)) * gaps[0] * gaps[1] * rate**2
        x = sample_x(spec, margins, 2 * 10**5, seed=13)
        emp = np.corrcoef(x[:, 0], x[:, 1])[0, 1]
        assert emp == pytest.approx(predicted, abs=0.012)
        assert predicted != pytest.approx(float(spec.cov_indicators(1, 2)), abs=0.01)

    def test_sample_x_point_mass_margin_constant(self):
        spec = spec_independent([F(1, 2), F(1, 2)])
        margins = [DiscreteMargin.point_mass(4), ExponentialMargin(1.0)]
        x = sample_x(spec, margins, 500, seed=1)
        assert np.all(x[:, 0] == 4.0)

    def test_sample_x_requires_quantile_function(self):
        with pytest.raises(ValueError):
            sample_x(spec_d2_comonotone(), [object(), object()], 10, seed=0)


class TestDependenceSummaries:
    def test_spearman_independence(self):
        spec = spec_independent([F(1, 2), F(1, 2)])
        assert spearman_rho(spec, 1, 2) == 0

    def test_spearman_classic_fgm_maximum(self):
        assert spearman_rho(spec_d2_comonotone(), 1, 2) == pytest.approx(1 / 3)

    def test_spearman_bounds_symmetric_half(self):
        lo, hi = spearman_bounds(F(1, 2), F(1, 2))
        assert (lo, hi) == pytest.approx((-1 / 3, 1 / 3))

    def test_spearman_within_bounds(self):
        spec = r1_spec()
        for j1, j2 in itertools.combinations(range(1, 4), 2):
            lo, hi = spearman_bounds(spec.p[j1 - 1], spec.p[j2 - 1])
            assert lo - 1e-15 <= spearman_rho(spec, j1, j2) <= hi + 1e-15

    def test_pearson_exponential_equals_indicator_covariance(self):
        spec = r1_spec()
        margins = [ExponentialMargin(0.1)] * 3
        for j1, j2 in itertools.combinations(range(1, 4), 2):
            assert pearson_x(spec, margins, j1, j2) == pytest.approx(
                float(spec.cov_indicators(j1, j2)), abs=1e-14
            )

    def test_pearson_independence_zero(self):
        spec = spec_independent([F(1, 2), F(1, 3), F(2, 3)])
        margins = example_final_margins()
        assert pearson_x(spec, margins, 1, 3) == pytest.approx(0.0, abs=1e-14)

    def test_pearson_example_final_r1_row(self):
        spec = r1_spec()
        margins = example_final_margins()
        assert pearson_x(spec, margins, 1, 2) == pytest.approx(0.0605, abs=5e-5)
        assert pearson_x(spec, margins, 1, 3) == pytest.approx(-0.1610, abs=5e-5)
        assert pearson_x(spec, margins, 2, 3) == pytest.approx(-0.1229, abs=5e-5)

    def test_equicorrelation_exchangeable_min(self):
        spec = GfgmSpec.common(F(1, 3), ExchangeableDriver(min_convex(100, F(1, 3))))
        margins = [ExponentialMargin(0.1)] * 100
        assert pearson_x(spec, margins, 1, 2) == pytest.approx(-1 / 450, abs=1e-15)

    def test_block_mean_correlation_matches_equicorrelation(self):
        blocks = sigma_cx_smallest_blocks(100, F(1, 3))
        spec = GfgmSpec.common(F(1, 3), AtomDriver.from_blocks(blocks))
        margins = [ExponentialMargin(0.1)] * 100
        rhos = [
            pearson_x(spec, margins, j1, j2)
            for j1, j2 in itertools.combinations(range(1, 101), 2)
        ]
        assert np.mean(rhos) == pytest.approx(-1 / 450, abs=1e-12)

    def test_uniform_margin_gap_enters_spearman(self):
        # Spearman formula equals the pearson formula with uniform margins
        spec = r1_spec()
        margins = [UniformMargin()] * 3
        for j1, j2 in itertools.combinations(range(1, 4), 2):
            assert pearson_x(spec, margins, j1, j2) == pytest.approx(
                spearman_rho(spec, j1, j2), abs=1e-14
            )
