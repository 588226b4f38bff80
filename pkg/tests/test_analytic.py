import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy import integrate, stats

from rwm_lab import (
    NSigma,
    SphereMarginal,
    alpha_heavy,
    alpha_light,
    beta_law_check,
    exchangeable_pair_check,
    gaussian_mixture_ctx,
    girsanov_residual,
    h_and_hd,
    hd_uniform_deviation,
    mu_k,
    nsigma_h_expectation,
    sample_sphere,
    sphere_marginal_distance,
    sphere_marginal_moment,
    student_t,
    student_t_mixture_ctx,
)
from rwm_lab.analytic import (
    acceptance_reconstruction_error,
    beta_square_ks,
    diaconis_bound,
    sigma_sq_mu0_profile,
)
from rwm_lab.errors import ConfigError
from rwm_lab.seeding import generator

# Frozen closed forms: mu_0(2) = 2 Phi(-1), mu_1(2) = -4 Phi(-1) + 4 phi(1).
MU0_AT_2 = 0.31731050786291415
MU1_AT_2 = 0.33326188235074516
# Analytic d -> infinity limits of d * sup|h_d - h| over K_2 (second-order
# expansion of the F(d, nu) radial acceptance; see decision notes).
D_SUP_LIMIT = {3.0: 2.822976, 5.0: 3.871906}


class TestAlphaLight:
    def test_nonpositive_s_gives_one(self):
        assert alpha_light(-7.3) == 1.0
        assert alpha_light(0.0) == 1.0

    def test_unit_value(self):
        assert alpha_light(1.0) == pytest.approx(math.exp(-1.0), abs=1e-15)

    @given(st.floats(min_value=-50, max_value=50), st.floats(min_value=0, max_value=10))
    @settings(max_examples=100, deadline=None)
    def test_monotone_nonincreasing(self, s, ds):
        assert alpha_light(s + ds) <= alpha_light(s) + 1e-15

    def test_vectorized(self):
        s = np.array([-1.0, 0.0, 2.0])
        np.testing.assert_allclose(alpha_light(s), [1.0, 1.0, math.exp(-2.0)])


class TestAlphaHeavy:
    def test_nonpositive_s_exactly_one(self):
        ctx = student_t_mixture_ctx(50, 3.0)
        assert alpha_heavy(ctx, -1.0, 1.0) == 1.0
        assert alpha_heavy(ctx, 0.0, 0.37) == 1.0

    def test_z_domain(self):
        ctx = student_t_mixture_ctx(50, 3.0)
        with pytest.raises(ValueError):
            alpha_heavy(ctx, 1.0, 0.0)
        with pytest.raises(ValueError):
            alpha_heavy(ctx, 1.0, -2.0)

    @pytest.mark.parametrize("nu", [3.0, 5.0])
    @pytest.mark.parametrize("d", [10, 100])
    def test_reconstructs_generic_log_density_ratio(self, nu, d):
        rng = generator("alpha-recon", nu, d)
        err = acceptance_reconstruction_error(student_t(d, nu), 2.38 / math.sqrt(d), 1000, rng)
        assert err < 1e-6

    def test_limit_probe_at_s1_z1(self):
        # |alpha_d(1; 1) - e^-1| shrinks as d grows (h_d -> h pointwise).
        errs = [
            abs(alpha_heavy(student_t_mixture_ctx(d, 3.0), 1.0, 1.0) - math.exp(-1.0))
            for d in (100, 10_000)
        ]
        assert errs[1] < errs[0]

    def test_gaussian_ctx_is_exp_minus_sz(self):
        # For chi-squared q_d the radial formula collapses to exp(-s z).
        ctx = gaussian_mixture_ctx(200)
        for s, z in [(0.5, 0.8), (2.0, 1.3), (7.0, 0.6)]:
            assert alpha_heavy(ctx, s, z) == pytest.approx(math.exp(-s * z), rel=1e-10)

    def test_qd_densities_integrate_to_one(self):
        for ctx in (student_t_mixture_ctx(40, 3.0), gaussian_mixture_ctx(40)):
            val, _ = integrate.quad(lambda z: float(ctx.qd(z)), 0, np.inf, limit=300)
            assert val == pytest.approx(1.0, abs=1e-8)


class TestHAndHd:
    def test_zero(self):
        ctx = student_t_mixture_ctx(50, 3.0)
        assert h_and_hd(ctx, 0.0, 1.0) == (0.0, 0.0)

    def test_negative_s_both_reduce_to_s(self):
        ctx = student_t_mixture_ctx(50, 3.0)
        h, hd = h_and_hd(ctx, -2.0, 0.7)
        assert h == -2.0 and hd == -2.0

    def test_pointwise_convergence(self):
        vals = []
        for d in (100, 1000):
            h, hd = h_and_hd(student_t_mixture_ctx(d, 3.0), 1.0, 1.0)
            vals.append(abs(hd - h))
        assert vals[1] < vals[0]


class TestHdUniformDeviation:
    def test_gaussian_ctx_negative_halfline_contributes_zero(self):
        ctx = gaussian_mixture_ctx(100)
        s = np.concatenate([np.linspace(-50.0, 0.0, 101), [50.0]])
        z = np.array([1.0])
        # At z = 1 the chi-squared radial form equals exp(-s) exactly, and
        # for s <= 0 both functions are s itself everywhere.
        dev = hd_uniform_deviation(ctx, s, z)
        assert dev < 1e-12

    @pytest.mark.parametrize("nu", [3.0, 5.0])
    def test_unscaled_sup_decays_like_one_over_d(self, nu):
        sup100 = hd_uniform_deviation(student_t_mixture_ctx(100, nu, 2.0)) / 100
        sup1000 = hd_uniform_deviation(student_t_mixture_ctx(1000, nu, 2.0)) / 1000
        assert sup1000 < sup100
        assert sup1000 == pytest.approx(sup100 / 10.0, rel=0.05)

    @pytest.mark.parametrize("nu", [3.0, 5.0])
    def test_d_scaled_deviation_bounded_at_analytic_limit(self, nu):
        vals = [
            hd_uniform_deviation(student_t_mixture_ctx(d, nu, 2.0)) for d in (100, 1000, 10_000)
        ]
        assert vals[0] < vals[1] < vals[2] < D_SUP_LIMIT[nu] * (1 + 1e-3)
        assert vals[2] == pytest.approx(D_SUP_LIMIT[nu], rel=1e-3)

    def test_sanity_envelope_d1e3_vs_1e4(self):
        # Ratio of d-scaled deviations stays within (0.2, 5): boundedness.
        a = hd_uniform_deviation(student_t_mixture_ctx(1000, 5.0, 2.0))
        b = hd_uniform_deviation(student_t_mixture_ctx(10_000, 5.0, 2.0))
        assert np.isfinite(a) and np.isfinite(b)
        assert 0.2 < a / b < 5.0

    def test_grid_validation(self):
        ctx = student_t_mixture_ctx(100, 3.0, 2.0)
        with pytest.raises(ConfigError, match="span"):
            hd_uniform_deviation(ctx, np.linspace(-10, 10, 100), np.array([1.0]))
        with pytest.raises(ConfigError, match="K_a"):
            hd_uniform_deviation(ctx, None, np.array([3.0]))


class TestNSigma:
    def test_moments_by_quadrature(self):
        for sigma in (0.3, 1.0, 4.0):
            law = NSigma(sigma)
            assert law.moment(1) == pytest.approx(law.mean, abs=1e-10)
            m2 = law.moment(2) - law.moment(1) ** 2
            assert m2 == pytest.approx(law.variance, abs=1e-10)

    def test_sigma_domain(self):
        with pytest.raises(ValueError):
            NSigma(0.0)


class TestGirsanov:
    def test_constant_function(self):
        assert girsanov_residual(1.0, lambda s: 1.0) < 1e-8

    def test_square_function(self):
        assert girsanov_residual(2.0, lambda s: s * s) < 1e-8

    def test_cosine(self):
        assert girsanov_residual(0.5, math.cos) < 1e-8

    def test_constant_case_matches_tail_identity(self):
        # E[exp(-S); S > 0] = P(S < 0) = Phi(-sigma/2).
        sigma = 1.3
        law = NSigma(sigma)
        lhs = integrate.quad(lambda s: math.exp(-s) * law.pdf(s), 0, np.inf, epsabs=1e-13)[0]
        assert lhs == pytest.approx(stats.norm.cdf(-sigma / 2), abs=1e-10)


class TestMuK:
    def test_mu0_closed_value(self):
        assert mu_k(2.0, 0) == pytest.approx(MU0_AT_2, abs=1e-12)

    def test_mu1_closed_value(self):
        assert mu_k(2.0, 1) == pytest.approx(MU1_AT_2, abs=1e-12)

    def test_small_sigma_limit(self):
        assert mu_k(1e-9, 0) == pytest.approx(1.0, abs=1e-8)

    @pytest.mark.parametrize("k", [0, 1])
    @pytest.mark.parametrize("sigma", [0.1, 1.0, 2.0, 10.0])
    def test_closed_vs_quadrature(self, k, sigma):
        closed = mu_k(sigma, k, method="closed")
        quad = mu_k(sigma, k, method="quadrature")
        assert abs(closed - quad) < 1e-9

    def test_k2_quadrature_only(self):
        v = mu_k(1.0, 2)
        assert v > 0
        with pytest.raises(ValueError):
            mu_k(1.0, 2, method="closed")

    def test_sigma_domain(self):
        with pytest.raises(ValueError):
            mu_k(-1.0, 0)

    def test_sigma_sq_mu0_profile_shape(self):
        sig, vals = sigma_sq_mu0_profile()
        peak = int(np.argmax(vals))
        assert 0 < peak < len(vals) - 1
        diffs = np.diff(vals[peak:])
        assert np.all((diffs < 0) | (vals[peak:-1] == 0.0))
        # The maximizer of sigma^2 mu_0 sits near 2.4 (the classic scale).
        assert sig[peak] == pytest.approx(2.0)


class TestNsigmaH:
    @pytest.mark.parametrize("sigma", [0.01, 1.0, 10.0])
    def test_expectation_vanishes(self, sigma):
        assert abs(nsigma_h_expectation(sigma)) < 1e-8

    def test_across_scale_range(self):
        for sigma in np.geomspace(0.01, 100.0, 9):
            assert abs(nsigma_h_expectation(float(sigma))) < 1e-8


class TestSphereMarginal:
    @pytest.mark.parametrize("d", [2, 3, 10, 100])
    def test_density_integrates_to_one(self, d):
        law = SphereMarginal(d)
        r = math.sqrt(d)
        val, _ = integrate.quad(law.pdf, -r, r, epsabs=1e-12, limit=400)
        assert val == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("d", [5, 50])
    def test_mean_zero_variance_one(self, d):
        law = SphereMarginal(d)
        r = math.sqrt(d)
        mean, _ = integrate.quad(lambda u: u * law.pdf(u), -r, r, epsabs=1e-12)
        var, _ = integrate.quad(lambda u: u * u * law.pdf(u), -r, r, epsabs=1e-12, limit=300)
        assert abs(mean) < 1e-10
        assert var == pytest.approx(1.0, abs=1e-8)

    def test_cdf_matches_density(self):
        law = SphereMarginal(12)
        got = law.cdf(0.7) - law.cdf(-0.3)
        want, _ = integrate.quad(law.pdf, -0.3, 0.7, epsabs=1e-12)
        assert got == pytest.approx(want, abs=1e-10)

    def test_requires_d_at_least_2(self):
        with pytest.raises(ValueError):
            SphereMarginal(1)

    def test_second_moment_is_one(self):
        for d in (2, 7, 1000):
            assert sphere_marginal_moment(d, 2.0) == pytest.approx(1.0, rel=1e-12)

    def test_fourth_moment_closed_form(self):
        assert sphere_marginal_moment(4, 4.0) == pytest.approx(2.0, rel=1e-12)
        for d in (10, 100):
            assert sphere_marginal_moment(d, 4.0) == pytest.approx(3.0 * d / (d + 2), rel=1e-12)

    def test_fourth_moment_limit(self):
        assert sphere_marginal_moment(10**7, 4.0) == pytest.approx(3.0, rel=1e-5)

    def test_fourth_moment_monte_carlo(self):
        rng = generator("sphere-m4")
        u = sample_sphere(4, 1_000_000, rng)[:, 0]
        m4 = u**4
        se = float(m4.std(ddof=1)) / math.sqrt(m4.size)
        assert abs(float(m4.mean()) - 2.0) < 4 * se

    def test_moment_domain(self):
        with pytest.raises(ValueError):
            sphere_marginal_moment(10, -1.0)


class TestSphereDistances:
    @pytest.mark.parametrize("d", [10, 50, 200, 1000])
    def test_bounds_hold(self, d):
        for metric in ("tv", "w1"):
            assert sphere_marginal_distance(d, metric) <= diaconis_bound(d, metric)

    def test_tv_shrinks_with_d(self):
        assert sphere_marginal_distance(10_000, "tv") < sphere_marginal_distance(50, "tv")

    def test_unknown_metric(self):
        with pytest.raises(ValueError):
            sphere_marginal_distance(50, "kl")

    def test_tv_bound_requires_d5(self):
        with pytest.raises(ValueError):
            diaconis_bound(4, "tv")


class TestBetaLaw:
    @pytest.mark.parametrize("d", [2, 100])
    def test_sphere_samples_pass(self, d):
        rng = generator("beta-ks", d)
        report = beta_law_check(d, 100_000, rng)
        assert report.passed, report

    def test_unnormalized_fixture_fails(self):
        # Power check: raw Gaussian first coordinates (no projection to the
        # sphere) carry chi2 contamination the KS test must detect.
        rng = generator("beta-ks-power")
        d = 10
        g = rng.standard_normal((100_000, d))
        report = beta_square_ks(g[:, 0] , d)
        assert not report.passed


class TestExchangeablePairs:
    def test_two_point_example(self):
        # Uniform law on {(1,2),(2,1)} with f = identity: both sides of the
        # absolute-difference identity equal 1/2.
        values = [1.0, 2.0]
        joint = np.array([[0.0, 0.5], [0.5, 0.0]])
        res = exchangeable_pair_check(values, joint, lambda v: v)
        assert res.exchangeable
        assert res.residual_mean_identity < 1e-15
        assert res.residual_abs_identity < 1e-15
        # Independent hand enumeration of the right-hand side:
        # 2 * [ 0.5*1*(1/2 - 1) + 0.5*2*(1/2 - 0) ] = 1/2 = LHS.
        lhs = 0.5 * (0.5 * abs(1 - 2) + 0.5 * abs(2 - 1))
        assert lhs == pytest.approx(0.5)

    def test_diagonal_law_all_f(self, rng):
        # X = Y almost surely: both residuals vanish for any f.
        values = rng.standard_normal(4)
        joint = np.diag([0.1, 0.2, 0.3, 0.4])
        for _ in range(5):
            fv = rng.standard_normal(4)
            res = exchangeable_pair_check(values, joint, fv)
            assert res.exchangeable
            assert res.residual_mean_identity < 1e-15
            assert res.residual_abs_identity < 1e-15

    def test_non_symmetric_reports_not_exchangeable(self):
        joint = np.array([[0.5, 0.3], [0.0, 0.2]])
        res = exchangeable_pair_check([0.0, 1.0], joint, lambda v: v)
        assert not res.exchangeable
        assert math.isnan(res.residual_abs_identity)

    @given(data=st.data())
    @settings(max_examples=50, deadline=None)
    def test_random_symmetric_tables(self, data):
        n = data.draw(st.integers(min_value=2, max_value=6))
        seed = data.draw(st.integers(min_value=0, max_value=2**31))
        r = generator("exch-hyp", seed)
        values = r.standard_normal(n)
        a = r.random((n, n)) + 0.01
        joint = a + a.T
        joint /= joint.sum()
        fv = r.standard_normal(n)
        res = exchangeable_pair_check(values, joint, fv)
        assert res.exchangeable
        assert res.residual_mean_identity < 1e-12
        assert res.residual_abs_identity < 1e-12

    def test_probability_table_validation(self):
        with pytest.raises(ValueError):
            exchangeable_pair_check([0.0, 1.0], np.array([[0.5, 0.5], [0.5, 0.5]]), lambda v: v)
