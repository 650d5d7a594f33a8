"""Special-function battery: scalar functions against independent oracles,
G-function identities, policy self-consistency and the Laplace integrals."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from fsolink.special import (
    ContourPolicy,
    ConvergenceError,
    DomainError,
    EXP_SPEC,
    MeijerGSpec,
    PoleSeparationError,
    bessel_k,
    cumulative_image,
    doubled_image,
    erf,
    gamma_q,
    laplace_g_integral,
    laplace_image,
    laplace_product_g_integral,
    ln_gamma,
    meijer_g,
)

import oracles

BESSEL_SPEC = MeijerGSpec(2, 0, (), (0.5, -0.5))  # 2*sqrt(x)^(0)*K_1(2*sqrt(x))
RATIONAL_SPEC = MeijerGSpec(1, 1, (0.0,), (0.0,))  # 1/(1+x)


# ---------------------------------------------------------------------------
# scalar functions
# ---------------------------------------------------------------------------


class TestLnGamma:
    def test_anchor_values(self):
        assert ln_gamma(1.0) == pytest.approx(0.0, abs=1e-15)
        assert ln_gamma(5.0) == pytest.approx(math.log(24.0), rel=1e-15)
        # ln Gamma(1/2) = ln sqrt(pi)
        assert ln_gamma(0.5) == pytest.approx(0.5 * math.log(math.pi), rel=1e-14)

    def test_matches_libm_over_domain(self):
        xs = np.logspace(-3, math.log10(170.0), 400)
        for x in xs:
            assert ln_gamma(float(x)) == pytest.approx(math.lgamma(x), rel=1e-13, abs=1e-13)

    def test_rejects_nonpositive(self):
        with pytest.raises(DomainError):
            ln_gamma(0.0)
        with pytest.raises(DomainError):
            ln_gamma(-3.5)

    @given(st.floats(min_value=1e-3, max_value=80.0))
    @settings(max_examples=50, deadline=None)
    def test_recurrence(self, x):
        assert ln_gamma(x + 1.0) == pytest.approx(ln_gamma(x) + math.log(x), rel=1e-12, abs=1e-12)


class TestErf:
    def test_anchor_values(self):
        assert erf(0.0) == 0.0
        assert erf(1.0) == pytest.approx(oracles.erf_series(1.0), abs=1e-15)
        assert erf(-1.0) == -erf(1.0)

    def test_against_series_oracle(self):
        for x in np.linspace(-3.5, 3.5, 29):
            assert erf(float(x)) == pytest.approx(oracles.erf_series(float(x)), abs=1e-14)

    @given(st.floats(min_value=-6.0, max_value=6.0))
    @settings(max_examples=50, deadline=None)
    def test_odd(self, x):
        assert erf(-x) == pytest.approx(-erf(x), abs=5e-16)


class TestGammaQ:
    def test_anchor_values(self):
        assert gamma_q(0.5, 0.0) == 1.0
        assert gamma_q(1.0, 1.0) == pytest.approx(math.exp(-1.0), rel=1e-14)
        # Gamma(1/2, x)/sqrt(pi) = erfc(sqrt(x))
        assert gamma_q(0.5, 1.0) == pytest.approx(1.0 - oracles.erf_series(1.0), rel=1e-13)

    def test_against_quadrature_oracle(self):
        for p, x in [(0.3, 0.2), (2.7, 1.0), (5.0, 9.0), (1.5, 0.01)]:
            assert gamma_q(p, x) == pytest.approx(oracles.upper_gamma_q_quad(p, x), rel=1e-9)

    def test_monotone_in_x_on_random_pairs(self):
        rng = np.random.default_rng(1234)
        p = rng.uniform(0.05, 20.0, 1000)
        x = rng.uniform(0.0, 30.0, 1000)
        dx = rng.uniform(0.0, 5.0, 1000)
        assert np.all(gamma_q(p, x + dx) <= gamma_q(p, x) + 1e-15)

    def test_rejects_bad_domain(self):
        with pytest.raises(DomainError):
            gamma_q(0.0, 1.0)
        with pytest.raises(DomainError):
            gamma_q(1.0, -0.5)


class TestBesselK:
    def test_order_symmetry(self):
        assert bessel_k(-1.0, 2.0) == bessel_k(1.0, 2.0)

    def test_half_order_closed_form(self):
        # K_{1/2}(x) = sqrt(pi/(2x)) * exp(-x)
        assert bessel_k(0.5, 1.0) == pytest.approx(
            math.sqrt(math.pi / 2.0) * math.exp(-1.0), rel=1e-13
        )

    def test_against_integral_oracle(self):
        for nu in (0.0, 0.37, 1.0, 2.0, 7.5, 20.0):
            for x in (1e-6, 0.03, 1.0, 10.0, 50.0):
                want = oracles.bessel_k_integral(nu, x)
                assert bessel_k(nu, x) == pytest.approx(want, rel=1e-10), (nu, x)

    def test_positive_and_log_convex_in_x(self):
        rng = np.random.default_rng(99)
        nu = rng.uniform(0.0, 20.0, 300)
        x = rng.uniform(1e-3, 40.0, 300)
        y = rng.uniform(1e-3, 40.0, 300)
        kx, ky = bessel_k(nu, x), bessel_k(nu, y)
        km = bessel_k(nu, 0.5 * (x + y))
        assert np.all(kx > 0.0) and np.all(ky > 0.0)
        assert np.all(np.log(kx) + np.log(ky) >= 2.0 * np.log(km) - 1e-10)

    def test_rejects_nonpositive_argument(self):
        with pytest.raises(DomainError):
            bessel_k(1.0, 0.0)


# ---------------------------------------------------------------------------
# G-function spec construction
# ---------------------------------------------------------------------------


class TestMeijerGSpec:
    def test_order_bounds_enforced(self):
        with pytest.raises(DomainError):
            MeijerGSpec(2, 0, (), (0.0,))  # m > q
        with pytest.raises(DomainError):
            MeijerGSpec(0, 1, (), (0.0,))  # n > p

    def test_pole_collision_rejected(self):
        # top 2.0 gives decreasing poles at 1, 0, -1, ...; bottom 0.0 gives
        # increasing poles at 0, 1, 2, ... -> collision
        with pytest.raises(PoleSeparationError):
            MeijerGSpec(1, 1, (2.0,), (0.0,))

    def test_within_family_coincidence_allowed(self):
        MeijerGSpec(3, 0, (1.44,), (0.5, 0.5, 0.0))  # duplicate bottom values are fine

    def test_negative_integer_gap_allowed(self):
        # a - 1 - b = -1 is not a *nonnegative* integer: families stay apart
        MeijerGSpec(1, 1, (0.0,), (0.0,))


# ---------------------------------------------------------------------------
# contour evaluation: identity battery
# ---------------------------------------------------------------------------


IDENTITY_GRID = np.logspace(math.log10(1e-3), math.log10(20.0), 23)


class TestMeijerIdentities:
    def test_exponential_anchor(self):
        assert meijer_g(EXP_SPEC, 2.0) == pytest.approx(math.exp(-2.0), rel=1e-12)

    def test_exponential_battery(self):
        for x in IDENTITY_GRID:
            assert meijer_g(EXP_SPEC, float(x)) == pytest.approx(
                math.exp(-float(x)), rel=1e-9
            ), x

    def test_bessel_anchor(self):
        want = 2.0 * oracles.bessel_k_integral(1.0, 1.0)
        assert meijer_g(BESSEL_SPEC, 0.25) == pytest.approx(want, rel=1e-11)

    def test_bessel_battery(self):
        # G^{2,0}_{0,2}(x | -; 1/2, -1/2) = 2 K_1(2 sqrt(x))
        for x in IDENTITY_GRID:
            want = 2.0 * bessel_k(1.0, 2.0 * math.sqrt(float(x)))
            assert meijer_g(BESSEL_SPEC, float(x)) == pytest.approx(want, rel=1e-9), x

    def test_rational_battery(self):
        for x in IDENTITY_GRID:
            assert meijer_g(RATIONAL_SPEC, float(x)) == pytest.approx(
                1.0 / (1.0 + float(x)), rel=1e-9
            ), x

    @given(st.floats(min_value=1e-3, max_value=20.0))
    @settings(max_examples=40, deadline=None)
    def test_exponential_identity_property(self, x):
        assert meijer_g(EXP_SPEC, x) == pytest.approx(math.exp(-x), rel=1e-9)

    def test_deterministic(self):
        spec = MeijerGSpec(6, 1, (0.5, 0.72, 1.22), (0.22, 0.72, 0.5, 1.0, 0.0, 0.5, -0.5))
        a = meijer_g(spec, 0.37)
        b = meijer_g(spec, 0.37)
        assert a == b

    def test_rejects_bad_argument(self):
        with pytest.raises(DomainError):
            meijer_g(EXP_SPEC, 0.0)
        with pytest.raises(DomainError):
            meijer_g(EXP_SPEC, -1.0)

    def test_budget_exhaustion_carries_partial(self):
        tight = ContourPolicy(node_budget=70, rel_tol=1e-12)
        with pytest.raises(ConvergenceError) as err:
            meijer_g(RATIONAL_SPEC, 17.0, tight)
        assert math.isfinite(err.value.estimate)
        assert err.value.achieved_tol > 0.0

    def test_abscissa_outside_strip_rejected(self):
        with pytest.raises(DomainError):
            meijer_g(RATIONAL_SPEC, 1.0, ContourPolicy(abscissa=0.5))


def _cdf_family_spec(alpha: float, g: float) -> MeijerGSpec:
    g2 = g * g
    return MeijerGSpec(
        6, 1,
        (0.5, g2 / 2.0, (g2 + 1.0) / 2.0),
        ((g2 - 1.0) / 2.0, g2 / 2.0, (alpha - 1.0) / 2.0, alpha / 2.0, 0.0, 0.5, -0.5),
    )


class TestPolicySelfConsistency:
    def test_refined_policy_agrees(self):
        # tolerance tau and tau/10 agree within 10*tau over the CDF family
        tau = 1e-8
        coarse = ContourPolicy(rel_tol=tau)
        fine = ContourPolicy(rel_tol=tau / 10.0)
        xs = np.logspace(-6, 3, 7)
        for alpha in (1.0, 2.0, 3.0, 4.0):
            for g in (1.2, 4.0):
                spec = _cdf_family_spec(alpha, g)
                for x in xs:
                    a = meijer_g(spec, float(x), coarse)
                    b = meijer_g(spec, float(x), fine)
                    assert abs(a - b) <= 10.0 * tau * max(abs(b), 1e-300), (alpha, g, x)

    def test_policy_validation(self):
        with pytest.raises(DomainError):
            ContourPolicy(rel_tol=0.0)
        with pytest.raises(DomainError):
            ContourPolicy(truncation_height=-1.0)


# ---------------------------------------------------------------------------
# image bookkeeping
# ---------------------------------------------------------------------------


class TestImages:
    def test_cumulative_of_exponential(self):
        # integral_0^x exp(-t) dt = 1 - exp(-x)
        img = cumulative_image(EXP_SPEC, 1.0)
        for x in (0.1, 1.0, 5.0):
            assert x * meijer_g(img, x) == pytest.approx(1.0 - math.exp(-x), rel=1e-10)

    def test_cumulative_power_weight(self):
        # integral_0^x t^(-1/2) exp(-t) dt = gamma(1/2) * P(1/2, x)
        img = cumulative_image(EXP_SPEC, 0.5)
        for x in (0.2, 2.0):
            want = math.gamma(0.5) * (1.0 - gamma_q(0.5, x))
            assert math.sqrt(x) * meijer_g(img, x) == pytest.approx(want, rel=1e-10)

    def test_laplace_image_of_exponential(self):
        # integral_0^inf exp(-w t) exp(-c t) dt = 1/(w + c)
        img = laplace_image(EXP_SPEC, 1.0)
        for c, w in [(1.0, 1.0), (0.5, 2.0)]:
            assert w ** -1.0 * meijer_g(img, c / w) == pytest.approx(1.0 / (w + c), rel=1e-10)

    def test_doubling_of_exponential(self):
        # exp(-c sqrt(x)) = pref * G^{2,0}_{0,2}(c^2 x / 4 | -; 0, 1/2)
        img, log_pref = doubled_image(EXP_SPEC)
        assert img.m == 2 and img.n == 0 and img.q == 2
        for c, x in [(1.0, 0.8), (2.5, 3.0)]:
            got = math.exp(log_pref) * meijer_g(img, c * c * x / 4.0)
            assert got == pytest.approx(math.exp(-c * math.sqrt(x)), rel=1e-10)


# ---------------------------------------------------------------------------
# Laplace-type integrals
# ---------------------------------------------------------------------------


class TestLaplaceGIntegral:
    def test_exponential_trivials(self):
        # integral exp(-2t) dt = 1/2 ; integral t exp(-2t) dt = 1/4
        assert laplace_g_integral(EXP_SPEC, 1.0, 1.0, 1.0) == pytest.approx(0.5, rel=1e-10)
        assert laplace_g_integral(EXP_SPEC, 1.0, 2.0, 1.0) == pytest.approx(0.25, rel=1e-10)

    def test_closed_form_matches_quadrature_on_cdf_family(self):
        # the dual-hop CDF spec with alpha=2, g=1.2, pointing from the
        # worked geometry, mu=100, s = P + 1/2 and rate = q for CBPSK
        from fsolink.channel import pointing_geometry, HopParams, snr_cdf_parts

        pt = pointing_geometry(0.1, 1.0, 0.1)
        hop = HopParams(alpha=2.0, mu=100.0, pointing=pt)
        _, scale, spec = snr_cdf_parts(hop)
        closed = laplace_g_integral(spec, scale, 1.0, 1.0, method="closed_form")
        brute = laplace_g_integral(spec, scale, 1.0, 1.0, method="quadrature")
        assert closed == pytest.approx(brute, rel=1e-6)

    def test_divergent_head_rejected(self):
        spec = MeijerGSpec(1, 0, (), (-1.0,))  # G ~ x^-1 at 0
        with pytest.raises(DomainError):
            laplace_g_integral(spec, 1.0, 0.5, 1.0)

    def test_bad_method_rejected(self):
        with pytest.raises(DomainError):
            laplace_g_integral(EXP_SPEC, 1.0, 1.0, 1.0, method="magic")


def _log_grid_product_oracle(spec1, c1, spec2, c2, s, rate):
    """Brute-force reference: trapezoid on a log grid in t, refined until
    two consecutive refinements agree to 1e-6."""
    lo, hi = -40.0, 8.0
    prev = None
    n = 2001
    for _ in range(6):
        v = np.linspace(lo, hi, n)
        t = np.exp(v)
        f = np.array([
            math.exp(-rate * ti + s * vi) * meijer_g(spec1, c1 * ti) * meijer_g(spec2, c2 * ti)
            for ti, vi in zip(t, v)
        ])
        val = float(np.trapezoid(f, v))
        if prev is not None and abs(val - prev) <= 1e-6 * abs(val):
            return val
        prev = val
        n = 2 * n - 1
    return prev


class TestLaplaceProductGIntegral:
    def test_exponential_product_trivial(self):
        # integral exp(-3t) dt = 1/3
        got = laplace_product_g_integral(EXP_SPEC, 1.0, EXP_SPEC, 1.0, 1.0, 1.0)
        assert got == pytest.approx(1.0 / 3.0, rel=1e-9)

    def test_swap_symmetry_is_exact(self):
        spec_a = _cdf_family_spec(2.0, 1.2)
        spec_b = _cdf_family_spec(3.0, 1.2)
        x = laplace_product_g_integral(spec_a, 0.01, spec_b, 0.02, 1.5, 1.0)
        y = laplace_product_g_integral(spec_b, 0.02, spec_a, 0.01, 1.5, 1.0)
        assert x == y

    def test_against_log_grid_oracle(self):
        # the symmetric cross term with alpha1=alpha2=2, g=1.2, mu=100, CBPSK
        from fsolink.channel import HopParams, snr_cdf_parts

        hop = HopParams.from_ratio(alpha=2.0, mu=100.0, g=1.2, a0=0.0199)
        _, scale, spec = snr_cdf_parts(hop)
        got = laplace_product_g_integral(spec, scale, spec, scale, 1.5, 1.0)
        want = _log_grid_product_oracle(spec, scale, spec, scale, 1.5, 1.0)
        assert got == pytest.approx(want, rel=2e-6)

    def test_divergent_head_rejected(self):
        spec = MeijerGSpec(1, 0, (), (-0.75,))
        with pytest.raises(DomainError):
            laplace_product_g_integral(spec, 1.0, spec, 1.0, 1.0, 1.0)
