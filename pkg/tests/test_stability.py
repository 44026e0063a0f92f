"""Dispersion residual, growth-rate roots, and the closed-form approximation."""

import numpy as np
import pytest

from selforg import stability
from selforg.model import ModelParams, derive_coefficients

# frozen roots at omega_r = 0.05, delta_c = -1, beta0 = beta = 2
GAMMA_FULL = {1.5: 0.06359488974074616,
              2.0: 0.11146373584819473,
              3.0: 0.1828616359779034}
APPROX_CHI2 = 0.11067723069030279


def coeffs_at(r, **over):
    kw = dict(omega_r=0.05, delta_c=-1.0, n_particles=50, pump_ratio=r)
    kw.update(over)
    return derive_coefficients(ModelParams(**kw))


def test_landau_g_shape_and_limits():
    assert stability.landau_g(0.0) == 1.0
    # monotone decreasing, positive for b > 0, large-b tail ~ 1/(2 b^2)
    bs = np.linspace(-3.0, 3.0, 41)
    vals = [stability.landau_g(b) for b in bs]
    assert all(np.diff(vals) < 0.0)
    assert stability.landau_g(40.0) == pytest.approx(0.5 / 40.0**2, rel=1e-3)
    assert stability.landau_g(-40.0) > 1e100   # blows up but stays finite
    assert np.isfinite(stability.landau_g(-40.0))
    # continuity across the series cut
    lo, hi = stability.landau_g(25.0 - 1e-9), stability.landau_g(25.0 + 1e-9)
    assert lo == pytest.approx(hi, rel=1e-6)


def test_residual_endpoints():
    c = coeffs_at(2.0)
    # gamma = 0 reduces to 1 + delta_c * n_bar * beta0 = 1 - 2
    r0 = stability.dispersion_residual(0.0, c.n_bar, 2.0, c.beta, c.delta_c, c.m)
    assert r0 == pytest.approx(-1.0, abs=1e-14)
    # no pump: residual identically 1
    for g in (-0.5, 0.0, 0.7):
        assert stability.dispersion_residual(g, 0.0, 2.0, c.beta, c.delta_c,
                                             c.m) == 1.0


def test_growth_rate_frozen_roots():
    for r, want in GAMMA_FULL.items():
        res = stability.growth_rate(coeffs_at(r))
        assert res.gamma == pytest.approx(want, rel=1e-10)
        assert res.regime == "unstable"
        assert abs(res.residual_at_root) < 1e-10


def test_threshold_is_exact_zero_of_the_residual():
    # n_bar = n_crit * beta/beta0 puts the root at gamma = 0
    for dc in (-0.5, -1.0, -2.0):
        for b0 in (1.0, 2.0, 4.0):
            c = coeffs_at(1.0, delta_c=dc, beta0=b0)
            n_star = c.n_crit * c.beta / b0
            r = n_star / c.n_crit
            res = stability.growth_rate(coeffs_at(r, delta_c=dc, beta0=b0))
            assert abs(res.gamma) < 1e-6
            assert res.regime == "critical"


def test_below_threshold_damps():
    res = stability.growth_rate(coeffs_at(0.5))
    assert res.regime == "stable" and res.gamma < 0.0


def test_gamma_monotone_in_pump():
    gs = [stability.growth_rate(coeffs_at(r)).gamma
          for r in (1.2, 1.5, 2.0, 2.5, 3.0)]
    assert all(np.diff(gs) > 0.0)


def test_residual_monotone_in_gamma_on_bracket():
    c = coeffs_at(2.0)
    gs = np.linspace(-0.5, 0.5, 101)
    vals = [stability.dispersion_residual(g, c.n_bar, 2.0, c.beta,
                                          c.delta_c, c.m) for g in gs]
    assert all(np.diff(vals) > 0.0)


def test_approx_identity_at_unit_chi():
    # ln(1/1.135) = ln(1 - 27/227) exactly, so gamma(chi=1) = 0
    assert abs(stability.growth_rate_approx(1.0, 2.0, 2.0, -1.0, 0.05)) < 1e-12


def test_approx_frozen_value_and_signs():
    got = stability.growth_rate_approx(2.0, 2.0, 2.0, -1.0, 0.05)
    assert got == pytest.approx(APPROX_CHI2, rel=1e-12)
    assert stability.growth_rate_approx(0.8, 2.0, 2.0, -1.0, 0.05) < 0.0
    assert stability.growth_rate_approx(1.2, 2.0, 2.0, -1.0, 0.05) > 0.0
    with pytest.raises(ValueError, match="chi"):
        stability.growth_rate_approx(9.0, 2.0, 2.0, -1.0, 0.05)
    with pytest.raises(ValueError, match="chi"):
        stability.growth_rate_approx(0.0, 2.0, 2.0, -1.0, 0.05)


def test_approx_tracks_full_root_above_threshold():
    # chi = n_bar * beta0 at |delta_c| = 1; agreement degrades away from
    # threshold but stays inside 10% over the tested pump range
    for r in (1.5, 2.0, 2.5, 3.0):
        c = coeffs_at(r)
        full = stability.growth_rate(c).gamma
        approx = stability.growth_rate_approx(abs(c.delta_c) * c.n_bar * 2.0,
                                              2.0, c.beta, c.delta_c, c.omega_r)
        assert abs(approx - full) / full < 0.10


def test_profile_residual_matches_gaussian_form():
    c = coeffs_at(2.0)
    p = np.linspace(-80.0, 80.0, 20001)
    f = np.sqrt(2.0 / (2.0 * np.pi * c.m)) * np.exp(-2.0 * p**2 / (2.0 * c.m))
    for g in (0.05, 0.11146373584819473, 0.3):
        closed = stability.dispersion_residual(g, c.n_bar, 2.0, c.beta,
                                               c.delta_c, c.m)
        quad = stability.dispersion_residual_profile(g, c.n_bar, c.beta,
                                                     c.delta_c, c.m, p, f)
        assert quad == pytest.approx(closed, abs=2e-4)
    with pytest.raises(ValueError, match="gamma"):
        stability.dispersion_residual_profile(0.0, c.n_bar, c.beta,
                                              c.delta_c, c.m, p, f)


def test_fit_growth_rate_recovers_synthetic_slope():
    t = np.linspace(0.0, 120.0, 2001)
    amp = 1e-6 * np.exp(0.1114 * t)
    amp = np.minimum(amp, 0.4)   # saturate like a real quench
    rate, (t0, t1) = stability.fit_growth_rate(t, amp)
    assert rate == pytest.approx(0.1114, rel=1e-6)
    assert t0 < t1
    with pytest.raises(ValueError, match="window"):
        stability.fit_growth_rate(t[:3], amp[:3])
