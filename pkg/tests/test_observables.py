"""Photon-statistics oracle, closed-form branches, spectra, pendulum averages."""

import numpy as np
import pytest
from scipy.special import gamma as gamma_fn

from selforg import observables as obs
from selforg.model import ModelParams, derive_coefficients
from selforg.steady import solve_fixed_point

# Gibbs-oracle values frozen from high-accuracy quadrature
ORACLE = {
    (2.0, 50): dict(theta_sq=0.6881400780204332, theta_4=0.4779119012948154,
                    g2=1.0092392705740019),
    (0.5, 10_000): dict(g2=2.999400334707772),
    (2.0, 10_000): dict(g2=1.0000443648839972),
    (0.8, 10_000): dict(theta_sq=2.4962644138809846e-4),
}
G2_AT_THRESHOLD = {100: 2.102200039957498,
                   1_000: 2.1613675704704503,
                   10_000: 2.1799007564611528}
NCAV_RATIO_AT_THRESHOLD = {100: 0.986612, 1_000: 0.995569, 10_000: 0.998578}

PENDULUM = {  # omega0, orbital mean, signal mean, power mean, libration
    1.5: (0.3295812611, 0.3078583871, 0.6078329974, 0.5096044106, 0.9820),
    2.0: (0.4077896577, 0.3896375752, 0.7782690482, 0.6871234932, 0.9980),
    3.0: (0.5202363249, 0.5069685874, 1.0139170018, 0.9523894721, 1.0000),
}


def coeffs_at(r, n=50):
    return derive_coefficients(ModelParams(omega_r=0.05, delta_c=-1.0,
                                           n_particles=n, pump_ratio=r))


def test_oracle_frozen_values():
    for (alpha, n), want in ORACLE.items():
        got = obs.g_alpha_oracle(alpha, n)
        for k, v in want.items():
            assert getattr(got, k) == pytest.approx(v, rel=1e-10), (alpha, n, k)
        assert got.quad_error < 1e-8


def test_oracle_free_angle_closed_forms():
    # alpha = 0 is exactly integrable: <Theta^2> = 1/(2N),
    # <Theta^4> = 3(2N-1)/(8N^3)
    for n in (4, 50, 313):
        got = obs.g_alpha_oracle(0.0, n)
        assert got.theta_sq == pytest.approx(0.5 / n, rel=1e-12)
        assert got.theta_4 == pytest.approx(3 * (2 * n - 1) / (8 * n**3),
                                            rel=1e-12)
    assert obs.g_alpha_oracle(0.0, 50).g2 == pytest.approx(2.97, rel=1e-12)


def test_oracle_moment_identity():
    # d<Theta^2>/dalpha = N (<Theta^4> - <Theta^2>^2) for the tilted
    # measure exp(alpha N Theta^2); checks theta_sq and theta_4 against
    # each other through an independent derivative
    h = 1e-4
    for alpha in (0.5, 1.0, 2.0):
        for n in (50, 200):
            up = obs.g_alpha_oracle(alpha + h, n).theta_sq
            dn = obs.g_alpha_oracle(alpha - h, n).theta_sq
            mid = obs.g_alpha_oracle(alpha, n)
            lhs = (up - dn) / (2 * h)
            rhs = n * (mid.theta_4 - mid.theta_sq**2)
            assert lhs == pytest.approx(rhs, rel=1e-5), (alpha, n)


def test_photon_number_definition():
    assert obs.photon_number(0.8, 10, 0.5, 0.25) == pytest.approx(1.0)


def test_ncav_below_threshold_branch():
    got = obs.ncav_closed_forms(0.8, 10_000, 0.5)
    assert got.regime == "below" and got.g2_zero == 3.0
    # exact Gaussian-fluctuation form n nc / (2 (nc - n)); alpha=0.8,
    # nc=1/2 gives exactly 1
    assert got.n_cav == pytest.approx(1.0, rel=1e-12)
    th2 = obs.g_alpha_oracle(0.8, 10_000).theta_sq
    assert obs.photon_number(0.8, 10_000, 0.5, th2) == pytest.approx(
        got.n_cav, rel=5e-2)
    # the widely quoted display form nc^2/2/(nc - n) is the n -> nc limit
    # of the exact branch: the ratio is exactly alpha
    for alpha in (0.9, 0.99, 0.999):
        display = 0.5**2 / 2 / (0.5 - alpha * 0.5)
        exact = obs.ncav_closed_forms(alpha, 10**8, 0.5).n_cav
        assert exact / display == pytest.approx(alpha, rel=1e-12)


def test_ncav_at_threshold_branch():
    got = obs.ncav_closed_forms(1.0, 100, 0.5)
    assert got.regime == "at" and got.method == "quartic-saddle"
    want = 2 * np.sqrt(100) * 0.5 * gamma_fn(0.75) / gamma_fn(0.25)
    assert got.n_cav == pytest.approx(want, rel=1e-12)
    assert got.n_cav == pytest.approx(3.379891200336423, rel=1e-10)


def test_ncav_above_threshold_branch():
    got = obs.ncav_closed_forms(2.0, 10_000, 0.5)
    tb = solve_fixed_point(2.0).theta_bar
    assert got.regime == "above" and got.g2_zero == 1.0
    assert got.n_cav == pytest.approx(10_000 * 2.0 * 0.5 * tb**2, rel=1e-12)
    with pytest.raises(ValueError):
        obs.ncav_closed_forms(-0.1, 100, 0.5)
    with pytest.raises(ValueError):
        obs.ncav_closed_forms(0.5, 100, 0.0)


def test_ncav_threshold_scaling_trend():
    # oracle photon number at alpha=1 approaches the sqrt(N) saddle law
    # from below with an O(1/sqrt N) deficit
    ratios = []
    for n, want in NCAV_RATIO_AT_THRESHOLD.items():
        th2 = obs.g_alpha_oracle(1.0, n).theta_sq
        ncav = obs.photon_number(1.0, n, 0.5, th2)
        ratio = ncav / obs.ncav_closed_forms(1.0, n, 0.5).n_cav
        assert ratio == pytest.approx(want, abs=1e-5)
        ratios.append(ratio)
    assert ratios[0] < ratios[1] < ratios[2] < 1.0
    assert abs(ratios[-1] - 1.0) < 0.03


def test_g2_limits_across_threshold():
    assert obs.g_alpha_oracle(0.5, 10_000).g2 == pytest.approx(3.0, rel=1e-2)
    assert obs.g_alpha_oracle(2.0, 10_000).g2 == pytest.approx(1.0, rel=1e-2)
    # threshold value approached with O(1/sqrt N) error
    const = obs.g2_threshold_constant()
    assert 1.0 < const < 3.0
    assert const == pytest.approx(2.188439615226477, rel=1e-12)
    errs = []
    for n, want in G2_AT_THRESHOLD.items():
        got = obs.g_alpha_oracle(1.0, n).g2
        assert got == pytest.approx(want, rel=1e-10)
        errs.append((const - got) * np.sqrt(n))
    assert np.ptp(errs) < 0.05 * abs(np.mean(errs))   # clean 1/sqrt(N) trend


def test_g2_factorized_matches_oracle_above_threshold():
    for n in (100, 1_000, 10_000):
        fact = obs.g2_factorized(2.0, n)
        exact = obs.g_alpha_oracle(2.0, n).g2
        assert fact == pytest.approx(exact, abs=2e-3 / np.sqrt(n / 100))
    with pytest.raises(ValueError):
        obs.g2_factorized(2.0, 3)


def test_theta_of():
    assert obs.theta_of(np.zeros(7)) == pytest.approx(1.0)
    grid = 2 * np.pi * np.arange(64) / 64
    assert abs(obs.theta_of(grid)) < 1e-14
    out = obs.theta_of(np.zeros((3, 5)))
    assert out.shape == (3,) and np.allclose(out, 1.0)


# ----------------------------------------------------------- spectra

def test_autocorrelation_pure_tone():
    dt, w = 0.5, 0.71
    t = np.arange(8192) * dt
    rng = np.random.default_rng(3)
    th = 0.4 * np.cos(w * t)[:, None] + 1e-3 * rng.standard_normal((8192, 4))
    res = obs.autocorrelation(th, sample_dt=dt, tau_max=200.0, nperseg=2048,
                              omega_min=0.1)
    dw = res.omega[1] - res.omega[0]
    assert abs(res.peak_omega - w) < dw
    assert res.c_tau[0] == pytest.approx(0.08, rel=1e-2)      # A^2/2
    k = int(round(2 * np.pi / w / dt))                        # one period
    assert res.c_tau[k] == pytest.approx(res.c_tau[0], rel=0.05)
    assert np.all(res.s_omega >= 0.0)
    assert np.all(res.c_tau[0] >= res.c_tau - 1e-12)


def test_autocorrelation_white_noise_is_flat():
    rng = np.random.default_rng(11)
    th = rng.standard_normal((4096, 8))
    res = obs.autocorrelation(th, sample_dt=1.0, tau_max=100.0)
    assert res.c_tau[0] == pytest.approx(1.0, rel=0.05)
    assert np.abs(res.c_tau[1:]).max() < 0.1


def test_autocorrelation_burn_in_and_guard():
    dt, w = 0.5, 0.71
    t = np.arange(4096) * dt
    th = np.cos(w * t)
    th[:500] = 50.0          # garbage transient
    res = obs.autocorrelation(th, sample_dt=dt, tau_max=100.0, burn_in=500,
                              omega_min=0.1)
    assert abs(res.peak_omega - w) < 0.02
    with pytest.raises(ValueError, match="tau_max"):
        obs.autocorrelation(th, sample_dt=dt, tau_max=600.0)


# ---------------------------------------------------- pendulum averages

def test_pendulum_frozen_values():
    for r, (w0, orb, sig, pw, lib) in PENDULUM.items():
        s = obs.pendulum_peak(coeffs_at(r))
        assert s.omega0 == pytest.approx(w0, rel=1e-8)
        assert s.omega0_signal == pytest.approx(2 * s.omega0, rel=1e-12)
        assert s.omega_orbital_mean == pytest.approx(orb, rel=1e-8)
        assert s.omega_signal_mean == pytest.approx(sig, rel=1e-8)
        assert s.omega_signal_power_mean == pytest.approx(pw, rel=1e-8)
        assert s.libration_fraction == pytest.approx(lib, abs=2e-4)


def test_pendulum_orderings():
    for r in (1.5, 2.0, 3.0):
        s = obs.pendulum_peak(coeffs_at(r))
        # anharmonic softening below the harmonic bound; power weighting
        # favours slow large-amplitude orbits
        assert s.omega_orbital_mean < s.omega0
        assert s.omega_signal_power_mean < s.omega_signal_mean
        assert s.omega_signal_mean < s.omega0_signal
    libs = [obs.pendulum_peak(coeffs_at(r)).libration_fraction
            for r in (1.2, 1.5, 2.0, 3.0)]
    assert all(np.diff(libs) > 0.0)


def test_pendulum_well_amplitude_matches_coefficients():
    c = coeffs_at(2.0)
    s = obs.pendulum_peak(c)
    u = c.S2 * c.n_particles * abs(c.F0) * s.theta_bar
    assert s.omega0 == pytest.approx(np.sqrt(u / c.m), rel=1e-12)


def test_pendulum_domain_errors():
    with pytest.raises(ValueError, match="threshold"):
        obs.pendulum_peak(coeffs_at(0.9))
    cpos = derive_coefficients(ModelParams(omega_r=0.05, delta_c=1.0,
                                           n_particles=50, pump_ratio=2.0,
                                           beta0=2.0))
    with pytest.raises(ValueError, match="delta_c"):
        obs.pendulum_peak(cpos)
