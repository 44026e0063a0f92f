"""Mean-field Fokker-Planck: stationarity, thermalization, term selection."""

import numpy as np
import pytest

from selforg import meanfield, steady, vlasov
from selforg.model import ModelParams, derive_coefficients


def coeffs_at(r, n=50, delta_c=-1.0):
    return derive_coefficients(ModelParams(omega_r=0.05, delta_c=delta_c,
                                           n_particles=n, pump_ratio=r))


def default_dt(f, c):
    force_cap = 2.0 * abs(c.delta_c) * c.n_bar + abs(c.S2 * c.F0)
    return 0.9 * min(vlasov.cfl_limit(f, c.m, force_cap),
                     meanfield.stability_limit(f, c))


def test_options_validation():
    with pytest.raises(ValueError, match="n_particles"):
        meanfield.MfOptions(n_particles=0)


def test_stability_guard():
    c = coeffs_at(2.0)
    f = meanfield.perturbed_initial(c, 0.1, nx=64, np_=129)
    with pytest.raises(ValueError, match="stability"):
        meanfield.step_mf(f, 10.0, c, meanfield.options_for(c))


def test_perturbed_initial_conventions():
    c = coeffs_at(2.0)
    # default seed is the finite-size level sqrt(1/(2N)), theta = delta/2
    f = meanfield.perturbed_initial(c, nx=64, np_=129)
    want = 0.5 * np.sqrt(0.5 / c.n_particles)
    assert f.theta() == pytest.approx(want, rel=1e-10)
    assert f.p2() == pytest.approx(c.m / c.beta0, rel=1e-6)
    f = meanfield.perturbed_initial(c, 0.2, nx=64, np_=129)
    assert f.theta() == pytest.approx(0.1, rel=1e-10)
    with pytest.raises(ValueError, match="delta_n"):
        meanfield.perturbed_initial(c, 1.5, nx=64, np_=129)


def test_stationary_state_is_stationary():
    # the finite-N thermal field is a fixed point of the full operator
    c = coeffs_at(2.0)
    f = steady.stationary_field(2.0, c.beta, c.m, nx=64, np_=257,
                                n_particles=c.n_particles)
    th0 = f.theta()
    dt = default_dt(f, c)
    opts = meanfield.options_for(c)
    for _ in range(1000):
        meanfield.step_mf(f, dt, c, opts)
    assert abs(f.theta() - th0) < 1e-4
    assert f.norm() == pytest.approx(1.0, abs=1e-10)


def test_below_threshold_thermalizes():
    c = coeffs_at(0.5)
    s, _ = meanfield.run_relaxation(c, t_end=120.0, sample_dt=1.0,
                                    delta_n=0.01, nx=64, np_=129)
    assert abs(s.theta[-1]) < 1e-3
    assert s.kinetic_temp[-1] == pytest.approx(1.0 / c.beta, rel=2e-2)


def test_convergence_flag():
    c = coeffs_at(0.5)
    # uniform stationary start: converged immediately
    s, _ = meanfield.run_relaxation(c, t_end=20.0, sample_dt=1.0,
                                    delta_n=1e-12, nx=64, np_=129)
    assert s.converged
    assert s.t_converged <= 5.0
    # growing quench: not converged on a short window
    c2 = coeffs_at(2.0)
    s2, _ = meanfield.run_relaxation(c2, t_end=30.0, sample_dt=1.0,
                                     nx=64, np_=129)
    assert not s2.converged
    assert np.isnan(s2.t_converged)


def test_plateau_detection():
    c = coeffs_at(2.0)
    s, _ = meanfield.run_relaxation(c, t_end=120.0, sample_dt=1.0,
                                    nx=64, np_=257)
    assert np.isfinite(s.plateau_theta_sq)
    assert 0.02 < s.plateau_theta_sq < s.theta_sq[-1]


def test_zero_coupling_reduces_to_vlasov():
    # with the pump off the collision terms vanish and the stepper must
    # reproduce the collisionless solver bit for bit
    c = coeffs_at(0.0)
    f1 = vlasov.perturbed_gaussian(c, 0.5, nx=64, np_=129, p_max=15.0)
    f2 = f1.copy()
    opts = meanfield.options_for(c)
    for _ in range(50):
        vlasov.step(f1, 0.03, c)
        meanfield.step_mf(f2, 0.03, c, opts)
    assert np.array_equal(f1.values, f2.values)


def test_eta_term_runs_and_conserves_norm():
    # eta0 is nonzero away from delta_c = -kappa; the cross term must stay
    # conservative and produce a small but real difference
    c = coeffs_at(2.0, delta_c=-0.5)
    assert c.eta0 != 0.0
    fe = meanfield.perturbed_initial(c, 0.1, nx=64, np_=257)
    fo = fe.copy()
    dt = default_dt(fe, c)
    for _ in range(50):
        meanfield.step_mf(fe, dt, c, meanfield.options_for(c, include_eta=True))
        meanfield.step_mf(fo, dt, c, meanfield.options_for(c))
    assert fe.norm() == pytest.approx(1.0, abs=1e-12)
    d = np.abs(fe.values - fo.values).max()
    assert 0.0 < d < 1e-3


def test_collective_only_option():
    # dropping self terms changes the force at order S^2 but keeps norm
    c = coeffs_at(2.0)
    f = meanfield.perturbed_initial(c, 0.1, nx=64, np_=129)
    opts = meanfield.options_for(c, include_self_terms=False)
    dt = default_dt(f, c)
    for _ in range(20):
        meanfield.step_mf(f, dt, c, opts)
    assert f.norm() == pytest.approx(1.0, abs=1e-12)
