"""Grid geometry, quadrature, health checks, and snapshot IO."""

import numpy as np
import pytest

from selforg.phasespace import PhaseSpaceField, uniform_gaussian


def gaussian_field(nx=64, np_=401, p_max=9.0, sigma=1.5):
    f = PhaseSpaceField(np.empty((nx, np_)), p_max)
    f.values[:] = np.exp(-f.p**2 / (2.0 * sigma**2))[None, :]
    return f.normalize()


def test_grid_geometry():
    f = PhaseSpaceField(np.ones((16, 11)), p_max=4.0)
    assert f.nx == 16 and f.np_ == 11
    assert f.dx == pytest.approx(2.0 * np.pi / 16, rel=1e-15)
    assert f.dp == pytest.approx(0.8, rel=1e-15)
    assert f.p[0] == -4.0 and f.p[-1] == 4.0
    assert f.x[0] == 0.0
    assert f.x[-1] == pytest.approx(2.0 * np.pi - f.dx, rel=1e-14)
    # momentum grid symmetric about zero
    assert np.abs(f.p + f.p[::-1]).max() < 1e-14


def test_constructor_validation():
    with pytest.raises(ValueError, match="2-d"):
        PhaseSpaceField(np.ones(8), p_max=1.0)
    with pytest.raises(ValueError, match="momentum"):
        PhaseSpaceField(np.ones((8, 1)), p_max=1.0)


def test_normalize_and_marginals():
    f = gaussian_field()
    assert f.norm() == pytest.approx(1.0, abs=1e-13)
    assert f.x_marginal().sum() * f.dx == pytest.approx(f.norm(), rel=1e-13)
    assert f.p_marginal().sum() * f.dp == pytest.approx(f.norm(), rel=1e-13)


def test_moments_on_analytic_field():
    # f(x, p) = (1 + cos x)/(2 pi) * gaussian(p): theta = 1/2 exactly on a
    # uniform x grid (trig polynomial), p2 = sigma^2 up to truncation tail
    sigma = 1.5
    f = gaussian_field(sigma=sigma)
    f.values *= (1.0 + np.cos(f.x))[:, None]
    f.normalize()
    assert f.theta() == pytest.approx(0.5, abs=1e-12)
    # 6 sigma truncation leaves a ~7e-8 relative tail in p^2
    assert f.p2() == pytest.approx(sigma**2, rel=1e-6)
    # even in p, so the momentum-current functional vanishes
    assert abs(f.xi()) < 1e-12


def test_xi_on_odd_component():
    # add an odd-in-p, sin-x component with known <p sin x>
    sigma, a = 1.2, 0.05
    f = gaussian_field(sigma=sigma)
    g = f.values[0].copy()          # normalized gaussian row / (2 pi)
    f.values += a * np.sin(f.x)[:, None] * (f.p * g)[None, :]
    # odd term integrates to zero, norm unchanged
    assert f.norm() == pytest.approx(1.0, abs=1e-12)
    want = a * np.pi * sigma**2 * (2.0 * np.pi * g.sum() * f.dp) / (2.0 * np.pi)
    assert f.xi() == pytest.approx(want, rel=1e-8)


def test_check_passes_on_healthy_field():
    uniform_gaussian(2.0, 10.0).check()


def test_check_norm_violation():
    f = gaussian_field()
    f.values *= 1.1
    with pytest.raises(ValueError, match="norm"):
        f.check()


def test_check_negative_values():
    f = gaussian_field()
    f.values[3, 5] = -1e-3
    f.normalize()
    with pytest.raises(ValueError, match="negative"):
        f.check()


def test_check_nonfinite():
    f = gaussian_field()
    f.values[0, 0] = np.nan
    with pytest.raises(FloatingPointError):
        f.check()


def test_check_boundary_mass():
    # truncating a sigma = 1.5 gaussian at 2 sigma leaves visible tails
    f = gaussian_field(p_max=3.0)
    assert f.boundary_mass() > 1e-3
    with pytest.raises(ValueError, match="boundary"):
        f.check()


def test_uniform_gaussian_statistics():
    beta0, m = 2.0, 10.0
    f = uniform_gaussian(beta0, m)
    assert f.norm() == pytest.approx(1.0, abs=1e-13)
    assert f.p2() == pytest.approx(m / beta0, rel=1e-6)
    assert abs(f.theta()) < 1e-12
    assert abs(f.xi()) < 1e-12
    # default truncation at 6 thermal sigmas
    assert f.p_max == pytest.approx(6.0 * np.sqrt(m / beta0), rel=1e-15)


def test_copy_is_independent():
    f = gaussian_field()
    g = f.copy()
    g.values[0, 0] += 1.0
    assert f.values[0, 0] != g.values[0, 0]


def test_save_load_roundtrip(tmp_path):
    f = gaussian_field(nx=32, np_=65, p_max=5.0)
    f.time = 12.5
    stem = tmp_path / "snap"      # path-like stems must work too
    f.save(stem)
    g = PhaseSpaceField.load(stem)
    assert g.p_max == f.p_max
    assert g.time == f.time
    assert g.values.shape == f.values.shape
    assert np.array_equal(g.values, f.values)
