"""Series containers: validation, column order, CSV round trips."""

import numpy as np
import pytest

from selforg.cli import RunDir
from selforg.series import EnsembleSeries, QuenchSeries, RelaxationSeries


def make_quench(n=5):
    t = np.arange(n, dtype=float)
    return QuenchSeries(t=t, theta=0.1 * t, xi2=t**2, energy=-t, p2=t + 1.0)


def test_times_must_increase():
    bad = np.array([0.0, 1.0, 1.0])
    with pytest.raises(ValueError, match="increasing"):
        QuenchSeries(t=bad, theta=bad, xi2=bad, energy=bad, p2=bad)
    with pytest.raises(ValueError, match="increasing"):
        RelaxationSeries(t=bad, theta=bad, theta_sq=bad, kinetic_temp=bad)


def test_theta_sq_bounds():
    t = np.array([0.0, 1.0])
    z = np.zeros(2)
    with pytest.raises(ValueError, match="Theta"):
        EnsembleSeries(t=t, theta=np.zeros((2, 3)), theta_sq_mean=np.array([0.5, 1.5]),
                       theta_sq_stderr=z, kinetic_temp=z, kinetic_temp_stderr=z,
                       xi=z, c2=z)


def test_column_orders():
    s = make_quench()
    names, arrays = s.columns()
    assert names == ("t", "theta", "xi2", "energy", "p2")
    assert arrays[0] is s.t and arrays[-1] is s.p2

    t = np.array([0.0, 1.0])
    z = np.zeros(2)
    r = RelaxationSeries(t=t, theta=z, theta_sq=z, kinetic_temp=z)
    assert r.columns()[0] == ("t", "theta", "theta_sq", "kinetic_temp")
    e = EnsembleSeries(t=t, theta=np.zeros((2, 3)), theta_sq_mean=z,
                       theta_sq_stderr=z, kinetic_temp=z, kinetic_temp_stderr=z,
                       xi=z, c2=z)
    assert e.columns()[0] == ("t", "theta_sq_mean", "kinetic_temp", "c2",
                              "theta_sq_stderr", "kinetic_temp_stderr")


def test_csv_roundtrip_is_exact(tmp_path):
    # 17 significant digits reproduce float64 bit for bit
    rng = np.random.default_rng(42)
    t = np.cumsum(rng.random(20)) + 1e-9
    vals = [rng.standard_normal(20) * 10.0**rng.integers(-8, 8) for _ in range(3)]
    run = RunDir(tmp_path / "run", "steady")
    run.write_csv("table.csv", ("t", "a", "b", "c"), (t, *vals))
    back = np.genfromtxt(tmp_path / "run" / "table.csv", delimiter=",",
                         names=True)
    assert np.array_equal(back["t"], t)
    for name, v in zip(("a", "b", "c"), vals):
        assert np.array_equal(back[name], v)


def test_csv_rejects_ragged_columns(tmp_path):
    run = RunDir(tmp_path / "run", "steady")
    with pytest.raises(ValueError, match="ragged"):
        run.write_csv("bad.csv", ("a", "b"), (np.zeros(3), np.zeros(4)))
