"""Sampled time-series containers shared by the solvers.

Each solver returns its own small record type; all of them expose
``columns()`` as (names, arrays) in a fixed order for CSV writing, and
validate that sample times are strictly increasing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


def _check_times(t: np.ndarray) -> None:
    if t.size and np.any(np.diff(t) <= 0.0):
        raise ValueError("sample times must be strictly increasing")


@dataclass
class QuenchSeries:
    """Vlasov quench observables: order parameter, current, energy, <p^2>."""

    t: np.ndarray
    theta: np.ndarray
    xi2: np.ndarray
    energy: np.ndarray
    p2: np.ndarray

    def __post_init__(self):
        _check_times(self.t)

    def columns(self):
        return (("t", "theta", "xi2", "energy", "p2"),
                (self.t, self.theta, self.xi2, self.energy, self.p2))


@dataclass
class RelaxationSeries:
    """Mean-field relaxation observables."""

    t: np.ndarray
    theta: np.ndarray
    theta_sq: np.ndarray
    kinetic_temp: np.ndarray
    converged: bool = False
    t_converged: float = np.nan     # first time |dtheta/dt| stays below threshold
    plateau_theta_sq: float = np.nan   # prethermalized plateau level, NaN if none found

    def __post_init__(self):
        _check_times(self.t)

    def columns(self):
        return (("t", "theta", "theta_sq", "kinetic_temp"),
                (self.t, self.theta, self.theta_sq, self.kinetic_temp))


@dataclass
class EnsembleSeries:
    """N-body ensemble observables; theta keeps the per-trajectory detail."""

    t: np.ndarray
    theta: np.ndarray            # (n_samples, n_traj)
    theta_sq_mean: np.ndarray    # <Theta^2> across trajectories
    theta_sq_stderr: np.ndarray
    kinetic_temp: np.ndarray
    kinetic_temp_stderr: np.ndarray
    xi: np.ndarray               # <Xi> across trajectories
    c2: np.ndarray               # pair-correlation scalar

    def __post_init__(self):
        _check_times(self.t)
        if np.any(self.theta_sq_mean < 0.0) or np.any(self.theta_sq_mean > 1.0):
            raise ValueError("<Theta^2> must lie in [0, 1]")

    def columns(self):
        return (("t", "theta_sq_mean", "kinetic_temp", "c2",
                 "theta_sq_stderr", "kinetic_temp_stderr"),
                (self.t, self.theta_sq_mean, self.kinetic_temp, self.c2,
                 self.theta_sq_stderr, self.kinetic_temp_stderr))
