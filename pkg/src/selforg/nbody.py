"""Stochastic N-body dynamics with the cavity field eliminated.

Each trajectory carries N atoms coupled all-to-all through the scattered
field.  With Sigma_c = sum_j cos(x_j) and Sigma_sp = sum_j sin(x_j) p_j,

    dx_i = (p_i/m) dt
    dp_i = S^2 sin(x_i) [F0 Sigma_c + Gamma0 Sigma_sp] dt
           + sqrt(2 D0 S^2) sin(x_i) dW

with ONE Wiener increment dW shared by all atoms of a trajectory: the
noise is the shot noise of the common cavity field, so it is perfectly
correlated across atoms (rank-one), not independent per atom.  That
correlation is what detailed balance needs for the ensemble to settle
into the Gibbs state exp(alpha N Theta^2) at temperature m/beta.

Reproducibility: trajectory j of a run with seed s uses its own Philox
stream keyed (s, j).  Per trajectory the stream is consumed in a fixed
order (N position uniforms, N momentum normals, then one normal per step),
so trajectories are bitwise reproducible independent of how many are run
together.

Default integrator is the semi-implicit (symplectic-flavored) Euler:
momentum kick first, position drift with the updated momentum.  The
explicit Euler scheme heats the ensemble noticeably at usable step sizes
and is kept only for comparison, as is a drift-Heun scheme.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .model import DerivedCoefficients
from .series import EnsembleSeries
from .steady import solve_fixed_point

_CHUNK = 1024  # steps of shared noise drawn per generator at a time

INTEGRATORS = ("semi_implicit", "euler", "heun")


@dataclass
class EnsembleState:
    """Positions/momenta of all trajectories plus the RNG streams."""

    x: np.ndarray          # (n_traj, n_particles)
    p: np.ndarray          # (n_traj, n_particles)
    time: float
    seed: int
    rng_states: list = field(default_factory=list)

    @property
    def n_traj(self) -> int:
        return self.x.shape[0]

    @property
    def n_particles(self) -> int:
        return self.x.shape[1]

    def save(self, stem) -> None:
        stem = Path(stem)
        self.x.astype(np.float64).tofile(stem.with_suffix(".x.bin"))
        self.p.astype(np.float64).tofile(stem.with_suffix(".p.bin"))
        head = {
            "n_traj": self.n_traj,
            "n_particles": self.n_particles,
            "time": self.time,
            "seed": self.seed,
            "rng_states": [_jsonify(s) for s in self.rng_states],
        }
        stem.with_suffix(".json").write_text(json.dumps(head, sort_keys=True))

    @classmethod
    def load(cls, stem) -> "EnsembleState":
        stem = Path(stem)
        head = json.loads(stem.with_suffix(".json").read_text())
        shape = (head["n_traj"], head["n_particles"])
        x = np.fromfile(stem.with_suffix(".x.bin"), dtype=np.float64).reshape(shape)
        p = np.fromfile(stem.with_suffix(".p.bin"), dtype=np.float64).reshape(shape)
        states = [_dejsonify(s) for s in head["rng_states"]]
        return cls(x=x, p=p, time=head["time"], seed=head["seed"], rng_states=states)


def _jsonify(state: dict):
    if isinstance(state, dict):
        return {k: _jsonify(v) for k, v in state.items()}
    if isinstance(state, np.ndarray):
        return {"__nd__": state.tolist()}
    if isinstance(state, (np.integer,)):
        return int(state)
    return state


def _dejsonify(obj):
    if isinstance(obj, dict):
        if "__nd__" in obj:
            return np.asarray(obj["__nd__"], dtype=np.uint64)
        return {k: _dejsonify(v) for k, v in obj.items()}
    return obj


def make_generators(seed: int, n_traj: int) -> list:
    """One Philox stream per trajectory, keyed (seed, trajectory index)."""
    return [np.random.Generator(np.random.Philox(key=np.array([seed, j], dtype=np.uint64)))
            for j in range(n_traj)]


def initial_ensemble(coeffs: DerivedCoefficients, n_traj: int,
                     seed: int | None = None) -> tuple[EnsembleState, list]:
    """Uniform positions, thermal momenta at beta0.  Returns (state, gens)."""
    if seed is None:
        seed = coeffs.seed
    gens = make_generators(seed, n_traj)
    n = coeffs.n_particles
    sigma = np.sqrt(coeffs.m / coeffs.beta0)
    x = np.empty((n_traj, n))
    p = np.empty((n_traj, n))
    for j, g in enumerate(gens):
        x[j] = 2.0 * np.pi * g.random(n)
        p[j] = sigma * g.standard_normal(n)
    return EnsembleState(x=x, p=p, time=0.0, seed=seed), gens


def organized_ensemble(coeffs: DerivedCoefficients, n_traj: int,
                       seed: int | None = None,
                       theta_bar: float | None = None,
                       ) -> tuple[EnsembleState, list]:
    """Stationary organized start: Gibbs positions, thermal momenta at beta.

    Positions are drawn by rejection from the self-consistent weight
    exp(beta U cos x) with well amplitude U = S^2 N |F0| theta_bar, the
    acceptance factor exp(beta U (cos x - 1)) <= 1 against a uniform
    proposal.  theta_bar defaults to the mean-field fixed point at the
    coefficient's pump ratio (zero below threshold, which reduces to the
    uniform ensemble).  Returns (state, gens) like initial_ensemble.
    """
    if seed is None:
        seed = coeffs.seed
    if theta_bar is None:
        theta_bar = solve_fixed_point(coeffs.ratio).theta_bar
    gens = make_generators(seed, n_traj)
    n = coeffs.n_particles
    a = coeffs.beta * coeffs.S2 * n * abs(coeffs.F0) * theta_bar
    sigma = np.sqrt(coeffs.m / coeffs.beta)
    x = np.empty((n_traj, n))
    p = np.empty((n_traj, n))
    for j, g in enumerate(gens):
        have = 0
        while have < n:
            cand = 2.0 * np.pi * g.random(4 * n)
            keep = cand[g.random(4 * n) < np.exp(a * (np.cos(cand) - 1.0))]
            take = min(n - have, keep.size)
            x[j, have:have + take] = keep[:take]
            have += take
        p[j] = sigma * g.standard_normal(n)
    return EnsembleState(x=x, p=p, time=0.0, seed=seed), gens


def pair_correlation(x: np.ndarray) -> float:
    """<cos x_i cos x_j>_{i != j} minus the squared global mean of cos x.

    x has shape (n_traj, n_particles); the i != j average runs within each
    trajectory and is then averaged over trajectories.
    """
    x = np.atleast_2d(x)
    n = x.shape[1]
    if n < 2:
        raise ValueError("pair correlation needs at least 2 particles")
    c = np.cos(x)
    s1 = c.sum(axis=1)
    s2 = (c**2).sum(axis=1)
    offdiag = (s1**2 - s2) / (n * (n - 1))
    return float(np.mean(offdiag) - np.mean(c) ** 2)


def _forces(x, p, coeffs):
    sin = np.sin(x)
    drive = coeffs.F0 * np.cos(x).sum(axis=1) + coeffs.Gamma0 * (sin * p).sum(axis=1)
    return coeffs.S2 * drive[:, None] * sin, sin


def simulate(coeffs: DerivedCoefficients, n_traj: int, t_end: float,
             dt: float = 0.01, sample_dt: float = 1.0,
             method: str = "semi_implicit", seed: int | None = None,
             initial: EnsembleState | None = None,
             snapshot_times: list[float] | None = None,
             ) -> tuple[EnsembleSeries, EnsembleState, dict]:
    """Integrate the ensemble, recording Theta statistics every sample_dt.

    Returns (series, final state, snapshots).  snapshots maps each
    requested time to a copy of (x, p) taken at the first sample at or
    after it.  When resuming from `initial`, its rng_states are restored
    so the continuation is bitwise identical to an unbroken run.
    """
    if method not in INTEGRATORS:
        raise ValueError(f"unknown integrator {method!r}, pick one of {INTEGRATORS}")
    if initial is None:
        state, gens = initial_ensemble(coeffs, n_traj, seed)
    else:
        if initial.x.shape != (n_traj, coeffs.n_particles):
            raise ValueError(
                f"initial state has shape {initial.x.shape}, expected "
                f"(n_traj, n_particles) = ({n_traj}, {coeffs.n_particles})")
        state = EnsembleState(x=initial.x.copy(), p=initial.p.copy(),
                              time=initial.time, seed=initial.seed)
        gens = make_generators(state.seed, state.n_traj)
        for g, st in zip(gens, initial.rng_states):
            g.bit_generator.state = st
    x, p = state.x, state.p
    m = coeffs.m
    sig = np.sqrt(2.0 * coeffs.D0 * coeffs.S2)
    sqdt = np.sqrt(dt)

    n_steps = int(round(t_end / dt))
    stride = max(1, int(round(sample_dt / dt)))
    want = sorted(snapshot_times) if snapshot_times else []
    snapshots: dict[float, tuple[np.ndarray, np.ndarray]] = {}

    rows_t, rows_th, rows_T, rows_Te, rows_xi, rows_c2 = [], [], [], [], [], []
    theta_rows = []

    def record():
        c = np.cos(x)
        th = c.mean(axis=1)
        th2 = th**2
        ke = (p**2).mean(axis=1) / m
        rows_t.append(state.time)
        theta_rows.append(th.copy())
        rows_th.append(th2.mean())
        rows_T.append(ke.mean())
        rows_Te.append(ke.std(ddof=1) / np.sqrt(len(ke)) if len(ke) > 1 else 0.0)
        rows_xi.append((np.sin(x) * p).mean())
        rows_c2.append(pair_correlation(x) if x.shape[1] > 1 else np.nan)
        while want and state.time >= want[0] - 1e-9:
            snapshots[want.pop(0)] = (x.copy(), p.copy())

    record()
    noise = np.empty((n_traj, 0))
    filled = 0
    for step in range(n_steps):
        if filled == noise.shape[1]:
            block = min(_CHUNK, n_steps - step)
            noise = np.stack([g.standard_normal(block) for g in gens], axis=0)
            filled = 0
        xi_t = noise[:, filled]
        filled += 1

        if method == "semi_implicit":
            drift, sin = _forces(x, p, coeffs)
            p += dt * drift + sig * sqdt * xi_t[:, None] * sin
            x += dt * p / m
        elif method == "euler":
            drift, sin = _forces(x, p, coeffs)
            x += dt * p / m
            p += dt * drift + sig * sqdt * xi_t[:, None] * sin
        else:  # heun: trapezoidal drift, noise at the step start
            drift0, sin0 = _forces(x, p, coeffs)
            kick = sig * sqdt * xi_t[:, None] * sin0
            xp = x + dt * p / m
            pp = p + dt * drift0 + kick
            drift1, _ = _forces(xp, pp, coeffs)
            x += 0.5 * dt * (p + pp) / m
            p += 0.5 * dt * (drift0 + drift1) + kick
        state.time += dt

        if (step + 1) % stride == 0:
            if not (np.all(np.isfinite(p)) and np.all(np.isfinite(x))):
                raise RuntimeError(f"ensemble went non-finite at t = {state.time}")
            np.mod(x, 2.0 * np.pi, out=x)
            record()

    state.rng_states = [g.bit_generator.state for g in gens]
    series = EnsembleSeries(
        t=np.asarray(rows_t),
        theta=np.asarray(theta_rows),
        theta_sq_mean=np.asarray(rows_th),
        theta_sq_stderr=_theta_sq_stderr(theta_rows),
        kinetic_temp=np.asarray(rows_T),
        kinetic_temp_stderr=np.asarray(rows_Te),
        xi=np.asarray(rows_xi),
        c2=np.asarray(rows_c2),
    )
    return series, state, snapshots


def _theta_sq_stderr(theta_rows) -> np.ndarray:
    th = np.asarray(theta_rows)
    n = th.shape[1]
    if n < 2:
        return np.zeros(th.shape[0])
    return (th**2).std(axis=1, ddof=1) / np.sqrt(n)
