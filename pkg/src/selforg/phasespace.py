"""Single-particle phase-space distribution on a periodic-x, truncated-p grid.

The grid is uniform in both directions:

    x_i = i * dx,             dx = 2*pi / nx,   i = 0 .. nx-1   (periodic)
    p_j = -p_max + j * dp,    dp = 2*p_max / (np-1), j = 0 .. np-1

The p grid carries both endpoints so it is symmetric about p = 0; odd
moments of even fields then vanish exactly.  Integrals are plain rectangle
sums f.sum()*dx*dp, which is spectrally accurate for the periodic x
direction and accurate to the (enforced small) truncation tail in p.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field

import numpy as np

from .model import WAVELENGTH


@dataclass
class PhaseSpaceField:
    """Distribution values on the (x, p) grid, shape (nx, np)."""

    values: np.ndarray
    p_max: float
    time: float = 0.0

    # cached grid vectors, derived from the array shape
    _x: np.ndarray = field(init=False, repr=False)
    _p: np.ndarray = field(init=False, repr=False)

    def __post_init__(self):
        if self.values.ndim != 2:
            raise ValueError("values must be a 2-d array (nx, np)")
        if self.values.shape[1] < 2:
            raise ValueError("need at least 2 momentum points")
        nx, npts = self.values.shape
        self._x = np.arange(nx) * (WAVELENGTH / nx)
        self._p = np.linspace(-self.p_max, self.p_max, npts)

    # ------------------------------------------------------------- geometry
    @property
    def nx(self) -> int:
        return self.values.shape[0]

    @property
    def np_(self) -> int:
        return self.values.shape[1]

    @property
    def x(self) -> np.ndarray:
        return self._x

    @property
    def p(self) -> np.ndarray:
        return self._p

    @property
    def dx(self) -> float:
        return WAVELENGTH / self.nx

    @property
    def dp(self) -> float:
        return 2.0 * self.p_max / (self.np_ - 1)

    @property
    def cell(self) -> float:
        return self.dx * self.dp

    # ----------------------------------------------------------- quadrature
    def norm(self) -> float:
        return float(self.values.sum() * self.cell)

    def normalize(self) -> "PhaseSpaceField":
        self.values /= self.norm()
        return self

    def theta(self) -> float:
        """Order parameter <cos x>."""
        return float((self.values.sum(axis=1) * np.cos(self._x)).sum() * self.cell)

    def xi(self) -> float:
        """Momentum-current functional <p sin x>."""
        psum = self.values @ self._p          # sum_j f_ij p_j, per x row
        return float((psum * np.sin(self._x)).sum() * self.cell)

    def p2(self) -> float:
        """Second momentum moment <p^2>."""
        return float((self.values @ self._p**2).sum() * self.cell)

    def x_marginal(self) -> np.ndarray:
        return self.values.sum(axis=1) * self.dp

    def p_marginal(self) -> np.ndarray:
        return self.values.sum(axis=0) * self.dx

    def boundary_mass(self) -> float:
        """Mass within 3 cells of the +-p_max truncation edges."""
        pm = self.p_marginal()
        return float(pm[:3].sum() * self.dp + pm[-3:].sum() * self.dp)

    # ------------------------------------------------------------- checking
    def check(self, norm_tol: float = 1e-8, neg_tol: float = 1e-12,
              boundary_tol: float = 1e-6) -> None:
        """Raise if the standard health invariants are violated."""
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError(f"non-finite field values at t = {self.time}")
        n = self.norm()
        if abs(n - 1.0) > norm_tol:
            raise ValueError(f"norm {n} deviates from 1 beyond {norm_tol} at t = {self.time}")
        worst = float(self.values.min())
        if worst < -neg_tol * max(1.0, float(self.values.max())):
            raise ValueError(f"negative undershoot {worst} beyond tolerance at t = {self.time}")
        bm = self.boundary_mass()
        if bm > boundary_tol:
            raise ValueError(f"truncation boundary holds mass {bm} > {boundary_tol}")

    def copy(self) -> "PhaseSpaceField":
        return PhaseSpaceField(self.values.copy(), self.p_max, self.time)

    # ------------------------------------------------------------ snapshots
    def save(self, stem) -> None:
        """Write <stem>.bin (raw float64, C order) and <stem>.json header."""
        stem = os.fspath(stem)
        self.values.astype(np.float64).tofile(stem + ".bin")
        header = {"nx": self.nx, "np": self.np_, "p_max": self.p_max, "time": self.time}
        with open(stem + ".json", "w") as fh:
            json.dump(header, fh, sort_keys=True)
            fh.write("\n")

    @classmethod
    def load(cls, stem) -> "PhaseSpaceField":
        stem = os.fspath(stem)
        with open(stem + ".json") as fh:
            header = json.load(fh)
        values = np.fromfile(stem + ".bin", dtype=np.float64)
        values = values.reshape(header["nx"], header["np"])
        return cls(values, header["p_max"], header["time"])


def uniform_gaussian(beta0: float, m: float, nx: int = 256, np_: int = 512,
                     p_max: float | None = None) -> PhaseSpaceField:
    """Uniform-in-x, thermal-in-p field at inverse temperature beta0."""
    if p_max is None:
        p_max = 6.0 * np.sqrt(m / beta0)
    f = PhaseSpaceField(np.empty((nx, np_)), p_max)
    gauss = np.exp(-beta0 * f.p**2 / (2.0 * m))
    f.values[:] = gauss[None, :]
    return f.normalize()
