"""Physical parameters and the derived drift/diffusion coefficients.

Natural units are hard-wired throughout the package:

    hbar = 1,  k = 1 (pump/cavity wave number),  kappa = 1 (cavity linewidth)

so positions are measured in 1/k (one wavelength is 2*pi), momenta in
hbar*k, times in 1/kappa and energies/temperatures in hbar*kappa.  The
particle mass is fixed by the recoil frequency omega_r = hbar k^2 / (2 m),
hence m = 1/(2*omega_r) in these units.

The coefficient set produced by :func:`derive_coefficients`:

    F0     = hbar k * 2*Delta_c / (kappa^2 + Delta_c^2)          force scale
    Gamma0 = omega_r * 8*Delta_c*kappa / (kappa^2 + Delta_c^2)^2 friction scale
    D0     = (hbar k)^2 * kappa / (kappa^2 + Delta_c^2)          diffusion scale
    eta0   = 2*hbar*omega_r*(kappa^2 - Delta_c^2) / (kappa^2 + Delta_c^2)^2
    beta   = -Gamma0 * m / D0                                    inverse temperature
    n_bar  = N S^2 / (kappa^2 + Delta_c^2)                       scaled pump
    n_crit = (kappa^2 + Delta_c^2) / (4 Delta_c^2)               critical pump

beta > 0 (a true thermal state) requires Delta_c < 0.  The critical pump
n_crit is minimal, n_crit = 1/2, at |Delta_c| = kappa, where also eta0 = 0.
"""

from __future__ import annotations

import json
import warnings
from dataclasses import dataclass, asdict

HBAR = 1.0     # energy * time
K_WAVE = 1.0   # 1 / length
KAPPA = 1.0    # 1 / time
WAVELENGTH = 2.0 * 3.141592653589793 / K_WAVE


@dataclass(frozen=True)
class ModelParams:
    """Physical inputs in natural units.

    Exactly one of ``pump_ratio`` (n_bar/n_crit) and ``pump_amplitude``
    (the scattering amplitude S in units of kappa) must be given; the other
    representation is derived.  ``beta0`` is the inverse temperature of the
    initial momentum distribution; if omitted it defaults to the stationary
    value beta determined by Delta_c.
    """

    delta_c: float                    # detuning, units of kappa (negative: ordering favored)
    omega_r: float                    # recoil frequency, units of kappa
    n_particles: int
    pump_ratio: float | None = None   # r = n_bar / n_crit
    pump_amplitude: float | None = None  # S, units of kappa
    beta0: float | None = None        # initial inverse temperature, units of 1/(hbar kappa)
    seed: int = 0

    def __post_init__(self):
        if self.omega_r <= 0.0:
            raise ValueError(f"omega_r must be positive, got {self.omega_r}")
        if int(self.n_particles) != self.n_particles or self.n_particles < 1:
            raise ValueError(f"n_particles must be a positive integer, got {self.n_particles}")
        given = (self.pump_ratio is not None) + (self.pump_amplitude is not None)
        if given != 1:
            raise ValueError("exactly one of pump_ratio, pump_amplitude must be given")
        if self.pump_ratio is not None and self.pump_ratio < 0.0:
            raise ValueError(f"pump_ratio must be non-negative, got {self.pump_ratio}")
        if self.pump_amplitude is not None and self.pump_amplitude < 0.0:
            raise ValueError(f"pump_amplitude must be non-negative, got {self.pump_amplitude}")
        if self.beta0 is not None and self.beta0 <= 0.0:
            raise ValueError(f"beta0 must be positive, got {self.beta0}")
        if abs(self.delta_c) < 10.0 * self.omega_r:
            warnings.warn(
                f"|delta_c| = {abs(self.delta_c)} is not large against "
                f"omega_r = {self.omega_r}; the adiabatic-elimination regime "
                "|delta_c|, kappa >> omega_r is violated",
                stacklevel=2,
            )

    @property
    def mass(self) -> float:
        return 1.0 / (2.0 * self.omega_r)


@dataclass(frozen=True)
class DerivedCoefficients:
    """Drift/diffusion coefficient set plus bookkeeping copies of the inputs."""

    F0: float
    Gamma0: float
    D0: float
    eta0: float
    beta: float        # = -Gamma0 * m / D0, fluctuation-dissipation identity
    n_bar: float
    n_crit: float
    S2: float          # S^2 consistent with n_bar and n_particles
    m: float
    # inputs carried along so downstream modules need only this object
    delta_c: float
    omega_r: float
    n_particles: int
    beta0: float
    seed: int

    @property
    def ratio(self) -> float:
        """Pump ratio r = n_bar / n_crit."""
        return self.n_bar / self.n_crit


def derive_coefficients(params: ModelParams) -> DerivedCoefficients:
    """Populate the full coefficient set from physical inputs.

    All values are in natural units.  The identity beta = -Gamma0*m/D0
    holds to machine precision by construction; beta is also returned in
    the equivalent closed form -4*Delta_c/(kappa^2 + Delta_c^2).
    """
    dc = params.delta_c
    wr = params.omega_r
    m = params.mass
    w2 = KAPPA**2 + dc**2

    f0 = HBAR * K_WAVE * 2.0 * dc / w2
    gamma0 = wr * 8.0 * dc * KAPPA / w2**2
    d0 = (HBAR * K_WAVE) ** 2 * KAPPA / w2
    eta0 = 2.0 * HBAR * wr * (KAPPA**2 - dc**2) / w2**2
    beta = -gamma0 * m / d0
    n_crit = w2 / (4.0 * dc**2)

    if params.pump_ratio is not None:
        n_bar = params.pump_ratio * n_crit
        s2 = n_bar * w2 / params.n_particles
    else:
        s2 = params.pump_amplitude**2
        n_bar = params.n_particles * s2 / w2

    beta0 = params.beta0 if params.beta0 is not None else beta
    if beta0 <= 0.0:
        raise ValueError(
            f"no positive default beta0 available: stationary beta = {beta} "
            "(delta_c >= 0); supply beta0 explicitly"
        )

    return DerivedCoefficients(
        F0=f0, Gamma0=gamma0, D0=d0, eta0=eta0, beta=beta,
        n_bar=n_bar, n_crit=n_crit, S2=s2, m=m,
        delta_c=dc, omega_r=wr, n_particles=params.n_particles,
        beta0=beta0, seed=params.seed,
    )


@dataclass(frozen=True)
class PumpConversion:
    """Both pump representations plus the threshold amplitude."""

    n_bar: float
    ratio: float          # n_bar / n_crit
    S2: float
    S2_crit: float        # threshold amplitude squared at the given beta and N
    above_threshold: bool


def pump_conversions(params: ModelParams) -> PumpConversion:
    """Convert between the pump ratio r and the raw amplitude S.

    The threshold amplitude satisfies N*S_c^2 = (kappa^2+Delta_c^2) /
    (beta*(-Delta_c)), which reproduces n_crit when converted back to the
    scaled pump.  Kac scaling: S^2 is proportional to 1/N at fixed n_bar.
    """
    co = derive_coefficients(params)
    if co.beta <= 0.0:
        raise ValueError("threshold amplitude undefined for delta_c >= 0 (beta <= 0)")
    w2 = KAPPA**2 + params.delta_c**2
    s2_crit = w2 / (co.beta * (-params.delta_c) * params.n_particles)
    return PumpConversion(
        n_bar=co.n_bar,
        ratio=co.n_bar / co.n_crit,
        S2=co.S2,
        S2_crit=s2_crit,
        above_threshold=co.n_bar > co.n_crit,
    )


# ---------------------------------------------------------------- config I/O

_PARAM_KEYS = {"delta_c", "omega_r", "n_particles", "pump", "beta0", "seed"}


def params_from_dict(cfg: dict, where: str = "model") -> ModelParams:
    """Build ModelParams from a flat config mapping.

    Expected shape::

        {"delta_c": -1.0, "omega_r": 0.05, "n_particles": 50,
         "pump": {"ratio": 2.0}, "beta0": 2.0, "seed": 7}

    ``pump`` holds exactly one of ``ratio``/``amplitude``.  Unknown keys are
    rejected; missing required keys raise KeyError naming the key path.
    """
    if not isinstance(cfg, dict):
        raise ValueError(f"{where}: expected an object, got {type(cfg).__name__}")
    unknown = set(cfg) - _PARAM_KEYS
    if unknown:
        raise ValueError(f"{where}: unknown keys {sorted(unknown)}")
    for key in ("delta_c", "omega_r", "n_particles", "pump"):
        if key not in cfg:
            raise KeyError(f"{where}.{key}")
    pump = cfg["pump"]
    if not isinstance(pump, dict) or set(pump) - {"ratio", "amplitude"} or len(pump) != 1:
        raise ValueError(f"{where}.pump: expected exactly one of 'ratio', 'amplitude'")
    return ModelParams(
        delta_c=float(cfg["delta_c"]),
        omega_r=float(cfg["omega_r"]),
        n_particles=int(cfg["n_particles"]),
        pump_ratio=float(pump["ratio"]) if "ratio" in pump else None,
        pump_amplitude=float(pump["amplitude"]) if "amplitude" in pump else None,
        beta0=float(cfg["beta0"]) if cfg.get("beta0") is not None else None,
        seed=int(cfg.get("seed", 0)),
    )


def params_to_dict(params: ModelParams) -> dict:
    """Inverse of params_from_dict (drops the unused pump representation)."""
    d = asdict(params)
    pump = {}
    if d.pop("pump_ratio") is not None:
        pump["ratio"] = params.pump_ratio
    if d.pop("pump_amplitude") is not None:
        pump["amplitude"] = params.pump_amplitude
    d["pump"] = pump
    return d


def load_params(path: str) -> ModelParams:
    """Read ModelParams from a JSON file holding the flat mapping."""
    with open(path, "r") as fh:
        return params_from_dict(json.load(fh))
