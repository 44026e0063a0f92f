"""Linear stability of the unordered state: growth rate of the Theta mode.

A small density modulation cos(x) grows (or Landau-damps) at the real
rate gamma solving

    1 + (Delta_c + gamma*beta/2) * n_bar * beta0 * G(b) = 0,
    b = gamma * sqrt(beta0 * m / 2),

where G is the real Gaussian kinetic integral

    G(b) = 1 - sqrt(pi) * b * exp(b^2) * erfc(b),

continued to b < 0 via erfc(b) = 2 - erfc(-b).  G decreases monotonically
from +inf (b -> -inf) through 1 (b = 0) toward 0, so the residual is
monotone in gamma and the root is unique and bracketable by sign.

Also here: the residual for an arbitrary momentum profile (quadrature
over df/dp), and the closed-form pump-strength approximation for the
growth rate.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.optimize import brentq
from scipy.special import erfcx

from .model import KAPPA, K_WAVE, DerivedCoefficients

_G_CAP = 1e280          # keep the residual finite when exp(b^2) blows up
_SERIES_CUT = 25.0      # |b| beyond which the asymptotic series is used


def landau_g(b: float) -> float:
    """G(b) = 1 - sqrt(pi) b e^{b^2} erfc(b), stable for all real b."""
    b = float(b)
    ab = abs(b)
    if ab > _SERIES_CUT:
        # 1 - sqrt(pi) b e^{b^2} erfc(b) ~ 1/(2b^2) - 3/(4b^4) + 15/(8b^6)
        tail = 0.5 / b**2 - 0.75 / b**4 + 1.875 / b**6
        if b > 0:
            return tail
        grow = 2.0 * np.sqrt(np.pi) * ab * np.exp(min(b * b, 700.0))
        return min(tail + grow, _G_CAP)
    if b >= 0.0:
        return 1.0 - np.sqrt(np.pi) * b * erfcx(b)
    # erfc(b) = 2 - erfc(-b); e^{b^2} erfc(b) = 2 e^{b^2} - erfcx(-b)
    val = 1.0 - np.sqrt(np.pi) * b * (2.0 * np.exp(b * b) - erfcx(-b))
    return min(val, _G_CAP)


def dispersion_residual(gamma: float, n_bar: float, beta0: float,
                        beta: float, delta_c: float, m: float) -> float:
    """Real dispersion residual; the growth rate is its root in gamma."""
    b = gamma * np.sqrt(beta0 * m / 2.0) / K_WAVE
    pref = (delta_c + 0.5 * KAPPA * gamma * beta) * n_bar * beta0
    return 1.0 + pref * landau_g(b)


def dispersion_residual_profile(gamma: float, n_bar: float, beta: float,
                                delta_c: float, m: float,
                                p_grid: np.ndarray, f_p: np.ndarray) -> float:
    """Residual for an arbitrary normalized momentum profile f(p).

    The kinetic integral is evaluated on the real momentum axis:

        K(gamma) = -int dp  k^2 (p/m) / ((k p / m)^2 + gamma^2) * df/dp

    (real for real gamma != 0; df/dp by centered differences).  For a
    Gaussian at beta0 this reduces to beta0 * G(b).
    """
    if gamma == 0.0:
        raise ValueError("profile residual needs gamma != 0 (principal value at 0)")
    p = np.asarray(p_grid, dtype=float)
    f = np.asarray(f_p, dtype=float)
    dfdp = np.gradient(f, p)
    v = K_WAVE * p / m
    integrand = -K_WAVE * v / (v**2 + gamma**2) * dfdp
    kin = float(np.trapezoid(integrand, p))
    pref = (delta_c + 0.5 * KAPPA * gamma * beta) * n_bar
    return 1.0 + pref * kin


@dataclass(frozen=True)
class StabilityResult:
    gamma: float
    bracket: tuple
    residual_at_root: float
    regime: str            # "unstable" | "critical" | "stable"
    note: str = ""


def growth_rate(coeffs: DerivedCoefficients, beta0: float | None = None,
                gamma_tol: float = 1e-9) -> StabilityResult:
    """Root-find the dispersion residual for the given operating point."""
    if beta0 is None:
        beta0 = coeffs.beta0

    def res(g):
        return dispersion_residual(g, coeffs.n_bar, beta0, coeffs.beta,
                                   coeffs.delta_c, coeffs.m)

    r0 = res(0.0)
    if r0 == 0.0:
        return StabilityResult(0.0, (0.0, 0.0), 0.0, "critical")
    if r0 < 0.0:
        lo, hi = 0.0, 1.0
        while res(hi) < 0.0:
            hi *= 2.0
            if hi > 1e6:
                raise RuntimeError("growth rate bracket expansion failed upward")
    else:
        hi, lo = 0.0, -1.0
        while res(lo) > 0.0:
            lo *= 2.0
            if lo < -1e6:
                return StabilityResult(np.nan, (lo, 0.0), np.nan, "stable",
                                       note=f"no sign change above gamma = {lo}")
    gamma = brentq(res, lo, hi, xtol=1e-14, rtol=1e-15, maxiter=200)
    regime = "critical" if abs(gamma) <= gamma_tol else (
        "unstable" if gamma > 0 else "stable")
    return StabilityResult(float(gamma), (lo, hi), float(res(gamma)), regime)


def growth_rate_approx(chi: float, beta0: float, beta: float,
                       delta_c: float, omega_r: float) -> float:
    """Closed-form growth rate in terms of chi = |Delta_c| n_bar beta0.

    Valid above threshold; the pole of the log fixes the usable window
    0 < chi < 227/27.  At chi = 1 the two logarithms cancel exactly
    (1.135 = 227/200), pinning the threshold at zero growth.
    """
    p = 27.0 / 227.0
    if not 0.0 < chi < 1.0 / p:
        raise ValueError(f"chi must be in (0, {1.0 / p:.6g}), got {chi}")
    omega0 = np.sqrt(2.0 * omega_r / beta0)
    top = omega0 * (1.0 - p * chi) * (np.log(chi / 1.135) - np.log1p(-p * chi))
    bot = 1.4 * (1.0 - p * chi) + KAPPA * beta * omega0 / (2.0 * abs(delta_c))
    return float(top / bot)


def fit_growth_rate(t: np.ndarray, amp: np.ndarray, lo_frac: float = 1e-3,
                    hi_frac: float = 0.1) -> tuple[float, tuple]:
    """Exponential-rate fit of a growing amplitude series.

    Fits ln(amp) over the window where amp rises between lo_frac and
    hi_frac of its final maximum, which skips the initial transient and
    stops before saturation bends the curve.  Returns (rate, (t0, t1)).
    """
    t = np.asarray(t, dtype=float)
    a = np.abs(np.asarray(amp, dtype=float))
    peak = a.max()
    if peak <= 0.0:
        raise ValueError("amplitude is identically zero")
    i_peak = int(np.argmax(a))
    mask = (a[:i_peak + 1] >= lo_frac * peak) & (a[:i_peak + 1] <= hi_frac * peak)
    idx = np.nonzero(mask)[0]
    if idx.size < 4:
        raise ValueError("growth window too short for a slope fit; "
                         "widen (lo_frac, hi_frac) or sample more densely")
    sl = slice(idx[0], idx[-1] + 1)
    coef = np.polyfit(t[sl], np.log(a[sl]), 1)
    return float(coef[0]), (float(t[sl][0]), float(t[sl][-1]))
