"""Stationary-state layer: fixed points, bunching, finite-N corrections.

Above threshold the self-consistent order parameter solves

    theta = q(2 r theta),      q(s) = I1(s)/I0(s),   r = n_bar/n_crit,

because the stationary spatial distribution is exp(2 r theta_bar cos x)
(up to normalization) and q is exactly <cos x> under that weight.  For
r <= 1 the only solution is theta = 0; for r > 1 the pair +-theta_bar
appears and the origin turns unstable.  The bunching parameter then obeys
the closed form B = 1 - 1/(2 r).

The finite-N corrections enter in two places: the x-exponent of the exact
N-body stationary state (``finite_n_exponent``) and the self-consistent
mean-field state at finite N (``solve_fixed_point_finite``), which keeps
the self-interaction sin^2 term and the (N-1) weighting of the collective
force.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.optimize import bisect
from scipy.special import i0e, i1e, ive

from .model import DerivedCoefficients, K_WAVE
from .phasespace import PhaseSpaceField

GAUSS_TAIL_LIMIT = 1e-8   # max momentum mass allowed outside the p grid


def q_ratio(s):
    """Bessel ratio q(s) = I1(s)/I0(s), stable for any s >= 0.

    Uses exponentially scaled Bessel functions, so large arguments do not
    overflow; scipy evaluates these by series/asymptotics to ~1e-15.
    """
    return i1e(s) / i0e(s)


def q_ratio_prime(s: float) -> float:
    """Derivative q'(s), via I1' = I0 - I1/s."""
    if s == 0.0:
        return 0.5
    r = q_ratio(s)
    return 1.0 - r / s - r * r


@dataclass(frozen=True)
class FixedPointResult:
    theta_bar: float              # stable non-negative branch
    branch_count: int             # 1 below threshold, 3 above
    roots: tuple[float, ...]      # all real solutions, ascending
    stable: tuple[bool, ...]      # stability flag per root


def _damped_iteration(r: float, theta0: float = 0.9, damping: float = 0.5,
                      tol: float = 1e-12, max_iter: int = 400) -> float | None:
    th = theta0
    for _ in range(max_iter):
        nxt = (1.0 - damping) * th + damping * q_ratio(2.0 * r * th)
        if abs(nxt - q_ratio(2.0 * r * nxt)) < tol:
            return nxt
        th = nxt
    return None


def solve_fixed_point(r: float) -> FixedPointResult:
    """Solve theta = q(2 r theta) for the order parameter.

    Damped iteration (damping 0.5) from theta = 0.9; if it has not reached
    |theta - q(2 r theta)| < 1e-12, fall back to bisection of
    g(theta) = theta - q(2 r theta) on [1e-9, 1 - 1e-9].  The map is odd in
    theta, so the negative root mirrors the positive one.
    """
    if r < 0.0:
        raise ValueError(f"pump ratio must be non-negative, got {r}")
    if r <= 1.0:
        # slope of q(2 r theta) at the origin is r; origin stable up to r=1
        return FixedPointResult(0.0, 1, (0.0,), (True,))

    th = _damped_iteration(r)
    if th is None or abs(th - q_ratio(2.0 * r * th)) > 1e-12:
        g = lambda t: t - q_ratio(2.0 * r * t)
        th = bisect(g, 1e-9, 1.0 - 1e-9, xtol=1e-15)
    # map slope 2r q'(s) < 1 at a stable crossing
    stable_nonzero = 2.0 * r * q_ratio_prime(2.0 * r * th) < 1.0
    return FixedPointResult(
        theta_bar=th,
        branch_count=3,
        roots=(-th, 0.0, th),
        stable=(stable_nonzero, False, stable_nonzero),
    )


def asymptotic_theta(r: float) -> float:
    """Near-threshold expansion theta_bar ~ sqrt(2 (r-1)), valid r -> 1+."""
    if r < 1.0:
        raise ValueError(f"asymptotic form needs r >= 1, got {r}")
    return np.sqrt(2.0 * (r - 1.0))


# ---------------------------------------------------------- finite-N layer

def _mf_exponent(x, r: float, n_particles: int, theta: float):
    """x-exponent of the finite-N mean-field stationary state.

    a(x) = -(r/N) sin^2 x + (N-1)(2r/N) theta cos x; the first term is the
    atom's interaction with its own scattered field, the second the
    collective force.  For N -> infinity it reduces to 2 r theta cos x.
    """
    n = n_particles
    return -(r / n) * np.sin(x) ** 2 + (n - 1) * (2.0 * r / n) * theta * np.cos(x)


def _mean_cos_under(exponent_fn) -> float:
    x = np.linspace(0.0, 2.0 * np.pi, 4096, endpoint=False)
    a = exponent_fn(x)
    w = np.exp(a - a.max())
    return float((np.cos(x) * w).sum() / w.sum())


def solve_fixed_point_finite(r: float, n_particles: int,
                             tol: float = 1e-12) -> float:
    """Self-consistent theta for the finite-N mean-field stationary state.

    Same bisection approach as solve_fixed_point but with <cos x> taken
    under the finite-N exponent.  Returns 0 at or below the finite-N
    threshold.
    """
    if n_particles == 1:
        return 0.0   # no collective term left

    def g(th: float) -> float:
        return th - _mean_cos_under(lambda x: _mf_exponent(x, r, n_particles, th))

    if r <= 1.0 or g(1e-9) >= 0.0:     # finite-N threshold slightly above r=1
        return 0.0
    return bisect(g, 1e-9, 1.0 - 1e-9, xtol=max(tol, 1e-15))


def finite_n_exponent(x, y_ratio: float, z_param: float, theta: float,
                      n_particles: int):
    """x-exponent a(x) of the exact N-body stationary state.

    a(x) = (Y/2 - 1) ln(1 + Z sin^2 x)
           - (N-1) Y theta sqrt(Z/(1+Z)) artanh(sqrt(Z/(1+Z)) cos x)

    with Y = F0/(k eta0) and Z = beta eta0 S^2.  Only the exponent is in
    closed form; the normalization must be done numerically.  Requires
    Z > -1 and finite Y (i.e. eta0 != 0); use finite_n_exponent_for for the
    |delta_c| = kappa limit.
    """
    if z_param <= -1.0:
        raise ValueError(f"need Z > -1 for a positive log argument, got {z_param}")
    x = np.asarray(x, dtype=float)
    root = np.sqrt(z_param / (1.0 + z_param))
    first = (y_ratio / 2.0 - 1.0) * np.log1p(z_param * np.sin(x) ** 2)
    second = -(n_particles - 1) * y_ratio * theta * root * np.arctanh(root * np.cos(x))
    return first + second


def finite_n_exponent_for(coeffs: DerivedCoefficients, x, theta: float | None = None):
    """Finite-N exponent from a coefficient set; handles eta0 = 0.

    At |delta_c| = kappa the parameters Y, Z degenerate (eta0 = 0); the
    exponent then reduces to its eta0 -> 0 limit

        a(x) = w sin^2(x)/2 - (N-1) w theta cos x,   w = beta F0 S^2 / k,

    which is also the finite-N mean-field form.
    """
    if theta is None:
        theta = solve_fixed_point(coeffs.ratio).theta_bar
    n = coeffs.n_particles
    if coeffs.eta0 == 0.0:
        w = coeffs.beta * coeffs.F0 * coeffs.S2 / K_WAVE
        x = np.asarray(x, dtype=float)
        return w * np.sin(x) ** 2 / 2.0 - (n - 1) * w * theta * np.cos(x)
    y_ratio = coeffs.F0 / (K_WAVE * coeffs.eta0)
    z_param = coeffs.beta * coeffs.eta0 * coeffs.S2
    return finite_n_exponent(x, y_ratio, z_param, theta, n)


# ------------------------------------------------------- stationary fields

def stationary_field(r: float, beta: float, m: float, nx: int = 256,
                     np_: int = 512, p_max: float | None = None,
                     n_particles: int | None = None) -> PhaseSpaceField:
    """Thermal stationary field f_st(x, p) on the grid, normalized to 1.

    The momentum part is the Gaussian exp(-beta p^2/(2m)); the spatial part
    is exp(2 r theta_bar cos x) with theta_bar from solve_fixed_point, or
    the finite-N mean-field exponent when n_particles is given.  Fails if
    the p truncation leaves more than 1e-8 of the Gaussian mass outside.
    """
    from scipy.special import erfc

    if p_max is None:
        p_max = 6.0 * np.sqrt(m / beta)
    tail = erfc(p_max * np.sqrt(beta / (2.0 * m)))
    if tail > GAUSS_TAIL_LIMIT:
        raise ValueError(
            f"p_max = {p_max} keeps only 1 - {tail:.2e} of the Gaussian mass "
            f"(limit {GAUSS_TAIL_LIMIT:g}); enlarge the grid"
        )

    f = PhaseSpaceField(np.empty((nx, np_)), p_max)
    if n_particles is None:
        theta = solve_fixed_point(r).theta_bar
        a = 2.0 * r * theta * np.cos(f.x)
    else:
        theta = solve_fixed_point_finite(r, n_particles)
        a = _mf_exponent(f.x, r, n_particles, theta)
    gauss = np.exp(-beta * f.p**2 / (2.0 * m))
    f.values[:] = np.exp(a - a.max())[:, None] * gauss[None, :]
    return f.normalize()


# ------------------------------------------------------------- x moments

def _x_weight(r: float):
    """Unnormalized stationary x density exp(c cos x), c = 2 r theta_bar."""
    c = 2.0 * r * solve_fixed_point(r).theta_bar
    return c, (lambda x: np.exp(c * (np.cos(x) - 1.0)))   # scaled to avoid overflow


@dataclass(frozen=True)
class BunchingResult:
    closed: float        # 1/2 below threshold, 1 - 1/(2r) above
    quadrature: float    # <cos^2 x> integrated under the stationary density


def bunching(r: float) -> BunchingResult:
    """Bunching parameter B = <cos^2 x> with quadrature cross-check."""
    closed = 0.5 if r <= 1.0 else 1.0 - 0.5 / r
    c, w = _x_weight(r)
    num = quad(lambda x: np.cos(x) ** 2 * w(x), 0.0, 2.0 * np.pi, limit=200)[0]
    den = quad(w, 0.0, 2.0 * np.pi, limit=200)[0]
    return BunchingResult(closed=closed, quadrature=num / den)


def cos_moments(r: float, cross_check_tol: float = 1e-10) -> tuple[float, float, float, float]:
    """Moments <cos^n x>, n = 1..4, under the stationary x density.

    Evaluated through Bessel-ratio identities (multiple-angle reduction of
    cos^n) and cross-checked against adaptive quadrature; a disagreement
    beyond cross_check_tol raises, since both routes must represent the
    same density.
    """
    c, w = _x_weight(r)

    ratios = [float(ive(n, c) / ive(0, c)) for n in range(5)]  # I_n(c)/I0(c)
    bessel = (
        ratios[1],
        0.5 + ratios[2] / 2.0,
        (3.0 * ratios[1] + ratios[3]) / 4.0,
        (3.0 + 4.0 * ratios[2] + ratios[4]) / 8.0,
    )

    den = quad(w, 0.0, 2.0 * np.pi, limit=200)[0]
    quads = tuple(
        quad(lambda x: np.cos(x) ** n * w(x), 0.0, 2.0 * np.pi, limit=200)[0] / den
        for n in range(1, 5)
    )
    worst = max(abs(a - b) for a, b in zip(bessel, quads))
    if worst > cross_check_tol:
        raise RuntimeError(
            f"cos-moment routes disagree by {worst:.3e} at r = {r} "
            f"(tolerance {cross_check_tol:g})"
        )
    return bessel
