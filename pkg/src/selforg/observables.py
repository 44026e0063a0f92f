"""Order-parameter statistics, photon-number observables, and spectra.

The cavity output mirrors the atomic bunching: the intracavity photon
number is n_cav = N * n_bar * <Theta^2>, so all counting statistics
reduce to moments of Theta over the N-particle Gibbs state

    P(x_1..x_N) ~ exp(alpha * N * Theta^2),      alpha = n_bar / n_crit.

Integrating out all angles except the collective coordinate gives a
one-dimensional Laplace-form integral

    Z(alpha) = int dy exp(-N phi(y)),  phi(y) = alpha y^2 - ln I0(2 alpha y)

whose alpha-derivatives yield <Theta^2> and <Theta^4> exactly at any N.
That quadrature is the oracle the closed-form branches (below / at /
above threshold) are checked against.

Time-domain tools: raw autocorrelation of Theta(t), Welch spectrum with a
Hann window, and the pendulum-frequency predictor for the spectral peak
in the organized state.  Note the factor two: a particle librating at
orbital frequency w modulates cos(x) at 2w because cos is even about the
well bottom, while a rotating particle modulates it at its winding rate.
The observable spectrum therefore peaks near the mean SIGNAL frequency,
not the mean orbital frequency.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad
from scipy.signal import welch
from scipy.special import ellipe, ellipk, gamma as gamma_fn, i0e

from .steady import cos_moments, q_ratio, q_ratio_prime, solve_fixed_point

G2_THRESHOLD = 0.25 * (gamma_fn(0.25) / gamma_fn(0.75)) ** 2


def g2_threshold_constant() -> float:
    """Zero-delay photon correlation exactly at threshold, ~2.18844."""
    return G2_THRESHOLD


def theta_of(x: np.ndarray) -> np.ndarray:
    """Order parameter (1/N) sum_j cos(x_j) along the last axis."""
    return np.mean(np.cos(np.asarray(x)), axis=-1)


# ---------------------------------------------------------------- oracle

def _log_i0(z):
    return np.log(i0e(z)) + np.abs(z)


def _phi(y, alpha):
    return alpha * y * y - _log_i0(2.0 * alpha * y)


@dataclass(frozen=True)
class OracleResult:
    alpha: float
    n_particles: int
    theta_sq: float
    theta_4: float
    g2: float
    quad_error: float     # worst relative quadrature error among the pieces


def _uniform_moments(n: int) -> tuple[float, float]:
    # free angles: <Theta^2> = 1/(2N), <Theta^4> = 3(2N-1)/(8N^3)
    t2 = 0.5 / n
    t4 = 3.0 * (2.0 * n - 1.0) / (8.0 * n**3)
    return t2, t4


def g_alpha_oracle(alpha: float, n_particles: int,
                   rel_tol: float = 1e-7) -> OracleResult:
    """Exact finite-N moments of Theta^2 by saddle-anchored quadrature.

    Works at any alpha >= 0 including the threshold region where neither
    the Gaussian-fluctuation nor the mean-field closed form applies.
    Raises RuntimeError if the quadrature error estimate exceeds rel_tol.
    """
    n = int(n_particles)
    if alpha < 0.0:
        raise ValueError(f"alpha must be >= 0, got {alpha}")
    if n < 2:
        raise ValueError("need at least 2 particles")
    if alpha == 0.0:
        t2, t4 = _uniform_moments(n)
        return OracleResult(alpha, n, t2, t4, t4 / t2**2, 0.0)

    y_star = solve_fixed_point(alpha).theta_bar
    phi_min = _phi(y_star, alpha)
    y_hi = y_star + 1.5 + 30.0 / np.sqrt(n * max(alpha, 0.05))

    def weight(y):
        return np.exp(-n * (_phi(y, alpha) - phi_min))

    def dphi(y):
        return y * y - 2.0 * y * q_ratio(2.0 * alpha * y)

    def d2phi(y):
        return -4.0 * y * y * q_ratio_prime(2.0 * alpha * y)

    pieces = {}
    errs = []
    for name, fn in (("z", lambda y: 1.0),
                     ("d1", dphi),
                     ("d1sq", lambda y: dphi(y) ** 2),
                     ("d2", d2phi)):
        val, err = quad(lambda y: fn(y) * weight(y), 0.0, y_hi,
                        points=[y_star], limit=300, epsabs=0.0, epsrel=1e-12)
        pieces[name] = val
        errs.append(err / max(abs(val), 1e-300))
    z = pieces["z"]
    if z <= 0.0 or max(errs) > rel_tol:
        raise RuntimeError(
            f"oracle quadrature did not converge: worst relative error {max(errs):.3e}")
    mean_d1 = pieces["d1"] / z
    var_d1 = pieces["d1sq"] / z - mean_d1**2
    mean_d2 = pieces["d2"] / z

    theta_sq = 1.0 / (2.0 * alpha * n) - mean_d1
    # the -1/(2 alpha^2 N^2) piece is d^2/dalpha^2 of the ln sqrt(alpha)
    # prefactor of the auxiliary-field representation
    theta_4 = theta_sq**2 - 1.0 / (2.0 * alpha**2 * n**2) + var_d1 - mean_d2 / n
    return OracleResult(alpha, n, float(theta_sq), float(theta_4),
                        float(theta_4 / theta_sq**2), float(max(errs)))


def photon_number(alpha: float, n_particles: int, n_crit: float,
                  theta_sq: float) -> float:
    """n_cav = N * n_bar * <Theta^2> with n_bar = alpha * n_crit."""
    return n_particles * alpha * n_crit * theta_sq


# ------------------------------------------------------- closed branches

@dataclass(frozen=True)
class PhotonStats:
    n_cav: float
    g2_zero: float
    regime: str       # "below" | "at" | "above"
    method: str
    note: str = ""


def ncav_closed_forms(alpha: float, n_particles: int, n_crit: float,
                      band: float | None = None) -> PhotonStats:
    """Closed-form photon number and zero-delay g2 by regime.

    The crossover window around threshold has width ~ N^{-1/2} in alpha,
    which is the default classification band.

    below:  Gaussian fluctuations, n_cav = alpha*n_crit/(2(1-alpha)), g2 = 3
    at:     quartic fluctuations, n_cav = 2 sqrt(N) n_crit G(3/4)/G(1/4),
            g2 = 2.18844...
    above:  condensed order parameter, n_cav = N alpha n_crit theta_bar^2,
            g2 = 1 (leading order in N)
    """
    if alpha < 0.0 or n_crit <= 0.0 or n_particles < 1:
        raise ValueError("need alpha >= 0, n_crit > 0, n_particles >= 1")
    if band is None:
        band = 1.0 / np.sqrt(n_particles)
    if alpha < 1.0 - band:
        ncav = alpha * n_crit / (2.0 * (1.0 - alpha))
        return PhotonStats(float(ncav), 3.0, "below", "gaussian-fluctuations")
    if alpha > 1.0 + band:
        tb = solve_fixed_point(alpha).theta_bar
        ncav = n_particles * alpha * n_crit * tb**2
        return PhotonStats(float(ncav), 1.0, "above", "mean-field",
                           note="g2 correction is O(1/sqrt(N))")
    ncav = 2.0 * np.sqrt(n_particles) * n_crit * gamma_fn(0.75) / gamma_fn(0.25)
    return PhotonStats(float(ncav), G2_THRESHOLD, "at", "quartic-saddle")


def g2_factorized(r: float, n_particles: int) -> float:
    """g2 from single-particle cos moments, ignoring angle correlations.

    Expands N^2 Theta^2 and N^4 Theta^4 into single-particle moments of
    the tilted angle distribution ~ exp(2 r theta_bar cos x) assuming the
    angles are independent.  Accurate above threshold up to O(1/N); used
    as the cross-check column beside the exact oracle.
    """
    n = int(n_particles)
    if n < 4:
        raise ValueError("factorized moments need at least 4 particles")
    m1, m2, m3, m4 = cos_moments(r)
    t2 = (n * m2 + n * (n - 1) * m1**2) / n**2
    t4 = (n * m4
          + 4.0 * n * (n - 1) * m3 * m1
          + 3.0 * n * (n - 1) * m2**2
          + 6.0 * n * (n - 1) * (n - 2) * m2 * m1**2
          + n * (n - 1) * (n - 2) * (n - 3) * m1**4) / n**4
    return float(t4 / t2**2)


# ------------------------------------------------ time-domain statistics

@dataclass(frozen=True)
class SpectrumResult:
    tau: np.ndarray
    c_tau: np.ndarray
    omega: np.ndarray
    s_omega: np.ndarray
    peak_omega: float
    peak_height: float


def autocorrelation(theta: np.ndarray, sample_dt: float, tau_max: float,
                    burn_in: int = 0, nperseg: int | None = None,
                    omega_min: float = 0.0) -> SpectrumResult:
    """Raw C(tau) = <Theta(t) Theta(t+tau)> and the Welch power spectrum.

    theta is (n_samples,) or (n_samples, n_traj); trajectories are
    averaged.  The record after burn-in must cover at least 4*tau_max.
    C(tau) is the unbiased raw lag product; the spectrum uses Hann-
    windowed Welch segments with per-segment mean removal, so the
    coherent peak position is unaffected by the +-theta_bar offset.
    The peak is located for omega >= omega_min as the power-weighted
    centroid of the contiguous half-power region around the maximum
    bin, which stays put under per-bin estimator noise even when the
    peak is broad; for a sharp line it collapses to the peak bin.
    """
    th = np.asarray(theta, dtype=float)
    if th.ndim == 1:
        th = th[:, None]
    th = th[burn_in:]
    n = th.shape[0]
    if n * sample_dt < 4.0 * tau_max:
        raise ValueError(
            f"record length {n * sample_dt:g} after burn-in is shorter than "
            f"4 * tau_max = {4.0 * tau_max:g}")
    lags = int(round(tau_max / sample_dt))

    # unbiased raw autocorrelation via FFT, averaged over trajectories
    nfft = 1 << int(np.ceil(np.log2(2 * n)))
    spec = np.fft.rfft(th, n=nfft, axis=0)
    acf = np.fft.irfft(spec * np.conj(spec), n=nfft, axis=0)[: lags + 1]
    acf = acf.mean(axis=1) / (n - np.arange(lags + 1))
    tau = np.arange(lags + 1) * sample_dt

    if nperseg is None:
        nperseg = min(n, 1024)
    freq, psd = welch(th, fs=1.0 / sample_dt, window="hann",
                      nperseg=nperseg, axis=0, detrend="constant")
    s_omega = psd.mean(axis=1) / (2.0 * np.pi)
    omega = 2.0 * np.pi * freq

    k0 = int(np.searchsorted(omega, omega_min))
    k0 = max(k0, 1)
    k = k0 + int(np.argmax(s_omega[k0:]))
    peak_omega = _half_power_centroid(omega[k0:], s_omega[k0:], k - k0)
    return SpectrumResult(tau=tau, c_tau=acf, omega=omega, s_omega=s_omega,
                          peak_omega=peak_omega, peak_height=float(s_omega[k]))


def _half_power_centroid(x, y, k) -> float:
    """Centroid of the contiguous region around bin k with y >= y[k]/2."""
    half = 0.5 * y[k]
    lo = k
    while lo > 0 and y[lo - 1] >= half:
        lo -= 1
    hi = k
    while hi < len(y) - 1 and y[hi + 1] >= half:
        hi += 1
    w = y[lo:hi + 1]
    return float((x[lo:hi + 1] * w).sum() / w.sum())


# ------------------------------------------------------ pendulum predictor

@dataclass(frozen=True)
class PendulumSummary:
    omega0: float              # harmonic frequency at the well bottom
    omega0_signal: float       # = 2 * omega0, top of the signal band
    omega_orbital_mean: float  # <orbital frequency> over the stationary state
    omega_signal_mean: float   # <signal frequency>, atoms counted equally
    omega_signal_power_mean: float  # <signal frequency> weighted by power
    libration_fraction: float
    theta_bar: float


def pendulum_peak(coeffs, nx: int = 256, np_: int = 1024) -> PendulumSummary:
    """Frequency content of Theta(t) predicted from single-particle orbits.

    In the organized state each atom moves in the self-consistent well
    V(x) = -U cos x whose amplitude U = S^2 N |F0| theta_bar is the
    conservative part of the cavity force.  The orbital frequency
    follows from the complete elliptic integral: librating orbits with
    energy parameter ksq = (e + U)/(2U) < 1 run at pi*omega0/(2 K(ksq));
    rotating orbits (ksq > 1) at pi*omega0*k / K(1/ksq).  Averages are
    taken over the stationary phase-space density.  cos(x) oscillates at
    twice the orbital rate for librators and at the winding rate for
    rotators.  The plain signal mean counts every atom equally; the
    power mean weights each orbit by the variance of cos(x) along it,
    which is the weight each orbit carries in the power spectrum of
    Theta, so it is the comparator for a measured spectral peak.
    """
    if coeffs.delta_c >= 0.0:
        raise ValueError("pendulum predictor needs delta_c < 0")
    r = coeffs.ratio
    if r <= 1.0:
        raise ValueError(f"no organized well below threshold (ratio {r:.3g} <= 1)")
    theta_bar = solve_fixed_point(r).theta_bar
    u_depth = coeffs.S2 * coeffs.n_particles * abs(coeffs.F0) * theta_bar
    m = coeffs.m
    omega0 = float(np.sqrt(u_depth / m))

    x = np.arange(nx) * (2.0 * np.pi / nx)
    p_max = 6.0 * np.sqrt(m / coeffs.beta) + np.sqrt(4.0 * m * u_depth)
    p = np.linspace(-p_max, p_max, np_)
    wx = np.exp(coeffs.beta * u_depth * (np.cos(x) - 1.0))
    wp = np.exp(-coeffs.beta * p**2 / (2.0 * m))
    w = wx[:, None] * wp[None, :]

    energy = p[None, :] ** 2 / (2.0 * m) - u_depth * np.cos(x)[:, None]
    ksq = (energy + u_depth) / (2.0 * u_depth)
    ok = np.abs(ksq - 1.0) > 1e-9
    lib = ksq < 1.0

    omega_orb = np.empty_like(ksq)
    kl = np.where(lib & ok, ksq, 0.0)
    omega_orb_lib = np.pi * omega0 / (2.0 * ellipk(kl))
    kr = np.where(~lib & ok, ksq, 4.0)
    omega_orb_rot = np.pi * omega0 * np.sqrt(kr) / ellipk(1.0 / kr)
    omega_orb = np.where(lib, omega_orb_lib, omega_orb_rot)
    omega_sig = np.where(lib, 2.0 * omega_orb, omega_orb)

    # orbit-averaged variance of cos(x): the oscillating power the orbit
    # contributes to the Theta spectrum.  <sn^2> and <sn^4> over a period
    # have closed forms in K and E.
    msq = np.clip(np.where(lib, kl, 1.0 / kr), 1e-12, 1.0 - 1e-12)
    K, E = ellipk(msq), ellipe(msq)
    sn2 = (K - E) / (msq * K)
    sn4 = ((2.0 + msq) * K - 2.0 * (1.0 + msq) * E) / (3.0 * msq**2 * K)
    amp = np.where(lib, msq, 1.0)   # cos x = 1 - 2 a sn^2 along the orbit
    var = (1.0 - 4.0 * amp * sn2 + 4.0 * amp**2 * sn4) \
        - (1.0 - 2.0 * amp * sn2) ** 2

    wt = np.where(ok, w, 0.0)
    norm = wt.sum()
    wpow = wt * var
    return PendulumSummary(
        omega0=omega0,
        omega0_signal=2.0 * omega0,
        omega_orbital_mean=float((wt * omega_orb).sum() / norm),
        omega_signal_mean=float((wt * omega_sig).sum() / norm),
        omega_signal_power_mean=float((wpow * omega_sig).sum() / wpow.sum()),
        libration_fraction=float(wt[lib].sum() / norm),
        theta_bar=theta_bar,
    )
