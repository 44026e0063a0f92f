"""Kinetic simulations of laser-driven atoms self-organizing in a lossy cavity.

The package implements three levels of description of the same system, all
expressed in natural units (hbar = k = kappa = 1):

* ``nbody``     -- stochastic trajectories equivalent to the N-particle
                   Fokker-Planck equation (long-range friction, correlated
                   diffusion driven by one shared Wiener process).
* ``meanfield`` -- mean-field Fokker-Planck evolution of the single-particle
                   distribution f(x, p), including friction and diffusion.
* ``vlasov``    -- the collisionless (thermodynamic-limit) transport equation.

The analytic layer lives in ``model`` (coefficients), ``steady`` (fixed
points, stationary states), ``stability`` (dispersion relation, growth
rates) and ``observables`` (photon statistics, spectra, pendulum
frequencies).  ``cli`` provides the batch front-end.
"""

from . import model, steady, phasespace, vlasov, meanfield, nbody, stability, observables

__all__ = [
    "model",
    "steady",
    "phasespace",
    "vlasov",
    "meanfield",
    "nbody",
    "stability",
    "observables",
]

__version__ = "0.1.0"
