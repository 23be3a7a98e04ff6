"""memwave: a spectral laboratory for fractional wave equations damped
through an exponentially fading memory of the solution.

The linear flow is evolved exactly mode by mode; on top of it sit decay-
rate verification, two-zone reference approximations, a semilinear
pseudo-spectral integrator with blow-up instrumentation, and the closed-
form critical-exponent calculus.
"""

__version__ = "0.1.0"

from .params import ModelParams
from .symbol import (EigenTriple, exact_eigenvalues, system_matrix,
                     zone_cutoffs)
from .propagator import (FieldSnapshot, Grid, ModeState, evolve_field,
                         fundamental_mode, initial_state_from_u1,
                         propagate_mode, reconstruct_scalars)
from .decay import (RateFit, fit_decay_rate, pointwise_bound_scan,
                    predicted_rate, rate_convolution, sobolev_norm)
from .exponents import blowup_applicable, ell_star, gee_admissible, n0, p_crit

__all__ = [
    "ModelParams", "EigenTriple", "exact_eigenvalues", "system_matrix",
    "zone_cutoffs", "FieldSnapshot", "Grid", "ModeState", "evolve_field",
    "fundamental_mode", "initial_state_from_u1", "propagate_mode",
    "reconstruct_scalars", "RateFit", "fit_decay_rate",
    "pointwise_bound_scan", "predicted_rate", "rate_convolution",
    "sobolev_norm", "blowup_applicable", "ell_star", "gee_admissible",
    "n0", "p_crit", "__version__",
]
