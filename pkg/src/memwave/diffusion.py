"""Reference evolutions for both frequency zones and refinement deficits.

The two reference flows replace the exact mode evolution by the
truncated eigenvalue profiles conjugated with the matching truncated
transform chains.  At t = 0 each chain cancels its own inverse, so the
reference agrees with the data exactly on the interior of its zone; the
deficit against the true flow is what the refinement estimates bound.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .decay import RateFit, fit_decay_rate
from .params import ModelParams
from .propagator import Grid, propagate_modes_vec
from .symbol import (SQRT3, V0, _LARGE_CORR1, _LARGE_CORR2, _SMALL_CORR1,
                     zone_cutoffs)


@dataclass(frozen=True)
class ReferenceSpec:
    kind: str                 # "small-zone" | "large-zone"
    lambda_profiles: callable  # a-array -> (n,3) truncated eigenvalues
    transform_chain: callable  # a-array -> (n,3,3) matrix factors


def lambda_profiles_small(a):
    """Truncated small-frequency eigenvalues as functions of a = |xi|^sigma."""
    a2 = np.asarray(a, dtype=float) ** 2
    l1 = -a2 + 0j
    l2 = -(0.5 + 0.5j * SQRT3) + (0.5 - 1j * SQRT3 / 6) * a2
    l3 = -(0.5 - 0.5j * SQRT3) + (0.5 + 1j * SQRT3 / 6) * a2
    return np.stack([l1, l2, l3], axis=-1)


def lambda_profiles_large(b):
    """Truncated large-frequency eigenvalues as functions of b = |xi|^-sigma."""
    b = np.asarray(b, dtype=float)
    a = 1.0 / b
    l1 = 1j * a + 0.5j * b - 0.5 * b * b
    l2 = -1j * a - 0.5j * b - 0.5 * b * b
    l3 = -1.0 + b * b
    return np.stack([l1, l2, l3], axis=-1)


def small_reference_chain(a):
    """Transform chain of the small-zone reference: V0 (I + a C1)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    I = np.eye(3, dtype=complex)[None]
    f1 = I + a[:, None, None] * _SMALL_CORR1[None]
    return np.matmul(np.broadcast_to(V0, (len(a), 3, 3)), f1)


def large_reference_chain(b):
    """Transform chain of the large-zone reference: (I + b C1)(I + b^2 C2)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    I = np.eye(3, dtype=complex)[None]
    f1 = I + b[:, None, None] * _LARGE_CORR1[None]
    f2 = I + (b ** 2)[:, None, None] * _LARGE_CORR2[None]
    return np.matmul(f1, f2)


SMALL_REFERENCE = ReferenceSpec("small-zone", lambda_profiles_small,
                                small_reference_chain)
LARGE_REFERENCE = ReferenceSpec("large-zone", lambda_profiles_large,
                                large_reference_chain)


def reference_small_modes(params: ModelParams, xi_mag, U0, times):
    """Small-zone reference evolution, zero outside the interior cutoff.

    xi_mag: (n,), U0: (n,3), times: (m,) -> (m,n,3).
    """
    xi = np.atleast_1d(np.asarray(xi_mag, dtype=float))
    U0 = np.atleast_2d(np.asarray(U0, dtype=complex))
    times = np.asarray(times, dtype=float)
    out = np.zeros((len(times), len(xi), 3), dtype=complex)
    sel = xi < params.eps_zone
    if not np.any(sel):
        return out
    a = xi[sel] ** params.sigma
    T = small_reference_chain(a)
    # chain is a bounded perturbation of the constant eigenvector matrix
    # inside the zone; singularity would need |xi| >> eps
    c = np.linalg.solve(T, U0[sel][..., None])[..., 0]
    lam = lambda_profiles_small(a)
    chi = zone_cutoffs(params, xi[sel])[0]
    for i, t in enumerate(times):
        out[i][sel] = chi[:, None] * np.einsum("nab,nb->na", T, np.exp(lam * t) * c)
    return out


def reference_large_modes(params: ModelParams, xi_mag, U0, times):
    """Large-zone reference evolution, zero below the exterior cutoff."""
    xi = np.atleast_1d(np.asarray(xi_mag, dtype=float))
    U0 = np.atleast_2d(np.asarray(U0, dtype=complex))
    times = np.asarray(times, dtype=float)
    out = np.zeros((len(times), len(xi), 3), dtype=complex)
    sel = xi > params.n_zone
    if not np.any(sel):
        return out
    b = xi[sel] ** (-params.sigma)
    T = large_reference_chain(b)
    c = np.linalg.solve(T, U0[sel][..., None])[..., 0]
    lam = lambda_profiles_large(b)
    chi = zone_cutoffs(params, xi[sel])[2]
    for i, t in enumerate(times):
        out[i][sel] = chi[:, None] * np.einsum("nab,nb->na", T, np.exp(lam * t) * c)
    return out


def reference_small_mode(params: ModelParams, xi_mag: float, U0_hat, t: float):
    """Single-mode convenience wrapper around reference_small_modes."""
    if t < 0:
        raise ValueError("t must be >= 0")
    return reference_small_modes(params, np.array([xi_mag]),
                                 np.asarray(U0_hat, dtype=complex)[None],
                                 np.array([t]))[0, 0]


def reference_large_mode(params: ModelParams, xi_mag: float, U0_hat, t: float):
    if t < 0:
        raise ValueError("t must be >= 0")
    if xi_mag <= 0:
        raise ValueError("large-zone reference needs xi_mag > 0")
    return reference_large_modes(params, np.array([xi_mag]),
                                 np.asarray(U0_hat, dtype=complex)[None],
                                 np.array([t]))[0, 0]


def deficit_norms(params: ModelParams, grid: Grid, u1, times, s: float = 0.0,
                  u1_is_spectral: bool = False, zone_weight=None):
    """Homogeneous-norm series of U and its three reference deficits.

    Returns (times, dict of arrays) with keys U, U_minus_S0,
    U_minus_Sinf, U_minus_both.  An optional zone_weight(kmag) array
    restricts the norms to part of the spectrum.
    """
    times = np.asarray(times, dtype=float)
    u1 = np.asarray(u1)
    u1h = u1.astype(complex) if u1_is_spectral else np.fft.fftn(u1)
    kmag = grid.freq_mag().ravel()
    u1f = u1h.ravel()
    U0 = np.stack([u1f, u1f, np.zeros_like(u1f)], axis=1)

    U = propagate_modes_vec(params, kmag, U0, np.zeros_like(u1f), times)[:, :, :3]
    S0 = reference_small_modes(params, kmag, U0, times)
    Si = reference_large_modes(params, kmag, U0, times)

    mult = kmag ** (2 * s)
    if zone_weight is not None:
        mult = mult * np.asarray(zone_weight, dtype=float).ravel() ** 2
    scale = grid.cell_volume() / grid.points ** grid.n

    def norm_of(V):
        return np.sqrt(scale * np.sum(mult[None, :] *
                                      np.sum(np.abs(V) ** 2, axis=2), axis=1))

    norms = {"U": norm_of(U),
             "U_minus_S0": norm_of(U - S0),
             "U_minus_Sinf": norm_of(U - Si),
             "U_minus_both": norm_of(U - S0 - Si)}
    return times, norms


def refinement_deficit(params: ModelParams, grid: Grid, u1, times,
                       s: float = 0.0, ell: float = None, fit_window=None,
                       u1_is_spectral: bool = False):
    """Fit decay rates of ||U||, ||U-S0||, ||U-Sinf|| and ||U-S0-Sinf||.

    Enforces the refinement hypothesis s + ell - sigma >= 0.  Returns
    a dict of RateFit records plus the gap of each deficit rate against
    the fitted base rate of ||U||.
    """
    if ell is None:
        ell = params.sigma - s + 1.0
    if s + ell - params.sigma < 0:
        raise ValueError(
            f"refinement hypothesis violated: s + ell - sigma = "
            f"{s + ell - params.sigma:.3g} < 0")
    times = np.asarray(times, dtype=float)
    if fit_window is None:
        fit_window = (float(times.min()), float(times.max()))
    _, norms = deficit_norms(params, grid, u1, times, s=s,
                             u1_is_spectral=u1_is_spectral)
    base_pred = -(params.n / (2 * params.sigma) * (1 / params.m - 0.5)
                  + s / (2 * params.sigma))
    preds = {"U": base_pred, "U_minus_S0": base_pred - 0.5,
             "U_minus_Sinf": base_pred, "U_minus_both": base_pred - 0.5}
    fits = {}
    for name, vals in norms.items():
        fits[name] = fit_decay_rate(list(zip(times, vals)), fit_window,
                                    quantity="u_Hs", predicted=preds[name])
    gaps = {name: fits[name].fitted_exponent - fits["U"].fitted_exponent
            for name in ("U_minus_S0", "U_minus_Sinf", "U_minus_both")}
    return fits, gaps, (times, norms)
