"""Per-mode symbol analysis for the memory-damped sigma-evolution model.

The first-order mode system for the Fourier transform of
(u_t + i|D|^s u, u_t - i|D|^s u, memory - u) has the coefficient matrix

    A(r) = A0 * r^sigma + A1,   r = |xi|,

with A0 = diag(i, -i, 0) and A1 = [[0,0,1],[0,0,1],[-1/2,-1/2,-1]].
Its characteristic polynomial is the real cubic

    lam^3 + lam^2 + (1 + a^2) lam + a^2 = 0,   a = r^sigma,

which always carries exactly one real root and one complex-conjugate
pair (the derivative 3 lam^2 + 2 lam + 1 + a^2 has negative
discriminant), a fact the branch labelling below relies on.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .params import ModelParams

SQRT3 = np.sqrt(3.0)

# Mode matrix blocks: drift part (diagonal dispersion) and damping part.
A0 = np.diag([1j, -1j, 0.0]).astype(complex)
A1 = np.array([[0.0, 0.0, 1.0],
               [0.0, 0.0, 1.0],
               [-0.5, -0.5, -1.0]], dtype=complex)

# Eigenvectors of A1, ordered (real branch, Im<0 branch, Im>0 branch).
# This is the zero-frequency diagonalizer.
V0 = np.array([[-1.0, (-1 + 1j * SQRT3) / 2, -(1 + 1j * SQRT3) / 2],
               [1.0, (-1 + 1j * SQRT3) / 2, -(1 + 1j * SQRT3) / 2],
               [0.0, 1.0, 1.0]], dtype=complex)

# First- and second-order corrections to the small-frequency diagonalizer,
# entered per unit power of a = r^sigma resp. a^2.
_SMALL_CORR1 = np.array(
    [[0.0, -(SQRT3 + 1j) / (1 + 1j * SQRT3), (-SQRT3 + 1j) / (-1 + 1j * SQRT3)],
     [-2 * SQRT3 / (3 * (1 + 1j * SQRT3)), 0.0, 0.0],
     [2 * SQRT3 / (3 * (1 - 1j * SQRT3)), 0.0, 0.0]], dtype=complex)
_SMALL_CORR2 = np.array(
    [[0.0, 0.0, 0.0],
     [0.0, 0.0, (-1 + 1j * SQRT3) / 6],
     [0.0, -(1 + 1j * SQRT3) / 6, 0.0]], dtype=complex)

# Large-frequency corrections, per unit power of b = r^-sigma, b^2, b^3.
_LARGE_CORR1 = np.array([[0.0, 0.0, 1j],
                         [0.0, 0.0, -1j],
                         [0.5j, -0.5j, 0.0]], dtype=complex)
_LARGE_CORR2 = np.array([[0.0, 0.25, -1.0],
                         [0.25, 0.0, -1.0],
                         [-0.5, -0.5, 0.0]], dtype=complex)
_LARGE_CORR3 = np.array([[0.0, 0.25j, -1j],
                         [-0.25j, 0.0, 1j],
                         [-0.5j, 0.5j, 0.0]], dtype=complex)


class BranchTag(Enum):
    SMALL_MATCHED = "small-matched"
    LARGE_MATCHED = "large-matched"
    CONTINUED = "continued"


@dataclass(frozen=True)
class EigenTriple:
    lambda1: complex
    lambda2: complex
    lambda3: complex
    branch_tag: BranchTag

    def as_array(self) -> np.ndarray:
        return np.array([self.lambda1, self.lambda2, self.lambda3])


@dataclass(frozen=True)
class Diagonalizer:
    transform: np.ndarray
    inverse: np.ndarray
    zone: str  # "small" or "large"


def system_matrix(params: ModelParams, xi_mag: float) -> np.ndarray:
    """Mode matrix A0 * xi_mag^sigma + A1; trace is exactly -1."""
    if xi_mag < 0:
        raise ValueError("xi_mag must be >= 0")
    return A0 * float(xi_mag) ** params.sigma + A1


def characteristic_coeffs(params: ModelParams, xi_mag: float):
    """Monic cubic coefficients (c3, c2, c1, c0) of the mode matrix."""
    if xi_mag < 0:
        raise ValueError("xi_mag must be >= 0")
    a2 = float(xi_mag) ** (2 * params.sigma)
    return (1.0, 1.0, 1.0 + a2, a2)


def _cubic_roots_structured(a2):
    """Roots of lam^3+lam^2+(1+a2)lam+a2 for an array a2, shape (n, 3).

    Companion-matrix eigensolve with two Newton polish sweeps, then the
    (real, Im<0, Im>0) structure is enforced exactly: the output real
    branch has zero imaginary part and the pair is exactly conjugate.
    """
    a2 = np.atleast_1d(np.asarray(a2, dtype=float))
    n = a2.shape[0]
    comp = np.zeros((n, 3, 3))
    comp[:, 0, 0] = -1.0
    comp[:, 0, 1] = -(1.0 + a2)
    comp[:, 0, 2] = -a2
    comp[:, 1, 0] = 1.0
    comp[:, 2, 1] = 1.0
    lam = np.linalg.eigvals(comp)
    for _ in range(2):
        p = ((lam + 1.0) * lam + (1.0 + a2[:, None])) * lam + a2[:, None]
        dp = (3.0 * lam + 2.0) * lam + (1.0 + a2[:, None])
        lam = lam - np.where(np.abs(dp) > 0, p / dp, 0.0)
    i_real = np.argmin(np.abs(lam.imag), axis=1)
    idx = np.arange(n)
    real_root = np.real(lam[idx, i_real])
    rest = np.array([[j for j in range(3) if j != i] for i in i_real])
    pair = 0.5 * (lam[idx, rest[:, 0]] + np.conj(lam[idx, rest[:, 1]]))
    im = np.abs(pair.imag)
    out = np.empty((n, 3), dtype=complex)
    out[:, 0] = real_root
    out[:, 1] = pair.real - 1j * im
    out[:, 2] = pair.real + 1j * im
    return out


def eigenvalues_ordered(params: ModelParams, xi_mag) -> np.ndarray:
    """Vectorized eigenvalues in fixed continuation order (real, Im<0, Im>0).

    This order is globally continuous in xi_mag: the cubic has exactly one
    real root for every xi_mag >= 0, so the real branch and the conjugate
    pair never exchange.  Shape (n, 3) for array input.
    """
    xi = np.atleast_1d(np.asarray(xi_mag, dtype=float))
    if np.any(xi < 0):
        raise ValueError("xi_mag must be >= 0")
    return _cubic_roots_structured(xi ** (2 * params.sigma))


def exact_eigenvalues(params: ModelParams, xi_mag: float) -> EigenTriple:
    """Cubic roots with zone-dependent branch labels.

    Small zone: branch 1 is the real root near 0, branches 2/3 are the
    conjugate pair (Im<0 first).  Large zone: branches 1/2 are the
    oscillatory pair (Im lambda1 > 0) and branch 3 is the real root near
    -1.  In between the continuation order is kept and the tag says so.
    """
    lam = eigenvalues_ordered(params, xi_mag)[0]
    if xi_mag < params.eps_zone:
        return EigenTriple(lam[0], lam[1], lam[2], BranchTag.SMALL_MATCHED)
    if xi_mag > params.n_zone:
        return EigenTriple(lam[2], lam[1], lam[0], BranchTag.LARGE_MATCHED)
    return EigenTriple(lam[0], lam[1], lam[2], BranchTag.CONTINUED)


def branch_sweep(params: ModelParams, xi_grid) -> np.ndarray:
    """Nearest-neighbour continuation of the three branches along xi_grid.

    Anchored at the exact xi=0 roots (0, conjugate pair).  Returns shape
    (len(xi_grid), 3).  Used by the eigen table export and as a
    cross-check of the structural labelling in eigenvalues_ordered.
    """
    xi_grid = np.asarray(xi_grid, dtype=float)
    anchor = np.array([0.0, -0.5 - 0.5j * SQRT3, -0.5 + 0.5j * SQRT3])
    out = np.empty((len(xi_grid), 3), dtype=complex)
    prev = anchor
    for i, xm in enumerate(xi_grid):
        roots = list(eigenvalues_ordered(params, xm)[0])
        track = np.empty(3, dtype=complex)
        taken = [False, False, False]
        for j in range(3):
            dists = [abs(prev[j] - roots[k]) if not taken[k] else np.inf
                     for k in range(3)]
            k = int(np.argmin(dists))
            track[j] = roots[k]
            taken[k] = True
        out[i] = track
        prev = track
    return out


def asymptotic_eigenvalues_small(params: ModelParams, xi_mag: float) -> EigenTriple:
    """Second-order small-frequency expansions of the three branches."""
    a2 = float(xi_mag) ** (2 * params.sigma)
    l1 = complex(-a2)
    l2 = -(0.5 + 0.5j * SQRT3) + (0.5 - 1j * SQRT3 / 6) * a2
    l3 = -(0.5 - 0.5j * SQRT3) + (0.5 + 1j * SQRT3 / 6) * a2
    return EigenTriple(l1, l2, l3, BranchTag.SMALL_MATCHED)


def asymptotic_eigenvalues_large(params: ModelParams, xi_mag: float) -> EigenTriple:
    """Second-order large-frequency expansions; xi_mag = 0 is rejected."""
    if xi_mag <= 0:
        raise ValueError("large-frequency expansion needs xi_mag > 0")
    a = float(xi_mag) ** params.sigma
    b = 1.0 / a
    l1 = 1j * a + 0.5j * b - 0.5 * b * b
    l2 = -1j * a - 0.5j * b - 0.5 * b * b
    l3 = -1.0 + b * b
    return EigenTriple(l1, l2, l3, BranchTag.LARGE_MATCHED)


def small_transform(a) -> np.ndarray:
    """V0 (I + a C1)(I + a^2 C2) for an array of a = xi^sigma, shape (n,3,3)."""
    a = np.atleast_1d(np.asarray(a, dtype=float))
    I = np.eye(3, dtype=complex)[None]
    f1 = I + a[:, None, None] * _SMALL_CORR1[None]
    f2 = I + (a ** 2)[:, None, None] * _SMALL_CORR2[None]
    return np.matmul(np.broadcast_to(V0, (len(a), 3, 3)), np.matmul(f1, f2))


def large_transform(b) -> np.ndarray:
    """(I + b C1)(I + b^2 C2)(I + b^3 C3) for b = xi^-sigma, shape (n,3,3)."""
    b = np.atleast_1d(np.asarray(b, dtype=float))
    I = np.eye(3, dtype=complex)[None]
    f1 = I + b[:, None, None] * _LARGE_CORR1[None]
    f2 = I + (b ** 2)[:, None, None] * _LARGE_CORR2[None]
    f3 = I + (b ** 3)[:, None, None] * _LARGE_CORR3[None]
    return np.matmul(f1, np.matmul(f2, f3))


def diagonalizer_small(params: ModelParams, xi_mag: float) -> Diagonalizer:
    if xi_mag < 0:
        raise ValueError("xi_mag must be >= 0")
    T = small_transform(np.array([float(xi_mag) ** params.sigma]))[0]
    return _make_diagonalizer(T, "small")


def diagonalizer_large(params: ModelParams, xi_mag: float) -> Diagonalizer:
    if xi_mag <= 0:
        raise ValueError("xi_mag must be > 0 in the large zone")
    T = large_transform(np.array([float(xi_mag) ** (-params.sigma)]))[0]
    return _make_diagonalizer(T, "large")


def _make_diagonalizer(T: np.ndarray, zone: str) -> Diagonalizer:
    cond = np.linalg.cond(T)
    if not np.isfinite(cond) or cond > 1e12:
        raise np.linalg.LinAlgError(
            f"{zone}-zone transform is numerically singular (cond={cond:.2e}); "
            "it is only valid inside its own frequency zone"
        )
    return Diagonalizer(transform=T, inverse=np.linalg.inv(T), zone=zone)


def _smoothstep(x):
    """C-infinity ramp from 0 at x<=0 to 1 at x>=1, exp(-1/x) glue."""
    x = np.clip(np.asarray(x, dtype=float), 0.0, 1.0)
    with np.errstate(divide="ignore", over="ignore", under="ignore"):
        e1 = np.where(x > 0.0, np.exp(-1.0 / np.maximum(x, 1e-300)), 0.0)
        e2 = np.where(x < 1.0, np.exp(-1.0 / np.maximum(1.0 - x, 1e-300)), 0.0)
    return e1 / (e1 + e2)


def zone_cutoffs(params: ModelParams, xi_mag):
    """Smooth partition of unity (chi_int, chi_mid, chi_ext) at |xi| = xi_mag.

    chi_int is 1 on [0, eps/2] and vanishes beyond eps; chi_ext vanishes
    up to N and is 1 beyond 2N; chi_mid = 1 - chi_int - chi_ext, so the
    three sum to 1 exactly and chi_mid is supported in [eps/2, 2N].
    """
    r = np.asarray(xi_mag, dtype=float)
    eps, nz = params.eps_zone, params.n_zone
    c_int = 1.0 - _smoothstep((r - eps / 2) / (eps / 2))
    c_ext = _smoothstep((r - nz) / nz)
    c_mid = 1.0 - c_int - c_ext
    return c_int, c_mid, c_ext


def middle_zone_gap(params: ModelParams, samples: int = 400) -> float:
    """Measured spectral gap c_mid = min over the middle zone of -max_j Re lambda_j.

    Positive for every valid parameter set; the minimum sits at the large
    end of the zone where the oscillatory pair has Re ~ -(1/2) N^(-2 sigma).
    """
    xs = np.logspace(np.log10(params.eps_zone), np.log10(params.n_zone), samples)
    lam = eigenvalues_ordered(params, xs)
    return float(np.min(-np.max(lam.real, axis=1)))
