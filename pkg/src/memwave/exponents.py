"""Closed-form critical-exponent and admissibility calculus.

Both predicates treat the critical power itself as outside their range:
neither global existence nor blow-up is claimed at p = p_crit, matching
the open status of the borderline case for fractional orders.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field


@dataclass(frozen=True)
class AdmissibilityReport:
    admissible: bool
    violated: list = field(default_factory=list)   # (name, detail) pairs
    derived: dict = field(default_factory=dict)
    notes: list = field(default_factory=list)

    def __post_init__(self):
        if self.admissible != (len(self.violated) == 0):
            raise ValueError("admissible flag must mirror an empty violation list")


def _check_domains(n, m, sigma):
    if not (isinstance(n, int) and n >= 1):
        raise ValueError(f"n must be a positive integer, got {n}")
    if not (1.0 <= m < 2.0):
        raise ValueError(f"m must lie in [1, 2), got {m}")
    if not sigma >= 1.0:
        raise ValueError(f"sigma must be >= 1, got {sigma}")


def p_crit(n: int, m: float, sigma: float) -> float:
    """Critical power 1 + 2 m sigma / n."""
    _check_domains(n, m, sigma)
    return 1.0 + 2.0 * m * sigma / n


def ell_star(n: int, m: float, s: float, sigma: float) -> float:
    """Regularity-loss threshold n(1/m - 1/2) + 2s - sigma."""
    _check_domains(n, m, sigma)
    if s < 0:
        raise ValueError("s must be >= 0")
    return n * (1.0 / m - 0.5) + 2.0 * s - sigma


def n0(sigma: float) -> float:
    """Positive root of n^2 + 2(2 sigma + 1) n - 4(sigma^2 + sigma) = 0."""
    if sigma < 1:
        raise ValueError("sigma must be >= 1")
    b = 2.0 * sigma + 1.0
    return -b + math.sqrt(b * b + 4.0 * (sigma * sigma + sigma))


def n0_residual(sigma: float) -> float:
    """Defining quadratic evaluated at n0(sigma); ~0 up to roundoff."""
    r = n0(sigma)
    return r * r + 2.0 * (2.0 * sigma + 1.0) * r - 4.0 * (sigma * sigma + sigma)


def ceil_int(r: float) -> int:
    """Smallest integer C with r <= C (so ceil_int(1.0) == 1)."""
    return math.ceil(r)


def gee_admissible(n: int, m: float, sigma: float, s: float, ell: float,
                   p: float) -> AdmissibilityReport:
    """Full hypothesis battery for global existence of small-data solutions.

    Evaluates every named constraint and reports the failures; never
    raises on a failed constraint.
    """
    _check_domains(n, m, sigma)
    pc = p_crit(n, m, sigma)
    ls = ell_star(n, m, s, sigma)
    violated = []
    notes = []

    if not (0.0 < s < sigma):
        violated.append(("s_in_(0,sigma)", f"s = {s} not in (0, {sigma})"))
    lo = max(ls, 0.0)
    if not (lo <= ell < s):
        violated.append(("ell_window",
                         f"need max(ell*,0) = {lo:.6g} <= ell < s = {s}, "
                         f"got ell = {ell}"))
        if ls >= s:
            # the window is empty whenever s >= sigma - n(1/m - 1/2)
            violated.append(("s_lt_sigma_minus_n(1/m-1/2)",
                             f"ell* = {ls:.6g} >= s = {s}: requires "
                             f"s < {sigma - n * (1.0 / m - 0.5):.6g}"))
    if not p > 1 + ceil_int(ell):
        violated.append(("p_gt_1_plus_ceil_ell",
                         f"p = {p} must exceed 1 + ceil(ell) = {1 + ceil_int(ell)}"))
    dim_cap = 2.0 * m * sigma / (2.0 - m)
    if not n < dim_cap:
        violated.append(("n_lt_2msigma_over_2minusm",
                         f"n = {n} must be below {dim_cap:.6g}"))
    if n <= 4.0 * s / (2.0 - m) and not p >= 2.0 / m:
        violated.append(("p_ge_2_over_m",
                         f"n <= 4s/(2-m) forces p >= {2.0 / m:.6g}, got {p}"))
    if n > 2 * s:
        cap = (n - 2.0 * ell) / (n - 2.0 * s)
        if not p <= cap:
            violated.append(("p_le_(n-2ell)_over_(n-2s)",
                             f"n > 2s caps p at {cap:.6g}, got {p}"))
    if not p > pc:
        violated.append(("p_gt_pcrit", f"p = {p} must exceed p_crit = {pc:.6g}"))
        if p == pc:
            notes.append("p equals p_crit: the borderline case is left open, "
                         "neither existence nor blow-up is asserted")

    derived = {"p_crit": pc, "ell_star": ls,
               "n0": n0(sigma), "p_prime": p / (p - 1.0)}
    return AdmissibilityReport(admissible=not violated, violated=violated,
                               derived=derived, notes=notes)


def blowup_applicable(n: int, m: float, sigma: float, p: float,
                      data_kind: str) -> AdmissibilityReport:
    """Applicability of the subcritical blow-up result.

    data_kind: 'positive-mass' (m = 1) or 'slow-decay' (m in (1,2)).
    Also reports the scaling exponent -2 sigma p' + 2 sigma + n driving
    the contradiction, and for m > 1 the margin n(1 - 1/m) against it.
    """
    _check_domains(n, m, sigma)
    if data_kind not in ("positive-mass", "slow-decay"):
        raise ValueError(f"unknown data_kind {data_kind!r}")
    pc = p_crit(n, m, sigma)
    pp = p / (p - 1.0)
    scaling = -2.0 * sigma * pp + 2.0 * sigma + n
    violated = []
    notes = []
    if not (1.0 < p < pc):
        violated.append(("p_in_(1,pcrit)",
                         f"need 1 < p < p_crit = {pc:.6g}, got p = {p}"))
        if p == pc:
            notes.append("p equals p_crit: blow-up at the critical power is "
                         "only settled for integer sigma with m = 1")
    if m == 1.0 and data_kind != "positive-mass":
        violated.append(("data_kind", "m = 1 requires positive-mass data"))
    if m > 1.0 and data_kind != "slow-decay":
        violated.append(("data_kind", "m in (1,2) requires slow-decay data"))

    derived = {"p_crit": pc, "p_prime": pp, "scaling_exponent": scaling}
    if m > 1.0:
        derived["growth_margin"] = n * (1.0 - 1.0 / m) - scaling
    return AdmissibilityReport(admissible=not violated, violated=violated,
                               derived=derived, notes=notes)


def region_sweep(n_values, p_values, m: float, sigma: float, s: float,
                 ell: float):
    """Constraint-by-constraint truth table over a (n, p) lattice."""
    rows = []
    for n in n_values:
        for p in p_values:
            pc = p_crit(int(n), m, sigma)
            gee = gee_admissible(int(n), m, sigma, s, ell, float(p))
            kind = "positive-mass" if m == 1.0 else "slow-decay"
            blw = blowup_applicable(int(n), m, sigma, float(p), kind)
            rows.append({"n": int(n), "p": float(p), "p_crit": pc,
                         "gee": gee.admissible, "blowup": blw.admissible})
    return rows
