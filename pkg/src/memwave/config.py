"""Strict JSON experiment configs.

One canonical format: a single JSON object whose keys are validated
against a nested schema.  Unknown keys are an error (with their dotted
path), as are type and domain violations; defaults are filled only for
known keys.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

from .params import ModelParams

SUBCOMMANDS = ("eigen", "linear-decay", "pointwise", "diffusion",
               "semilinear", "blowup", "pcrit", "admissible")


class ConfigError(ValueError):
    """Carries a list of (path, message) schema problems."""

    def __init__(self, problems):
        self.problems = list(problems)
        super().__init__("; ".join(f"{p}: {m}" for p, m in self.problems))


@dataclass(frozen=True)
class ExperimentConfig:
    subcommand: str
    params: ModelParams
    options: dict = field(default_factory=dict)
    figures: bool = True
    seed: int = 0


def _num(lo=None, hi=None, lo_open=False, hi_open=False):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, (int, float)):
            return "must be a number"
        if lo is not None and (v <= lo if lo_open else v < lo):
            return f"must be {'>' if lo_open else '>='} {lo}"
        if hi is not None and (v >= hi if hi_open else v > hi):
            return f"must be {'<' if hi_open else '<='} {hi}"
        return None
    return check


def _int(lo=None, hi=None):
    def check(v):
        if isinstance(v, bool) or not isinstance(v, int):
            return "must be an integer"
        if lo is not None and v < lo:
            return f"must be >= {lo}"
        if hi is not None and v > hi:
            return f"must be <= {hi}"
        return None
    return check


def _bool(v):
    return None if isinstance(v, bool) else "must be a boolean"


def _str_in(options):
    def check(v):
        return None if v in options else f"must be one of {sorted(options)}"
    return check


def _num_list(min_len=1):
    def check(v):
        if not isinstance(v, list) or len(v) < min_len:
            return f"must be a list with >= {min_len} entries"
        if any(isinstance(x, bool) or not isinstance(x, (int, float)) for x in v):
            return "entries must be numbers"
        return None
    return check


PARAMS_SCHEMA = {
    "sigma": (_num(lo=1.0), 1.0),
    "n": (_int(lo=1), 1),
    "m": (_num(lo=1.0, hi=2.0, hi_open=True), 1.0),
    "p": (_num(lo=1.0, lo_open=True), 2.0),
    "eps_zone": (_num(lo=0.0, lo_open=True), 0.1),
    "n_zone": (_num(lo=0.0, lo_open=True), 10.0),
}

GRID_SCHEMA = {
    "extent": (_num(lo=0.0, lo_open=True), 200.0),
    "points": (_int(lo=8), 2048),
}

DATA_SCHEMA = {
    "kind": (_str_in({"gaussian", "rough-tail", "zero"}), "gaussian"),
    "amplitude": (_num(lo=0.0), 1.0),
    "width": (_num(lo=0.0, lo_open=True), 1.0),
    "ell": (_num(lo=0.0), 2.0),
    "delta": (_num(lo=0.0, lo_open=True), 0.1),
}

TIMES_SCHEMA = {
    "t_min": (_num(lo=0.0), 1.0),
    "t_max": (_num(lo=0.0, lo_open=True), 1e4),
    "count": (_int(lo=2), 25),
}

_COMMON = {
    "params": PARAMS_SCHEMA,
    "figures": (_bool, True),
}

SCHEMAS = {
    "eigen": {**_COMMON,
              "xi_min": (_num(lo=0.0, lo_open=True), 1e-4),
              "xi_max": (_num(lo=0.0, lo_open=True), 1e4),
              "count": (_int(lo=2), 400),
              "spot_checks": (_int(lo=0), 1000)},
    "linear-decay": {**_COMMON,
                     "grid": GRID_SCHEMA,
                     "data": DATA_SCHEMA,
                     "times": TIMES_SCHEMA,
                     "fit_window": (_num_list(min_len=2), [1e2, 1e4]),
                     "s": (_num(lo=0.0), 0.0),
                     "export_physical": (_bool, False),
                     "quantities": (lambda v: None if (
                         isinstance(v, list) and v and
                         all(q in ("u_L2", "u_Hs", "Dsigma_u_Hs", "ut_Hs")
                             for q in v)) else
                         "must be a nonempty list of known quantities",
                         ["u_L2", "Dsigma_u_Hs", "ut_Hs"])},
    "pointwise": {**_COMMON,
                  "t_max": (_num(lo=0.0, lo_open=True), 1e4),
                  "t_count": (_int(lo=2), 40),
                  "xi_min": (_num(lo=0.0, lo_open=True), 1e-3),
                  "xi_max": (_num(lo=0.0, lo_open=True), 1e3),
                  "xi_count": (_int(lo=2), 48),
                  "c_candidates": (_int(lo=2), 64),
                  "C_cap": (_num(lo=1.0), 10.0)},
    "diffusion": {**_COMMON,
                  "grid": GRID_SCHEMA,
                  "data": DATA_SCHEMA,
                  "times": TIMES_SCHEMA,
                  "fit_window": (_num_list(min_len=2), [1e2, 1e4]),
                  "s": (_num(lo=0.0), 0.0),
                  "ell": (_num(lo=0.0), 2.0)},
    "semilinear": {**_COMMON,
                   "grid": GRID_SCHEMA,
                   "data": DATA_SCHEMA,
                   "dt": (_num(lo=0.0, lo_open=True), 0.05),
                   "t_final": (_num(lo=0.0, lo_open=True), 1e3),
                   "dealias_fraction": (_num(lo=0.0, hi=1.0, lo_open=True), 2.0 / 3.0),
                   "blowup_threshold": (_num(lo=0.0, lo_open=True), 1e6),
                   "c_stab": (_num(lo=0.0, lo_open=True), 100.0),
                   "snapshot_count": (_int(lo=0), 17),
                   "snapshot_times": (_num_list(min_len=1), None),
                   "fit_window": (_num_list(min_len=2), [1e2, 1e3])},
    "blowup": {**_COMMON,
               "grid": GRID_SCHEMA,
               "data": DATA_SCHEMA,
               "dt": (_num(lo=0.0, lo_open=True), 0.01),
               "t_final": (_num(lo=0.0, lo_open=True), 60.0),
               "dealias_fraction": (_num(lo=0.0, hi=1.0, lo_open=True), 2.0 / 3.0),
               "blowup_threshold": (_num(lo=0.0, lo_open=True), 1e6),
               "c_stab": (_num(lo=0.0, lo_open=True), 100.0),
               "snapshot_times": (_num_list(min_len=1), None),
               "R_list": (_num_list(min_len=1), [10.0, 20.0, 40.0]),
               "s_sigma": (_num(lo=0.0, hi=1.0, lo_open=True), None)},
    "pcrit": {**_COMMON,
              "sweep": {"n_min": (_int(lo=1), 1),
                        "n_max": (_int(lo=1), 4),
                        "p_min": (_num(lo=1.0, lo_open=True), 1.1),
                        "p_max": (_num(lo=1.0, lo_open=True), 8.0),
                        "p_count": (_int(lo=2), 30),
                        "s": (_num(lo=0.0), 1.0),
                        "ell": (_num(lo=0.0), 0.5),
                        "enabled": (_bool, False)}},
    "admissible": {**_COMMON,
                   "s": (_num(lo=0.0), 1.0),
                   "ell": (_num(lo=0.0), 0.5),
                   "data_kind": (_str_in({"positive-mass", "slow-decay"}),
                                 "positive-mass")},
}


def _walk(schema, obj, path, problems, out):
    if not isinstance(obj, dict):
        problems.append((path or "<root>", "must be an object"))
        return
    for key in obj:
        if key not in schema:
            problems.append((f"{path}{key}", "unknown key"))
    for key, spec in schema.items():
        here = f"{path}{key}"
        if isinstance(spec, dict):
            sub = obj.get(key, {})
            out[key] = {}
            _walk(spec, sub, here + ".", problems, out[key])
        else:
            checker, default = spec
            if key in obj:
                err = checker(obj[key])
                if err:
                    problems.append((here, err))
                else:
                    out[key] = obj[key]
            else:
                out[key] = default


def parse_config(text: str, subcommand: str, seed: int = 0) -> ExperimentConfig:
    """Validate config text for a subcommand; raises ConfigError on problems."""
    if subcommand not in SUBCOMMANDS:
        raise ConfigError([("subcommand", f"unknown subcommand {subcommand!r}")])
    try:
        raw = json.loads(text) if text.strip() else {}
    except json.JSONDecodeError as e:
        raise ConfigError([("<json>", str(e))]) from None
    problems, out = [], {}
    _walk(SCHEMAS[subcommand], raw, "", problems, out)
    if problems:
        raise ConfigError(problems)
    pk = out.pop("params")
    try:
        params = ModelParams(sigma=float(pk["sigma"]), n=int(pk["n"]),
                             m=float(pk["m"]), p=float(pk["p"]),
                             eps_zone=float(pk["eps_zone"]),
                             n_zone=float(pk["n_zone"]))
    except ValueError as e:
        raise ConfigError([("params", str(e))]) from None
    fig = out.pop("figures")
    extra = []
    if "fit_window" in out and out["fit_window"][0] >= out["fit_window"][1]:
        extra.append(("fit_window", "must be increasing [lo, hi]"))
    if "times" in out and out["times"]["t_min"] >= out["times"]["t_max"]:
        extra.append(("times", "t_min must be below t_max"))
    if extra:
        raise ConfigError(extra)
    return ExperimentConfig(subcommand=subcommand, params=params,
                            options=out, figures=bool(fig), seed=int(seed))
