"""Figure rendering for the report path.

Every subcommand that writes a CSV series also renders a PNG next to it
summarizing the run: eigenvalue branches, decay curves with fitted
slopes, deficit norms, semilinear histories, or the blow-up
certificate.  Uses the Agg backend so headless runs work.
"""

from __future__ import annotations

import csv
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402


def _read_csv(path: Path):
    with path.open() as f:
        rows = list(csv.reader(f))
    header, body = rows[0], rows[1:]
    return header, body


def render(config, summary, out: Path):
    fn = {
        "eigen": _fig_eigen,
        "linear-decay": _fig_linear,
        "pointwise": _fig_pointwise,
        "diffusion": _fig_diffusion,
        "semilinear": _fig_semilinear,
        "blowup": _fig_blowup,
        "pcrit": _fig_pcrit,
        "admissible": None,
    }.get(config.subcommand)
    if fn is None:
        return
    try:
        fn(config, summary, out)
    except Exception:
        # figures are a convenience; never fail the run over them
        plt.close("all")


def _fig_eigen(config, summary, out: Path):
    header, body = _read_csv(out / "eigen_branches.csv")
    xi = [float(r[0]) for r in body]
    fig, axes = plt.subplots(1, 2, figsize=(9, 3.4))
    for j, part in ((1, "re"), (2, "im")):
        ax = axes[j - 1]
        for b in range(3):
            ax.plot(xi, [float(r[1 + 2 * b + (j - 1)]) for r in body],
                    label=f"branch {b + 1}")
        ax.set_xscale("log")
        ax.set_xlabel("|xi|")
        ax.set_ylabel(f"{part.capitalize()} lambda")
        if part == "im":
            ax.set_yscale("symlog")
        ax.legend(fontsize=8)
    fig.suptitle(f"eigenvalue branches, sigma={config.params.sigma}")
    fig.tight_layout()
    fig.savefig(out / "eigen_branches.png", dpi=130)
    plt.close(fig)


def _fig_linear(config, summary, out: Path):
    header, body = _read_csv(out / "linear_decay.csv")
    t = [float(r[0]) for r in body]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    rates = summary.get("rates") or {}
    for i, name in enumerate(header[1:], start=1):
        vals = [float(r[i]) for r in body]
        ax.loglog(t, vals, label=name)
        rec = rates.get(name)
        if rec:  # fitted power-law guide anchored at the last sample
            guide = [vals[-1] * ((1 + tt) / (1 + t[-1])) ** rec["fitted"]
                     for tt in t]
            ax.loglog(t, guide, "k--", lw=0.6)
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    ax.set_title("linear decay")
    fig.tight_layout()
    fig.savefig(out / "linear_decay.png", dpi=130)
    plt.close(fig)


def _fig_pointwise(config, summary, out: Path):
    fig, ax = plt.subplots(figsize=(4.5, 3.5))
    ax.bar(["c_est", "C_est"], [summary["c_est"], summary["C_est"]])
    ax.set_title("certified pointwise envelope")
    fig.tight_layout()
    fig.savefig(out / "pointwise_scan.png", dpi=130)
    plt.close(fig)


def _fig_diffusion(config, summary, out: Path):
    header, body = _read_csv(out / "diffusion_norms.csv")
    t = [float(r[0]) for r in body]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    for i, name in enumerate(header[1:], start=1):
        ax.loglog(t, [float(r[i]) for r in body], label=name)
    ax.set_xlabel("t")
    ax.set_ylabel("norm")
    ax.legend(fontsize=8)
    gaps = summary.get("gaps", {})
    ax.set_title(f"reference deficits (gap S0: {gaps.get('U_minus_S0', 0):+.2f})")
    fig.tight_layout()
    fig.savefig(out / "diffusion_norms.png", dpi=130)
    plt.close(fig)


def _fig_semilinear(config, summary, out: Path):
    header, body = _read_csv(out / "semilinear_norms.csv")
    t = [float(r[0]) for r in body]
    fig, ax = plt.subplots(figsize=(5.5, 4))
    ax.plot(t, [float(r[1]) for r in body], label="u L2")
    ax.plot(t, [float(r[2]) for r in body], label="sup |u|")
    ax.set_yscale("log")
    if t and t[-1] > 100 * (t[1] if len(t) > 1 else 1):
        ax.set_xscale("log")
    ax.set_xlabel("t")
    ax.legend(fontsize=8)
    ax.set_title(f"semilinear run: {summary['verdict']}")
    fig.tight_layout()
    fig.savefig(out / "semilinear_norms.png", dpi=130)
    plt.close(fig)


def _fig_blowup(config, summary, out: Path):
    rows = summary["certificate"]
    R = [r["R"] for r in rows]
    fig, ax = plt.subplots(figsize=(5, 4))
    ax.loglog(R, [r["data_term"] for r in rows], "o-", label="data term")
    ax.loglog(R, [r["rhs_bound"] for r in rows], "s--", label="rhs bound")
    ax.set_xlabel("R")
    ax.legend(fontsize=8)
    ax.set_title("blow-up certificate: bound vanishes under the data term")
    fig.tight_layout()
    fig.savefig(out / "blowup_certificate.png", dpi=130)
    plt.close(fig)


def _fig_pcrit(config, summary, out: Path):
    path = out / "region_sweep.csv"
    if not path.exists():
        return
    header, body = _read_csv(path)
    fig, ax = plt.subplots(figsize=(5.5, 4))
    n = [int(r[0]) for r in body]
    p = [float(r[1]) for r in body]
    gee = [r[3] == "True" for r in body]
    blw = [r[4] == "True" for r in body]
    ax.scatter([pp for pp, g in zip(p, gee) if g],
               [nn for nn, g in zip(n, gee) if g], s=14, label="existence")
    ax.scatter([pp for pp, b in zip(p, blw) if b],
               [nn for nn, b in zip(n, blw) if b], s=14, marker="x",
               label="blow-up")
    ax.set_xlabel("p")
    ax.set_ylabel("n")
    ax.legend(fontsize=8)
    ax.set_title("admissibility regions")
    fig.tight_layout()
    fig.savefig(out / "region_sweep.png", dpi=130)
    plt.close(fig)
