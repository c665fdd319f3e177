"""Render summary figures from a sweep CSV.

Reads the delimited output of ``tsrelay sweep`` and writes two PNGs next to
it: mean rate against the energy-phase power for every (scheme, antenna)
pair, and mean rate against the antenna count at one chosen power level.
"""

import csv
import os
from collections import defaultdict

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["read_csv_rows", "render_report"]

_STYLE = {
    "joint": dict(color="tab:blue", marker="o"),
    "fixed-source": dict(color="tab:green", marker="s"),
    "naf": dict(color="tab:red", marker="^"),
}


def read_csv_rows(csv_path):
    """Load sweep rows as a list of dicts with numeric fields parsed."""
    rows = []
    with open(csv_path, newline="") as fh:
        for rec in csv.DictReader(fh):
            rows.append(
                {
                    "scheme": rec["scheme"],
                    "p0_dbm": float(rec["p0_dbm"]),
                    "n_antennas": int(rec["n_antennas"]),
                    "rate_bits": float(rec["rate_bits"]),
                }
            )
    if not rows:
        raise ValueError(f"no data rows in {csv_path}")
    return rows


def _mean_rates(rows):
    acc = defaultdict(list)
    for r in rows:
        acc[(r["scheme"], r["n_antennas"], r["p0_dbm"])].append(r["rate_bits"])
    return {key: float(np.mean(v)) for key, v in acc.items()}


def render_report(csv_path, outdir=None, p0_dbm=None):
    """Write rate-vs-P0 and rate-vs-antennas figures; returns their paths."""
    rows = read_csv_rows(csv_path)
    outdir = outdir or os.path.dirname(os.path.abspath(csv_path))
    os.makedirs(outdir, exist_ok=True)
    means = _mean_rates(rows)
    schemes = sorted({r["scheme"] for r in rows})
    antenna_counts = sorted({r["n_antennas"] for r in rows})
    p0_values = sorted({r["p0_dbm"] for r in rows})
    written = []

    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for scheme in schemes:
        for n in antenna_counts:
            xs = [p for p in p0_values if (scheme, n, p) in means]
            ys = [means[(scheme, n, p)] for p in xs]
            if not xs:
                continue
            style = _STYLE.get(scheme, {})
            ls = "-" if n == antenna_counts[-1] else "--"
            ax.plot(xs, ys, linestyle=ls, label=f"{scheme}, N={n}", **style)
    ax.set_xlabel("energy-phase power P0 (dBm)")
    ax.set_ylabel("mean rate (bits/channel use)")
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    path = os.path.join(outdir, "rate_vs_p0.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    target_p0 = p0_dbm if p0_dbm is not None else p0_values[0]
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for scheme in schemes:
        xs = [n for n in antenna_counts if (scheme, n, target_p0) in means]
        ys = [means[(scheme, n, target_p0)] for n in xs]
        if not xs:
            continue
        ax.plot(xs, ys, label=scheme, **_STYLE.get(scheme, {}))
    ax.set_xlabel("antennas per node")
    ax.set_ylabel("mean rate (bits/channel use)")
    ax.set_title(f"P0 = {target_p0:g} dBm")
    ax.set_xticks(antenna_counts)
    ax.grid(True, alpha=0.4)
    ax.legend(fontsize=8)
    path = os.path.join(outdir, "rate_vs_antennas.png")
    fig.savefig(path, dpi=150, bbox_inches="tight")
    plt.close(fig)
    written.append(path)

    return written
