"""Figures for the CLI reports.

Each report is rendered to PNG next to its CSV, and a standalone script that
redraws the same figure from the CSV is written alongside.
"""

from __future__ import annotations

import csv
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

STYLE = {
    "figure.figsize": (5.0, 3.6),
    "font.size": 9,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "legend.fontsize": 8,
    "savefig.dpi": 150,
}


def read_csv(path) -> list[dict]:
    with open(path, newline="") as fh:
        return list(csv.DictReader(fh))


def _grouped(rows, key):
    groups = defaultdict(list)
    for row in rows:
        groups[row[key]].append(row)
    return groups


def plot_mse(csv_path, out_path) -> Path:
    rows = read_csv(csv_path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for bits, group in _grouped(rows, "bits").items():
            x = [float(r["rho_p_db"]) for r in group]
            (line,) = ax.semilogy(x, [float(r["mse_analytic"]) for r in group], label=f"b={bits} analytic")
            ax.semilogy(x, [float(r["mse_mc"]) for r in group], "o", color=line.get_color(),
                        mfc="none", label=f"b={bits} simulated")
            floor = float(group[0]["mse_floor"])
            if floor > 0:
                ax.axhline(floor, color=line.get_color(), ls=":", lw=0.8)
        ax.set_xlabel("pilot SNR $\\rho_p$ (dB)")
        ax.set_ylabel("normalised MSE")
        if rows:
            ax.legend()
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return Path(out_path)


def plot_rate_vs_m(csv_path, out_path) -> Path:
    rows = read_csv(csv_path)
    m = [int(r["M"]) for r in rows]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        ax.plot(m, [float(r["rate_approx_sum"]) for r in rows], "-", label="closed form")
        ax.errorbar(m, [float(r["rate_mc_sum"]) for r in rows], yerr=[float(r["ci95"]) for r in rows],
                    fmt="o", mfc="none", label="Monte Carlo")
        ax.plot(m, [float(r["rate_perfect_csi_sum"]) for r in rows], "--", label="perfect CSI")
        ax.plot(m, [float(r["rate_ideal_hw_sum"]) for r in rows], "-.", label="ideal hardware")
        ax.set_xlabel("antennas $M$")
        ax.set_ylabel("sum rate (bits/s/Hz)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return Path(out_path)


def plot_compensation(csv_path, out_path) -> Path:
    rows = read_csv(csv_path)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for (bits, scale), group in _grouped_pairs(rows).items():
            style = "-" if group[0]["status"] == "reference" else "--"
            label = f"b={bits}, |chi|={float(scale):.4f}" if scale != "nan" else f"b={bits} (unreachable)"
            ax.plot([int(r["M"]) for r in group], [float(r["sum_rate"]) for r in group], style,
                    marker="o", mfc="none", label=label)
        ax.set_xlabel("antennas $M$")
        ax.set_ylabel("sum rate (bits/s/Hz)")
        ax.legend()
        fig.tight_layout()
        fig.savefig(out_path)
        plt.close(fig)
    return Path(out_path)


def _grouped_pairs(rows):
    groups = defaultdict(list)
    for row in rows:
        groups[(row["bits"], row["chi_abs"])].append(row)
    return groups


PLOTTERS = {"mse": plot_mse, "rate_vs_m": plot_rate_vs_m, "compensation": plot_compensation}

SCRIPT = '''#!/usr/bin/env python3
"""Redraw {png} from {csv}."""
from pathlib import Path

from qmimo.plotting import {func}

here = Path(__file__).resolve().parent
{func}(here / "{csv}", here / "{png}")
'''


def write_report_figure(kind: str, csv_path, render: bool = True) -> tuple[Path, Path | None]:
    """Write the companion plot script and, if ``render``, the PNG itself."""
    csv_path = Path(csv_path)
    png = csv_path.with_suffix(".png")
    script = csv_path.with_name(f"plot_{csv_path.stem}.py")
    func = PLOTTERS[kind].__name__
    script.write_text(SCRIPT.format(png=png.name, csv=csv_path.name, func=func))
    if not render:
        return script, None
    return script, PLOTTERS[kind](csv_path, png)
