"""Figure rendering for the report path.

Every CLI command writes a PNG next to its CSV.  Rendering is headless
(Agg backend) and intentionally plain: log axes where the data is
log-shaped, a grid, a legend, and file output.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.2),
        "figure.dpi": 130,
        "axes.grid": True,
        "grid.alpha": 0.3,
        "lines.linewidth": 1.6,
        "font.size": 10,
    }
)

_MODE_STYLE = {"fully": "-", "partly": "--"}


def save_sweep_figure(records, out_path) -> None:
    """records: iterable of (label, trace) pairs."""
    fig, ax = plt.subplots()
    for label, trace in records:
        for mode, values in trace.values.items():
            ax.loglog(
                trace.norm_sep,
                values,
                _MODE_STYLE.get(mode, "-"),
                label=f"{label} {mode}",
            )
    ax.set_xlabel("normalized separation  (min sep / resolution limit)")
    ax.set_ylabel("average CRB  (rad/m)^2")
    ax.legend(fontsize=8)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


def save_turning_figure(trace, reports, out_path) -> None:
    fig, ax = plt.subplots()
    for mode, values in trace.values.items():
        ax.loglog(trace.norm_sep, values, _MODE_STYLE.get(mode, "-"), label=mode)
    for report in reports:
        ax.axvline(
            report.ratio,
            color="k",
            alpha=0.4,
            linestyle=":" if report.mode == "partly" else "-.",
            label=f"turning ({report.mode})",
        )
    ax.axvline(1.0, color="r", alpha=0.4, label="resolution limit")
    ax.set_xlabel("normalized separation")
    ax.set_ylabel("average CRB  (rad/m)^2")
    ax.legend(fontsize=8)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


def save_qstats_figure(qtrace, out_path) -> None:
    fig, ax = plt.subplots()
    ax.semilogx(qtrace.norm_grid, np.abs(qtrace.q0), label="|Q0|")
    ax.semilogx(qtrace.norm_grid, np.abs(qtrace.q1), label="|Q1|")
    ax.semilogx(qtrace.norm_grid, np.abs(qtrace.q2), label="|Q2|")
    ax.semilogx(
        qtrace.norm_grid, qtrace.expected_abs_q0, "k--", label="|E Q0| (uniform)"
    )
    ax.set_xlabel("separation / resolution limit")
    ax.set_ylabel("magnitude")
    ax.legend(fontsize=8)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


def save_approx_figure(cmp, out_path) -> None:
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 6.0))
    ax1.loglog(cmp.norm_grid, np.abs(cmp.exact), label="exact penalty (1,1)")
    ax1.loglog(cmp.norm_grid, np.abs(cmp.approx), "--", label="approximate")
    ax1.set_ylabel("penalty entry")
    ax1.legend(fontsize=8)
    ax2.loglog(cmp.norm_grid, cmp.rel_error, color="tab:red")
    ax2.set_xlabel("separation / resolution limit")
    ax2.set_ylabel("relative error")
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


def save_up_figure(mu_grid, curves, out_path) -> None:
    """curves: iterable of (label, |u_p'| values)."""
    fig, ax = plt.subplots()
    for label, values in curves:
        ax.loglog(mu_grid, np.maximum(values, 1e-300), label=label)
    ax.axhline(1.0, color="k", alpha=0.5)
    ax.set_xlabel("mu")
    ax.set_ylabel("|gradient|")
    ax.legend(fontsize=7, ncol=2)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)


def save_mc_figure(results, out_path) -> None:
    """results: iterable of McResult."""
    fig, (ax1, ax2) = plt.subplots(2, 1, sharex=True, figsize=(6.4, 6.0))
    for res in results:
        label = f"{res.estimator} ({res.calibration_mode})"
        ax1.loglog(res.norm_separations, res.rmse, "o-", label=label)
        ax2.semilogx(res.norm_separations, res.prob_resolved, "o-", label=label)
    ax1.set_ylabel("RMSE (rad/m)")
    ax1.legend(fontsize=8)
    ax2.set_xlabel("separation / resolution limit")
    ax2.set_ylabel("resolution probability")
    ax2.set_ylim(-0.05, 1.05)
    fig.savefig(out_path, bbox_inches="tight")
    plt.close(fig)
