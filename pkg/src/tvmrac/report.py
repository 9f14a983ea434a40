"""Render simulation figures to files next to the delimited output."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

_STYLE = {
    "figure.figsize": (9.0, 6.0),
    "figure.dpi": 120,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "lines.linewidth": 1.2,
}


def _save(fig, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={})
    plt.close(fig)
    return path


def render_trajectory_figures(traj, outdir, prefix: str) -> list[Path]:
    """States/control and diagnostics panels for one run."""
    outdir = Path(outdir)
    n = traj.dims[0]
    written = []
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(n + 1, 1, sharex=True, figsize=(9.0, 2.0 * (n + 1)))
        for i in range(n):
            axes[i].plot(traj.t, traj.x[:, i], label=f"x{i + 1}")
            axes[i].plot(traj.t, traj.x_hat[:, i], "--", label=f"xhat{i + 1}")
            axes[i].set_ylabel(f"state {i + 1}")
            axes[i].legend(loc="upper right")
        axes[n].plot(traj.t, traj.u)
        axes[n].set_ylabel("u")
        axes[n].set_xlabel("t [s]")
        fig.suptitle(f"states and control ({traj.variant})")
        written.append(_save(fig, outdir / f"{prefix}_states.png"))

        fig, axes = plt.subplots(2, 2, sharex=True)
        ax = axes[0, 0]
        v = np.maximum(traj.V, 1e-300)
        ax.semilogy(traj.t, v)
        ax.set_ylabel("V")
        ax = axes[0, 1]
        ax.plot(traj.t, traj.norm_e)
        ax.set_ylabel("|e|")
        ax = axes[1, 0]
        ax.plot(traj.t, traj.norm_theta_tilde)
        ax.set_ylabel("|theta - theta*|")
        ax.set_xlabel("t [s]")
        ax = axes[1, 1]
        for j in range(traj.gamma_tri.shape[1]):
            ax.plot(traj.t, traj.gamma_tri[:, j], lw=0.9)
        ax2 = ax.twinx()
        ax2.plot(traj.t, traj.rho, "k--", lw=0.9)
        ax2.set_ylabel("rho")
        ax.set_ylabel("gamma entries")
        ax.set_xlabel("t [s]")
        fig.suptitle(f"diagnostics ({traj.variant})")
        written.append(_save(fig, outdir / f"{prefix}_diagnostics.png"))
    return written


def render_bound_figures(traj, report, outdir, prefix: str) -> list[Path]:
    """Envelope and residual panels from a bound report."""
    outdir = Path(outdir)
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(2, 1, sharex=True)
        ax = axes[0]
        ax.semilogy(traj.t, np.maximum(traj.V, 1e-300), label="V")
        mask = np.isfinite(report.envelope)
        if mask.any():
            ax.semilogy(report.t[mask], np.maximum(report.envelope[mask], 1e-300),
                        "r--", label="envelope")
        ax.set_ylabel("V")
        ax.legend(loc="upper right")
        ax = axes[1]
        ax.plot(report.t, report.upsilon, label="upsilon")
        ax.axhline(report.upsilon_max, color="r", ls="--", label="upsilon_max")
        ax.plot(report.t, report.eta, label="eta")
        ax.axhline(report.eta0, color="g", ls=":", label="eta0")
        ax.set_xlabel("t [s]")
        ax.legend(loc="upper right")
        fig.suptitle("stability bounds")
        return [_save(fig, outdir / f"{prefix}_bounds.png")]


def render_comparison_figures(labeled_trajs, outdir, prefix: str) -> list[Path]:
    """Aligned V, |e| and |theta - theta*| series for several laws."""
    outdir = Path(outdir)
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(3, 1, sharex=True, figsize=(9.0, 8.0))
        for label, traj in labeled_trajs:
            axes[0].semilogy(traj.t, np.maximum(traj.V, 1e-300), label=label)
            axes[1].plot(traj.t, traj.norm_e, label=label)
            axes[2].plot(traj.t, traj.norm_theta_tilde, label=label)
        axes[0].set_ylabel("V")
        axes[1].set_ylabel("|e|")
        axes[2].set_ylabel("|theta - theta*|")
        axes[2].set_xlabel("t [s]")
        for ax in axes:
            ax.legend(loc="upper right")
        fig.suptitle("law comparison")
        return [_save(fig, outdir / f"{prefix}_compare.png")]


def render_excitation_figure(trace, report, outdir, prefix: str) -> list[Path]:
    """Regressor components with the analyzed window shaded."""
    outdir = Path(outdir)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(1, 1)
        for j in range(trace.dim):
            ax.plot(trace.t, trace.phi[:, j], lw=0.9, label=f"phi{j + 1}")
        ax.axvspan(report.t1, report.t2, color="orange", alpha=0.2,
                   label=f"window (alpha = {report.alpha:.4g})")
        ax.set_xlabel("t [s]")
        ax.set_ylabel("regressor")
        ax.legend(loc="upper right")
        fig.suptitle(f"excitation: {report.kind}")
        return [_save(fig, outdir / f"{prefix}_excitation.png")]
