"""Figure rendering for run artifacts.

Each function takes already-computed results and writes one PNG next to the
delimited output.  Figures are a convenience view only; the CSV files remain
the canonical record, and nothing here feeds back into the computation.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)


def plot_run(traj, p, path) -> None:
    """Snapshot fans of w, z, v, u over x."""
    x = traj.grid.x
    n = len(traj.snapshots)
    pick = np.unique(np.linspace(0, n - 1, min(n, 7)).astype(int))
    fig, axes = plt.subplots(2, 2, figsize=(9.5, 6.5), sharex=True)
    panels = [("w", lambda i: traj.snapshots[i].w),
              ("z", lambda i: traj.snapshots[i].z),
              ("v", lambda i: traj.conserved(i, p).v),
              ("u", lambda i: traj.conserved(i, p).u)]
    for ax, (label, get) in zip(axes.flat, panels):
        for i in pick:
            ax.plot(x, get(int(i)), lw=1.0, label=f"t={traj.times[int(i)]:.3g}")
        ax.set_ylabel(label)
        ax.grid(alpha=0.3)
    axes[0, 0].legend(fontsize=7, loc="best")
    for ax in axes[1]:
        ax.set_xlabel("x")
    _save(fig, path)


def plot_f(rep, path) -> None:
    """F(t) against the predicted line, the decomposition, and the margin."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.5, 3.8))
    t = rep.times
    ax1.plot(t, rep.f, "o-", ms=3, label="F(t)")
    ax1.plot(t, rep.predicted_slope * t, "k--", lw=1, label="(u_- - u_+) t")
    ax1.plot(t, rep.f1, lw=0.8, label="F1")
    ax1.plot(t, rep.f2, lw=0.8, label="F2")
    ax1.plot(t, rep.f3, lw=0.8, label="F3")
    ax1.set_xlabel("t")
    ax1.legend(fontsize=7)
    ax1.grid(alpha=0.3)
    ax2.plot(t, rep.margin, "o-", ms=3)
    ax2.axhline(0.0, color="k", lw=0.8)
    if np.isfinite(rep.t_star):
        ax2.axvline(rep.t_star, color="r", ls=":", label=f"t* = {rep.t_star:.3g}")
        ax2.legend(fontsize=8)
    ax2.set_xlabel("t")
    ax2.set_ylabel("contradiction margin")
    ax2.grid(alpha=0.3)
    _save(fig, path)


def plot_threshold(rows, path) -> None:
    """Classification sweep: T against the sweep parameter."""
    amps = [r["amplitude"] for r in rows]
    ts = [r["t_value"] for r in rows]
    exists = [r["classification"] == "existence" for r in rows]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for a, tv, e in zip(amps, ts, exists):
        ax.plot(a, tv, "o", color="tab:blue" if e else "tab:red", ms=6)
    ax.axhline(0.0, color="k", lw=0.8)
    ax.set_xlabel("amplitude")
    ax.set_ylabel("T")
    ax.set_title("blue: T >= 0 (existence), red: T < 0")
    ax.grid(alpha=0.3)
    _save(fig, path)


def plot_converge(rows, path) -> None:
    """L1 differences and weak-form residuals against delta (log-log)."""
    deltas = np.array([r["delta"] for r in rows])
    res = np.array([r["weak_residual"] for r in rows])
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9.0, 3.8))
    pair_d = deltas[1:]
    diffs = np.array([r["l1_diff"] for r in rows[1:]])
    if diffs.size:
        ax1.loglog(pair_d, diffs, "o-")
    ax1.set_xlabel("delta")
    ax1.set_ylabel("L1 difference vs previous")
    ax1.grid(alpha=0.3, which="both")
    ax2.loglog(deltas, res, "o-")
    ax2.set_xlabel("delta")
    ax2.set_ylabel("max weak-form residual")
    ax2.grid(alpha=0.3, which="both")
    _save(fig, path)


def plot_entropy(rows, path) -> None:
    """Compatibility-relation residuals under h-halving (log-log)."""
    hs = np.array([r["h"] for r in rows])
    r1 = np.array([r["r1"] for r in rows])
    r2 = np.array([r["r2"] for r in rows])
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.loglog(hs, np.maximum(r1, 1e-300), "o-", label="|q_u + eta_v|")
    ax.loglog(hs, np.maximum(r2, 1e-300), "s-", label="|q_v + th^2 v^(s-1) eta_u|")
    ax.loglog(hs, r1[0] * (hs / hs[0]) ** 2, "k:", lw=0.8, label="h^2")
    ax.set_xlabel("h")
    ax.set_ylabel("max residual")
    ax.legend(fontsize=8)
    ax.grid(alpha=0.3, which="both")
    _save(fig, path)
