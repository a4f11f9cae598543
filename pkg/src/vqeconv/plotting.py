"""Figures for CLI reports. matplotlib is imported on first use, never by the core."""
from __future__ import annotations

import numpy as np

STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.figsize": (5.0, 3.4),
    "figure.dpi": 120,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _pyplot():
    import matplotlib

    matplotlib.use("Agg", force=True)
    import matplotlib.pyplot as plt

    plt.rcParams.update(STYLE)
    return plt


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    fig.clf()
    import matplotlib.pyplot as plt

    plt.close(fig)
    return str(path)


def trajectory_figure(traj, path, ground_energy=None):
    plt = _pyplot()
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
    k = [p.k for p in traj.points]
    a1.plot(k, traj.energies, lw=1.2)
    if ground_energy is not None:
        a1.axhline(ground_energy, color="k", ls="--", lw=0.8, label="$E_{min}$")
        a1.legend()
    a1.set_xlabel("iteration")
    a1.set_ylabel("J")
    gn = np.maximum([p.grad_norm for p in traj.points], 1e-300)
    a2.semilogy(k, gn, lw=1.2)
    a2.set_xlabel("iteration")
    a2.set_ylabel(r"$\|\nabla J\|$")
    return _save(fig, path)


def rank_figure(ranks, sv_ratios, required, path):
    plt = _pyplot()
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(7.0, 3.0))
    vals, counts = np.unique(ranks, return_counts=True)
    a1.bar(vals, counts, color="C0")
    a1.axvline(required, color="k", ls="--", lw=0.8)
    a1.set_xlabel("omega rank")
    a1.set_ylabel("samples")
    r = np.maximum(np.asarray(sv_ratios, dtype=float), 1e-18)
    a2.hist(np.log10(r), bins=40, color="C1")
    a2.axvline(-10, color="k", ls="--", lw=0.8)
    a2.set_xlabel(r"$\log_{10}(\sigma_{min}/\sigma_{max})$")
    return _save(fig, path)


def basins_figure(summary, path):
    plt = _pyplot()
    fig, ax = plt.subplots()
    energies = [s["final_energy"] for s in summary["starts"]]
    ax.hist(energies, bins=summary["energy_histogram"]["edges"], color="C0")
    ax.axvline(summary["ground_energy"], color="k", ls="--", lw=0.8, label="$E_{min}$")
    ax.set_xlabel("terminal energy")
    ax.set_ylabel("starts")
    ax.legend()
    return _save(fig, path)


def repro_figure(result, path):
    plt = _pyplot()
    rows = result.rows
    fig, ax = plt.subplots()
    if result.tag == "gimbal-lock":
        g = np.abs(np.array([r[3:6] for r in rows], dtype=float)) + 1e-20
        for j in range(3):
            ax.semilogy(g[:, j], "o", ms=3, label=f"|dJ/dtheta_{j + 1}|")
        ax.set_xlabel("random Hamiltonian")
        ax.legend()
    elif result.tag == "u1-escape":
        th = np.array([r[1] for r in rows])
        ax.loglog(np.arange(1, len(th) + 1), th, lw=1.2)
        ax.axhline(1e6, color="k", ls="--", lw=0.8)
        ax.set_xlabel("iteration + 1")
        ax.set_ylabel("theta")
    elif result.tag == "poe-determinant":
        p2 = np.array([r[1] for r in rows])
        ax.plot(p2, [r[3] for r in rows], "o", ms=3, label="det")
        grid = np.linspace(-np.pi, np.pi, 300)
        ax.plot(grid, -np.cos(2 * grid), lw=0.8, label=r"$-\cos 2\phi_2$")
        ax.set_xlabel(r"$\phi_2$")
        ax.legend()
    elif result.tag == "overparam-witness":
        ratios = np.maximum([r[-1] for r in rows], 1e-18)
        ax.semilogy(ratios, "o", ms=3)
        ax.axhline(1e-10, color="k", ls="--", lw=0.8)
        ax.set_xlabel("point (0 = singular)")
        ax.set_ylabel(r"$\sigma_{min}/\sigma_{max}$")
    elif result.tag == "hessian-table":
        vals = [r[4] for r in rows]
        ax.bar(range(len(vals)), vals, color=[f"C{r[0] - 1}" for r in rows])
        ax.set_xlabel("Gell-Mann direction (grouped by eigenstate)")
        ax.set_ylabel("curvature coefficient")
    else:
        raise KeyError(result.tag)
    return _save(fig, path)
