"""Figure assembly: one entry point, `render(figure_id, in_dir, out_path)`.

Figure families mirror the producing scenarios: time series for fig2/4/5/6
and fig10a, spectrum dots plus site bars for fig3/7/8, eigenvalue traces for
fig10b, a site-time heatmap for fig10c, population traces for the transfer,
and a generic line plot for sweep outputs.  All inputs are validated before
any drawing starts, so a failed render never leaves a partial image behind.
"""

from __future__ import annotations

import os

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .schemas import (SchemaError, load_couplings, load_distribution, load_spectrum,
                      load_spectrum_series, load_sweep, load_trajectory, load_transfer,
                      load_zero_mode)

__all__ = ["render", "FIGURE_IDS"]

TRAJECTORY_IDS = ("fig2a", "fig2d", "fig4", "fig5", "fig6", "fig10a")
SPECTRUM_IDS = ("fig3", "fig7", "fig8")
FIGURE_IDS = TRAJECTORY_IDS + SPECTRUM_IDS + ("fig10b", "fig10c", "transfer", "sweep")

# fixed margins keep the axes rectangle deterministic for pixel-level checks
_MARGINS = dict(left=0.12, right=0.88, bottom=0.12, top=0.90)


def _save(fig, out_path, fmt):
    out_dir = os.path.dirname(os.path.abspath(out_path))
    os.makedirs(out_dir, exist_ok=True)
    fig.savefig(out_path, format=fmt, dpi=100)
    plt.close(fig)


def _render_trajectory(in_dir, out_path, fmt, title):
    t, abs_a, _ = load_trajectory(os.path.join(in_dir, "trajectory.csv"))
    couplings_csv = os.path.join(in_dir, "couplings.csv")
    bonds = load_couplings(couplings_csv) if os.path.exists(couplings_csv) else None
    if bonds is None:
        fig, ax = plt.subplots(figsize=(6, 4))
        fig.subplots_adjust(**_MARGINS)
    else:
        fig, (ax, axb) = plt.subplots(1, 2, figsize=(8, 4), width_ratios=(2, 1))
        fig.subplots_adjust(**_MARGINS, wspace=0.35)
    for j in range(abs_a.shape[1]):
        ax.plot(t, abs_a[:, j], lw=1.2, label=rf"$|\alpha_{{{j + 1}}}|$")
    ax.set_xlabel(r"$t\ (1/\omega_b)$")
    ax.set_ylabel(r"$|\alpha_j|$")
    ax.set_title(title)
    ax.legend(loc="best")
    if bonds is not None:
        idx, mags = bonds
        axb.bar(idx, mags, color="tab:orange", width=0.6)
        axb.set_xlabel("bond")
        axb.set_ylabel(r"$|G_n|\ (\omega_b)$")
        axb.set_xticks(idx)
        axb.set_title("steady couplings")
    _save(fig, out_path, fmt)


def _render_spectrum_pair(in_dir, out_path, fmt, title):
    idx, lam = load_spectrum(os.path.join(in_dir, "spectrum.csv"))
    sites, weights = load_distribution(os.path.join(in_dir, "distribution.csv"))
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 4))
    fig.subplots_adjust(**_MARGINS, wspace=0.35)
    n = len(lam)
    gap = np.argsort(np.abs(lam))[:2] if n % 2 == 0 else np.argsort(np.abs(lam))[:1]
    colors = ["tab:blue" if i in gap else "k" for i in idx]
    ax1.scatter(idx, lam, c=colors, s=45, zorder=3)
    ax1.axhline(0.0, color="0.8", lw=0.8, zorder=1)
    ax1.set_xlabel("level index")
    ax1.set_ylabel(r"$E\ (\omega_b)$")
    ax1.set_title("energy spectrum")
    ax2.bar(sites, weights, color="tab:blue", width=0.6)
    ax2.set_xlabel("site")
    ax2.set_ylabel(r"$|\psi_i|^2$")
    ax2.set_xticks(sites)
    ax2.set_ylim(0, 1.0)
    ax2.set_title("gap-state distribution")
    fig.suptitle(title)
    _save(fig, out_path, fmt)


def _render_spectrum_series(in_dir, out_path, fmt, title):
    t, lam = load_spectrum_series(os.path.join(in_dir, "spectrum_series.csv"))
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.subplots_adjust(**_MARGINS)
    for j in range(lam.shape[1]):
        ax.plot(t, lam[:, j], ".", ms=3)
    ax.set_xlabel(r"$t\ (1/\omega_b)$")
    ax.set_ylabel(r"$E\ (\omega_b)$")
    ax.set_title(title)
    _save(fig, out_path, fmt)


def _render_zero_mode(in_dir, out_path, fmt, title):
    t, w = load_zero_mode(os.path.join(in_dir, "zero_mode.csv"))
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.subplots_adjust(**_MARGINS)
    n_sites = w.shape[1]
    # rows = sites (origin lower: site 1 at the bottom), columns = time
    ax.imshow(w.T, aspect="auto", origin="lower", cmap="viridis", vmin=0.0, vmax=1.0,
              extent=(t[0], t[-1], 0.5, n_sites + 0.5), interpolation="nearest")
    ax.set_xlabel(r"$t\ (1/\omega_b)$")
    ax.set_ylabel("site")
    ax.set_yticks(np.arange(1, n_sites + 1))
    ax.set_title(title)
    _save(fig, out_path, fmt)


def _render_transfer(in_dir, out_path, fmt, title):
    t, pops, norm = load_transfer(os.path.join(in_dir, "transfer.csv"))
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.subplots_adjust(**_MARGINS)
    for j in range(pops.shape[1]):
        ax.plot(t, pops[:, j], lw=1.2, label=f"site {j + 1}")
    ax.plot(t, norm, "--", color="0.6", lw=0.8, label="norm")
    ax.set_xlabel(r"$t\ (1/\omega_b)$")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.05)
    ax.set_title(title)
    ax.legend(loc="center right")
    _save(fig, out_path, fmt)


def _render_sweep(in_dir, out_path, fmt, title):
    cols, values, series = load_sweep(os.path.join(in_dir, "sweep.csv"))
    fig, ax = plt.subplots(figsize=(6, 4))
    fig.subplots_adjust(**_MARGINS)
    numeric = True
    try:
        ys = np.array([[float(x) for x in row] for row in series])
    except ValueError:
        numeric = False
    if numeric and len(values):
        for j in range(ys.shape[1]):
            ax.plot(values, ys[:, j], "o-", label=cols[j + 1])
        ax.legend(loc="best")
    elif len(values):
        # categorical observable (e.g. phase_class): encode as levels
        labels = sorted({row[0] for row in series})
        level = {lab: i for i, lab in enumerate(labels)}
        ax.step(values, [level[row[0]] for row in series], where="mid")
        ax.set_yticks(range(len(labels)))
        ax.set_yticklabels(labels)
    ax.set_xlabel(cols[0])
    ax.set_ylabel(",".join(cols[1:]))
    ax.set_title(title)
    _save(fig, out_path, fmt)


_TITLES = {
    "fig2a": "steady-state cavity fields (symmetric couplings)",
    "fig2d": "steady-state cavity fields (balanced |G1| = |G3|)",
    "fig4": "cavity fields at kappa1 = 3.5",
    "fig5": "cavity fields at kappa1 = 10",
    "fig6": "three-cell cavity fields",
    "fig10a": "periodically driven response, one period",
    "fig3": "balanced chain",
    "fig7": "critical chain (kappa2 = 0.412)",
    "fig8": "trivial chain (kappa2 = 5)",
    "fig10b": "instantaneous spectrum across one drive period",
    "fig10c": "zero-mode site distribution across one drive period",
    "transfer": "single-excitation transfer through the zero mode",
    "sweep": "parameter sweep",
}


def render(figure_id, in_dir, out_path, fmt="png"):
    """Render one figure family from its scenario CSVs; returns out_path."""
    if figure_id not in FIGURE_IDS:
        raise SchemaError(f"unknown figure id '{figure_id}'; known: {', '.join(FIGURE_IDS)}")
    if fmt not in ("png", "svg"):
        raise SchemaError(f"format must be png or svg, got '{fmt}'")
    title = _TITLES[figure_id]
    if figure_id in TRAJECTORY_IDS:
        _render_trajectory(in_dir, out_path, fmt, title)
    elif figure_id in SPECTRUM_IDS:
        _render_spectrum_pair(in_dir, out_path, fmt, title)
    elif figure_id == "fig10b":
        _render_spectrum_series(in_dir, out_path, fmt, title)
    elif figure_id == "fig10c":
        _render_zero_mode(in_dir, out_path, fmt, title)
    elif figure_id == "transfer":
        _render_transfer(in_dir, out_path, fmt, title)
    else:
        _render_sweep(in_dir, out_path, fmt, title)
    return out_path
