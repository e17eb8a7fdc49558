"""Matplotlib rendering of imaging maps and validation summaries to files."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

plt.rcParams.update(
    {
        "figure.figsize": (6.4, 4.8),
        "font.size": 9,
        "axes.grid": False,
        "image.cmap": "viridis",
    }
)


def _map_label(image_map) -> str:
    name = image_map.statistic_name
    return f"log {name}" if image_map.log_applied else name


def save_map_png(image_map, path, layout=None, scatterers=None, title=None, dpi=150):
    """Heatmap of one imaging map with optional array/target overlays."""
    spec = image_map.spec
    xs, ys = spec.x_coords(), spec.y_coords()
    vals = np.ma.masked_array(image_map.values, mask=image_map.mask)
    fig, ax = plt.subplots()
    im = ax.imshow(
        vals,
        origin="lower",
        extent=(
            xs[0] - spec.step / 2,
            xs[-1] + spec.step / 2,
            ys[0] - spec.step / 2,
            ys[-1] + spec.step / 2,
        ),
        aspect="equal",
        interpolation="nearest",
    )
    fig.colorbar(im, ax=ax, label=_map_label(image_map))
    if layout is not None:
        tx, rx = layout.tx_coords(), layout.rx_coords()
        ax.plot(tx[:, 0], tx[:, 1], "v", color="tab:blue", ms=5, label="Tx")
        ax.plot(rx[:, 0], rx[:, 1], "s", color="tab:green", ms=4, label="Rx")
    if scatterers:
        pts = np.array([[p.x, p.y] for p in scatterers])
        ax.plot(pts[:, 0], pts[:, 1], "o", mfc="none", mec="red", ms=8, label="targets")
    if layout is not None or scatterers:
        ax.legend(loc="upper right", fontsize=7)
    ax.set_xlabel("x (m)")
    ax.set_ylabel("y (m)")
    ax.set_title(title or _map_label(image_map))
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def save_pfa_png(pfa_rows, path, dpi=150):
    """Empirical false-alarm rates vs noise scaling, one group per statistic,
    with the calibration target and 3-sigma binomial band."""
    stats = sorted({r.statistic for r in pfa_rows})
    scalings = sorted({r.scaling for r in pfa_rows})
    width = 0.8 / max(len(scalings), 1)
    fig, ax = plt.subplots()
    xbase = np.arange(len(stats))
    for k, s in enumerate(scalings):
        vals = []
        errs = []
        for st in stats:
            row = next(r for r in pfa_rows if r.statistic == st and r.scaling == s)
            vals.append(row.pfa)
            errs.append(3 * row.std_err)
        ax.bar(
            xbase + (k - (len(scalings) - 1) / 2) * width,
            vals,
            width,
            yerr=errs,
            capsize=2,
            label=f"noise x{s:g}",
        )
    target = pfa_rows[0].target if pfa_rows else 0.1
    ax.axhline(target, color="k", ls="--", lw=1, label=f"target {target:g}")
    ax.set_xticks(xbase, stats)
    ax.set_ylabel("empirical false-alarm rate")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path


def save_ks_png(ks_results, path, dpi=150):
    """KS distances per experiment against the 1% critical value."""
    labels = [
        f"{r.statistic}" + (f"@f{r.freq_index}" if r.freq_index is not None else "")
        for r in ks_results
    ]
    dists = [r.distance for r in ks_results]
    crits = [r.critical_value for r in ks_results]
    x = np.arange(len(labels))
    fig, ax = plt.subplots()
    colors = ["tab:green" if r.passed else "tab:red" for r in ks_results]
    ax.bar(x, dists, 0.6, color=colors)
    ax.plot(x, crits, "k_", ms=20, label="1% critical value")
    ax.set_xticks(x, labels, rotation=30, ha="right")
    ax.set_ylabel("KS distance")
    ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
    return path
