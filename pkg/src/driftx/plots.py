"""Figure emission: deterministic SVG scatters and matplotlib report plots.

Snapshot scatters are written as hand-assembled SVG so reruns are
byte-identical: fixed 800x800 viewport over [-2.5, 2.5]^2, one circle per
point (radius 2px), layers and points emitted in input order. Report-path
figures (loss curves, benchmark scaling, bound diagnostics) render through
matplotlib's Agg backend to PNG files next to the delimited outputs.
"""

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .data import as_points

VIEW_HALF = 2.5
VIEW_PX = 800
POINT_RADIUS_PX = 2

FIG_DPI = 110


def emit_svg_scatter(layers, path) -> None:
    """Write a standalone scatter SVG for 2D point layers.

    `layers` is a sequence of (points, css_color) pairs; points may be a
    FeatureSet or array and must be 2-dimensional.
    """
    scale = VIEW_PX / (2.0 * VIEW_HALF)
    lines = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{VIEW_PX}" '
        f'height="{VIEW_PX}" viewBox="0 0 {VIEW_PX} {VIEW_PX}">',
        f'<rect width="{VIEW_PX}" height="{VIEW_PX}" fill="white"/>',
    ]
    for pts, color in layers:
        arr = as_points(pts) if not _is_empty(pts) else None
        if arr is None:
            continue
        if arr.shape[1] != 2:
            raise ValueError(f"SVG scatter requires 2D points, got dim {arr.shape[1]}")
        for x, y in arr:
            cx = (x + VIEW_HALF) * scale
            cy = (VIEW_HALF - y) * scale  # SVG y grows downward
            lines.append(f'<circle cx="{cx:.3f}" cy="{cy:.3f}" '
                         f'r="{POINT_RADIUS_PX}" fill="{color}"/>')
    lines.append("</svg>")
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def _is_empty(pts) -> bool:
    if pts is None:
        return True
    if hasattr(pts, "points"):
        return pts.points.shape[0] == 0
    return np.asarray(pts).size == 0


def save_loss_curves_png(losses, evaluations, path) -> None:
    """Loss and periodic energy-distance curves from a training history."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(9, 3.4))
    if losses:
        steps, vals = zip(*losses)
        ax1.plot(steps, vals, lw=0.8, color="tab:blue")
    ax1.set_xlabel("step")
    ax1.set_ylabel("loss")
    ax1.set_yscale("log")
    if evaluations:
        steps, vals = zip(*evaluations)
        ax2.plot(steps, vals, marker="o", ms=3, color="tab:orange")
    ax2.set_xlabel("step")
    ax2.set_ylabel("energy distance")
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_scatter_png(data_pts, generated_pts, path, title="") -> None:
    """Data (gray) vs generated (color) overlay on the fixed viewport."""
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    d = as_points(data_pts)
    g = as_points(generated_pts)
    ax.scatter(d[:, 0], d[:, 1], s=4, c="0.7", lw=0)
    ax.scatter(g[:, 0], g[:, 1], s=4, c="tab:red", lw=0)
    ax.set_xlim(-VIEW_HALF, VIEW_HALF)
    ax.set_ylim(-VIEW_HALF, VIEW_HALF)
    ax.set_aspect("equal")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_bench_scaling_png(rows, path) -> None:
    """Log-log attraction time vs positive-support size, one line per mode.

    `rows` are dicts with keys mode, N_plus, median_ns.
    """
    by_mode = {}
    for row in rows:
        by_mode.setdefault(row["mode"], []).append((row["N_plus"], row["median_ns"]))
    fig, ax = plt.subplots(figsize=(5, 3.6))
    for mode in sorted(by_mode):
        pts = sorted(by_mode[mode])
        ax.loglog([p[0] for p in pts], [p[1] for p in pts], marker="o", label=mode)
    ax.set_xlabel("positive support size")
    ax.set_ylabel("attraction time (ns)")
    ax.legend()
    ax.grid(True, which="both", lw=0.3, alpha=0.5)
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)


def save_bound_scatter_png(diagnostics, path) -> None:
    """Actual field deviation vs bound value; premise-holding queries only."""
    held = [(d.bound_value, d.actual_error) for d in diagnostics if d.condition_holds]
    fig, ax = plt.subplots(figsize=(4.2, 4.2))
    if held:
        bounds, actual = zip(*held)
        ax.scatter(bounds, actual, s=10, c="tab:blue", lw=0)
        top = max(max(bounds), max(actual)) * 1.1 or 1.0
        ax.plot([0, top], [0, top], c="0.5", lw=0.8, ls="--")
    ax.set_xlabel("bound value")
    ax.set_ylabel("actual deviation")
    fig.tight_layout()
    fig.savefig(path, dpi=FIG_DPI)
    plt.close(fig)
