"""Static SVG figures: spiral traces, coverage heat maps and convergence plots."""
from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# fixed ids and no timestamp, so repeated runs write identical files
plt.rcParams["svg.hashsalt"] = "solitongeom"
plt.rcParams["svg.fonttype"] = "none"
_SVG_META = {"Date": None, "Creator": None}


def _save(fig, path):
    fig.savefig(path, format="svg", metadata=_SVG_META, bbox_inches="tight")
    plt.close(fig)
    return path


def plot_curve_trace(curve, t, path, circles=(), title=None):
    """Trace of a planar spiral with optional reference circles."""
    pts = curve.point(np.asarray(t, dtype=float))
    fig, ax = plt.subplots(figsize=(5, 5))
    theta = np.linspace(0.0, 2 * np.pi, 721)
    for r in circles:
        ax.plot(r * np.cos(theta), r * np.sin(theta), ls="--", lw=0.8, color="0.5")
    ax.plot(pts[:, 0], pts[:, 1], lw=0.9, color="C0")
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("y")
    ax.set_title(title or f"Gamma(t), {curve.describe()}")
    return _save(fig, path)


def plot_raster(raster, path, title=None):
    """Heat map of per-cell distance to the tangent-plane union, covered cells hatched out."""
    if len(raster.cells) != 2:
        raise ValueError("only planar rasters can be drawn")
    (x0, x1), (y0, y1) = raster.box
    fig, ax = plt.subplots(figsize=(5.5, 5))
    img = ax.imshow(raster.min_dist.T, origin="lower", extent=(x0, x1, y0, y1),
                    cmap="viridis", interpolation="nearest")
    ax.contour(*np.meshgrid(*raster.axes(), indexing="ij"), raster.covered.astype(float),
               levels=[0.5], colors="w", linewidths=0.8)
    fig.colorbar(img, ax=ax, label="min distance to sampled tangent planes")
    ax.set_aspect("equal")
    ax.set_title(title or f"{raster.surface}\ncover_tol={raster.cover_tol:.3g}", fontsize="small")
    return _save(fig, path)


def plot_convergence(reports, path, title="identity residuals"):
    """Log-log residual_inf against h for reports that carry two resolutions."""
    fig, ax = plt.subplots(figsize=(5.5, 4.5))
    for k, rep in enumerate(reports):
        if rep.residual_inf_coarse is None:
            continue
        hs = [rep.h_coarse, rep.h]
        rs = [max(rep.residual_inf_coarse, 1e-300), max(rep.residual_inf, 1e-300)]
        label = rep.identity_name if rep.order_estimate is None else f"{rep.identity_name} (p={rep.order_estimate:.2f})"
        ax.loglog(hs, rs, marker="o", color=f"C{k}", label=label)
    ax.set_xlabel("h")
    ax.set_ylabel("sup residual (interior)")
    ax.set_title(title)
    ax.legend(fontsize="small")
    return _save(fig, path)
