"""Finite-difference tangential calculus on parameter grids and identity residuals.

Derivatives in parameter space are second-order central differences at
interior nodes and second-order one-sided differences on the boundary ring.
Residual norms are taken over interior nodes only.  Metric data (g^-1,
Christoffel symbols, shape operator, H, |A|^2) always come from the exact
analytic frames, so a residual measures the discretization of grad and the
Laplace-Beltrami operator and nothing else.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from solitongeom.errors import GridMismatch
from solitongeom.surface import ParamGrid

SHRINKER = -0.5
EXPANDER = 0.5
TRIVIAL_FIELD_TOL = 1e-14


@dataclass(frozen=True)
class ScalarField:
    grid: ParamGrid
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        object.__setattr__(self, "values", values)
        if values.shape != self.grid.counts:
            raise GridMismatch(f"field shape {values.shape} does not match grid {self.grid.counts}")
        if not np.all(np.isfinite(values)):
            raise ValueError("scalar field has non-finite values")


@dataclass(frozen=True)
class DriftOperator:
    """``L u = Lap u + epsilon <X, grad u>``; -1/2 for shrinkers, +1/2 for expanders."""

    epsilon: float = SHRINKER


@dataclass
class IdentityReport:
    identity_name: str
    residual_inf: float
    residual_l2: float
    h: float
    order_estimate: float | None = None
    surface: str = ""
    residual_inf_coarse: float | None = None
    h_coarse: float | None = None
    interior_nodes: int = 0
    trivial_field: bool = False
    extras: dict = field(default_factory=dict)

    def record(self):
        """Flat dict for CSV/JSON emission."""
        row = {
            "identity_name": self.identity_name,
            "surface": self.surface,
            "h": self.h,
            "residual_inf": self.residual_inf,
            "residual_l2": self.residual_l2,
            "order_estimate": self.order_estimate,
            "h_coarse": self.h_coarse,
            "residual_inf_coarse": self.residual_inf_coarse,
            "interior_nodes": self.interior_nodes,
            "trivial_field": self.trivial_field,
        }
        row.update(self.extras)
        return row


# ---------------------------------------------------------------------------
# parameter-space differences


def _check(field_, frames):
    if frames.f.shape != field_.grid.counts:
        raise GridMismatch(f"frames shape {frames.f.shape} does not match grid {field_.grid.counts}")


def partials(values, grid):
    """First partials, shape ``(*counts, n)``."""
    return np.stack([np.gradient(values, h, axis=i, edge_order=2)
                     for i, h in enumerate(grid.spacing)], axis=-1)


def _second(values, h, axis):
    v = np.moveaxis(values, axis, 0)
    out = np.empty_like(v)
    out[1:-1] = (v[2:] - 2.0 * v[1:-1] + v[:-2]) / (h * h)
    out[0] = (2.0 * v[0] - 5.0 * v[1] + 4.0 * v[2] - v[3]) / (h * h)
    out[-1] = (2.0 * v[-1] - 5.0 * v[-2] + 4.0 * v[-3] - v[-4]) / (h * h)
    return np.moveaxis(out, 0, axis)


def hessian(values, grid):
    """Parameter-space Hessian, shape ``(*counts, n, n)``; compact 3-point stencils inside."""
    n = grid.dim_n
    out = np.empty(values.shape + (n, n))
    for i, hi in enumerate(grid.spacing):
        out[..., i, i] = _second(values, hi, i)
        for j in range(i + 1, n):
            mixed = np.gradient(np.gradient(values, hi, axis=i, edge_order=2),
                                grid.spacing[j], axis=j, edge_order=2)
            out[..., i, j] = mixed
            out[..., j, i] = mixed
    return out


# ---------------------------------------------------------------------------
# tangential operators


def surface_gradient(field_, frames):
    """Components of grad u in the coordinate basis, ``g^{ij} d_j u``."""
    _check(field_, frames)
    du = partials(field_.values, field_.grid)
    return np.einsum("...ij,...j->...i", frames.g_inv, du)


def divergence(vec, grid, frames):
    """Divergence of a tangent field given by coordinate components ``vec[..., i]``."""
    if vec.shape[:-1] != grid.counts:
        raise GridMismatch("vector field is not laid out on the grid")
    d = sum(np.gradient(vec[..., i], h, axis=i, edge_order=2) for i, h in enumerate(grid.spacing))
    contracted = np.einsum("...iik->...k", frames.christoffel)
    return d + np.einsum("...k,...k->...", contracted, vec)


def laplace_beltrami(field_, frames):
    """``g^{ij} (d_ij u - Gamma^k_ij d_k u)``, second order at interior nodes."""
    _check(field_, frames)
    grid = field_.grid
    du = partials(field_.values, grid)
    hess = hessian(field_.values, grid)
    covariant = hess - np.einsum("...kij,...k->...ij", frames.christoffel, du)
    return ScalarField(grid, np.einsum("...ij,...ij->...", frames.g_inv, covariant))


def tangential_dot(frames, field_):
    """``<X^T, grad u>``, equal to ``<X, grad u>`` since grad u is tangent."""
    du = partials(field_.values, field_.grid)
    return np.einsum("...i,...i->...", frames.x_tan, du)


def drift_laplacian(op, field_, frames):
    lap = laplace_beltrami(field_, frames)
    return ScalarField(field_.grid, lap.values + op.epsilon * tangential_dot(frames, field_))


def shrinker_residual(frame, epsilon=SHRINKER):
    """``H - epsilon f``: zero exactly where the soliton equation holds pointwise."""
    return frame.mean_h - epsilon * frame.f


# ---------------------------------------------------------------------------
# identity checks


def _norms(residual, grid):
    r = np.abs(residual[grid.interior_mask()])
    return float(np.max(r)), float(np.sqrt(np.mean(r * r))), int(r.size)


def _metric_length(vec, frames):
    return np.sqrt(np.maximum(np.einsum("...i,...ij,...j->...", vec, frames.g, vec), 0.0))


def _grad_residual(spec, grid):
    _, fr = spec.sample(grid)
    f = ScalarField(grid, fr.f)
    grad = surface_gradient(f, fr)
    rhs = -np.einsum("...ij,...j->...i", fr.shape, fr.x_tan)
    return _metric_length(grad - rhs, fr), fr, {}


def _div_residual(spec, grid):
    _, fr = spec.sample(grid)
    div = divergence(fr.x_tan, grid, fr)
    return div - grid.dim_n - fr.f * fr.mean_h, fr, {}


def master_residual(grid, frames):
    """``Lap f + H + f|A|^2 + <X^T, grad H>`` on the grid (zero for every hypersurface)."""
    f = ScalarField(grid, frames.f)
    lap = laplace_beltrami(f, frames).values
    return lap + frames.mean_h + frames.f * frames.norm_a_sq + tangential_dot(frames, ScalarField(grid, frames.mean_h))


def _master_residual(spec, grid):
    _, fr = spec.sample(grid)
    return master_residual(grid, fr), fr, {}


def shrinker_pde_residual(grid, frames, epsilon=SHRINKER):
    """``L f + (|A|^2 + epsilon) f`` with the drift constant epsilon."""
    f = ScalarField(grid, frames.f)
    lf = drift_laplacian(DriftOperator(epsilon), f, frames).values
    return lf + (frames.norm_a_sq + epsilon) * frames.f


def _shrinker_residual(spec, grid):
    _, fr = spec.sample(grid)
    res = shrinker_pde_residual(grid, fr)
    rho = shrinker_residual(fr)
    # R_shrinker = master - rho - <X^T, grad rho>, exactly in the continuum
    attributed = -rho - tangential_dot(fr, ScalarField(grid, rho))
    mask = grid.interior_mask()
    extras = {
        "max_soliton_residual": float(np.max(np.abs(rho))),
        "master_decomposition_inf": float(np.max(np.abs((res - attributed)[mask]))),
    }
    return res, fr, extras


_CHECKS = {
    "grad_identity": _grad_residual,
    "div_identity": _div_residual,
    "master_identity": _master_residual,
    "shrinker_pde": _shrinker_residual,
}


def _run_check(name, spec, grid, refine=True):
    residual, fr, extras = _CHECKS[name](spec, grid)
    r_inf, r_l2, count = _norms(residual, grid)
    trivial = bool(np.max(np.abs(fr.f)) < TRIVIAL_FIELD_TOL)
    report = IdentityReport(identity_name=name, residual_inf=r_inf, residual_l2=r_l2,
                            h=max(grid.spacing), surface=spec.describe(),
                            interior_nodes=count, trivial_field=trivial, extras=extras)
    if not refine:
        return report
    fine = grid.refined()
    residual_f, fr_f, extras_f = _CHECKS[name](spec, fine)
    f_inf, f_l2, f_count = _norms(residual_f, fine)
    floor = roundoff_floor(fr_f, fine)
    return IdentityReport(identity_name=name, residual_inf=f_inf, residual_l2=f_l2,
                          h=max(fine.spacing), order_estimate=order_estimate(r_inf, f_inf, floor),
                          surface=spec.describe(), residual_inf_coarse=r_inf,
                          h_coarse=max(grid.spacing), interior_nodes=f_count,
                          trivial_field=trivial, extras=extras_f)


def roundoff_floor(frames, grid):
    """Residual level below which second differences are dominated by rounding."""
    scale = 1.0 + float(np.max(np.abs(frames.x)))
    return 100.0 * np.finfo(float).eps * scale / min(grid.spacing) ** 2


def order_estimate(coarse, fine, floor=1e-13):
    """Observed order from residuals at h and h/2; None when either sits at roundoff."""
    if coarse <= floor or fine <= floor:
        return None
    return math.log2(coarse / fine)


def check_grad_identity(spec, grid, refine=True):
    """Residual of ``grad f = -A X^T`` (metric length of the difference)."""
    return _run_check("grad_identity", spec, grid, refine)


def check_div_identity(spec, grid, refine=True):
    """Residual of ``div X^T = n + f H``."""
    return _run_check("div_identity", spec, grid, refine)


def check_master_identity(spec, grid, refine=True):
    return _run_check("master_identity", spec, grid, refine)


def check_shrinker_pde(spec, grid, refine=True):
    """Residual of ``L f + (|A|^2 - 1/2) f`` (drift constant -1/2).

    On non-solitons the residual does not vanish; ``master_decomposition_inf``
    reports how far it is from ``-rho - <X^T, grad rho>`` with
    ``rho = H + f/2``, which is the exact continuum value.
    """
    return _run_check("shrinker_pde", spec, grid, refine)


def check_all(spec, grid, refine=True):
    return [_run_check(name, spec, grid, refine) for name in _CHECKS]
