"""Acceptance criteria, one test each, at the stated tolerances and runtime limits.

A pass/fail line per criterion is printed in the terminal summary (see conftest).
"""
import math
import time

import numpy as np
import pytest

from solitongeom.cli import main
from solitongeom.gallery import (ArctanProfile, PolynomialProfile, SpiralCurve, canonical_atlas,
                                 exp_tangent_forms, inequality_chain_check, properness_diagnostic,
                                 spiral_curvature, spiral_cylinder)
from solitongeom.identities import (check_grad_identity, check_master_identity, check_shrinker_pde,
                                    shrinker_residual)
from solitongeom.omission import coverage_raster
from solitongeom.surface import Cylinder, Ellipsoid, ParamGrid, Sphere, Torus, Circle

ARCTAN = ArctanProfile(1.0, 1.0)
T_GRID = np.linspace(-50, 50, 2001)
S_GRID = np.linspace(-100, 100, 2001)

# coarse grid 161^2 nodes; the refined grid (321^2 nodes, 319^2 interior) is the finest
CONVERGENCE_SURFACES = {
    "ellipsoid(1,1.5,2)": (Ellipsoid(1.0, 1.5, 2.0), ((-0.5, 0.5), (-0.5, 0.5))),
    "torus(2,0.5)": (Torus(2.0, 0.5), Torus().default_ranges),
}


def _tag(record_property, criterion, detail):
    record_property("criterion", criterion)
    record_property("detail", detail)


def test_criterion_1_canonical_shrinkers(record_property):
    start = time.perf_counter()
    worst_rho, worst_a, counts = 0.0, 0.0, {}
    for p in (0, 1, 2):
        counts[p] = 0
        for spec in canonical_atlas(p, 2):
            grid = ParamGrid(spec.default_ranges, (101, 101))
            _, fr = spec.sample(grid)
            counts[p] += fr.f.size
            worst_rho = max(worst_rho, float(np.max(np.abs(shrinker_residual(fr)))))
            if p >= 1:
                worst_a = max(worst_a, float(np.max(np.abs(fr.norm_a_sq - 0.5))))
    elapsed = time.perf_counter() - start
    _tag(record_property, "criterion 1: canonical shrinker suite",
         f"max|H+f/2|={worst_rho:.2e} max||A|^2-1/2|={worst_a:.2e} points={counts} {elapsed:.2f}s")
    assert min(counts.values()) >= 10_000
    assert worst_rho < 1e-12 and worst_a < 1e-12
    assert elapsed < 5.0


def _convergence(check, name):
    spec, ranges = CONVERGENCE_SURFACES[name]
    start = time.perf_counter()
    rep = check(spec, ParamGrid(ranges, (161, 161)))
    return rep, time.perf_counter() - start


@pytest.mark.parametrize("name", list(CONVERGENCE_SURFACES))
def test_criterion_2_master_identity(name, record_property):
    rep, elapsed = _convergence(check_master_identity, name)
    factor = rep.residual_inf_coarse / rep.residual_inf
    _tag(record_property, f"criterion 2: master identity on {name}",
         f"factor={factor:.3f} order={rep.order_estimate:.3f} finest_inf={rep.residual_inf:.3e} "
         f"interior={rep.interior_nodes} {elapsed:.1f}s")
    assert 3.0 <= factor <= 5.0
    assert abs(rep.order_estimate - 2.0) <= 0.3
    assert rep.residual_inf < 1e-3 and rep.interior_nodes >= 161**2
    assert elapsed < 30.0


@pytest.mark.parametrize("name", list(CONVERGENCE_SURFACES))
def test_criterion_3_gradient_identity(name, record_property):
    rep, elapsed = _convergence(check_grad_identity, name)
    factor = rep.residual_inf_coarse / rep.residual_inf
    _tag(record_property, f"criterion 3: gradient identity on {name}",
         f"factor={factor:.3f} order={rep.order_estimate:.3f} finest_inf={rep.residual_inf:.3e} {elapsed:.1f}s")
    assert 3.0 <= factor <= 5.0
    assert abs(rep.order_estimate - 2.0) <= 0.3
    assert rep.residual_inf < 1e-3
    assert elapsed < 30.0


def test_criterion_4_shrinker_pde(record_property):
    worst = 0.0
    for spec in (Sphere(math.sqrt(4.0)), Sphere(math.sqrt(4.0), cap="south"), Cylinder(math.sqrt(2.0))):
        for count in (11, 41, 161):
            rep = check_shrinker_pde(spec, ParamGrid(spec.default_ranges, (count, count)), refine=False)
            worst = max(worst, rep.residual_inf)
    _tag(record_property, "criterion 4: shrinker PDE on sphere and cylinder", f"max residual={worst:.2e}")
    assert worst < 1e-8


def test_criterion_5_curvature_limits(record_property):
    curve = SpiralCurve(ARCTAN)
    k_plus, k_minus = (float(spiral_curvature(curve, t)) for t in (50.0, -50.0))
    t = np.linspace(-100, 100, 10_000)
    k = spiral_curvature(SpiralCurve(ARCTAN, d=2.0), t)
    within = bool(np.all((k > 1 / 3) & (k < 1 / 2)))
    _tag(record_property, "criterion 5: curvature limits",
         f"k(50)={k_plus:.5f} k(-50)={k_minus:.5f} d=2 range=[{k.min():.5f}, {k.max():.5f}]")
    assert abs(k_plus - 1.0) < 0.02
    assert abs(k_minus - 0.5) < 0.02
    assert within


def test_criterion_6_inequality_chain(record_property):
    start = time.perf_counter()
    rep = inequality_chain_check(SpiralCurve(ARCTAN), T_GRID, S_GRID)
    elapsed = time.perf_counter() - start
    _tag(record_property, "criterion 6: inequality chain",
         f"links={[k for k, v in rep.links.items() if v['holds']]} min|R|^2={rep.min_norm_sq:.6f} "
         f"form_rel_diff={rep.max_form_rel_diff:.1e} {elapsed:.2f}s")
    assert rep.grid_shape == (2001, 2001)
    assert rep.all_hold and rep.strict
    assert rep.min_norm_sq > 1.0
    assert rep.max_form_rel_diff < 1e-12
    assert elapsed < 60.0


def test_criterion_7_exp_spot_value(record_property):
    raw, _ = exp_tangent_forms(0.0, 0.0)
    _tag(record_property, "criterion 7: exp-profile spot value", f"|R_0(0)|^2={float(raw)!r}")
    assert float(raw) == 4.0


def test_criterion_8_omission_raster(record_property):
    start = time.perf_counter()
    box = ((-2.0, 2.0), (-2.0, 2.0))
    theta = np.linspace(0, 2 * np.pi, 2000, endpoint=False)[:, None]
    diag = math.hypot(4 / 400, 4 / 400)
    control = coverage_raster(Circle(1.0), theta, box, 400, cover_tol=diag)
    r = control.radius()
    mismatch = control.covered == (r < 1.0)
    control_err = float(np.max(np.abs(r[mismatch] - 1.0))) if mismatch.any() else 0.0

    params = np.stack([T_GRID, np.zeros_like(T_GRID)], axis=-1)
    raster = coverage_raster(spiral_cylinder(ARCTAN), params, box, 400, s_range=(-100.0, 100.0))
    r = raster.radius()
    inside = int(np.sum(raster.covered[r <= 1.0 - raster.cover_tol]))
    annulus = raster.covered_fraction((r >= 1.05) & (r <= 1.8))
    elapsed = time.perf_counter() - start
    _tag(record_property, "criterion 8: omission raster",
         f"control mismatch<= {control_err:.4f} (diag {diag:.4f}) covered_inside={inside} "
         f"annulus_fraction={annulus:.4f} {elapsed:.1f}s")
    assert control_err <= diag
    assert inside == 0
    assert annulus > 0.99
    assert elapsed < 300.0


def test_criterion_9_non_properness(record_property):
    table = properness_diagnostic(SpiralCurve(ARCTAN), [50, 100, 200, 400], 1.2)
    comp = properness_diagnostic(SpiralCurve(PolynomialProfile((0.0, 0.0, 1.0))), [50, 100, 200, 400], 1.2)
    L = table.arc_length_inside
    _tag(record_property, "criterion 9: non-properness diagnostic",
         f"lengths={[round(x, 3) for x in L]} slope@400={table.slopes[-1]:.4f} comparison={comp.verdict}")
    assert all(b > a for a, b in zip(L, L[1:]))
    assert abs(table.slopes[-1] - 1.0) <= 0.1
    assert comp.saturated


RUNS = {
    "c1": ["canonical", "--samples", "101"],
    "c2_ellipsoid": ["identities", "--surface", "ellipsoid:a=1,b=1.5,c=2", "--grid", "161x161",
                     "--ranges", "-0.5:0.5,-0.5:0.5", "--refine", "--identities", "grad,master"],
    "c2_torus": ["identities", "--surface", "torus:R=2,r=0.5", "--grid", "161x161", "--refine",
                 "--identities", "grad,master"],
    "c4_sphere": ["identities", "--surface", "sphere:r=2", "--grid", "41x41", "--identities", "shrinker"],
    "c4_cylinder": ["identities", "--surface", "cylinder:r=1.4142135623730951", "--grid", "41x41",
                    "--identities", "shrinker"],
    "c5_c6_c9": ["spiral", "--profile", "arctan:m=1,a=1", "--checks", "all",
                 "--t", "-50:50:2001", "--s", "-100:100:2001"],
    "c5_d2": ["spiral", "--profile", "arctan:m=1,a=1", "--d", "2", "--checks", "curvature",
              "--t", "-100:100:10000"],
    "c7": ["spiral", "--profile", "exp", "--checks", "exp-bound", "--t", "-5:20:251", "--s", "-20:20:81"],
    "c8_control": ["omission", "--surface", "circle:r=1", "--box", "-2:2,-2:2", "--cells", "400",
                   "--t", "0:6.283185307179586:2001", "--cover-tol", "0.01414213562373095"],
    "c8_spiral": ["omission", "--surface", "spiral-cylinder:arctan,m=1,a=1", "--box", "-2:2,-2:2",
                  "--cells", "400", "--t", "-50:50:2001", "--s", "-100:100"],
}


def test_criterion_10_determinism(tmp_path, record_property):
    compared = 0
    different = []
    for label, argv in RUNS.items():
        outs = []
        for rep in ("first", "second"):
            out = tmp_path / rep / label
            assert main(argv + ["--out", str(out), "--format", "csv,json"]) == 0
            outs.append(out)
        names = sorted(p.name for p in outs[0].iterdir())
        assert names == sorted(p.name for p in outs[1].iterdir())
        for name in names:
            compared += 1
            if (outs[0] / name).read_bytes() != (outs[1] / name).read_bytes():
                different.append(f"{label}/{name}")
    _tag(record_property, "criterion 10: determinism",
         f"{compared} CSV/JSON files compared, {len(different)} differ")
    assert not different
