import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from solitongeom.errors import DegenerateJet, OutOfDomain
from solitongeom.surface import (Circle, Cylinder, Ellipsoid, ImmersionJet, Line, ParamGrid, Plane,
                                 Sphere, TabulatedSurface, Torus, eval_jet, frame_at, support_based,
                                 tabulate)


def _disk_points(rng, k, radius=0.9):
    r = radius * np.sqrt(rng.random(k))
    a = 2 * np.pi * rng.random(k)
    return np.stack([r * np.cos(a), r * np.sin(a)], axis=-1)


# --- ParamGrid -------------------------------------------------------------

def test_grid_nodes_and_refinement():
    grid = ParamGrid(((0, 1), (-2, 2)), (5, 9))
    assert grid.nodes().shape == (5, 9, 2)
    assert grid.spacing == (0.25, 0.5)
    fine = grid.refined()
    assert fine.counts == (9, 17)
    assert fine.spacing == (0.125, 0.25)
    assert grid.interior_mask().sum() == 3 * 7


@pytest.mark.parametrize("ranges, counts", [
    (((0, 1),), (4,)),
    (((1, 0),), (5,)),
    (((0, 1), (0, 1), (0, 1)), (5, 5, 5)),
    (((0, np.inf),), (5,)),
])
def test_grid_rejects_bad_input(ranges, counts):
    with pytest.raises(ValueError):
        ParamGrid(ranges, counts)


# --- builder examples ------------------------------------------------------

def test_sphere_radius_two_is_the_canonical_shrinker(rng):
    fr = Sphere(2.0).frame(_disk_points(rng, 50))
    np.testing.assert_allclose(fr.mean_h, 1.0, atol=1e-13)
    np.testing.assert_allclose(fr.norm_a_sq, 0.5, atol=1e-13)
    np.testing.assert_allclose(fr.f, -2.0, atol=1e-13)
    np.testing.assert_allclose(fr.x_tan, 0.0, atol=1e-13)


def test_sphere_chart_centre_is_the_pole():
    for cap, z in (("north", 3.0), ("south", -3.0)):
        np.testing.assert_allclose(eval_jet(Sphere(3.0, cap=cap), np.zeros(2)).x, [0, 0, z], atol=1e-15)


def test_plane_as_computed():
    fr = Plane(d=3.0).frame(np.array([[0.2, -0.7]]))
    np.testing.assert_allclose(fr.normal, [[0, 0, 1]])
    np.testing.assert_allclose(fr.f, [3.0])
    np.testing.assert_allclose(fr.mean_h, [0.0])
    np.testing.assert_allclose(fr.x_tan, [[0.2, -0.7]])


def test_plane_with_tilted_normal_keeps_support():
    nrm = np.array([1.0, 2.0, 2.0]) / 3.0
    spec = Plane(d=1.5, normal=tuple(nrm), orientation="inward")
    fr = spec.frame(np.array([[0.3, 0.1], [-1.0, 0.5]]))
    np.testing.assert_allclose(fr.f, -1.5, atol=1e-14)
    np.testing.assert_allclose(np.abs(fr.normal @ nrm), 1.0, atol=1e-14)


def test_cylinder_curvatures():
    fr = Cylinder(math.sqrt(2)).frame(np.array([[0.3, 0.4], [2.0, -1.0]]))
    np.testing.assert_allclose(fr.mean_h, 1 / math.sqrt(2), atol=1e-14)
    np.testing.assert_allclose(fr.norm_a_sq, 0.5, atol=1e-14)
    np.testing.assert_allclose(fr.f, -math.sqrt(2), atol=1e-14)


def test_torus_principal_curvatures(rng):
    R, r = 2.0, 0.5
    u = rng.uniform(0, 2 * np.pi, size=(40, 2))
    fr = Torus(R, r).frame(u)
    k_tube = 1.0 / r
    k_ring = np.cos(u[:, 1]) / (R + r * np.cos(u[:, 1]))
    np.testing.assert_allclose(fr.mean_h, k_tube + k_ring, atol=1e-13)
    np.testing.assert_allclose(fr.norm_a_sq, k_tube**2 + k_ring**2, atol=1e-12)


def test_ellipsoid_support_matches_closed_form(rng):
    a, b, c = 1.0, 1.5, 2.0
    fr = Ellipsoid(a, b, c).frame(_disk_points(rng, 200, radius=1.0))
    x, y, z = fr.x[:, 0], fr.x[:, 1], fr.x[:, 2]
    np.testing.assert_allclose((x / a) ** 2 + (y / b) ** 2 + (z / c) ** 2, 1.0, atol=1e-13)
    # support of an ellipsoid: 1 / |(x/a^2, y/b^2, z/c^2)|, negative for the inward normal
    expected = -1.0 / np.sqrt((x / a**2) ** 2 + (y / b**2) ** 2 + (z / c**2) ** 2)
    np.testing.assert_allclose(fr.f, expected, rtol=1e-12)


def test_ellipsoid_mean_curvature_at_pole():
    a, b, c = 1.0, 1.5, 2.0
    fr = Ellipsoid(a, b, c).frame(np.zeros(2))
    assert fr.mean_h == pytest.approx(c / a**2 + c / b**2, rel=1e-13)


def test_circle_and_line():
    fr = Circle(2.0).frame(np.array([[0.0], [1.0]]))
    np.testing.assert_allclose(fr.mean_h, 0.5)
    np.testing.assert_allclose(fr.f, -2.0)
    fr = Line(d=1.0).frame(np.array([[0.0], [3.0]]))
    np.testing.assert_allclose(fr.mean_h, 0.0)
    np.testing.assert_allclose(fr.f, 1.0)


# --- invariants ------------------------------------------------------------

@pytest.mark.parametrize("spec", [Ellipsoid(1, 1.5, 2), Torus(2, 0.5), Sphere(2.0, cap="south"), Cylinder(1.3)])
def test_frame_invariants(spec, rng):
    lo, hi = np.array(spec.default_ranges).T
    u = lo + (hi - lo) * rng.random((100, 2))
    jet = spec.eval(u)
    fr = spec.frame(u)
    np.testing.assert_allclose(np.linalg.norm(fr.normal, axis=-1), 1.0, atol=1e-14)
    np.testing.assert_allclose(np.einsum("pim,pm->pi", jet.dx, fr.normal), 0.0, atol=1e-13)
    np.testing.assert_allclose(fr.h, np.swapaxes(fr.h, -1, -2), atol=1e-14)
    np.testing.assert_allclose(fr.reconstruct(jet), fr.x, atol=1e-12)
    # Newton: H^2 <= n |A|^2
    assert np.all(fr.mean_h**2 <= 2 * fr.norm_a_sq + 1e-12)


def test_orientation_flip_changes_signs(rng):
    u = _disk_points(rng, 30)
    inner = Ellipsoid(1, 2, 3, orientation="inward").frame(u)
    outer = Ellipsoid(1, 2, 3, orientation="outward").frame(u)
    np.testing.assert_allclose(outer.normal, -inner.normal)
    np.testing.assert_allclose(outer.mean_h, -inner.mean_h)
    np.testing.assert_allclose(outer.f, -inner.f)
    np.testing.assert_allclose(outer.norm_a_sq, inner.norm_a_sq)


def test_support_based_shift():
    fr = Sphere(2.0).frame(np.array([[0.1, 0.2]]))
    p0 = np.array([0.3, -0.1, 0.5])
    np.testing.assert_allclose(support_based(fr, p0), fr.f - fr.normal @ p0)


def test_out_of_domain_and_degenerate():
    with pytest.raises(OutOfDomain):
        Ellipsoid(1, 1, 1).frame(np.array([1.5, 0.0]))
    grid = ParamGrid(((0, 1), (0, 1)), (5, 5))
    zeros = np.zeros((5, 5, 3))
    dx = np.zeros((5, 5, 2, 3))
    dx[..., 0, 0] = 1.0  # second partial vanishes: rank one
    tab = TabulatedSurface(grid=grid, x=zeros, dx=dx, ddx=np.zeros((5, 5, 3, 3)))
    with pytest.raises(DegenerateJet):
        tab.sample(grid)
    with pytest.raises(DegenerateJet):
        frame_at(ImmersionJet(np.zeros(3), np.zeros((2, 3)), np.zeros((3, 3))))


def test_tabulated_matches_analytic():
    spec = Torus(2.0, 0.5)
    grid = ParamGrid(spec.default_ranges, (9, 7))
    tab = tabulate(spec, grid)
    a, b = spec.sample(grid)[1], tab.sample(grid)[1]
    np.testing.assert_array_equal(a.mean_h, b.mean_h)
    np.testing.assert_array_equal(a.normal, b.normal)
    with pytest.raises(OutOfDomain):
        tab.frame(np.array([0.123, 0.0]))


def test_bad_parameters_rejected():
    with pytest.raises(ValueError):
        Ellipsoid(1, -1, 1)
    with pytest.raises(ValueError):
        Torus(0.5, 0.5)
    with pytest.raises(ValueError):
        Sphere(1.0, orientation="sideways")


# --- properties ------------------------------------------------------------

axis = st.floats(0.3, 4.0)
point = st.tuples(st.floats(-0.95, 0.95), st.floats(-0.95, 0.95))


@settings(max_examples=60, deadline=None)
@given(a=axis, b=axis, c=axis, u=point, south=st.booleans())
def test_ellipsoid_properties(a, b, c, u, south):
    spec = Ellipsoid(a, b, c, cap="south" if south else "north")
    jet = spec.eval(np.array(u))
    fr = spec.frame(np.array(u))
    assert fr.f < 0  # inward normal on a convex body containing the origin
    assert fr.mean_h > 0
    assert fr.mean_h**2 <= 2 * fr.norm_a_sq * (1 + 1e-12)
    np.testing.assert_allclose(fr.reconstruct(jet), fr.x, atol=1e-11 * max(a, b, c))


@settings(max_examples=40, deadline=None)
@given(R=st.floats(1.0, 5.0), ratio=st.floats(0.05, 0.9), u=st.tuples(st.floats(0, 6.3), st.floats(0, 6.3)))
def test_torus_gauss_equation(R, ratio, u):
    fr = Torus(R, R * ratio).frame(np.array(u))
    # in two dimensions det A = (H^2 - |A|^2)/2
    det = np.linalg.det(fr.shape)
    assert det == pytest.approx(0.5 * (fr.mean_h**2 - fr.norm_a_sq), abs=1e-9 * (1 + fr.norm_a_sq))
