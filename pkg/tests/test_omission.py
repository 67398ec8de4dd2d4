import math

import numpy as np
import pytest

from solitongeom.errors import EmptySample
from solitongeom.gallery import ArctanProfile, SpiralCurve, SpiralCurveSpec, spiral_cylinder
from solitongeom.omission import (AffineTangent, coverage_raster, omission_certificate,
                                  point_plane_distance, project_onto_tangent, sample_spacing,
                                  tangent_at)
from solitongeom.surface import Circle, Ellipsoid, Plane, Sphere, Torus


def test_pythagoras_for_random_points(rng):
    plane = tangent_at(Torus(2.0, 0.5), np.array([0.7, 2.1]))
    q = rng.normal(scale=3.0, size=(1000, 3))
    foot = project_onto_tangent(q, plane)
    dist = point_plane_distance(q, plane)
    np.testing.assert_allclose(np.linalg.norm(q - foot, axis=1), dist, atol=1e-12)
    np.testing.assert_allclose(point_plane_distance(foot, plane), 0.0, atol=1e-12)
    lhs = np.sum((q - plane.base) ** 2, axis=1)
    np.testing.assert_allclose(lhs, dist**2 + np.sum((foot - plane.base) ** 2, axis=1), rtol=1e-12)


def test_affine_tangent_validation():
    with pytest.raises(ValueError):
        AffineTangent(np.zeros(3), np.array([[1.0, 0, 0], [1.0, 1.0, 0]]), np.array([0, 0, 1.0]))
    with pytest.raises(ValueError):
        AffineTangent(np.zeros(3), np.eye(3)[:2], np.array([1.0, 0, 0]))


def test_certificate_sphere_and_plane():
    spec = Sphere(2.0)
    params = np.random.default_rng(1).uniform(-0.9, 0.9, size=(500, 2))
    cert = omission_certificate(spec, params, np.zeros(3))
    assert cert.min_support == pytest.approx(2.0)
    assert cert.min_plane_distance == pytest.approx(2.0)
    assert cert.all_nonzero
    on_plane = omission_certificate(Plane(d=1.0), params, np.array([0.3, 0.3, 1.0]))
    assert not on_plane.all_nonzero
    assert on_plane.record()["claim"].startswith("sampled")
    with pytest.raises(EmptySample):
        omission_certificate(spec, np.zeros((0, 2)), np.zeros(3))


def test_certificate_spiral():
    t = np.linspace(-40, 40, 4001)
    params = np.stack([t, np.zeros_like(t)], axis=-1)
    cert = omission_certificate(spiral_cylinder(ArctanProfile()), params, np.zeros(3))
    assert cert.all_nonzero and cert.min_support > 1.0


def test_sample_spacing():
    assert sample_spacing(np.array([[0.0, 1.0], [0.5, 1.0], [2.0, 3.0]])) == (1.5, 2.0)


def test_more_planes_never_increase_distance():
    spec = Circle(1.0)
    dense = np.linspace(0, 2 * np.pi, 400, endpoint=False)[:, None]
    coarse = dense[::4]
    box = ((-2, 2), (-2, 2))
    a = coverage_raster(spec, coarse, box, 60)
    b = coverage_raster(spec, dense, box, 60)
    assert np.all(b.min_dist <= a.min_dist + 1e-15)


def test_circle_control_uncovered_set_is_the_disk():
    theta = np.linspace(0, 2 * np.pi, 2000, endpoint=False)[:, None]
    probe = coverage_raster(Circle(1.0), theta, ((-2, 2), (-2, 2)), 100)
    raster = coverage_raster(Circle(1.0), theta, ((-2, 2), (-2, 2)), 100, cover_tol=probe.cell_diagonal)
    r = raster.radius()
    mismatch = raster.covered == (r < 1.0)
    assert np.all(np.abs(r[mismatch] - 1.0) <= raster.cell_diagonal)
    assert raster.cover_tol == pytest.approx(math.hypot(0.04, 0.04))


def test_workers_do_not_change_result():
    t = np.linspace(-20, 20, 801)
    spec = spiral_cylinder(ArctanProfile())
    params = np.stack([t, np.zeros_like(t)], axis=-1)
    a = coverage_raster(spec, params, ((-2, 2), (-2, 2)), 50, workers=1)
    b = coverage_raster(spec, params, ((-2, 2), (-2, 2)), 50, workers=4)
    np.testing.assert_array_equal(a.min_dist, b.min_dist)
    assert a.reduced_2d and a.n_planes == 801


def test_clipped_segments_are_farther():
    curve = SpiralCurveSpec(curve=SpiralCurve(ArctanProfile()))
    t = np.linspace(-10, 10, 401)[:, None]
    full = coverage_raster(curve, t, ((-2, 2), (-2, 2)), 40)
    clipped = coverage_raster(curve, t, ((-2, 2), (-2, 2)), 40, s_range=(-0.5, 0.5))
    assert np.all(clipped.min_dist >= full.min_dist - 1e-12)
    assert np.any(clipped.min_dist > full.min_dist + 1e-3)


def test_three_dimensional_raster_of_sphere():
    params = np.random.default_rng(5).uniform(-1, 1, size=(3000, 2))
    raster = coverage_raster(Sphere(1.0), params, ((-2, 2),) * 3, 12)
    r = raster.radius()
    assert not np.any(raster.covered[r < 1.0 - raster.cover_tol])
    rec = next(raster.records())
    assert set(rec) == {"x", "y", "z", "min_dist", "covered"}


def test_raster_rejects_mismatched_boxes():
    with pytest.raises(ValueError):
        coverage_raster(Ellipsoid(), np.zeros((3, 2)), ((-1, 1), (-1, 1)), 10)
    with pytest.raises(EmptySample):
        coverage_raster(Circle(), np.zeros((0, 1)), ((-1, 1), (-1, 1)), 10)


def test_circle_example_with_default_tolerance():
    theta = np.linspace(0, 2 * np.pi, 2000, endpoint=False)[:, None]
    raster = coverage_raster(Circle(1.0), theta, ((-2, 2), (-2, 2)), 200)
    r = raster.radius()
    assert raster.cover_tol == pytest.approx(1.5 * raster.cell_diagonal)
    assert not np.any(raster.covered[r < 1 - raster.cover_tol])
    assert np.all(raster.covered[(r > 1 + raster.cover_tol) & (r < 2)])


def test_spiral_example_with_short_segments():
    t = np.linspace(-60, 60, 12001)
    params = np.stack([t, np.zeros_like(t)], axis=-1)
    raster = coverage_raster(spiral_cylinder(ArctanProfile()), params, ((-2, 2), (-2, 2)), 200, s_range=(-10, 10))
    assert not np.any(raster.covered[raster.radius() <= 1 - raster.cover_tol])
