"""Mesh container, normalization, normals, and curvature estimates."""
import numpy as np
import pytest

from pcup.errors import EmptyMeshError, ZeroLengthEdgeError
from pcup.mesh import (TriangleMesh, compute_vertex_normals, edge_curvature,
                       mesh_edges, normalize_model, triangle_areas,
                       vertex_curvatures)
from pcup.synthetic import icosphere

from conftest import plane_grid, unit_triangle


def test_mesh_validation_rejects_bad_shapes():
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 2)), np.array([[0, 1, 2]]))
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), np.array([[0, 1]]))
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), np.array([[0, 1, 3]]))
    with pytest.raises(ValueError):
        TriangleMesh(np.zeros((3, 3)), np.array([[-1, 1, 2]]))


def test_mesh_validation_rejects_non_unit_normals():
    v = np.eye(3)
    t = np.array([[0, 1, 2]])
    with pytest.raises(ValueError):
        TriangleMesh(v, t, vertex_normals=np.full((3, 3), 0.5))


def test_triangle_areas_known_values():
    mesh = unit_triangle()
    np.testing.assert_allclose(triangle_areas(mesh), [0.5])
    # degenerate triangle contributes zero area
    v = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0], [0.0, 1, 0]])
    t = np.array([[0, 1, 2], [0, 1, 3]])
    np.testing.assert_allclose(triangle_areas(TriangleMesh(v, t)), [0.0, 0.5])


def test_normalize_model_centers_and_scales():
    v = np.array([[1.0, 2.0, 3.0], [5.0, 2.5, 3.5], [3.0, 4.0, 3.2]])
    mesh = normalize_model(TriangleMesh(v, np.array([[0, 1, 2]])))
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    np.testing.assert_allclose(lo + hi, np.zeros(3), atol=1e-12)
    assert abs((hi - lo).max() - 2.0) < 1e-12
    assert np.all(np.abs(mesh.vertices) <= 1.0 + 1e-12)


def test_normalize_model_is_isotropic():
    rng = np.random.default_rng(3)
    v = rng.uniform(-4.0, 9.0, (20, 3))
    t = np.array([[i, i + 1, i + 2] for i in range(18)])
    mesh = TriangleMesh(v, t)
    out = normalize_model(mesh)
    # one global scale factor: all pairwise distance ratios preserved
    d_in = np.linalg.norm(v[1:] - v[0], axis=1)
    d_out = np.linalg.norm(out.vertices[1:] - out.vertices[0], axis=1)
    ratios = d_out / d_in
    np.testing.assert_allclose(ratios, ratios[0], rtol=1e-12)


def test_normalize_model_rejects_degenerate_mesh():
    v = np.array([[0.0, 0, 0], [1.0, 0, 0], [2.0, 0, 0]])
    with pytest.raises(EmptyMeshError):
        normalize_model(TriangleMesh(v, np.array([[0, 1, 2]])))
    with pytest.raises(EmptyMeshError):
        normalize_model(TriangleMesh(v, np.zeros((0, 3), dtype=int)))


def test_compute_vertex_normals_flat_plane():
    mesh = plane_grid()
    expected = np.tile([0.0, 0.0, 1.0], (mesh.n_vertices, 1))
    np.testing.assert_allclose(mesh.vertex_normals, expected, atol=1e-12)


def test_compute_vertex_normals_sphere_is_radial():
    base = icosphere(2)
    mesh = compute_vertex_normals(TriangleMesh(base.vertices.copy(),
                                               base.triangles.copy()))
    radial = mesh.vertices / np.linalg.norm(mesh.vertices, axis=1,
                                            keepdims=True)
    dots = np.einsum("ij,ij->i", mesh.vertex_normals, radial)
    assert dots.min() > 0.99


def test_compute_vertex_normals_untouched_vertex_fallback():
    v = np.array([[0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0], [5.0, 5, 5]])
    mesh = compute_vertex_normals(TriangleMesh(v, np.array([[0, 1, 2]])))
    np.testing.assert_allclose(mesh.vertex_normals[3], [0.0, 0.0, 1.0])


def test_edge_curvature_unit_circle_chord():
    # two points on a unit circle with radial normals: kappa = -1 exactly
    v = np.array([[1.0, 0, 0], [0.0, 1, 0], [0.0, 0, 1]])
    n = v.copy()
    mesh = TriangleMesh(v, np.array([[0, 1, 2]]), vertex_normals=n)
    assert edge_curvature(mesh, 0, 1) == pytest.approx(-1.0)
    assert edge_curvature(mesh, 1, 0) == pytest.approx(-1.0)


def test_edge_curvature_flat_is_zero():
    mesh = plane_grid()
    assert edge_curvature(mesh, 0, 1) == 0.0


def test_edge_curvature_zero_length_edge_raises():
    v = np.array([[0.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0]])
    n = np.tile([0.0, 0.0, 1.0], (3, 1))
    mesh = TriangleMesh(v, np.array([[0, 1, 2]]), vertex_normals=n)
    with pytest.raises(ZeroLengthEdgeError):
        edge_curvature(mesh, 0, 1)


def test_mesh_edges_unique_and_sorted():
    mesh = plane_grid(k=3)
    edges = mesh_edges(mesh)
    assert np.all(edges[:, 0] < edges[:, 1])
    assert len(np.unique(edges, axis=0)) == len(edges)
    # Euler check for a 3x3 grid disk: V=9, F=8, E = V + F - 1 = 16
    assert len(edges) == 16


def test_vertex_curvatures_plane_and_sphere():
    plane = plane_grid()
    np.testing.assert_allclose(vertex_curvatures(plane),
                               np.zeros(plane.n_vertices), atol=1e-12)
    sphere = icosphere(2)
    np.testing.assert_allclose(vertex_curvatures(sphere),
                               np.ones(sphere.n_vertices), atol=1e-12)


def test_vertex_curvatures_scale_inverse():
    # doubling the sphere radius halves the curvature
    big = icosphere(2, radius=2.0)
    np.testing.assert_allclose(vertex_curvatures(big),
                               np.full(big.n_vertices, 0.5), atol=1e-12)


def test_vertex_curvatures_flip_invariant():
    sphere = icosphere(1)
    flipped = TriangleMesh(sphere.vertices.copy(), sphere.triangles.copy(),
                           vertex_normals=-sphere.vertex_normals)
    np.testing.assert_allclose(vertex_curvatures(flipped),
                               vertex_curvatures(sphere), atol=1e-14)


def test_vertex_curvatures_skips_degenerate_edges():
    # a duplicated vertex pair creates a zero-length edge that must be skipped
    v = np.array([[0.0, 0, 0], [0.0, 0, 0], [1.0, 0, 0], [0.0, 1, 0]])
    n = np.tile([0.0, 0.0, 1.0], (4, 1))
    mesh = TriangleMesh(v, np.array([[0, 1, 2], [0, 2, 3]]),
                        vertex_normals=n)
    k = vertex_curvatures(mesh)
    assert np.all(np.isfinite(k))
    np.testing.assert_allclose(k, np.zeros(4), atol=1e-12)
