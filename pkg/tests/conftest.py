"""Shared helpers for the test suite."""
import numpy as np
import pytest

from pcup.mesh import TriangleMesh, compute_vertex_normals
from pcup.sampling import PointCloud, SampledCloud

TOY_ENCODER = (4, 8, 8, 16, 8)
TOY_DECODER = (12, 12)


def random_cloud(rng, n, spread=1.0):
    return PointCloud(rng.standard_normal((n, 3)) * spread)


def random_sampled_cloud(rng, n):
    normals = rng.standard_normal((n, 3))
    normals /= np.linalg.norm(normals, axis=1, keepdims=True)
    return SampledCloud(rng.standard_normal((n, 3)),
                        normals,
                        rng.uniform(0.0, 2.0, n))


def unit_triangle():
    return TriangleMesh(np.array([[0.0, 0.0, 0.0],
                                  [1.0, 0.0, 0.0],
                                  [0.0, 1.0, 0.0]]),
                        np.array([[0, 1, 2]]))


def plane_grid(k=6, extent=1.0):
    """A k x k vertex grid in the z=0 plane, triangulated, with normals."""
    g = np.linspace(0.0, extent, k)
    gx, gy = np.meshgrid(g, g)
    vertices = np.column_stack([gx.ravel(), gy.ravel(), np.zeros(k * k)])
    faces = []
    for r in range(k - 1):
        for c in range(k - 1):
            a = r * k + c
            faces.append([a, a + 1, a + k])
            faces.append([a + 1, a + k + 1, a + k])
    return compute_vertex_normals(TriangleMesh(vertices, np.array(faces)))


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
