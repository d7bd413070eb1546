"""Triangle meshes: validation, normalization, normals, curvature.

Curvature here is the directional (normal) curvature of an edge seen
from one endpoint, estimated from the endpoint's unit normal:

    kappa(i, j) = 2 * dot(n_i, v_j - v_i) / ||v_j - v_i||^2

which is exact on a sphere with radial normals (every edge of a unit
sphere gives -1).  A vertex's curvature is the mean of |kappa| over all
directed edges leaving it, so both endpoints of an edge contribute, each
with its own normal.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyMeshError, ZeroLengthEdgeError

# Squared edge length below which an edge direction is undefined.
DEGENERATE_EDGE_SQ = 1e-24


@dataclass
class TriangleMesh:
    """Indexed triangle mesh with optional per-vertex unit normals.

    Parameters
    ----------
    vertices : (V, 3) float array
    triangles : (T, 3) int array of vertex indices into `vertices`
    vertex_normals : (V, 3) float array of unit vectors, or None
    """

    vertices: np.ndarray
    triangles: np.ndarray
    vertex_normals: Optional[np.ndarray] = None

    def __post_init__(self):
        self.vertices = np.ascontiguousarray(self.vertices, dtype=np.float64)
        self.triangles = np.ascontiguousarray(self.triangles, dtype=np.int64)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise ValueError("vertices must be an (V, 3) array")
        if self.triangles.ndim != 2 or self.triangles.shape[1] != 3:
            raise ValueError("triangles must be a (T, 3) index array")
        if self.triangles.size:
            lo = int(self.triangles.min())
            hi = int(self.triangles.max())
            if lo < 0 or hi >= len(self.vertices):
                raise ValueError(
                    f"triangle index out of range: {lo}..{hi} for "
                    f"{len(self.vertices)} vertices"
                )
        if self.vertex_normals is not None:
            self.vertex_normals = np.ascontiguousarray(
                self.vertex_normals, dtype=np.float64
            )
            if self.vertex_normals.shape != self.vertices.shape:
                raise ValueError("vertex_normals must be one unit vector per vertex")
            lengths = np.linalg.norm(self.vertex_normals, axis=1)
            if np.any(np.abs(lengths - 1.0) > 1e-5):
                raise ValueError("vertex_normals must have unit length")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_triangles(self) -> int:
        return len(self.triangles)


def triangle_areas(mesh: TriangleMesh) -> np.ndarray:
    """Area of every triangle, zeros included for degenerate ones."""
    v = mesh.vertices
    t = mesh.triangles
    a = v[t[:, 0]]
    cross = np.cross(v[t[:, 1]] - a, v[t[:, 2]] - a)
    return 0.5 * np.linalg.norm(cross, axis=1)


def normalize_model(mesh: TriangleMesh) -> TriangleMesh:
    """Center the mesh on its bounding-box midpoint and scale the longest
    bounding-box side to 2 (coordinates end up inside [-1, 1]).

    Raises EmptyMeshError when no triangle has positive area, since such
    a mesh cannot be sampled anyway.
    """
    if mesh.n_triangles == 0 or not np.any(triangle_areas(mesh) > 0.0):
        raise EmptyMeshError("mesh has no triangle with positive area")
    lo = mesh.vertices.min(axis=0)
    hi = mesh.vertices.max(axis=0)
    center = 0.5 * (lo + hi)
    extent = float((hi - lo).max())
    vertices = (mesh.vertices - center) * (2.0 / extent)
    return TriangleMesh(vertices, mesh.triangles.copy(),
                        None if mesh.vertex_normals is None
                        else mesh.vertex_normals.copy())


def compute_vertex_normals(mesh: TriangleMesh) -> TriangleMesh:
    """Return a copy of the mesh with area-weighted vertex normals.

    Each triangle contributes its (area-scaled) face normal to its three
    corners; the accumulated vectors are normalized.  Vertices touched by
    no triangle, or whose contributions cancel exactly, get an arbitrary
    unit normal (0, 0, 1) so the result is always valid.
    """
    v = mesh.vertices
    t = mesh.triangles
    a = v[t[:, 0]]
    cross = np.cross(v[t[:, 1]] - a, v[t[:, 2]] - a)  # 2*area*face normal
    acc = np.zeros_like(v)
    for k in range(3):
        np.add.at(acc, t[:, k], cross)
    lengths = np.linalg.norm(acc, axis=1)
    ok = lengths > 1e-20
    normals = np.zeros_like(v)
    normals[ok] = acc[ok] / lengths[ok, None]
    normals[~ok] = (0.0, 0.0, 1.0)
    return TriangleMesh(v.copy(), t.copy(), normals)


def _require_normals(mesh: TriangleMesh) -> np.ndarray:
    if mesh.vertex_normals is None:
        raise ValueError("mesh has no vertex normals; call compute_vertex_normals")
    return mesh.vertex_normals


def edge_curvature(mesh: TriangleMesh, i: int, j: int) -> float:
    """Directional curvature of the edge i -> j seen from vertex i."""
    normals = _require_normals(mesh)
    d = mesh.vertices[j] - mesh.vertices[i]
    d2 = float(d @ d)
    if d2 < DEGENERATE_EDGE_SQ:
        raise ZeroLengthEdgeError(f"edge {i}->{j} has zero length")
    return 2.0 * float(normals[i] @ d) / d2


def mesh_edges(mesh: TriangleMesh) -> np.ndarray:
    """Unique undirected edges as a (E, 2) array with min index first."""
    t = mesh.triangles
    e = np.concatenate([t[:, [0, 1]], t[:, [1, 2]], t[:, [2, 0]]], axis=0)
    e = np.sort(e, axis=1)
    return np.unique(e, axis=0)


def vertex_curvatures(mesh: TriangleMesh) -> np.ndarray:
    """Mean absolute directional curvature per vertex.

    Every directed edge i -> j contributes |kappa(i, j)| to vertex i.
    Zero-length edges are skipped; a vertex with no usable incident edge
    gets curvature 0.  Values are >= 0 by construction and invariant to
    flipping all the normals.
    """
    normals = _require_normals(mesh)
    edges = mesh_edges(mesh)
    if len(edges) == 0:
        return np.zeros(mesh.n_vertices)
    src = np.concatenate([edges[:, 0], edges[:, 1]])
    dst = np.concatenate([edges[:, 1], edges[:, 0]])
    d = mesh.vertices[dst] - mesh.vertices[src]
    d2 = np.einsum("ij,ij->i", d, d)
    usable = d2 >= DEGENERATE_EDGE_SQ
    kappa = np.zeros(len(src))
    kappa[usable] = 2.0 * np.einsum(
        "ij,ij->i", normals[src[usable]], d[usable]
    ) / d2[usable]
    total = np.zeros(mesh.n_vertices)
    count = np.zeros(mesh.n_vertices)
    np.add.at(total, src[usable], np.abs(kappa[usable]))
    np.add.at(count, src[usable], 1.0)
    out = np.zeros(mesh.n_vertices)
    touched = count > 0
    out[touched] = total[touched] / count[touched]
    return out
