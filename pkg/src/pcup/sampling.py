"""Surface sampling and cloud subsampling.

Surface points are drawn triangle-first (probability proportional to
area) and then uniformly inside the triangle by the fold trick, which is
uniform over the whole surface.  Normals and curvatures are carried to
the sample by barycentric interpolation.

Subsampling picks m of the N sampled points either uniformly, with
probability proportional to curvature, or as a hybrid: k = round(alpha*m)
curvature-weighted draws followed by m-k uniform draws, all without
replacement from one shared draw engine.  Because the engine and the
random stream do not depend on the mode, alpha=0 and alpha=1 reproduce
the pure modes bit for bit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import EmptyMeshError, TooFewPointsError
from .mesh import TriangleMesh, compute_vertex_normals, triangle_areas, vertex_curvatures
from .rng import make_rng

SUBSAMPLE_MODES = ("uniform", "curvature")


@dataclass
class PointCloud:
    """Point matrix of shape (N, M) with M = 3 (xyz) or 6 (xyz + normal)."""

    data: np.ndarray

    def __post_init__(self):
        self.data = np.ascontiguousarray(self.data, dtype=np.float64)
        if self.data.ndim != 2 or self.data.shape[1] not in (3, 6):
            raise ValueError("point cloud must be (N, 3) or (N, 6)")
        if len(self.data) < 1:
            raise ValueError("point cloud must contain at least one point")

    def __len__(self) -> int:
        return len(self.data)

    @property
    def positions(self) -> np.ndarray:
        return self.data[:, :3]

    @property
    def normals(self) -> Optional[np.ndarray]:
        return self.data[:, 3:6] if self.data.shape[1] == 6 else None


@dataclass
class SampledCloud:
    """Surface sampling that remembers per-point attributes.

    positions : (N, 3)
    normals : (N, 3), unit length
    curvatures : (N,), nonnegative
    """

    positions: np.ndarray
    normals: np.ndarray
    curvatures: np.ndarray

    def __post_init__(self):
        self.positions = np.ascontiguousarray(self.positions, dtype=np.float64)
        self.normals = np.ascontiguousarray(self.normals, dtype=np.float64)
        self.curvatures = np.ascontiguousarray(self.curvatures, dtype=np.float64)
        n = len(self.positions)
        if self.positions.ndim != 2 or self.positions.shape[1] != 3:
            raise ValueError("positions must be (N, 3)")
        if self.normals.shape != (n, 3):
            raise ValueError("normals must match positions")
        if self.curvatures.shape != (n,):
            raise ValueError("curvatures must be one value per point")
        if n < 1:
            raise ValueError("sampled cloud must contain at least one point")
        if np.any(self.curvatures < 0.0):
            raise ValueError("curvatures must be nonnegative")

    def __len__(self) -> int:
        return len(self.positions)


def sample_surface_uniform(mesh: TriangleMesh, n: int, seed: int) -> SampledCloud:
    """Draw n points uniformly by area from the mesh surface.

    Vertex normals are computed if the mesh has none.  Curvature is
    evaluated at the vertices and interpolated like the normals.
    """
    if n < 1:
        raise ValueError("need at least one sample")
    areas = triangle_areas(mesh)
    total = float(areas.sum())
    if mesh.n_triangles == 0 or total <= 0.0:
        raise EmptyMeshError("cannot sample a mesh with zero total area")
    if mesh.vertex_normals is None:
        mesh = compute_vertex_normals(mesh)
    curv = vertex_curvatures(mesh)

    rng = make_rng(seed)
    cum = np.cumsum(areas)
    r = rng.random(n) * cum[-1]
    tri = np.searchsorted(cum, r, side="right")
    np.clip(tri, 0, len(areas) - 1, out=tri)

    uv = rng.random((n, 2))
    fold = uv.sum(axis=1) > 1.0
    uv[fold] = 1.0 - uv[fold]
    w = np.empty((n, 3))
    w[:, 0] = 1.0 - uv[:, 0] - uv[:, 1]
    w[:, 1] = uv[:, 0]
    w[:, 2] = uv[:, 1]

    idx = mesh.triangles[tri]  # (n, 3) corner indices
    corners = mesh.vertices[idx]  # (n, 3, 3)
    positions = np.einsum("nk,nkj->nj", w, corners)

    nrm = np.einsum("nk,nkj->nj", w, mesh.vertex_normals[idx])
    lengths = np.linalg.norm(nrm, axis=1)
    bad = lengths < 1e-12
    if np.any(bad):
        # Opposing corner normals cancelled; fall back to the face normal.
        a = corners[bad, 0]
        face = np.cross(corners[bad, 1] - a, corners[bad, 2] - a)
        face_len = np.linalg.norm(face, axis=1)
        face_len[face_len < 1e-20] = 1.0
        nrm[bad] = face / face_len[:, None]
        lengths[bad] = 1.0
    nrm /= lengths[:, None]

    curvatures = np.einsum("nk,nk->n", w, curv[idx])
    return SampledCloud(positions, nrm, curvatures)


def _sequential_draw(weights: np.ndarray, alive: np.ndarray, m: int,
                     rng: np.random.Generator) -> np.ndarray:
    """Draw m distinct indices, each with probability proportional to the
    remaining weights; weights renormalize implicitly because the chosen
    slot is zeroed.  If the live weight mass hits zero, the rest of the
    draws are uniform over the still-unselected indices.

    Mutates `alive` so a later phase can continue from the same state.
    """
    w = np.where(alive, weights, 0.0).astype(np.float64)
    out = np.empty(m, dtype=np.int64)
    for t in range(m):
        cum = np.cumsum(w)
        total = cum[-1]
        if not total > 0.0:
            w = alive.astype(np.float64)
            cum = np.cumsum(w)
            total = cum[-1]
        r = rng.random() * total
        i = int(np.searchsorted(cum, r, side="right"))
        if i >= len(w):
            i = len(w) - 1
        out[t] = i
        w[i] = 0.0
        alive[i] = False
    return out


def hybrid_split(m: int, alpha: float) -> int:
    """Number of curvature-weighted draws in a hybrid pick of m points:
    round(alpha*m) with halves rounded up, clipped to [0, m]."""
    if not 0.0 <= alpha <= 1.0:
        raise ValueError(f"alpha must be in [0, 1], got {alpha}")
    k = int(np.floor(alpha * m + 0.5))
    return min(max(k, 0), m)


def _gather(cloud: SampledCloud, idx: np.ndarray, include_normals: bool) -> PointCloud:
    pos = cloud.positions[idx]
    if include_normals:
        return PointCloud(np.hstack([pos, cloud.normals[idx]]))
    return PointCloud(pos)


def subsample_hybrid(cloud: SampledCloud, m: int, alpha: float,
                     include_normals: bool, seed: int) -> PointCloud:
    """Pick m points: round(alpha*m) curvature-weighted, the rest uniform,
    all distinct.  alpha=0 and alpha=1 equal the pure modes exactly."""
    n = len(cloud)
    if m < 1:
        raise ValueError("need at least one point")
    if m > n:
        raise TooFewPointsError(f"asked for {m} points from a cloud of {n}")
    k = hybrid_split(m, alpha)
    rng = make_rng(seed)
    alive = np.ones(n, dtype=bool)
    picked_c = _sequential_draw(cloud.curvatures, alive, k, rng)
    picked_u = _sequential_draw(np.ones(n), alive, m - k, rng)
    idx = np.concatenate([picked_c, picked_u])
    return _gather(cloud, idx, include_normals)


def subsample(cloud: SampledCloud, m: int, mode: str,
              include_normals: bool, seed: int) -> PointCloud:
    """Pick m distinct points uniformly or proportionally to curvature.

    mode is "uniform" or "curvature".  A curvature draw over an all-flat
    cloud silently degrades to uniform rather than failing.
    """
    if mode not in SUBSAMPLE_MODES:
        raise ValueError(f"unknown subsample mode {mode!r}")
    alpha = 1.0 if mode == "curvature" else 0.0
    return subsample_hybrid(cloud, m, alpha, include_normals, seed)
