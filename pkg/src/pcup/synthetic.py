"""Procedural test shapes.

Three parametric families (superellipsoids with pure ellipsoids as the
exponent-1 case, boxes standing on four legs, and lathed profiles) plus
the subdivided icosahedron used wherever an analytically known surface
is handy.  Generation is seeded per shape, so a category regenerates
identically from (family, count, seed).
"""

from __future__ import annotations

from typing import List, Optional

import numpy as np

from .mesh import TriangleMesh
from .rng import STREAM_DATA, spawn_rng

FAMILIES = ("ellipsoid", "superellipsoid", "box", "lathe")


def icosphere(subdivisions: int = 3, radius: float = 1.0,
              radial_normals: bool = True) -> TriangleMesh:
    """Sphere by icosahedron subdivision; every vertex sits on the sphere.

    With radial_normals the exact sphere normals are attached, which is
    what makes curvature come out at exactly 1/radius up to faceting of
    the edge directions.
    """
    phi = (1.0 + np.sqrt(5.0)) / 2.0
    verts = np.array([
        [-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
        [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
        [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1],
    ], dtype=np.float64)
    verts /= np.linalg.norm(verts, axis=1)[:, None]
    faces = [
        (0, 11, 5), (0, 5, 1), (0, 1, 7), (0, 7, 10), (0, 10, 11),
        (1, 5, 9), (5, 11, 4), (11, 10, 2), (10, 7, 6), (7, 1, 8),
        (3, 9, 4), (3, 4, 2), (3, 2, 6), (3, 6, 8), (3, 8, 9),
        (4, 9, 5), (2, 4, 11), (6, 2, 10), (8, 6, 7), (9, 8, 1),
    ]
    verts = [v for v in verts]
    for _ in range(subdivisions):
        midpoint = {}

        def mid(i, j):
            key = (i, j) if i < j else (j, i)
            if key not in midpoint:
                m = verts[i] + verts[j]
                m /= np.linalg.norm(m)
                midpoint[key] = len(verts)
                verts.append(m)
            return midpoint[key]

        next_faces = []
        for a, b, c in faces:
            ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
            next_faces += [(a, ab, ca), (b, bc, ab), (c, ca, bc), (ab, bc, ca)]
        faces = next_faces
    v = np.asarray(verts) * radius
    normals = np.asarray(verts) if radial_normals else None
    return TriangleMesh(v, np.asarray(faces, dtype=np.int64), normals)


def _signed_pow(x: np.ndarray, e: float) -> np.ndarray:
    return np.sign(x) * np.abs(x) ** e


def superellipsoid_mesh(a: float, b: float, c: float,
                        e1: float = 1.0, e2: float = 1.0,
                        n_lat: int = 17, n_lon: int = 24) -> TriangleMesh:
    """Superellipsoid surface grid with pole fans; no normals attached
    (the sampling pipeline computes them from the mesh)."""
    if n_lat < 3 or n_lon < 3:
        raise ValueError("grid too coarse")
    thetas = np.linspace(-np.pi / 2, np.pi / 2, n_lat)[1:-1]
    phis = np.linspace(-np.pi, np.pi, n_lon, endpoint=False)
    verts = [np.array([0.0, 0.0, -c])]
    for th in thetas:
        ct, st = np.cos(th), np.sin(th)
        for ph in phis:
            cp, sp = np.cos(ph), np.sin(ph)
            verts.append(np.array([
                a * _signed_pow(ct, e1) * _signed_pow(cp, e2),
                b * _signed_pow(ct, e1) * _signed_pow(sp, e2),
                c * _signed_pow(st, e1),
            ]))
    verts.append(np.array([0.0, 0.0, c]))
    south, north = 0, len(verts) - 1
    rings = len(thetas)

    def ring(i, j):
        return 1 + i * n_lon + (j % n_lon)

    faces = []
    for j in range(n_lon):
        faces.append((south, ring(0, j + 1), ring(0, j)))
    for i in range(rings - 1):
        for j in range(n_lon):
            p00, p01 = ring(i, j), ring(i, j + 1)
            p10, p11 = ring(i + 1, j), ring(i + 1, j + 1)
            faces += [(p00, p01, p11), (p00, p11, p10)]
    for j in range(n_lon):
        faces.append((north, ring(rings - 1, j), ring(rings - 1, j + 1)))
    return TriangleMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def ellipsoid_mesh(a: float, b: float, c: float, n_lat: int = 17,
                   n_lon: int = 24, analytic_normals: bool = True) -> TriangleMesh:
    """Plain ellipsoid; optionally with its exact outward normals."""
    mesh = superellipsoid_mesh(a, b, c, 1.0, 1.0, n_lat, n_lon)
    if not analytic_normals:
        return mesh
    n = mesh.vertices / np.array([a * a, b * b, c * c])
    lengths = np.linalg.norm(n, axis=1)
    lengths[lengths < 1e-300] = 1.0
    return TriangleMesh(mesh.vertices, mesh.triangles, n / lengths[:, None])


_BOX_QUADS = (
    (0, 1, 3, 2),  # -x
    (4, 6, 7, 5),  # +x
    (0, 4, 5, 1),  # -y
    (2, 3, 7, 6),  # +y
    (0, 2, 6, 4),  # -z
    (1, 5, 7, 3),  # +z
)


def box_mesh(lo, hi) -> TriangleMesh:
    """Axis-aligned box with outward-facing triangles."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)
    if np.any(hi <= lo):
        raise ValueError("box must have positive extent on every axis")
    corners = np.array([[lo[0] if i < 4 else hi[0],
                         lo[1] if (i >> 1) % 2 == 0 else hi[1],
                         lo[2] if i % 2 == 0 else hi[2]] for i in range(8)])
    faces = []
    for q in _BOX_QUADS:
        faces += [(q[0], q[1], q[2]), (q[0], q[2], q[3])]
    return TriangleMesh(corners, np.asarray(faces, dtype=np.int64))


def merge_meshes(meshes: List[TriangleMesh]) -> TriangleMesh:
    verts = []
    faces = []
    offset = 0
    for m in meshes:
        verts.append(m.vertices)
        faces.append(m.triangles + offset)
        offset += m.n_vertices
    return TriangleMesh(np.concatenate(verts), np.concatenate(faces))


def legged_box_mesh(body_w: float, body_d: float, body_h: float,
                    leg_w: float, leg_h: float, inset: float = 0.0) -> TriangleMesh:
    """Box body standing on four corner legs; legs start at z=0."""
    parts = [box_mesh((-body_w, -body_d, leg_h),
                      (body_w, body_d, leg_h + body_h))]
    for sx in (-1.0, 1.0):
        for sy in (-1.0, 1.0):
            cx = sx * (body_w - inset - leg_w)
            cy = sy * (body_d - inset - leg_w)
            parts.append(box_mesh((cx - leg_w, cy - leg_w, 0.0),
                                  (cx + leg_w, cy + leg_w, leg_h)))
    return merge_meshes(parts)


def lathe_mesh(radii: np.ndarray, z_values: np.ndarray,
               n_seg: int = 24) -> TriangleMesh:
    """Surface of revolution around z with closed top and bottom."""
    radii = np.asarray(radii, dtype=np.float64)
    z_values = np.asarray(z_values, dtype=np.float64)
    if len(radii) != len(z_values) or len(radii) < 2:
        raise ValueError("need matching radii and heights, at least two")
    if np.any(radii <= 0):
        raise ValueError("radii must be positive")
    phis = np.linspace(-np.pi, np.pi, n_seg, endpoint=False)
    verts = [np.array([0.0, 0.0, z_values[0]])]
    for r, z in zip(radii, z_values):
        for ph in phis:
            verts.append(np.array([r * np.cos(ph), r * np.sin(ph), z]))
    verts.append(np.array([0.0, 0.0, z_values[-1]]))
    bottom, top = 0, len(verts) - 1
    levels = len(radii)

    def ring(i, j):
        return 1 + i * n_seg + (j % n_seg)

    faces = []
    for j in range(n_seg):
        faces.append((bottom, ring(0, j + 1), ring(0, j)))
    for i in range(levels - 1):
        for j in range(n_seg):
            p00, p01 = ring(i, j), ring(i, j + 1)
            p10, p11 = ring(i + 1, j), ring(i + 1, j + 1)
            faces += [(p00, p01, p11), (p00, p11, p10)]
    for j in range(n_seg):
        faces.append((top, ring(levels - 1, j), ring(levels - 1, j + 1)))
    return TriangleMesh(np.asarray(verts), np.asarray(faces, dtype=np.int64))


def generate_shape(family: str, seed: int, index: int = 0) -> TriangleMesh:
    """One random shape from a family; (family, seed, index) fixes it."""
    if family not in FAMILIES:
        raise ValueError(f"unknown family {family!r}; choose from {FAMILIES}")
    rng = spawn_rng(seed, STREAM_DATA, FAMILIES.index(family), index)
    if family == "ellipsoid":
        a, b, c = rng.uniform(0.4, 1.0, size=3)
        return ellipsoid_mesh(a, b, c)
    if family == "superellipsoid":
        a, b, c = rng.uniform(0.4, 1.0, size=3)
        e1, e2 = rng.uniform(0.5, 1.6, size=2)
        return superellipsoid_mesh(a, b, c, e1, e2)
    if family == "box":
        w, d = rng.uniform(0.5, 1.0, size=2)
        h = rng.uniform(0.3, 0.7)
        leg_w = rng.uniform(0.06, 0.14)
        leg_h = rng.uniform(0.3, 0.8)
        return legged_box_mesh(w, d, h, leg_w, leg_h, inset=0.02)
    levels = 9
    z = np.linspace(0.0, rng.uniform(1.2, 2.0), levels)
    base = rng.uniform(0.3, 0.6)
    bumps = rng.normal(0.0, 0.25, size=levels)
    smooth = np.convolve(bumps, np.ones(3) / 3.0, mode="same")
    radii = np.clip(base + smooth, 0.12, 1.0)
    return lathe_mesh(radii, z, n_seg=24)


def generate_category(family: str, count: int, seed: int) -> List[TriangleMesh]:
    """Deterministic list of shapes from one family."""
    if count < 1:
        raise ValueError("count must be positive")
    return [generate_shape(family, seed, i) for i in range(count)]
