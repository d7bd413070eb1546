"""Mesh and point-cloud file formats.

OBJ: the v / vn / f subset, 1-based indices, `v`, `v//vn` and `v/vt/vn`
face tokens, polygons fan-triangulated.  Anything else is skipped.

PLY: ASCII only, one vertex element with float properties x y z and
optionally nx ny nz; extra properties are tolerated on read and their
columns ignored.

XYZ: whitespace-separated rows of 3 or 6 floats.

All floats are written with repr(), which round-trips exactly, so a
write/read cycle reproduces coordinates bit for bit.
"""

from __future__ import annotations

from pathlib import Path
from typing import Union

import numpy as np

from .mesh import TriangleMesh
from .sampling import PointCloud

PathLike = Union[str, Path]


def _fmt(x: float) -> str:
    return repr(float(x))


def load_obj(path: PathLike) -> TriangleMesh:
    """Read a mesh; vertex normals are attached when every face corner
    references one (last reference per vertex wins)."""
    vertices = []
    normals = []
    faces = []
    corner_normal = {}  # vertex index -> normal index
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = line.split()
            tag = parts[0]
            if tag == "v":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: malformed vertex")
                vertices.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif tag == "vn":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: malformed normal")
                normals.append([float(parts[1]), float(parts[2]), float(parts[3])])
            elif tag == "f":
                if len(parts) < 4:
                    raise ValueError(f"{path}:{lineno}: face needs 3+ corners")
                corners = []
                for token in parts[1:]:
                    fields = token.split("/")
                    vi = int(fields[0])
                    vi = vi - 1 if vi > 0 else len(vertices) + vi
                    ni = None
                    if len(fields) >= 3 and fields[2]:
                        ni = int(fields[2])
                        ni = ni - 1 if ni > 0 else len(normals) + ni
                    corners.append((vi, ni))
                for a in range(1, len(corners) - 1):
                    faces.append((corners[0][0], corners[a][0], corners[a + 1][0]))
                for vi, ni in corners:
                    if ni is not None:
                        corner_normal[vi] = ni
            # other directives (vt, o, g, s, usemtl, mtllib, ...) are skipped
    if not vertices:
        raise ValueError(f"{path}: no vertices")
    if not faces:
        raise ValueError(f"{path}: no faces")
    v = np.asarray(vertices, dtype=np.float64)
    t = np.asarray(faces, dtype=np.int64)
    vn = None
    if normals and len(corner_normal) == len(vertices):
        ndata = np.asarray(normals, dtype=np.float64)
        vn = np.empty_like(v)
        for vi, ni in corner_normal.items():
            vn[vi] = ndata[ni]
        lengths = np.linalg.norm(vn, axis=1)
        if np.any(lengths < 1e-12):
            vn = None
        else:
            # already-unit rows are left untouched so round trips are exact
            scale = np.where(np.abs(lengths - 1.0) < 1e-9, 1.0, lengths)
            vn = vn / scale[:, None]
    return TriangleMesh(v, t, vn)


def save_obj(path: PathLike, mesh: TriangleMesh) -> None:
    lines = []
    for v in mesh.vertices:
        lines.append(f"v {_fmt(v[0])} {_fmt(v[1])} {_fmt(v[2])}")
    has_n = mesh.vertex_normals is not None
    if has_n:
        for n in mesh.vertex_normals:
            lines.append(f"vn {_fmt(n[0])} {_fmt(n[1])} {_fmt(n[2])}")
    for t in mesh.triangles:
        if has_n:
            lines.append("f " + " ".join(f"{i + 1}//{i + 1}" for i in t))
        else:
            lines.append("f " + " ".join(str(i + 1) for i in t))
    Path(path).write_bytes(("\n".join(lines) + "\n").encode("ascii"))


def write_ply(path: PathLike, cloud) -> None:
    """ASCII PLY with x y z and, if the cloud has them, nx ny nz."""
    data = cloud.data if isinstance(cloud, PointCloud) else np.asarray(cloud, float)
    if data.ndim != 2 or data.shape[1] not in (3, 6):
        raise ValueError("cloud must be (N, 3) or (N, 6)")
    props = ["x", "y", "z"] if data.shape[1] == 3 else ["x", "y", "z", "nx", "ny", "nz"]
    header = ["ply", "format ascii 1.0", f"element vertex {len(data)}"]
    header += [f"property float {p}" for p in props]
    header.append("end_header")
    body = [" ".join(_fmt(v) for v in row) for row in data]
    Path(path).write_bytes(("\n".join(header + body) + "\n").encode("ascii"))


def read_ply(path: PathLike) -> PointCloud:
    """Read our ASCII PLY subset back into a PointCloud."""
    with open(path, "r", encoding="utf-8") as fh:
        first = fh.readline().strip()
        if first != "ply":
            raise ValueError(f"{path}: not a PLY file")
        fmt = fh.readline().strip()
        if not fmt.startswith("format ascii"):
            raise ValueError(f"{path}: only ASCII PLY is supported")
        count = None
        names = []
        while True:
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: header never ends")
            line = line.strip()
            if line == "end_header":
                break
            parts = line.split()
            if parts[0] == "element":
                if parts[1] == "vertex":
                    count = int(parts[2])
                elif count is not None:
                    raise ValueError(f"{path}: only the vertex element is supported")
            elif parts[0] == "property" and count is not None:
                if parts[1] == "list":
                    raise ValueError(f"{path}: list properties are not supported")
                names.append(parts[2])
        if count is None:
            raise ValueError(f"{path}: no vertex element")
        for needed in ("x", "y", "z"):
            if needed not in names:
                raise ValueError(f"{path}: missing property {needed}")
        rows = []
        for _ in range(count):
            line = fh.readline()
            if not line:
                raise ValueError(f"{path}: fewer rows than declared")
            rows.append([float(tok) for tok in line.split()])
    table = np.asarray(rows, dtype=np.float64)
    if table.shape[1] != len(names):
        raise ValueError(f"{path}: row width does not match the header")
    cols = [names.index(p) for p in ("x", "y", "z")]
    if all(p in names for p in ("nx", "ny", "nz")):
        cols += [names.index(p) for p in ("nx", "ny", "nz")]
    return PointCloud(table[:, cols])


def write_xyz(path: PathLike, cloud) -> None:
    data = cloud.data if isinstance(cloud, PointCloud) else np.asarray(cloud, float)
    if data.ndim != 2 or data.shape[1] not in (3, 6):
        raise ValueError("cloud must be (N, 3) or (N, 6)")
    body = [" ".join(_fmt(v) for v in row) for row in data]
    Path(path).write_bytes(("\n".join(body) + "\n").encode("ascii"))


def read_xyz(path: PathLike) -> PointCloud:
    rows = []
    with open(path, "r", encoding="utf-8") as fh:
        for raw in fh:
            line = raw.strip()
            if not line:
                continue
            rows.append([float(tok) for tok in line.split()])
    if not rows:
        raise ValueError(f"{path}: empty cloud")
    return PointCloud(np.asarray(rows, dtype=np.float64))
