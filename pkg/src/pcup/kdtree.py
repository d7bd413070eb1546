"""Exact nearest-neighbor queries over a fixed 3-D point set.

A static median-split kd-tree with vectorized batched traversal.  Small
sets skip the tree and use one brute-force distance matrix; both paths
evaluate squared distances with the same expression, so the chosen
distance for a query is bit-identical whichever path ran.

Ties are broken toward the lowest point index: leaf blocks keep their
points in ascending original order (so argmin lands on the lowest index
within a leaf), the far side of a split is visited whenever it could
hold an equally near point, and a candidate replaces the incumbent only
when strictly nearer or equally near with a lower index.
"""

from __future__ import annotations

import numpy as np

BRUTE_THRESHOLD = 64
# Large leaves keep the traversal mostly inside vectorized blocks; the
# crossover against pure brute force sits near a few thousand points.
LEAF_SIZE = 64


class NearestNeighborIndex:
    """1-NN index over (N, 3) points with deterministic tie-breaking."""

    def __init__(self, points: np.ndarray):
        pts = np.ascontiguousarray(points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[1] != 3:
            raise ValueError("points must be (N, 3)")
        if len(pts) < 1:
            raise ValueError("index needs at least one point")
        self.points = pts
        self._brute = len(pts) < BRUTE_THRESHOLD
        if self._brute:
            return

        # Flat node arrays filled by a positional median build.  Children
        # are -1 on leaves; leaves own [lo, hi) of the permutation.
        self._axis: list = []
        self._split: list = []
        self._left: list = []
        self._right: list = []
        self._lo: list = []
        self._hi: list = []
        self._perm_parts: list = []
        self._perm_size = 0
        self._build(np.arange(len(pts), dtype=np.int64))
        self._axis = np.asarray(self._axis, dtype=np.int8)
        self._split = np.asarray(self._split, dtype=np.float64)
        self._left = np.asarray(self._left, dtype=np.int32)
        self._right = np.asarray(self._right, dtype=np.int32)
        self._lo = np.asarray(self._lo, dtype=np.int64)
        self._hi = np.asarray(self._hi, dtype=np.int64)
        self._perm = np.concatenate(self._perm_parts)
        self._blocks = np.ascontiguousarray(pts[self._perm])

    def _build(self, idx: np.ndarray) -> int:
        node = len(self._axis)
        self._axis.append(0)
        self._split.append(0.0)
        self._left.append(-1)
        self._right.append(-1)
        self._lo.append(0)
        self._hi.append(0)
        if len(idx) <= LEAF_SIZE:
            block = np.sort(idx)  # ascending original index inside the leaf
            self._lo[node] = self._perm_size
            self._hi[node] = self._perm_size + len(block)
            self._perm_parts.append(block)
            self._perm_size += len(block)
            return node
        coords = self.points[idx]
        spread = coords.max(axis=0) - coords.min(axis=0)
        axis = int(np.argmax(spread))
        vals = coords[:, axis]
        mid = len(idx) // 2  # positional split: both sides always shrink
        part = np.argpartition(vals, mid)
        self._axis[node] = axis
        self._split[node] = float(vals[part[mid]])
        left = self._build(idx[part[:mid]])
        right = self._build(idx[part[mid:]])
        self._left[node] = left
        self._right[node] = right
        return node

    def query(self, queries: np.ndarray):
        """Nearest database point for each query row.

        Returns (d2, idx): squared distances and database indices, both
        shaped (B,).  Equal distances resolve to the lowest index.
        """
        q = np.ascontiguousarray(queries, dtype=np.float64)
        if q.ndim != 2 or q.shape[1] != 3:
            raise ValueError("queries must be (B, 3)")
        if self._brute:
            d = q[:, None, :] - self.points[None, :, :]
            d2 = np.einsum("bnj,bnj->bn", d, d)
            idx = d2.argmin(axis=1)
            return d2[np.arange(len(q)), idx], idx.astype(np.int64)
        best_d2 = np.full(len(q), np.inf)
        best_idx = np.full(len(q), len(self.points), dtype=np.int64)
        self._query_node(0, np.arange(len(q), dtype=np.int64), q, best_d2, best_idx)
        return best_d2, best_idx

    def _query_node(self, node: int, qi: np.ndarray, q: np.ndarray,
                    best_d2: np.ndarray, best_idx: np.ndarray) -> None:
        left = self._left[node]
        if left < 0:
            lo, hi = self._lo[node], self._hi[node]
            block = self._blocks[lo:hi]
            orig = self._perm[lo:hi]
            d = q[qi][:, None, :] - block[None, :, :]
            d2 = np.einsum("bnj,bnj->bn", d, d)
            pos = d2.argmin(axis=1)  # first minimum = lowest original index
            cand_d2 = d2[np.arange(len(qi)), pos]
            cand_idx = orig[pos]
            better = (cand_d2 < best_d2[qi]) | (
                (cand_d2 == best_d2[qi]) & (cand_idx < best_idx[qi]))
            upd = qi[better]
            best_d2[upd] = cand_d2[better]
            best_idx[upd] = cand_idx[better]
            return
        axis = self._axis[node]
        split = self._split[node]
        da = q[qi, axis] - split
        go_left = da <= 0.0
        for mask, near, far in ((go_left, left, self._right[node]),
                                (~go_left, self._right[node], left)):
            sub = qi[mask]
            if len(sub) == 0:
                continue
            self._query_node(near, sub, q, best_d2, best_idx)
            # The far side can still hold an equally near, lower-index
            # point, so the bound check must not be strict.
            gap2 = np.square(q[sub, axis] - split)
            cross = sub[gap2 <= best_d2[sub]]
            if len(cross):
                self._query_node(far, cross, q, best_d2, best_idx)


def nearest_neighbors(points: np.ndarray, queries: np.ndarray):
    """One-shot helper: build an index over points and query it."""
    return NearestNeighborIndex(points).query(queries)
