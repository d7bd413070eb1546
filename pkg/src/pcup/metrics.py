"""Set distances and tolerance metrics between point clouds.

Chamfer distance is the raw two-sided sum of squared nearest-neighbor
distances; the reported training/evaluation figure divides that sum by
the total number of points of both sets so clouds of different sizes
stay comparable.  The earth mover's distance is the exact minimum-cost
one-to-one matching under plain Euclidean (not squared) ground distance
and is defined for equal-size sets only; it is an evaluation metric,
never a training loss.

Inputs can be PointCloud objects or arrays of shape (N, 3) or (N, 6);
only the first three columns (positions) enter any metric.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import linear_sum_assignment

from .errors import EmptySetError, NonpositiveRadiusError, SizeMismatchError
from .kdtree import NearestNeighborIndex
from .sampling import PointCloud


def _positions(obj, name: str) -> np.ndarray:
    if isinstance(obj, PointCloud):
        return np.asarray(obj.positions, dtype=np.float64)
    arr = np.asarray(obj, dtype=np.float64)
    if arr.ndim != 2 or arr.shape[1] not in (3, 6):
        raise ValueError(f"{name} must be (N, 3) or (N, 6), got {arr.shape}")
    if len(arr) == 0:
        raise EmptySetError(f"{name} is empty")
    return arr[:, :3]


def _nn_both_ways(a: np.ndarray, b: np.ndarray):
    d2_ab, nn_ab = NearestNeighborIndex(b).query(a)
    d2_ba, nn_ba = NearestNeighborIndex(a).query(b)
    return d2_ab, nn_ab, d2_ba, nn_ba


def chamfer_distance(s1, s2) -> float:
    """Two-sided sum of squared nearest-neighbor distances."""
    a = _positions(s1, "s1")
    b = _positions(s2, "s2")
    d2_ab, _, d2_ba, _ = _nn_both_ways(a, b)
    return float(d2_ab.sum() + d2_ba.sum())


def chamfer_loss(s1, s2) -> float:
    """Chamfer distance divided by the total point count |s1| + |s2|."""
    a = _positions(s1, "s1")
    b = _positions(s2, "s2")
    return chamfer_distance(a, b) / (len(a) + len(b))


def _gradient_from_matches(a, b, nn_ab, nn_ba) -> np.ndarray:
    grad = 2.0 * (a - b[nn_ab])
    np.add.at(grad, nn_ba, 2.0 * (a[nn_ba] - b))
    return grad


def chamfer_gradient(s1, s2) -> np.ndarray:
    """d(chamfer_distance)/d(s1 positions), shape (|s1|, 3).

    Nearest-neighbor assignments are treated as locally constant: each
    point of s1 is pulled toward its match in s2, and pushed by every
    point of s2 that selected it.
    """
    a = _positions(s1, "s1")
    b = _positions(s2, "s2")
    _, nn_ab, _, nn_ba = _nn_both_ways(a, b)
    return _gradient_from_matches(a, b, nn_ab, nn_ba)


def chamfer_with_gradient(s1, s2):
    """(chamfer_distance, its gradient w.r.t. s1) from one pair of
    nearest-neighbor passes; bit-identical to calling the two functions."""
    a = _positions(s1, "s1")
    b = _positions(s2, "s2")
    d2_ab, nn_ab, d2_ba, nn_ba = _nn_both_ways(a, b)
    value = float(d2_ab.sum() + d2_ba.sum())
    return value, _gradient_from_matches(a, b, nn_ab, nn_ba)


def emd(s1, s2) -> float:
    """Exact minimum-cost perfect matching under Euclidean distance."""
    a = _positions(s1, "s1")
    b = _positions(s2, "s2")
    if len(a) != len(b):
        raise SizeMismatchError(
            f"matching needs equal sizes, got {len(a)} and {len(b)}")
    diff = a[:, None, :] - b[None, :, :]
    cost = np.sqrt(np.einsum("ijk,ijk->ij", diff, diff))
    rows, cols = linear_sum_assignment(cost)
    return float(cost[rows, cols].sum())


def accuracy(pred, gt, radius: float) -> float:
    """Fraction of predicted points within radius of some true point.

    Membership compares squared distances against radius*radius, which is
    equivalent to comparing distances and avoids square-root rounding at
    the boundary.
    """
    p = _positions(pred, "pred")
    g = _positions(gt, "gt")
    if not radius > 0.0:
        raise NonpositiveRadiusError(f"radius must be > 0, got {radius}")
    d2, _ = NearestNeighborIndex(g).query(p)
    return float(np.count_nonzero(d2 <= radius * radius)) / len(p)


def coverage(pred, gt, radius: float) -> float:
    """Fraction of true points within radius of some predicted point."""
    p = _positions(pred, "pred")
    g = _positions(gt, "gt")
    if not radius > 0.0:
        raise NonpositiveRadiusError(f"radius must be > 0, got {radius}")
    d2, _ = NearestNeighborIndex(p).query(g)
    return float(np.count_nonzero(d2 <= radius * radius)) / len(g)
