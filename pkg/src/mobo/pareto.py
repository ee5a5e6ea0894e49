"""Pareto ordering, non-dominated filtering, box decompositions and exact hypervolume.

All objectives follow the maximization convention: larger is better. The
dominated region of a front is partitioned into disjoint half-open boxes
``(lower, upper]`` whose lower bounds may be ``-inf``; volumes are only
computed after clipping at a finite reference point.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = [
    "dominates",
    "pareto_indices",
    "pareto_filter",
    "BoxDecomposition",
    "box_decompose",
    "hypervolume",
    "greedy_hv_truncate",
]

_DEDUP_TOL = 1e-12


def dominates(a, b, strict: bool = False) -> bool:
    """Whether objective vector ``a`` Pareto dominates ``b``.

    Weak domination requires ``a >= b`` componentwise; strict domination
    additionally requires ``a != b``.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    weak = bool(np.all(a >= b))
    if not strict:
        return weak
    return weak and bool(np.any(a > b))


def pareto_indices(points) -> np.ndarray:
    """Indices of the maximal non-dominated subset of ``points`` (k, M).

    A point is kept if no other point strictly dominates it. Exact duplicates
    keep only their first occurrence. Indices are returned in ascending order.
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = pts.shape[0]
    if k == 0:
        return np.empty(0, dtype=int)
    # ge[i, j] = point i weakly dominates point j
    ge = np.all(pts[:, None, :] >= pts[None, :, :], axis=2)
    eq = np.all(pts[:, None, :] == pts[None, :, :], axis=2)
    strictly_dominated = np.any(ge & ~eq, axis=0)
    keep = ~strictly_dominated
    # drop later duplicates of surviving points
    first = np.ones(k, dtype=bool)
    for i in range(k):
        if keep[i] and first[i]:
            dup = eq[i] & first
            dup[i] = False
            first[dup] = False
    return np.nonzero(keep & first)[0]


def pareto_filter(points) -> np.ndarray:
    """Return the maximal non-dominated subset of ``points``, duplicates removed."""
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    if pts.shape[0] == 0:
        return pts.reshape(0, pts.shape[1] if pts.ndim == 2 else 0)
    return pts[pareto_indices(pts)]


@dataclass(frozen=True)
class BoxDecomposition:
    """Disjoint half-open boxes ``(lower, upper]`` covering a dominated region.

    ``lower`` entries may be ``-inf``.
    """

    lower: np.ndarray  # (J, M)
    upper: np.ndarray  # (J, M)

    @property
    def n_boxes(self) -> int:
        return self.lower.shape[0]

    @property
    def n_objectives(self) -> int:
        return self.lower.shape[1]

    def contains(self, z) -> np.ndarray:
        """Membership matrix: entry (i, j) is True when point i lies in box j."""
        z = np.atleast_2d(np.asarray(z, dtype=float))
        above = z[:, None, :] > self.lower[None, :, :]
        below = z[:, None, :] <= self.upper[None, :, :]
        return np.all(above & below, axis=2)


def _dedupe(front: np.ndarray) -> np.ndarray:
    """Merge points that coincide within tolerance (keeps first occurrence).

    Near-duplicates are adjacent after a lexicographic sort, so one linear
    scan over the sorted rows suffices.
    """
    k = front.shape[0]
    if k <= 1:
        return front
    order = np.lexsort(front.T[::-1])
    pts = front[order]
    keep_original = [order[0]]
    last = pts[0]
    for i in range(1, k):
        if np.max(np.abs(pts[i] - last)) > _DEDUP_TOL:
            keep_original.append(order[i])
            last = pts[i]
        elif order[i] < keep_original[-1]:
            keep_original[-1] = order[i]
    return front[np.sort(keep_original)]


def _decompose_2d(front: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    # staircase: sort by second objective descending, prefix-max the first
    order = np.argsort(-front[:, 1], kind="stable")
    pts = front[order]
    u1 = np.maximum.accumulate(pts[:, 0])
    u2 = pts[:, 1]
    # collapse ties in the second coordinate to the best first coordinate
    distinct = np.nonzero(np.diff(u2, append=-np.inf) != 0.0)[0]
    u1 = u1[distinct]
    u2 = u2[distinct]
    lo2 = np.append(u2[1:], -np.inf)
    lower = np.column_stack([np.full(u1.shape, -np.inf), lo2])
    upper = np.column_stack([u1, u2])
    return lower, upper


def _decompose(front: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    m = front.shape[1]
    if m == 1:
        top = np.max(front)
        return np.array([[-np.inf]]), np.array([[top]])
    if m == 2:
        return _decompose_2d(front)
    # slice along the last objective; within a slab the candidate dominators
    # are exactly the points at or above the slab's upper value
    vals = np.unique(front[:, -1])[::-1]
    lows = np.append(vals[1:], -np.inf)
    lower_parts, upper_parts = [], []
    for v_hi, v_lo in zip(vals, lows):
        subset = front[front[:, -1] >= v_hi][:, :-1]
        sub_front = pareto_filter(subset)
        sub_lo, sub_up = _decompose(sub_front)
        n = sub_lo.shape[0]
        lower_parts.append(np.column_stack([sub_lo, np.full(n, v_lo)]))
        upper_parts.append(np.column_stack([sub_up, np.full(n, v_hi)]))
    return np.vstack(lower_parts), np.vstack(upper_parts)


def box_decompose(front) -> BoxDecomposition:
    """Partition the region dominated by ``front`` into disjoint boxes.

    ``front`` must be non-empty and mutually non-dominated; near-duplicate
    points are merged first. Raises if the input contains a strictly
    dominated point.
    """
    pts = np.atleast_2d(np.asarray(front, dtype=float))
    if pts.shape[0] == 0:
        raise ValueError("front must be non-empty")
    if not np.all(np.isfinite(pts)):
        raise ValueError("front must be finite")
    pts = _dedupe(pts)
    if len(pareto_indices(pts)) != pts.shape[0]:
        raise ValueError("front contains dominated points; apply pareto_filter first")
    lower, upper = _decompose(pts)
    return BoxDecomposition(lower=lower, upper=upper)


def _hypervolume_2d(pts: np.ndarray, ref: np.ndarray) -> float:
    # staircase sweep over strips of the first objective
    order = np.argsort(-pts[:, 0], kind="stable")
    f1 = pts[order, 0]
    f2 = pts[order, 1]
    hv = 0.0
    level = ref[1]
    right = None
    for a, b in zip(f1, f2):
        if b <= level:
            continue
        if right is not None:
            hv += (right - a) * (level - ref[1])
        right = a
        level = b
    if right is not None:
        hv += (right - ref[0]) * (level - ref[1])
    return hv


def hypervolume(front, reference) -> float:
    """Exact volume dominated by ``front`` and above ``reference``.

    Points weakly dominated by the reference contribute nothing; the
    reference need not be dominated by the whole front.
    """
    pts = np.atleast_2d(np.asarray(front, dtype=float))
    ref = np.asarray(reference, dtype=float)
    if pts.shape[0] == 0:
        return 0.0
    pts = pts[np.all(pts > ref, axis=1)]
    if pts.shape[0] == 0:
        return 0.0
    if pts.shape[1] == 1:
        return float(np.max(pts) - ref[0])
    if pts.shape[1] == 2:
        return float(_hypervolume_2d(pts, ref))
    dec = box_decompose(pareto_filter(pts))
    sides = dec.upper - np.maximum(dec.lower, ref)
    return float(np.sum(np.prod(np.clip(sides, 0.0, None), axis=1)))


def greedy_hv_truncate(points, target: int, reference) -> np.ndarray:
    """Greedily select ``target`` indices by maximal marginal hypervolume gain.

    Ties are broken by the lowest index. With ``target >= len(points)`` every
    index is returned (in greedy order).
    """
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    k = pts.shape[0]
    if target > k:
        raise ValueError(f"target {target} exceeds number of points {k}")
    chosen: list[int] = []
    remaining = list(range(k))
    for _ in range(target):
        best_idx = None
        best_hv = -np.inf
        for i in remaining:
            hv = hypervolume(pts[chosen + [i]], reference)
            if hv > best_hv + 1e-15:
                best_hv = hv
                best_idx = i
        chosen.append(best_idx)
        remaining.remove(best_idx)
    return np.asarray(chosen, dtype=int)
