"""Solution-set quality metrics: exact hypervolume (2D/3D), angular
range, consecutive-gap sparsity, and non-dominated filtering.

Hypervolume is exact: rectangle strips in 2D and a sweep of 2D slices
along the third objective in 3D. Range is the summed angular span of
the points' polar angles about the ideal point. Sparsity is the mean
squared gap between consecutive points sorted by the first objective
(lower means more uniform).
"""

import warnings
from dataclasses import dataclass, field

import numpy as np


@dataclass
class SolutionSet:
    """Matched preference angles, decisions, and normalized objectives."""

    task_id: str
    thetas: np.ndarray  # (k, m-1)
    xs: np.ndarray      # (k, n)
    fs: np.ndarray      # (k, m), normalized, in [0, 3.5]

    def __post_init__(self):
        if not (len(self.thetas) == len(self.xs) == len(self.fs)):
            raise ValueError("thetas, xs, fs must be parallel arrays")


@dataclass
class MetricsReport:
    task_id: str
    hv: float
    range: float
    sparsity: float
    count_after_filter: int
    r_used: list

    def to_dict(self) -> dict:
        return {"task_id": self.task_id, "hv": self.hv, "range": self.range,
                "sparsity": self.sparsity,
                "count_after_filter": self.count_after_filter,
                "r_used": list(self.r_used)}

    @classmethod
    def from_dict(cls, d: dict) -> "MetricsReport":
        return cls(task_id=d["task_id"], hv=d["hv"], range=d["range"],
                   sparsity=d["sparsity"],
                   count_after_filter=d["count_after_filter"],
                   r_used=list(d["r_used"]))


def nondominated_filter(points) -> np.ndarray:
    """Maximal mutually non-dominated subset, stable order.

    Strictly dominated points are removed; exact duplicates keep their
    first occurrence.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return pts.reshape(0, pts.shape[-1] if pts.ndim == 2 else 0)
    keep = []
    for i, p in enumerate(pts):
        dominated = ((pts <= p).all(axis=1) & (pts < p).any(axis=1)).any()
        duplicate = i > 0 and (pts[:i] == p).all(axis=1).any()
        if not dominated and not duplicate:
            keep.append(i)
    return pts[keep]


def hypervolume(points, r) -> float:
    """Exact dominated volume bounded by reference point r (m = 2 or 3)."""
    r = np.asarray(r, dtype=np.float64)
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return 0.0
    pts = pts.reshape(-1, r.size)
    inside = (pts <= r).all(axis=1)
    if not inside.all():
        warnings.warn(f"hypervolume: clipping {int((~inside).sum())} points "
                      "not dominated by the reference point")
        pts = pts[inside]
    if pts.size == 0:
        return 0.0
    pts = nondominated_filter(pts)
    if r.size == 2:
        return _hv_2d(pts, r)
    if r.size == 3:
        return _hv_3d(pts, r)
    raise ValueError(f"hypervolume supports 2 or 3 objectives, got {r.size}")


def _hv_2d(pts: np.ndarray, r: np.ndarray) -> float:
    order = np.argsort(pts[:, 0], kind="stable")
    total = 0.0
    best_f2 = r[1]
    for f1, f2 in pts[order]:
        if f2 < best_f2:
            total += (r[0] - f1) * (best_f2 - f2)
            best_f2 = f2
    return total


def _hv_3d(pts: np.ndarray, r: np.ndarray) -> float:
    order = np.argsort(pts[:, 2], kind="stable")
    zs = pts[order, 2]
    total = 0.0
    for k in range(len(order)):
        z_next = zs[k + 1] if k + 1 < len(order) else r[2]
        thickness = z_next - zs[k]
        if thickness > 0:
            total += _hv_2d(pts[order[:k + 1], :2], r[:2]) * thickness
    return total


def _polar_angles(f: np.ndarray) -> np.ndarray:
    if f.size == 2:
        return np.array([np.arctan2(f[0], f[1])])
    norm = np.linalg.norm(f)
    theta1 = np.arccos(np.clip(f[2] / norm, -1.0, 1.0))
    theta2 = np.arctan2(f[0], f[1])
    return np.array([theta1, theta2])


def range_metric(points) -> float:
    """Summed angular span of the points about the ideal point."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0:
        return 0.0
    usable = pts[np.linalg.norm(pts, axis=1) >= 1e-9]
    if len(usable) < 2:
        return 0.0
    angles = np.stack([_polar_angles(f) for f in usable])
    return float((angles.max(axis=0) - angles.min(axis=0)).sum())


def sparsity_metric(points) -> float:
    """Mean squared consecutive gap after sorting by the first objective."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.size == 0 or len(pts) < 2:
        return 0.0
    pts = pts[np.argsort(pts[:, 0], kind="stable")]
    gaps = np.diff(pts, axis=0)
    return float((gaps ** 2).sum() / (len(pts) - 1))
