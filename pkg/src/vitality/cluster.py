"""Fixed-centroid k-means over the clustering features, silhouette scoring,
and radar-chart payloads for sector validation."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    DegenerateInitError,
    EmptyClusterError,
    ShapeMismatchError,
    SingleClusterError,
    ValidationError,
)
from .kernels import kmeans_lloyd, silhouette_samples

DEFAULT_SECTORS = ("Urban", "Residential", "Commercial")


@dataclass(frozen=True)
class ClusterModel:
    k: int
    feature_ids: tuple[str, ...]
    da_ids: tuple[str, ...]
    sector_names: tuple[str, ...]
    init_centroids: np.ndarray
    final_centroids: np.ndarray
    assignments: np.ndarray  # sector index per DA
    inertia_history: np.ndarray
    n_iter: int
    had_empty_iteration: bool

    def __post_init__(self):
        if len(self.sector_names) != self.k:
            raise ValidationError("one sector name per centroid required")
        if self.assignments.shape[0] != len(self.da_ids):
            raise ValidationError("one assignment per DA required")
        if np.any(np.diff(self.inertia_history) > 1e-9):
            raise ValidationError("inertia increased between iterations")
        for arr in (self.init_centroids, self.final_centroids,
                    self.assignments, self.inertia_history):
            arr.setflags(write=False)

    def sector_of(self, da_id: str) -> str:
        i = self.da_ids.index(da_id)
        return self.sector_names[int(self.assignments[i])]

    def members(self, sector_index: int) -> list[int]:
        return [i for i, a in enumerate(self.assignments) if a == sector_index]

    def assignment_map(self) -> dict[str, str]:
        return {
            da: self.sector_names[int(a)]
            for da, a in zip(self.da_ids, self.assignments)
        }


@dataclass(frozen=True)
class SilhouetteReport:
    samples: np.ndarray
    labels: np.ndarray
    per_cluster: tuple[tuple[float, ...], ...]  # sorted ascending per cluster
    mean: float

    def __post_init__(self):
        self.samples.setflags(write=False)
        self.labels.setflags(write=False)


def kmeans_fixed(points, init, da_ids, feature_ids,
                 sector_names=DEFAULT_SECTORS, max_iter=300,
                 tol=1e-6) -> ClusterModel:
    """Lloyd's algorithm from exactly the provided centroids.

    No restarts and no reseeding: assignment ties go to the lowest sector
    index, a cluster emptied during iteration keeps its previous centroid
    (flagged), and a cluster still empty at convergence is an error.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    init = np.ascontiguousarray(init, dtype=np.float64)
    if points.ndim != 2 or init.ndim != 2 or points.shape[1] != init.shape[1]:
        raise ShapeMismatchError(
            f"points {points.shape} incompatible with init {init.shape}"
        )
    if len(da_ids) != points.shape[0]:
        raise ShapeMismatchError("one da_id per point required")
    k = init.shape[0]
    for a in range(k):
        for b in range(a + 1, k):
            if np.array_equal(init[a], init[b]):
                raise DegenerateInitError(f"init rows {a} and {b} are identical")
    labels, cent, history, n_iter, empty_seen = kmeans_lloyd(
        points, init, max_iter, tol
    )
    final_counts = np.bincount(labels, minlength=k)
    empty = [sector_names[i] for i in range(k) if final_counts[i] == 0]
    if empty:
        raise EmptyClusterError(f"empty at convergence: {empty}")
    return ClusterModel(
        k=k,
        feature_ids=tuple(feature_ids),
        da_ids=tuple(da_ids),
        sector_names=tuple(sector_names),
        init_centroids=init.copy(),
        final_centroids=cent,
        assignments=labels,
        inertia_history=history,
        n_iter=n_iter,
        had_empty_iteration=bool(empty_seen.any()),
    )


def silhouette(points, assignments) -> SilhouetteReport:
    """Per-point s(i) = (b - a) / max(a, b); singleton clusters score 0."""
    points = np.ascontiguousarray(points, dtype=np.float64)
    labels = np.ascontiguousarray(assignments, dtype=np.int64)
    if labels.shape[0] != points.shape[0]:
        raise ShapeMismatchError("one label per point required")
    k = int(labels.max()) + 1 if labels.size else 0
    if np.unique(labels).size < 2:
        raise SingleClusterError("silhouette needs at least two clusters")
    s = silhouette_samples(points, labels, k)
    per_cluster = tuple(
        tuple(sorted(float(v) for v in s[labels == c])) for c in range(k)
    )
    return SilhouetteReport(
        samples=s, labels=labels, per_cluster=per_cluster, mean=float(s.mean())
    )


def radar_data(model: ClusterModel, points) -> dict:
    """Per-sector radar payload: member polylines, centroid, dispersion.

    Axis order is the catalog's cluster-feature order; dispersion is the
    mean over axes of the member standard deviation.
    """
    points = np.ascontiguousarray(points, dtype=np.float64)
    sectors = []
    for c, name in enumerate(model.sector_names):
        rows = model.members(c)
        member_values = points[rows]
        # a constant axis has exactly zero spread; skip the float dust
        stds = np.where(
            member_values.max(axis=0) == member_values.min(axis=0),
            0.0,
            np.std(member_values, axis=0),
        )
        dispersion = float(np.mean(stds))
        sectors.append(
            {
                "sector": name,
                "members": [
                    {"da_id": model.da_ids[i], "values": [float(v) for v in points[i]]}
                    for i in rows
                ],
                "centroid": [float(v) for v in model.final_centroids[c]],
                "dispersion": dispersion,
            }
        )
    return {"axes": list(model.feature_ids), "sectors": sectors}


def silhouette_payload(model: ClusterModel, report: SilhouetteReport) -> dict:
    negatives = [
        {"da_id": model.da_ids[i], "sector": model.sector_names[int(report.labels[i])],
         "s": float(report.samples[i])}
        for i in np.flatnonzero(report.samples < 0)
    ]
    return {
        "mean": report.mean,
        "per_cluster": [
            {"sector": model.sector_names[c], "sorted_scores": list(scores)}
            for c, scores in enumerate(report.per_cluster)
        ],
        "negatives": negatives,
    }


def init_from_da_ids(points, da_ids, triple) -> np.ndarray:
    """Initial centroids = the processed feature rows of three chosen DAs."""
    if len(triple) != 3:
        raise ValidationError(f"expected exactly 3 representative DAs, got {len(triple)}")
    index = {da: i for i, da in enumerate(da_ids)}
    rows = []
    for da in triple:
        if da not in index:
            raise ValidationError(f"representative DA {da!r} not in panel")
        rows.append(points[index[da]])
    return np.vstack(rows)


def write_assignments(model: ClusterModel, path: str | Path) -> None:
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["da_id", "sector"])
        for da, a in zip(model.da_ids, model.assignments):
            writer.writerow([da, model.sector_names[int(a)]])
