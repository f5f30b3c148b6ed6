"""Current vitality index per DA, its 8-bin histogram, and map exports."""

from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .data import IndicatorCatalog, _format_cell
from .errors import CatalogMismatchError, GeometryMissingError, ValidationError
from .geo import GeoIndex
from .preprocess import ProcessedPanel

# 8-step fill ramp, darkest first: lower index = lower vitality
RAMP = (
    "#08306b",
    "#08519c",
    "#2171b5",
    "#4292c6",
    "#6baed6",
    "#9ecae1",
    "#c6dbef",
    "#f7fbff",
)


@dataclass(frozen=True)
class Histogram8:
    counts: tuple[int, ...]
    edges: tuple[float, ...]
    degenerate: bool

    def __post_init__(self):
        if len(self.counts) != 8 or len(self.edges) != 9:
            raise ValidationError("histogram must have 8 bins and 9 edges")


@dataclass(frozen=True)
class CviResult:
    year: int
    da_ids: tuple[str, ...]
    cvis: np.ndarray
    bins: np.ndarray
    histogram: Histogram8
    matrix: np.ndarray  # processed values, full catalog order
    catalog: IndicatorCatalog

    def __post_init__(self):
        if self.cvis.min() < 0.0 or self.cvis.max() > 1.0:
            raise ValidationError("cvi values must lie in [0, 1]")
        if int(sum(self.histogram.counts)) != len(self.da_ids):
            raise ValidationError("histogram counts must cover every DA")
        self.cvis.setflags(write=False)
        self.bins.setflags(write=False)

    def breakdown(self, i: int) -> dict[str, float]:
        """Index-member indicator values for DA row i, in catalog order."""
        return {
            ind.id: float(self.matrix[i, j])
            for j, ind in enumerate(self.catalog.indicators)
            if ind.index_member
        }


def histogram8(cvis) -> tuple[Histogram8, np.ndarray]:
    """Equal-width 8-bin histogram over the observed range.

    The maximum value lands in bin 7; a constant vector degenerates to one
    zero-width bin holding everything, flagged. Returns the histogram and
    the per-value bin indices.
    """
    values = np.asarray(cvis, dtype=np.float64)
    if values.size < 1:
        raise ValidationError("histogram needs at least one value")
    lo = float(values.min())
    hi = float(values.max())
    if lo == hi:
        counts = (values.size,) + (0,) * 7
        return (
            Histogram8(counts=counts, edges=(lo,) * 9, degenerate=True),
            np.zeros(values.size, dtype=np.int64),
        )
    bins = np.minimum((values - lo) / (hi - lo) * 8.0, 7.0).astype(np.int64)
    counts = np.bincount(bins, minlength=8)
    edges = np.linspace(lo, hi, 9)
    return (
        Histogram8(counts=tuple(int(c) for c in counts), edges=tuple(edges),
                   degenerate=False),
        bins,
    )


def compute_cvi(panel: ProcessedPanel, catalog: IndicatorCatalog) -> CviResult:
    """Per-DA unweighted mean of the index-member processed indicators."""
    if panel.catalog.fingerprint() != catalog.fingerprint():
        raise CatalogMismatchError("panel was processed under a different catalog")
    cols = [j for j, ind in enumerate(catalog.indicators) if ind.index_member]
    if not cols:
        raise CatalogMismatchError("catalog has no index-member indicators")
    sub = panel.matrix[:, cols]
    cvis = sub.sum(axis=1) / len(cols)
    hist, bins = histogram8(cvis)
    return CviResult(
        year=panel.year,
        da_ids=panel.da_ids,
        cvis=cvis,
        bins=bins,
        histogram=hist,
        matrix=panel.matrix,
        catalog=catalog,
    )


def histogram_payload(result: CviResult) -> dict:
    return {
        "year": result.year,
        "counts": list(result.histogram.counts),
        "edges": list(result.histogram.edges),
        "degenerate": result.histogram.degenerate,
        "colors": list(RAMP),
    }


def export_choropleth(result: CviResult, geo: GeoIndex, on_missing="error",
                      provenance=None) -> dict:
    """GeoJSON FeatureCollection carrying cvi/bin/fill/indicators per DA.

    on_missing: "error" raises listing DAs without geometry; "null" keeps
    them as features with null geometry so table views stay complete.
    provenance: optional bool matrix aligned with result.matrix; when given,
    each feature carries per-indicator observed/imputed flags.
    """
    missing = [da for da in result.da_ids if da not in geo.polygons]
    if missing and on_missing == "error":
        raise GeometryMissingError(missing)
    index_cols = [
        (j, ind.id)
        for j, ind in enumerate(result.catalog.indicators)
        if ind.index_member
    ]
    features = []
    for i, da_id in enumerate(result.da_ids):
        props = {
            "DAUID": da_id,
            "cvi": float(result.cvis[i]),
            "bin": int(result.bins[i]),
            "fill": RAMP[int(result.bins[i])],
            "indicators": result.breakdown(i),
        }
        if provenance is not None:
            props["provenance"] = {
                ind_id: "imputed" if provenance[i, j] else "observed"
                for j, ind_id in index_cols
            }
        poly = geo.polygons.get(da_id)
        if poly is None:
            geometry = None
        elif len(poly.parts) == 1:
            geometry = {
                "type": "Polygon",
                "coordinates": [r.tolist() for r in poly.parts[0]],
            }
        else:
            geometry = {
                "type": "MultiPolygon",
                "coordinates": [[r.tolist() for r in part] for part in poly.parts],
            }
        features.append({"type": "Feature", "properties": props, "geometry": geometry})
    labels = {
        ind.id: ind.label for ind in result.catalog.indicators if ind.index_member
    }
    return {"type": "FeatureCollection", "labels": labels, "features": features}


def export_cvi_csv(result: CviResult, path: str | Path) -> None:
    """CSV rows: da_id, cvi, bin, then the index-member indicator columns."""
    index_ids = result.catalog.index_ids
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["da_id", "cvi", "bin"] + index_ids)
        for i, da_id in enumerate(result.da_ids):
            row = result.breakdown(i)
            writer.writerow(
                [da_id, repr(float(result.cvis[i])), int(result.bins[i])]
                + [_format_cell(row[c]) for c in index_ids]
            )
