"""Indicator catalog and census panel data model, loading and merging.

Missing cells are represented as NaN throughout; a cell may only be
missing for indicators flagged imputable.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from .errors import ParseError, SchemaError, ValidationError

POLARITIES = ("benefit", "cost")


@dataclass(frozen=True)
class Indicator:
    """One catalog entry; cost polarity means the scaled value is inverted."""

    id: str
    label: str
    polarity: str
    impute: bool = False
    cluster_feature: bool = False
    index_member: bool = True
    source: str = ""

    def __post_init__(self):
        if not self.id:
            raise ValidationError("indicator id must be non-empty")
        if self.polarity not in POLARITIES:
            raise ValidationError(
                f"indicator {self.id!r}: polarity must be one of {POLARITIES}, got {self.polarity!r}"
            )


@dataclass(frozen=True)
class IndicatorCatalog:
    indicators: tuple[Indicator, ...]
    version: str = "1"

    def __post_init__(self):
        ids = [ind.id for ind in self.indicators]
        dupes = {i for i in ids if ids.count(i) > 1}
        if dupes:
            raise ValidationError(f"duplicate indicator ids: {sorted(dupes)}")
        if not any(ind.cluster_feature for ind in self.indicators):
            raise ValidationError("catalog needs at least one cluster_feature indicator")

    @property
    def ids(self) -> list[str]:
        return [ind.id for ind in self.indicators]

    @property
    def index_ids(self) -> list[str]:
        return [ind.id for ind in self.indicators if ind.index_member]

    @property
    def cluster_feature_ids(self) -> list[str]:
        return [ind.id for ind in self.indicators if ind.cluster_feature]

    def column(self, indicator_id: str) -> int:
        return self.ids.index(indicator_id)

    def fingerprint(self) -> str:
        """Hash of ids, ordering and flags; stamped on every derived artifact."""
        payload = json.dumps(
            [
                [i.id, i.polarity, i.impute, i.cluster_feature, i.index_member]
                for i in self.indicators
            ],
            separators=(",", ":"),
        )
        return hashlib.sha256(payload.encode()).hexdigest()[:16]

    def to_json(self) -> list[dict]:
        return [
            {
                "id": i.id,
                "label": i.label,
                "polarity": i.polarity,
                "impute": i.impute,
                "cluster_feature": i.cluster_feature,
                "index_member": i.index_member,
                "source": i.source,
            }
            for i in self.indicators
        ]


@dataclass(frozen=True)
class Panel:
    """Raw values for one census year: rows follow da_ids, columns the catalog."""

    year: int
    da_ids: tuple[str, ...]
    values: np.ndarray
    catalog: IndicatorCatalog

    def __post_init__(self):
        expected = (len(self.da_ids), len(self.catalog.indicators))
        if self.values.shape != expected:
            raise ValidationError(
                f"panel {self.year}: matrix shape {self.values.shape} != {expected}"
            )
        self.values.setflags(write=False)

    def validate_missingness(self) -> None:
        for col, ind in enumerate(self.catalog.indicators):
            if ind.impute:
                continue
            bad = np.flatnonzero(np.isnan(self.values[:, col]))
            if bad.size:
                raise ValidationError(
                    f"panel {self.year}: missing value in non-imputable column "
                    f"{ind.id!r} (rows {[self.da_ids[i] for i in bad[:5]]})"
                )


@dataclass(frozen=True)
class PanelSet:
    panels: dict[int, Panel]
    catalog: IndicatorCatalog
    fingerprint: str = field(default="")

    def __post_init__(self):
        object.__setattr__(self, "fingerprint", self.catalog.fingerprint())
        ids = None
        for year, panel in self.panels.items():
            if panel.catalog.fingerprint() != self.fingerprint:
                raise ValidationError(f"panel {year} built against a different catalog")
            if ids is None:
                ids = panel.da_ids
            elif panel.da_ids != ids:
                raise ValidationError(f"panel {year} has a different DA id ordering")

    @property
    def years(self) -> list[int]:
        return sorted(self.panels)

    @property
    def da_ids(self) -> tuple[str, ...]:
        return self.panels[self.years[0]].da_ids


def _catalog_from_text(raw: str, origin: str) -> IndicatorCatalog:
    try:
        doc = json.loads(raw)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{origin}: not valid JSON ({exc})") from exc
    if not isinstance(doc, list):
        raise ParseError(f"{origin}: catalog must be a JSON array of objects")
    indicators = []
    for i, entry in enumerate(doc):
        if not isinstance(entry, dict) or "id" not in entry:
            raise ParseError(f"{origin}: entry {i} is not an object with an 'id'")
        indicators.append(
            Indicator(
                id=str(entry["id"]),
                label=str(entry.get("label", entry["id"])),
                polarity=entry.get("polarity", "benefit"),
                impute=bool(entry.get("impute", False)),
                cluster_feature=bool(entry.get("cluster_feature", False)),
                index_member=bool(entry.get("index_member", True)),
                source=str(entry.get("source", "")),
            )
        )
    return IndicatorCatalog(indicators=tuple(indicators))


def load_catalog(path: str | Path) -> IndicatorCatalog:
    """Load and validate a JSON indicator catalog."""
    return _catalog_from_text(Path(path).read_text(encoding="utf-8"), str(path))


def default_catalog() -> IndicatorCatalog:
    """The catalog shipped with the engine (13 index indicators + density)."""
    raw = (
        resources.files("vitality.resources")
        .joinpath("default_catalog.json")
        .read_text(encoding="utf-8")
    )
    return _catalog_from_text(raw, "default_catalog.json")


def write_catalog(catalog: IndicatorCatalog, path: str | Path) -> None:
    Path(path).write_text(
        json.dumps(catalog.to_json(), indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def _format_cell(v: float) -> str:
    if np.isnan(v):
        return ""
    return repr(float(v))


def load_panel(path: str | Path, catalog: IndicatorCatalog, year: int) -> Panel:
    """Load one census-year CSV; empty cells become NaN (imputable columns only)."""
    text = Path(path).read_text(encoding="utf-8")
    return _parse_panel(text, catalog, year, str(path))


def _parse_panel(text: str, catalog: IndicatorCatalog, year: int, origin: str) -> Panel:
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ParseError(f"{origin}: empty file") from None
    if not header or header[0] != "da_id":
        raise SchemaError(f"{origin}: first column must be 'da_id', got {header[:1]}")
    known = set(catalog.ids)
    unknown = [c for c in header[1:] if c not in known]
    if unknown:
        raise SchemaError(f"{origin}: columns not in catalog: {unknown}")
    missing_cols = [c for c in catalog.ids if c not in header[1:]]
    if missing_cols:
        raise SchemaError(f"{origin}: catalog columns absent from file: {missing_cols}")
    col_of = {name: i + 1 for i, name in enumerate(header[1:])}

    da_ids = []
    rows = []
    for lineno, rec in enumerate(reader, start=2):
        if not rec:
            continue
        if len(rec) != len(header):
            raise ParseError(f"{origin}:{lineno}: expected {len(header)} cells, got {len(rec)}")
        da_ids.append(rec[0])
        row = np.empty(len(catalog.indicators), dtype=np.float64)
        for j, ind in enumerate(catalog.indicators):
            cell = rec[col_of[ind.id]]
            if cell == "":
                row[j] = np.nan
            else:
                try:
                    row[j] = float(cell)
                except ValueError:
                    raise ParseError(
                        f"{origin}:{lineno}: non-numeric cell {cell!r} in column {ind.id!r}"
                    ) from None
        rows.append(row)
    if not da_ids:
        raise ParseError(f"{origin}: no data rows")
    if len(set(da_ids)) != len(da_ids):
        raise ValidationError(f"{origin}: duplicate da_id rows")
    panel = Panel(
        year=year,
        da_ids=tuple(da_ids),
        values=np.vstack(rows),
        catalog=catalog,
    )
    panel.validate_missingness()
    return panel


def write_panel(panel: Panel, path: str | Path) -> None:
    """Write a panel CSV that reloads bitwise-identically (repr round-trip)."""
    with Path(path).open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["da_id"] + panel.catalog.ids)
        for i, da in enumerate(panel.da_ids):
            writer.writerow([da] + [_format_cell(v) for v in panel.values[i]])


def merge_panels(panels: list[Panel]) -> PanelSet:
    """Merge single-year panels into a PanelSet over the sorted DA id union.

    A DA absent from one year gets an all-NaN row only when every indicator
    is imputable; otherwise the gap is a validation error.
    """
    if not panels:
        raise ValidationError("merge_panels needs at least one panel")
    catalog = panels[0].catalog
    fp = catalog.fingerprint()
    for p in panels:
        if p.catalog.fingerprint() != fp:
            raise ValidationError(
                f"panel {p.year} uses a different catalog than panel {panels[0].year}"
            )
    years = [p.year for p in panels]
    if len(set(years)) != len(years):
        raise ValidationError(f"duplicate census years: {sorted(years)}")

    all_ids = sorted(set().union(*[set(p.da_ids) for p in panels]))
    non_imputable = [ind.id for ind in catalog.indicators if not ind.impute]
    out = {}
    for p in panels:
        if set(p.da_ids) != set(all_ids):
            absent = sorted(set(all_ids) - set(p.da_ids))
            if non_imputable:
                raise ValidationError(
                    f"panel {p.year}: DAs {absent[:5]} absent and columns "
                    f"{non_imputable[:3]} are not imputable"
                )
        index = {da: i for i, da in enumerate(p.da_ids)}
        values = np.full((len(all_ids), len(catalog.indicators)), np.nan)
        for i, da in enumerate(all_ids):
            if da in index:
                values[i] = p.values[index[da]]
        out[p.year] = Panel(year=p.year, da_ids=tuple(all_ids), values=values, catalog=catalog)
    return PanelSet(panels=out, catalog=catalog)
