"""Deterministic synthetic city: 87 dissemination areas with planted sector
structure, four census years with planted trends, a rectangular polygon
tiling, and an address fixture consistent with the business counts.

The generator is the oracle substrate for end-to-end tests. Draw order is
part of the contract: indicators are sampled in catalog order, sectors in
SECTORS order, years in ascending order, so any change to the stream is a
breaking change.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Mapping

import numpy as np

from .data import (
    IndicatorCatalog,
    Panel,
    PanelSet,
    default_catalog,
    write_catalog,
    write_panel,
)
from .errors import ConfigError
from .geo import DAPolygon, GeoIndex, write_geojson
from .preprocess import preprocess_panel

SECTORS = ("Urban", "Residential", "Commercial")
CENSUS_YEARS = (2006, 2011, 2016, 2021)

# raw clip bounds per indicator
RANGES: dict[str, tuple[float, float]] = {
    "repairs_minor": (0.0, 60.0),
    "repairs_major": (0.0, 30.0),
    "deprivation_material": (1.0, 5.0),
    "deprivation_social": (1.0, 5.0),
    "owner_housing_cost": (600.0, 2000.0),
    "renter_housing_cost": (400.0, 1500.0),
    "unoccupied_rate": (0.0, 25.0),
    "renovation_value": (5000.0, 80000.0),
    "construction_value": (50000.0, 400000.0),
    "building_value": (80000.0, 400000.0),
    "vacant_buildings": (0.0, 20.0),
    "youth_proportion": (0.05, 0.65),
    "business_count": (0.0, 120.0),
    "population_density": (100.0, 6000.0),
}

DEFAULT_MEANS: dict[str, dict[str, float]] = {
    "Urban": {
        "repairs_minor": 28.0,
        "repairs_major": 9.0,
        "deprivation_material": 3.4,
        "deprivation_social": 3.6,
        "owner_housing_cost": 1150.0,
        "renter_housing_cost": 820.0,
        "unoccupied_rate": 9.0,
        "renovation_value": 32000.0,
        "construction_value": 210000.0,
        "building_value": 270000.0,
        "vacant_buildings": 6.0,
        "youth_proportion": 0.38,
        "business_count": 25.0,
        "population_density": 3200.0,
    },
    "Residential": {
        "repairs_minor": 20.0,
        "repairs_major": 5.0,
        "deprivation_material": 2.4,
        "deprivation_social": 2.6,
        "owner_housing_cost": 1250.0,
        "renter_housing_cost": 900.0,
        "unoccupied_rate": 5.0,
        "renovation_value": 24000.0,
        "construction_value": 160000.0,
        "building_value": 230000.0,
        "vacant_buildings": 2.0,
        "youth_proportion": 0.50,
        "business_count": 8.0,
        "population_density": 1400.0,
    },
    "Commercial": {
        "repairs_minor": 24.0,
        "repairs_major": 7.0,
        "deprivation_material": 3.0,
        "deprivation_social": 3.1,
        "owner_housing_cost": 1050.0,
        "renter_housing_cost": 760.0,
        "unoccupied_rate": 12.0,
        "renovation_value": 40000.0,
        "construction_value": 260000.0,
        "building_value": 250000.0,
        "vacant_buildings": 8.0,
        "youth_proportion": 0.30,
        "business_count": 70.0,
        "population_density": 1100.0,
    },
}

DEFAULT_SIGMAS: dict[str, dict[str, float]] = {
    "Urban": {
        "repairs_minor": 6.0,
        "repairs_major": 2.5,
        "deprivation_material": 0.5,
        "deprivation_social": 0.5,
        "owner_housing_cost": 110.0,
        "renter_housing_cost": 90.0,
        "unoccupied_rate": 2.5,
        "renovation_value": 7000.0,
        "construction_value": 40000.0,
        "building_value": 25000.0,
        "vacant_buildings": 2.0,
        "youth_proportion": 0.04,
        "business_count": 5.0,
        "population_density": 300.0,
    },
    "Residential": {
        "repairs_minor": 5.0,
        "repairs_major": 2.0,
        "deprivation_material": 0.4,
        "deprivation_social": 0.4,
        "owner_housing_cost": 100.0,
        "renter_housing_cost": 80.0,
        "unoccupied_rate": 1.5,
        "renovation_value": 6000.0,
        "construction_value": 35000.0,
        "building_value": 20000.0,
        "vacant_buildings": 1.2,
        "youth_proportion": 0.04,
        "business_count": 3.0,
        "population_density": 250.0,
    },
    "Commercial": {
        "repairs_minor": 6.0,
        "repairs_major": 2.5,
        "deprivation_material": 0.5,
        "deprivation_social": 0.5,
        "owner_housing_cost": 100.0,
        "renter_housing_cost": 85.0,
        "unoccupied_rate": 3.0,
        "renovation_value": 9000.0,
        "construction_value": 50000.0,
        "building_value": 25000.0,
        "vacant_buildings": 2.5,
        "youth_proportion": 0.04,
        "business_count": 8.0,
        "population_density": 250.0,
    },
}

# raw units added per unit of the sector-year shape below (sign follows
# polarity, so a positive slope always moves vitality, not the raw value)
DEFAULT_TRENDS: dict[str, float] = {
    "repairs_minor": 4.5,
    "repairs_major": 1.8,
    "deprivation_material": 0.36,
    "deprivation_social": 0.36,
    "owner_housing_cost": 75.0,
    "renter_housing_cost": 60.0,
    "unoccupied_rate": 2.4,
    "renovation_value": 7500.0,
    "construction_value": 36000.0,
    "building_value": 18000.0,
    "vacant_buildings": 1.5,
    "youth_proportion": 0.03,
    "business_count": 0.0,
    "population_density": 0.0,
}

# per-sector vitality offsets by census step: linear rise, then the shared
# 2016-to-2021 dip
SECTOR_SHAPE: dict[str, tuple[float, ...]] = {
    "Urban": (0.0, 1.0, 2.0, -1.5),
    "Residential": (0.0, 1.0, 2.0, -1.0),
    "Commercial": (0.0, 1.2, 2.4, -1.5),
}


@dataclass(frozen=True)
class SynthConfig:
    seed: int = 42
    n_das: int = 87
    proportions: tuple[float, float, float] = (0.40, 0.34, 0.26)
    years: tuple[int, ...] = CENSUS_YEARS
    missingness: float = 0.05
    resilience: float = 0.12
    grid_cols: int = 10
    cell_size: float = 0.01
    origin: tuple[float, float] = (-72.78, 46.54)
    sector_means: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: DEFAULT_MEANS)
    sector_sigmas: Mapping[str, Mapping[str, float]] = field(
        default_factory=lambda: DEFAULT_SIGMAS)
    trend_slopes: Mapping[str, float] = field(
        default_factory=lambda: DEFAULT_TRENDS)
    sector_shape: Mapping[str, tuple[float, ...]] = field(
        default_factory=lambda: SECTOR_SHAPE)

    def __post_init__(self):
        if self.n_das < len(SECTORS):
            raise ConfigError(f"n_das must be >= {len(SECTORS)}, got {self.n_das}")
        if len(self.proportions) != len(SECTORS):
            raise ConfigError("one proportion per sector required")
        if any(p <= 0 for p in self.proportions):
            raise ConfigError("sector proportions must be positive")
        if abs(sum(self.proportions) - 1.0) > 1e-9:
            raise ConfigError(f"proportions sum to {sum(self.proportions)}, not 1")
        if not 0.0 <= self.missingness <= 0.3:
            raise ConfigError(f"missingness {self.missingness} outside [0, 0.3]")
        if not 0.0 <= self.resilience < 1.0:
            raise ConfigError(f"resilience {self.resilience} outside [0, 1)")
        if len(self.years) < 2 or any(
            b <= a for a, b in zip(self.years, self.years[1:])
        ):
            raise ConfigError("years must strictly increase (need >= 2)")
        for sector in SECTORS:
            steps = self.sector_shape.get(sector, ())
            if len(steps) < len(self.years):
                raise ConfigError(
                    f"sector_shape[{sector!r}] needs one step per year"
                )
        if self.grid_cols < 1:
            raise ConfigError("grid_cols must be >= 1")
        if self.cell_size <= 0:
            raise ConfigError("cell_size must be positive")
        ids = set(RANGES)
        for sector in SECTORS:
            for table, name in ((self.sector_means, "means"),
                                (self.sector_sigmas, "sigmas")):
                if sector not in table or set(table[sector]) != ids:
                    raise ConfigError(
                        f"sector_{name} must cover every indicator for {sector!r}"
                    )
        if any(s <= 0 for sec in self.sector_sigmas.values() for s in sec.values()):
            raise ConfigError("sigmas must be positive")
        if self.trend_slopes.get("business_count", 0.0) != 0.0:
            raise ConfigError(
                "business_count cannot trend: the address fixture holds the "
                "registry fixed across years"
            )


@dataclass(frozen=True)
class SynthCity:
    config: SynthConfig
    catalog: IndicatorCatalog
    panels: PanelSet
    geo: GeoIndex
    labels: dict[str, str]  # da_id -> sector
    medoids: tuple[str, ...]  # one representative DA per sector, SECTORS order
    addresses: dict[str, tuple[float, float]]
    planted_counts: dict[str, int]


def sector_counts(n: int, proportions) -> list[int]:
    """Largest-remainder apportionment; ties favour the earlier sector."""
    quotas = [n * p for p in proportions]
    counts = [int(np.floor(q)) for q in quotas]
    order = sorted(range(len(quotas)),
                   key=lambda i: (counts[i] - quotas[i], i))
    for i in order[: n - sum(counts)]:
        counts[i] += 1
    return counts


def _da_ids(n: int) -> tuple[str, ...]:
    return tuple(f"{24360001 + i}" for i in range(n))


def _cell_ring(config: SynthConfig, index: int) -> np.ndarray:
    row, col = divmod(index, config.grid_cols)
    x0 = config.origin[0] + col * config.cell_size
    y0 = config.origin[1] + row * config.cell_size
    x1 = x0 + config.cell_size
    y1 = y0 + config.cell_size
    return np.array(
        [[x0, y0], [x1, y0], [x1, y1], [x0, y1], [x0, y0]], dtype=np.float64
    )


def _draw_column(rng, config, ind, sector_slices, year_index) -> np.ndarray:
    """One year of one indicator.

    A resilient fraction of each sector skips the year shift entirely, so
    the column's extremes hold steady while the bulk moves; without that
    anchor, per-year rescaling downstream would erase any shared trend.
    """
    lo, hi = RANGES[ind.id]
    sign = -1.0 if ind.polarity == "cost" else 1.0
    out = np.empty(config.n_das, dtype=np.float64)
    for sector, rows in sector_slices:
        size = rows.stop - rows.start
        shift = (config.sector_shape[sector][year_index]
                 * config.trend_slopes[ind.id] * sign)
        shifts = np.where(rng.uniform(size=size) < config.resilience,
                          0.0, shift)
        out[rows] = rng.normal(
            config.sector_means[sector][ind.id] + shifts,
            config.sector_sigmas[sector][ind.id],
        )
    return np.clip(out, lo, hi)


def generate(config: SynthConfig) -> SynthCity:
    """Build the full city from one seeded stream."""
    catalog = default_catalog()
    rng = np.random.default_rng(config.seed)
    da_ids = _da_ids(config.n_das)

    counts = sector_counts(config.n_das, config.proportions)
    sector_slices = []
    start = 0
    for sector, c in zip(SECTORS, counts):
        sector_slices.append((sector, slice(start, start + c)))
        start += c
    labels = {}
    for sector, rows in sector_slices:
        for i in range(rows.start, rows.stop):
            labels[da_ids[i]] = sector

    # the business registry is drawn once and held fixed across years
    bus_col = catalog.column("business_count")
    bus_ind = catalog.indicators[bus_col]
    business = np.rint(_draw_column(rng, config, bus_ind, sector_slices, 0))
    business = np.clip(business, 0.0, RANGES["business_count"][1])
    planted_counts = {da: int(v) for da, v in zip(da_ids, business)}

    imputable = [j for j, ind in enumerate(catalog.indicators) if ind.impute]
    panels = {}
    for year_index, year in enumerate(config.years):
        values = np.empty((config.n_das, len(catalog.indicators)))
        for j, ind in enumerate(catalog.indicators):
            if j == bus_col:
                values[:, j] = business
            else:
                values[:, j] = _draw_column(rng, config, ind, sector_slices,
                                            year_index)
        n_missing = round(config.missingness * config.n_das * len(imputable))
        if n_missing:
            flat = rng.choice(config.n_das * len(imputable), n_missing,
                              replace=False)
            for cell in flat:
                values[cell // len(imputable), imputable[cell % len(imputable)]] = np.nan
        panels[year] = Panel(year=year, da_ids=da_ids, values=values,
                             catalog=catalog)

    polygons = {
        da: DAPolygon(da_id=da, parts=((_cell_ring(config, i),),))
        for i, da in enumerate(da_ids)
    }
    geo = GeoIndex(polygons=polygons)

    addresses = {}
    margin = 0.1 * config.cell_size
    for i, da in enumerate(da_ids):
        ring = _cell_ring(config, i)
        x0, y0 = ring[0]
        for seq in range(planted_counts[da]):
            lon = x0 + margin + rng.uniform(0.0, config.cell_size - 2 * margin)
            lat = y0 + margin + rng.uniform(0.0, config.cell_size - 2 * margin)
            addresses[f"{seq + 1} Grid Street, DA {da}"] = (lon, lat)

    latest = preprocess_panel(panels[config.years[-1]], k=5)
    feature_cols = [j for j, ind in enumerate(catalog.indicators)
                    if ind.cluster_feature]
    points = latest.matrix[:, feature_cols]
    medoids = []
    for sector, rows in sector_slices:
        block = points[rows]
        dist = np.sqrt(
            ((block[:, None, :] - block[None, :, :]) ** 2).sum(axis=2)
        )
        medoids.append(da_ids[rows.start + int(np.argmin(dist.sum(axis=1)))])

    return SynthCity(
        config=config,
        catalog=catalog,
        panels=PanelSet(panels=panels, catalog=catalog),
        geo=geo,
        labels=labels,
        medoids=tuple(medoids),
        addresses=addresses,
        planted_counts=planted_counts,
    )


def write_city(city: SynthCity, out_dir: str | Path) -> list[Path]:
    """Write every artifact; returns the paths in a fixed order."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    path = out / "catalog.json"
    write_catalog(city.catalog, path)
    paths.append(path)

    for year in city.panels.years:
        path = out / f"panel_{year}.csv"
        write_panel(city.panels.panels[year], path)
        paths.append(path)

    path = out / "boundaries.geojson"
    write_geojson(city.geo, path)
    paths.append(path)

    path = out / "addresses.json"
    path.write_text(
        json.dumps(
            {a: [lon, lat] for a, (lon, lat) in city.addresses.items()},
            indent=2,
            sort_keys=True,
        )
        + "\n",
        encoding="utf-8",
    )
    paths.append(path)

    path = out / "labels.csv"
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["da_id", "sector", "medoid"])
        for da in sorted(city.labels):
            writer.writerow(
                [da, city.labels[da], int(da in city.medoids)]
            )
    paths.append(path)
    return paths


def load_labels(path: str | Path) -> tuple[dict[str, str], tuple[str, ...]]:
    """Read labels.csv back: (da_id -> sector, medoids in SECTORS order)."""
    labels = {}
    flagged = []
    with Path(path).open(encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if header != ["da_id", "sector", "medoid"]:
            raise ConfigError(f"{path}: unexpected header {header}")
        for da, sector, flag in reader:
            labels[da] = sector
            if flag == "1":
                flagged.append((da, sector))
    order = {sector: i for i, sector in enumerate(SECTORS)}
    flagged.sort(key=lambda pair: order.get(pair[1], len(order)))
    return labels, tuple(da for da, _ in flagged)
