"""Snapshot pipeline: turns raw city inputs into a served artifact directory.

Each stage writes its artifacts atomically (staged in a scratch directory,
moved into place only on success) and then updates manifest.json, which
records the configuration, the package version, and a content hash for
every input and output file.  Because every stage derives what it needs
from the input files with a seed bound to the stage name, running stages
one at a time in dependency order yields a snapshot byte-identical to one
full run.
"""
from __future__ import annotations

import hashlib
import json
import re
import shutil
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path

import numpy as np

from . import __version__
from .cluster import (
    ClusterModel,
    init_from_da_ids,
    kmeans_fixed,
    radar_data,
    silhouette,
    silhouette_payload,
    write_assignments,
)
from .cvi import compute_cvi, export_choropleth, export_cvi_csv, histogram_payload
from .data import IndicatorCatalog, default_catalog, load_catalog, load_panel
from .errors import ConfigError, MissingInputError, StageError, VitalityError
from .explain.report import build_bundle, generate_report, write_bundle
from .explain.surrogate import explain_clusters, explain_cvi
from .geo import FixtureGeocoder, assign_addresses, load_geojson
from .lvi import compute_lvi, forecast, lvi_timeseries_payload
from .preprocess import preprocess_panel, write_processed
from .synth import load_labels

STAGE_ORDER = (
    "ingest",
    "preprocess",
    "cvi",
    "cluster",
    "lvi",
    "importance",
    "shap",
    "report",
)

MANIFEST_VERSION = "1"

_PANEL_NAME = re.compile(r"panel_(\d{4})\.csv$")


@dataclass(frozen=True)
class RunConfig:
    """Everything a pipeline run needs: input paths, knobs, seed, output dir."""

    panels: dict[int, Path]
    boundaries: Path
    addresses: Path
    out: Path
    catalog: Path | None = None
    labels: Path | None = None
    seed: int = 42
    knn_k: int = 5
    n_trees: int = 500
    init_das: tuple[str, str, str] | None = None
    target_year: int = 2026

    def __post_init__(self):
        if not self.panels:
            raise ConfigError("at least one panel file is required")
        if self.knn_k < 1:
            raise ConfigError(f"knn_k must be >= 1, got {self.knn_k}")
        if self.n_trees < 1:
            raise ConfigError(f"n_trees must be >= 1, got {self.n_trees}")
        if self.target_year <= max(self.panels):
            raise ConfigError(
                f"target year {self.target_year} must follow the last "
                f"panel year {max(self.panels)}"
            )
        if self.init_das is not None:
            if len(self.init_das) != 3 or len(set(self.init_das)) != 3:
                raise ConfigError("init_das must name three distinct DAs")

    @classmethod
    def from_input_dir(cls, input_dir: str | Path, **overrides) -> "RunConfig":
        """Discover the standard file layout written by the synth command."""
        root = Path(input_dir)
        if not root.is_dir():
            raise ConfigError(f"input directory not found: {root}")
        panels = {}
        for path in sorted(root.glob("panel_*.csv")):
            match = _PANEL_NAME.search(path.name)
            if match:
                panels[int(match.group(1))] = path
        if not panels:
            raise ConfigError(f"no panel_<year>.csv files in {root}")
        fields = {
            "panels": panels,
            "boundaries": root / "boundaries.geojson",
            "addresses": root / "addresses.json",
            "out": Path("snapshot"),
        }
        catalog = root / "catalog.json"
        if catalog.exists():
            fields["catalog"] = catalog
        labels = root / "labels.csv"
        if labels.exists():
            fields["labels"] = labels
        fields.update(overrides)
        return cls(**fields)

    def input_files(self) -> dict[str, Path]:
        files = {f"panel_{year}": path for year, path in self.panels.items()}
        files["boundaries"] = self.boundaries
        files["addresses"] = self.addresses
        if self.catalog is not None:
            files["catalog"] = self.catalog
        if self.labels is not None:
            files["labels"] = self.labels
        return files

    def check_inputs(self) -> None:
        for path in self.input_files().values():
            if not Path(path).is_file():
                raise MissingInputError(path)

    def manifest_dict(self) -> dict:
        return {
            "panels": {str(y): str(p) for y, p in self.panels.items()},
            "boundaries": str(self.boundaries),
            "addresses": str(self.addresses),
            "catalog": None if self.catalog is None else str(self.catalog),
            "labels": None if self.labels is None else str(self.labels),
            "seed": self.seed,
            "knn_k": self.knn_k,
            "n_trees": self.n_trees,
            "init_das": None if self.init_das is None else list(self.init_das),
            "target_year": self.target_year,
        }


def stage_seed(base: int, stage: str) -> int:
    """Per-stage generator seed: stable hash of the base seed and stage name."""
    digest = hashlib.sha256(f"{base}:{stage}".encode("utf-8")).digest()
    return int.from_bytes(digest[:8], "big")


def _sha256(path: Path) -> str:
    return hashlib.sha256(Path(path).read_bytes()).hexdigest()


def _dump_json(obj, path: Path) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n",
                    encoding="utf-8")


class PipelineState:
    """Lazily computed shared state for one run.

    A full run reuses every intermediate across stages; a standalone stage
    command recomputes just the intermediates it touches.  Both paths are
    deterministic, so the artifacts they write are byte-identical.
    """

    def __init__(self, config: RunConfig):
        self.config = config

    @cached_property
    def catalog(self) -> IndicatorCatalog:
        if self.config.catalog is None:
            return default_catalog()
        return load_catalog(self.config.catalog)

    @cached_property
    def panels(self) -> dict:
        out = {}
        for year in sorted(self.config.panels):
            panel = load_panel(self.config.panels[year], self.catalog, year)
            panel.validate_missingness()
            out[year] = panel
        return out

    @property
    def latest_year(self) -> int:
        return max(self.config.panels)

    @cached_property
    def geo(self):
        return load_geojson(self.config.boundaries)

    @cached_property
    def address_table(self) -> dict:
        raw = json.loads(Path(self.config.addresses).read_text(encoding="utf-8"))
        return {addr: (float(p[0]), float(p[1])) for addr, p in raw.items()}

    @cached_property
    def labels(self) -> tuple[dict, tuple]:
        if self.config.labels is None:
            return {}, ()
        return load_labels(self.config.labels)

    @cached_property
    def processed(self) -> dict:
        return {
            year: preprocess_panel(panel, k=self.config.knn_k)
            for year, panel in self.panels.items()
        }

    @cached_property
    def cvi_by_year(self) -> dict:
        return {
            year: compute_cvi(pp, self.catalog)
            for year, pp in self.processed.items()
        }

    @cached_property
    def cluster_points(self) -> np.ndarray:
        pp = self.processed[self.latest_year]
        cols = [self.catalog.column(i) for i in self.catalog.cluster_feature_ids]
        return pp.matrix[:, cols]

    @cached_property
    def cluster_model(self) -> ClusterModel:
        pp = self.processed[self.latest_year]
        if self.config.init_das is not None:
            triple = self.config.init_das
            names = None
        else:
            ground_truth, medoids = self.labels
            if len(medoids) != 3:
                raise ConfigError(
                    "cluster initialization needs --init-das or a labels "
                    "file flagging one medoid per sector"
                )
            triple = medoids
            names = tuple(ground_truth[da] for da in medoids)
        init = init_from_da_ids(self.cluster_points, pp.da_ids, triple)
        kwargs = {} if names is None else {"sector_names": names}
        return kmeans_fixed(self.cluster_points, init, pp.da_ids,
                            tuple(self.catalog.cluster_feature_ids), **kwargs)

    @cached_property
    def silhouette_report(self):
        return silhouette(self.cluster_points, self.cluster_model.assignments)

    @cached_property
    def lvi_series(self) -> list:
        return compute_lvi(self.cvi_by_year,
                           self.cluster_model.assignment_map(),
                           self.cluster_model.sector_names)

    @cached_property
    def forecasts(self) -> list:
        seed = stage_seed(self.config.seed, "lvi")
        return [
            forecast(series, self.config.target_year, seed=seed)
            for series in self.lvi_series
        ]

    @cached_property
    def explanation(self):
        # global attributions share the importance stage generator so the
        # published rankings and the SHAP violins describe the same model
        return explain_cvi(self.processed[self.latest_year],
                           self.cvi_by_year[self.latest_year],
                           n_trees=self.config.n_trees,
                           seed=stage_seed(self.config.seed, "importance"))

    @cached_property
    def cluster_explanation(self):
        return explain_clusters(self.cluster_points, self.cluster_model,
                                seed=stage_seed(self.config.seed, "shap"))

    @cached_property
    def bundle(self) -> dict:
        model = self.cluster_model
        return build_bundle(
            seed=self.config.seed,
            year=self.latest_year,
            catalog=self.catalog,
            histogram=histogram_payload(self.cvi_by_year[self.latest_year]),
            importance=self.explanation.payload(),
            shap_global=self.explanation.violin(),
            clusters={
                "assignments": model.assignment_map(),
                "silhouette": silhouette_payload(model, self.silhouette_report),
                "radar": radar_data(model, self.cluster_points),
            },
            shap_clusters=self.cluster_explanation.payload(
                feature_values=self.cluster_points),
            lvi=lvi_timeseries_payload(self.lvi_series, self.forecasts),
        )


def _stage_ingest(state: PipelineState, dest: Path) -> None:
    config = state.config
    da_ids = None
    for year, panel in state.panels.items():
        if da_ids is None:
            da_ids = panel.da_ids
        elif panel.da_ids != da_ids:
            raise VitalityError(
                f"panel {year} covers a different DA set than panel "
                f"{state.latest_year}"
            )
    missing_geo = [da for da in da_ids if da not in state.geo.polygons]
    if missing_geo:
        raise VitalityError(
            f"boundaries lack geometry for {len(missing_geo)} DAs "
            f"(first: {missing_geo[0]})"
        )
    client = FixtureGeocoder(state.address_table)
    counts, rejects = assign_addresses(sorted(state.address_table),
                                       client, state.geo)
    if "business_count" in state.catalog.ids:
        latest = state.panels[state.latest_year]
        col = state.catalog.column("business_count")
        mismatched = []
        for i, da in enumerate(latest.da_ids):
            declared = latest.values[i, col]
            if np.isfinite(declared) and int(round(declared)) != counts.get(da, 0):
                mismatched.append(da)
        if mismatched:
            raise VitalityError(
                f"address fixture disagrees with declared business counts "
                f"for {len(mismatched)} DAs (first: {mismatched[0]})"
            )
    ground_truth, medoids = state.labels
    _dump_json(
        {
            "da_count": len(da_ids),
            "years": sorted(state.panels),
            "catalog_fingerprint": state.catalog.fingerprint(),
            "address_count": len(state.address_table),
            "geocode_rejects": sorted(rejects),
            "business_counts_consistent": True,
            "label_sectors": sorted(set(ground_truth.values())),
            "medoids": list(medoids),
        },
        dest / "ingest.json",
    )


def _stage_preprocess(state: PipelineState, dest: Path) -> None:
    params = {}
    for year in sorted(state.processed):
        pp = state.processed[year]
        write_processed(pp, dest / f"processed_{year}.csv")
        params[str(year)] = {
            ind.id: [lo, hi]
            for ind, (lo, hi) in zip(state.catalog.indicators, pp.scaler_params)
        }
    _dump_json(
        {"k": state.config.knn_k, "years": sorted(state.processed),
         "scaler_params": params},
        dest / "preprocess.json",
    )


def _stage_cvi(state: PipelineState, dest: Path) -> None:
    result = state.cvi_by_year[state.latest_year]
    export_cvi_csv(result, dest / "cvi.csv")
    choropleth = export_choropleth(
        result, state.geo,
        provenance=state.processed[state.latest_year].provenance)
    _dump_json(choropleth, dest / "choropleth.geojson")
    _dump_json(histogram_payload(result), dest / "histogram.json")


def _stage_cluster(state: PipelineState, dest: Path) -> None:
    model = state.cluster_model
    write_assignments(model, dest / "assignments.csv")
    _dump_json(silhouette_payload(model, state.silhouette_report),
               dest / "silhouette.json")
    _dump_json(radar_data(model, state.cluster_points), dest / "radar.json")


def _stage_lvi(state: PipelineState, dest: Path) -> None:
    _dump_json(lvi_timeseries_payload(state.lvi_series, state.forecasts),
               dest / "lvi.json")


def _stage_importance(state: PipelineState, dest: Path) -> None:
    _dump_json(state.explanation.payload(), dest / "importance.json")


def _stage_shap(state: PipelineState, dest: Path) -> None:
    _dump_json(state.explanation.violin(), dest / "shap_global.json")
    _dump_json(state.cluster_explanation.payload(
        feature_values=state.cluster_points), dest / "shap_clusters.json")


def _stage_report(state: PipelineState, dest: Path) -> None:
    write_bundle(state.bundle, dest / "bundle.json")
    (dest / "report.html").write_text(generate_report(state.bundle),
                                      encoding="utf-8")


_STAGE_FUNCS = {
    "ingest": _stage_ingest,
    "preprocess": _stage_preprocess,
    "cvi": _stage_cvi,
    "cluster": _stage_cluster,
    "lvi": _stage_lvi,
    "importance": _stage_importance,
    "shap": _stage_shap,
    "report": _stage_report,
}


def _update_manifest(out: Path, config: RunConfig, stage: str,
                     written: list[str]) -> None:
    path = out / "manifest.json"
    if path.exists():
        manifest = json.loads(path.read_text(encoding="utf-8"))
    else:
        manifest = {"version": MANIFEST_VERSION, "files": {}, "stages": {}}
    manifest["version"] = MANIFEST_VERSION
    manifest["package"] = __version__
    manifest["config"] = config.manifest_dict()
    manifest["inputs"] = {
        name: _sha256(p) for name, p in config.input_files().items()
    }
    for name in written:
        manifest["files"][name] = _sha256(out / name)
    manifest["stages"][stage] = written
    tmp = out / ".manifest.tmp"
    _dump_json(manifest, tmp)
    tmp.replace(path)


def run_stage(state: PipelineState, stage: str) -> list[str]:
    """Execute one stage atomically; returns the artifact names written."""
    out = Path(state.config.out)
    out.mkdir(parents=True, exist_ok=True)
    scratch = out / f".stage-{stage}.tmp"
    if scratch.exists():
        shutil.rmtree(scratch)
    scratch.mkdir()
    try:
        _STAGE_FUNCS[stage](state, scratch)
        written = sorted(p.name for p in scratch.iterdir())
        for name in written:
            (scratch / name).replace(out / name)
    except ConfigError:
        raise
    except Exception as exc:
        raise StageError(stage, exc) from exc
    finally:
        shutil.rmtree(scratch, ignore_errors=True)
    _update_manifest(out, state.config, stage, written)
    return written


def run(config: RunConfig, stages=None) -> Path:
    """Run the requested stages (all of them by default) in dependency order."""
    if stages is None:
        selected = list(STAGE_ORDER)
    else:
        unknown = [s for s in stages if s not in STAGE_ORDER]
        if unknown:
            raise ConfigError(
                f"unknown stage {unknown[0]!r} "
                f"(choose from {', '.join(STAGE_ORDER)})"
            )
        selected = [s for s in STAGE_ORDER if s in set(stages)]
    config.check_inputs()
    state = PipelineState(config)
    for stage in selected:
        run_stage(state, stage)
    return Path(config.out)
