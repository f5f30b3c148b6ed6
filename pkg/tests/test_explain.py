import copy
import json
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from vitality.cluster import (
    ClusterModel,
    kmeans_fixed,
    radar_data,
    silhouette,
    silhouette_payload,
)
from vitality.cvi import compute_cvi, histogram_payload
from vitality.data import Indicator, IndicatorCatalog, Panel
from vitality.errors import (
    IncompleteInputsError,
    SchemaError,
    ShapeMismatchError,
    ValidationError,
)
from vitality.explain import (
    SectorExplanation,
    ShapMatrix,
    build_bundle,
    default_notices,
    explain_clusters,
    explain_cvi,
    generate_report,
    load_bundle,
    spearman,
    validate_bundle,
    write_bundle,
    write_report,
)
from vitality.lvi import compute_lvi, forecast, lvi_timeseries_payload
from vitality.preprocess import ProcessedPanel, preprocess_panel


class TestSpearman:
    def test_reversed_pair(self):
        assert spearman([1, 2, 3], [3, 1, 2]) == pytest.approx(-0.5)

    def test_monotone_is_one(self):
        assert spearman([0.1, 0.5, 0.9, 2.0], [1, 2, 3, 4]) == pytest.approx(1.0)

    def test_antitone_is_minus_one(self):
        assert spearman([3, 2, 1], [1, 2, 3]) == pytest.approx(-1.0)

    def test_ties_get_average_ranks(self):
        # ranks [1.5, 1.5, 3] vs [1, 2, 3]
        want = 1.5 / np.sqrt(3.0)
        assert spearman([1, 1, 2], [5, 6, 7]) == pytest.approx(want)

    def test_constant_vector_rejected(self):
        with pytest.raises(ValidationError):
            spearman([2, 2, 2], [1, 2, 3])

    def test_single_value_rejected(self):
        with pytest.raises(ValidationError):
            spearman([1.0], [2.0])

    def test_length_mismatch_rejected(self):
        with pytest.raises(ShapeMismatchError):
            spearman([1, 2, 3], [1, 2])


def index_catalog(n):
    return IndicatorCatalog(
        indicators=tuple(
            Indicator(id=f"i{j}", label=f"I{j}", polarity="benefit",
                      cluster_feature=(j == 0))
            for j in range(n)
        )
    )


def hand_processed(matrix, catalog, year=2021):
    """A panel whose matrix is taken as already scaled and complete."""
    n, p = matrix.shape
    return ProcessedPanel(
        year=year,
        da_ids=tuple(f"D{i:02d}" for i in range(n)),
        matrix=matrix,
        provenance=np.zeros((n, p), dtype=bool),
        scaler_params=tuple((0.0, 1.0) for _ in range(p)),
        catalog=catalog,
    )


def dominant_matrix(n=60, constant_col=None):
    """Column 0 carries nearly all the variance; the rest barely wiggle."""
    t = np.arange(n, dtype=np.float64)
    cols = [
        np.linspace(0.0, 1.0, n),
        0.5 + 0.02 * np.cos(t),
        0.5 + 0.02 * np.sin(1.7 * t),
        0.5 + 0.02 * np.cos(2.9 * t + 1.0),
    ]
    if constant_col is not None:
        cols[constant_col] = np.full(n, 0.5)
    return np.column_stack(cols)


class TestExplainCvi:
    def build(self, matrix):
        cat = index_catalog(matrix.shape[1])
        pp = hand_processed(matrix, cat)
        return explain_cvi(pp, compute_cvi(pp, cat), n_trees=40, seed=0), pp

    def test_dominant_column_leads_both_rankings(self):
        exp, _ = self.build(dominant_matrix())
        assert exp.ranking("forest")[0] == "i0"
        assert exp.ranking("boosted")[0] == "i0"

    def test_dominant_column_leads_attributions(self):
        exp, _ = self.build(dominant_matrix())
        assert exp.violin()["features"][0]["id"] == "i0"

    def test_constant_column_scores_zero_everywhere(self):
        exp, _ = self.build(dominant_matrix(constant_col=2))
        assert exp.forest_importance[2] == 0.0
        assert exp.boosted_importance[2] == 0.0
        assert exp.shap.mean_abs()[2] < 1e-9

    def test_rank_correlation_in_range(self):
        exp, _ = self.build(dominant_matrix())
        assert -1.0 <= exp.rank_correlation <= 1.0

    def test_payload_fields(self):
        exp, _ = self.build(dominant_matrix())
        payload = exp.payload()
        assert payload["features"] == ["i0", "i1", "i2", "i3"]
        assert payload["forest_ranking"][0] == "i0"
        assert sum(payload["forest"]) == pytest.approx(1.0)
        assert isinstance(payload["rank_correlation"], float)

    def test_violin_values_align_with_columns(self):
        exp, pp = self.build(dominant_matrix())
        violin = exp.violin()
        means = [f["mean_abs"] for f in violin["features"]]
        assert means == sorted(means, reverse=True)
        for block in violin["features"]:
            col = pp.catalog.column(block["id"])
            assert block["values"] == pytest.approx(list(pp.matrix[:, col]))

    def test_non_members_stay_out_of_the_features(self):
        cat = IndicatorCatalog(
            indicators=(
                Indicator(id="i0", label="I0", polarity="benefit",
                          cluster_feature=True),
                Indicator(id="i1", label="I1", polarity="benefit"),
                Indicator(id="density", label="Density", polarity="benefit",
                          cluster_feature=True, index_member=False),
            )
        )
        matrix = dominant_matrix()[:, :3]
        pp = hand_processed(matrix, cat)
        exp = explain_cvi(pp, compute_cvi(pp, cat), n_trees=20, seed=0)
        assert exp.feature_ids == ("i0", "i1")

    def test_catalog_mismatch_rejected(self):
        cat_a = index_catalog(4)
        cat_b = IndicatorCatalog(
            indicators=tuple(
                Indicator(id=f"i{j}", label=f"I{j}", polarity="cost",
                          cluster_feature=(j == 0))
                for j in range(4)
            )
        )
        matrix = dominant_matrix()
        pp_a = hand_processed(matrix, cat_a)
        pp_b = hand_processed(matrix, cat_b)
        cvi_b = compute_cvi(pp_b, cat_b)
        with pytest.raises(ValidationError):
            explain_cvi(pp_a, cvi_b, n_trees=5)


def hand_model(assignments, names, points):
    assignments = np.asarray(assignments, dtype=np.int64)
    k = len(names)
    centroids = np.vstack([
        points[assignments == c].mean(axis=0) if np.any(assignments == c)
        else points.mean(axis=0)
        for c in range(k)
    ])
    return ClusterModel(
        k=k,
        feature_ids=tuple(f"f{j}" for j in range(points.shape[1])),
        da_ids=tuple(f"d{i}" for i in range(points.shape[0])),
        sector_names=tuple(names),
        init_centroids=centroids.copy(),
        final_centroids=centroids,
        assignments=assignments,
        inertia_history=np.array([1.0]),
        n_iter=1,
        had_empty_iteration=False,
    )


class TestExplainClusters:
    def test_planted_feature_ranks_first(self):
        rng = np.random.default_rng(7)
        points = rng.uniform(0.3, 0.7, size=(90, 4))
        points[:30, 0] = rng.uniform(0.85, 0.95, 30)
        points[30:, 0] = rng.uniform(0.05, 0.15, 60)
        labels = np.array([0] * 30 + [1] * 30 + [2] * 30)
        model = hand_model(labels, ("Urban", "Residential", "Commercial"),
                           points)
        block = explain_clusters(points, model, seed=0).sector("Urban")
        assert not block.degenerate
        assert block.feature_order[0] == "f0"
        assert block.mean_abs[0] - block.mean_abs[1] > 0.2

    def test_indistinguishable_sectors_attribute_near_zero(self):
        worst = 0.0
        for trial in range(20):
            rng = np.random.default_rng(1000 + trial)
            points = rng.uniform(0.0, 1.0, size=(80, 4))
            labels = rng.integers(0, 2, 80)
            if labels.min() == labels.max():
                labels[0] = 1 - labels[0]
            model = hand_model(labels, ("Urban", "Residential"), points)
            exp = explain_clusters(points, model, seed=trial)
            for block in exp.sectors:
                worst = max(worst, max(block.mean_abs))
        assert worst < 0.05

    def test_constant_membership_flagged_degenerate(self):
        rng = np.random.default_rng(3)
        points = rng.uniform(0.0, 1.0, size=(24, 3))
        model = hand_model(np.zeros(24), ("Urban", "Residential"), points)
        exp = explain_clusters(points, model)
        for block in exp.sectors:
            assert block.degenerate
            assert max(block.mean_abs) == 0.0
        assert exp.sector("Urban").shap.base_value == 1.0
        assert exp.sector("Residential").shap.base_value == 0.0

    def test_unsplittable_points_flagged_degenerate(self):
        points = np.full((40, 3), 0.5)
        labels = np.arange(40) % 2
        model = hand_model(labels, ("Urban", "Residential"), points)
        exp = explain_clusters(points, model)
        for block in exp.sectors:
            assert block.degenerate
            assert max(block.mean_abs) == 0.0

    def test_payload_violin_is_optional(self):
        rng = np.random.default_rng(11)
        points = rng.uniform(0.0, 1.0, size=(30, 2))
        labels = (points[:, 0] > 0.5).astype(int)
        model = hand_model(labels, ("Urban", "Residential"), points)
        exp = explain_clusters(points, model, n_trees=30)
        bare = exp.payload()
        assert all("violin" not in b for b in bare["sectors"])
        rich = exp.payload(feature_values=points)
        for block in rich["sectors"]:
            assert len(block["violin"]["features"]) == 2

    def test_shape_guards(self):
        rng = np.random.default_rng(5)
        points = rng.uniform(0.0, 1.0, size=(20, 2))
        labels = np.arange(20) % 2
        model = hand_model(labels, ("Urban", "Residential"), points)
        with pytest.raises(ShapeMismatchError):
            explain_clusters(points[:, :1], model)
        with pytest.raises(ShapeMismatchError):
            explain_clusters(points[:10], model)

    def test_unknown_sector_lookup(self):
        rng = np.random.default_rng(6)
        points = rng.uniform(0.0, 1.0, size=(20, 2))
        model = hand_model(np.arange(20) % 2, ("Urban", "Residential"), points)
        exp = explain_clusters(points, model, n_trees=10)
        with pytest.raises(KeyError):
            exp.sector("Harbour")

    def test_sector_block_ordering_enforced(self):
        shap = ShapMatrix(base_value=0.0, phi=np.zeros((4, 2)),
                          feature_ids=("a", "b"))
        with pytest.raises(ValidationError):
            SectorExplanation(sector="X", feature_order=("a", "b"),
                              mean_abs=(0.1, 0.2), shap=shap, degenerate=False)
        with pytest.raises(ValidationError):
            SectorExplanation(sector="X", feature_order=("a", "b"),
                              mean_abs=(0.3, -0.1), shap=shap, degenerate=False)
        with pytest.raises(ValidationError):
            SectorExplanation(sector="X", feature_order=("a", "b"),
                              mean_abs=(0.3,), shap=shap, degenerate=False)


@pytest.fixture(scope="module")
def pipeline():
    cat = IndicatorCatalog(
        indicators=(
            Indicator(id="walk", label="Walkability", polarity="benefit",
                      cluster_feature=True),
            Indicator(id="parks", label="Park access", polarity="benefit",
                      cluster_feature=True),
            Indicator(id="noise", label="Noise exposure", polarity="cost"),
            Indicator(id="shops", label="Shop density", polarity="benefit"),
        )
    )
    da_ids = tuple(f"D{i:02d}" for i in range(30))
    rng = np.random.default_rng(20)
    cvis_by_year = {}
    latest = None
    for year in (2006, 2011, 2016, 2021):
        values = rng.uniform(5.0, 95.0, (30, 4))
        values[:15, 0] = rng.uniform(75.0, 100.0, 15)
        values[15:, 0] = rng.uniform(0.0, 25.0, 15)
        values[:15, 1] = rng.uniform(75.0, 100.0, 15)
        values[15:, 1] = rng.uniform(0.0, 25.0, 15)
        panel = Panel(year=year, da_ids=da_ids, values=values, catalog=cat)
        pp = preprocess_panel(panel, k=3)
        cvis_by_year[year] = compute_cvi(pp, cat)
        latest = pp

    points = np.ascontiguousarray(latest.matrix[:, [0, 1]])
    model = kmeans_fixed(points, points[[0, 15]], da_ids, ("walk", "parks"),
                         sector_names=("Urban", "Residential"))
    sil = silhouette(points, model.assignments)

    series_list = compute_lvi(cvis_by_year, model.assignment_map(),
                              model.sector_names)
    forecasts = [forecast(s, 2026, seed=0) for s in series_list]

    cvi_exp = explain_cvi(latest, cvis_by_year[2021], n_trees=40, seed=0)
    cluster_exp = explain_clusters(points, model, seed=0)
    bundle = build_bundle(
        seed=0,
        year=2021,
        catalog=cat,
        histogram=histogram_payload(cvis_by_year[2021]),
        importance=cvi_exp.payload(),
        shap_global=cvi_exp.violin(),
        clusters={
            "assignments": model.assignment_map(),
            "silhouette": silhouette_payload(model, sil),
            "radar": radar_data(model, points),
        },
        shap_clusters=cluster_exp.payload(feature_values=points),
        lvi=lvi_timeseries_payload(series_list, forecasts),
    )
    return {"bundle": bundle, "catalog": cat, "model": model}


class TestBundle:
    def test_validates_when_complete(self, pipeline):
        validate_bundle(pipeline["bundle"])

    def test_version_guard(self, pipeline):
        with pytest.raises(SchemaError):
            validate_bundle([1, 2, 3])
        stale = copy.deepcopy(pipeline["bundle"])
        stale["version"] = "2"
        with pytest.raises(SchemaError):
            validate_bundle(stale)

    def test_missing_stage_names(self, pipeline):
        cases = [
            (lambda b: b.pop("histogram"), ["cvi.histogram"]),
            (lambda b: b.update(importance={}), ["importance.ranking"]),
            (lambda b: b.update(shap_global=None), ["shap.global"]),
            (lambda b: b["clusters"].update(silhouette={}),
             ["cluster.silhouette"]),
            (lambda b: b["clusters"].pop("radar"), ["cluster.radar"]),
            (lambda b: b["clusters"].update(assignments={}),
             ["cluster.model"]),
            (lambda b: b["lvi"].update(sectors=[]),
             ["lvi.series", "lvi.forecast"]),
            (lambda b: b["lvi"]["sectors"][0].pop("forecast"),
             ["lvi.forecast"]),
        ]
        for mutate, want in cases:
            broken = copy.deepcopy(pipeline["bundle"])
            mutate(broken)
            with pytest.raises(IncompleteInputsError) as err:
                validate_bundle(broken)
            assert err.value.missing == want

    def test_every_gap_is_reported_at_once(self, pipeline):
        broken = copy.deepcopy(pipeline["bundle"])
        broken.pop("histogram")
        broken["clusters"].pop("radar")
        with pytest.raises(IncompleteInputsError) as err:
            validate_bundle(broken)
        assert err.value.missing == ["cvi.histogram", "cluster.radar"]

    def test_write_load_roundtrip(self, pipeline, tmp_path):
        path = tmp_path / "bundle.json"
        write_bundle(pipeline["bundle"], path)
        loaded = load_bundle(path)
        assert json.dumps(loaded, sort_keys=True) == json.dumps(
            pipeline["bundle"], sort_keys=True
        )

    def test_load_rejects_bad_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(SchemaError):
            load_bundle(path)

    def test_fingerprint_recorded(self, pipeline):
        assert (pipeline["bundle"]["catalog_fingerprint"]
                == pipeline["catalog"].fingerprint())


class TestNotices:
    def test_ten_standing_notices(self):
        notices = default_notices()
        assert len(notices) == 10
        ids = {n["id"] for n in notices}
        assert ids == {
            "indicator-membership",
            "geocode-rejects",
            "imputation-method",
            "scaling-order",
            "lr-mse-protocol",
            "urban-2026-gap",
            "training-mse-selection",
            "histogram-range",
            "silhouette-target",
            "shap-magnitudes",
        }
        assert all(n["severity"] in ("info", "warning") for n in notices)

    def test_urban_gap_states_both_values(self):
        by_id = {n["id"]: n for n in default_notices()}
        text = by_id["urban-2026-gap"]["text"]
        assert "0.29" in text
        assert "0.31, 0.31, 0.31, 0.24" in text
        assert by_id["urban-2026-gap"]["severity"] == "warning"


class TestReport:
    def test_rendering_is_pure(self, pipeline, tmp_path):
        first = generate_report(pipeline["bundle"])
        assert generate_report(pipeline["bundle"]) == first
        path = tmp_path / "bundle.json"
        write_bundle(pipeline["bundle"], path)
        assert generate_report(load_bundle(path)) == first

    def test_document_is_well_formed(self, pipeline):
        text = generate_report(pipeline["bundle"])
        assert text.startswith("<!DOCTYPE html>\n")
        root = ET.fromstring(text.split("\n", 1)[1])
        assert root.tag == "html"
        headings = [h.text for h in root.iter("h2")]
        assert headings == [
            "Current vitality distribution",
            "Indicator importance",
            "Per-area attributions",
            "Sectors",
            "What separates the sectors",
            "Long-term vitality",
            "Flagged notices",
        ]

    def test_one_violin_per_surrogate_plus_global(self, pipeline):
        text = generate_report(pipeline["bundle"])
        sectors = pipeline["bundle"]["shap_clusters"]["sectors"]
        assert text.count('<svg class="violin"') == 1 + len(sectors)

    def test_driver_sentences_name_the_top_feature(self, pipeline):
        bundle = pipeline["bundle"]
        text = generate_report(bundle)
        for block in bundle["shap_clusters"]["sectors"]:
            assert block["mean_abs"][0] == max(block["mean_abs"])
            label = bundle["labels"][block["features"][0]]
            assert (f"Membership in the {block['sector']} sector is driven "
                    f"most by {label}") in text

    def test_selection_sentences_cover_every_sector(self, pipeline):
        bundle = pipeline["bundle"]
        text = generate_report(bundle)
        for block in bundle["lvi"]["sectors"]:
            assert (f"For the {block['sector']} sector, "
                    f"{block['selected_model']} reached the lowest "
                    "training error") in text
            if block["selected_model"] != "LR":
                assert "The linear fit projects" in text

    def test_model_table_lists_every_candidate(self, pipeline):
        text = generate_report(pipeline["bundle"])
        for name in ("LR", "RF", "MLP"):
            assert f"<th>{name} error</th><th>{name} 2026</th>" in text

    def test_notices_rendered_with_anchors(self, pipeline):
        text = generate_report(pipeline["bundle"])
        assert 'id="notice-urban-2026-gap"' in text
        assert "0.29" in text
        assert text.count('<div class="notice') == 10

    def test_incomplete_bundle_refused(self, pipeline):
        broken = copy.deepcopy(pipeline["bundle"])
        broken["lvi"]["sectors"][1].pop("forecast")
        with pytest.raises(IncompleteInputsError) as err:
            generate_report(broken)
        assert err.value.missing == ["lvi.forecast"]

    def test_write_report(self, pipeline, tmp_path):
        path = tmp_path / "report.html"
        write_report(pipeline["bundle"], path)
        assert path.read_text(encoding="utf-8") == generate_report(
            pipeline["bundle"]
        )
