"""Pipeline and command line tests: config resolution, stage atomicity,
manifest bookkeeping, reproducibility, and exit codes."""
import hashlib
import json
import shutil
from pathlib import Path

import pytest

from vitality.cli import main
from vitality.errors import ConfigError, MissingInputError, StageError
from vitality.pipeline import (
    STAGE_ORDER,
    RunConfig,
    run,
    stage_seed,
)
from vitality.synth import SynthConfig, generate, write_city

N_DAS = 30
N_TREES = 40


@pytest.fixture(scope="module")
def city_dir(tmp_path_factory):
    root = tmp_path_factory.mktemp("city")
    write_city(generate(SynthConfig(seed=7, n_das=N_DAS)), root)
    return root


def small_config(city_dir, out):
    return RunConfig.from_input_dir(city_dir, out=Path(out), n_trees=N_TREES)


@pytest.fixture(scope="module")
def snapshot(city_dir, tmp_path_factory):
    out = tmp_path_factory.mktemp("snap")
    run(small_config(city_dir, out))
    return out


ARTIFACTS = {
    "ingest.json",
    "preprocess.json",
    "processed_2006.csv", "processed_2006.provenance.csv",
    "processed_2011.csv", "processed_2011.provenance.csv",
    "processed_2016.csv", "processed_2016.provenance.csv",
    "processed_2021.csv", "processed_2021.provenance.csv",
    "cvi.csv", "choropleth.geojson", "histogram.json",
    "assignments.csv", "silhouette.json", "radar.json",
    "lvi.json", "importance.json",
    "shap_global.json", "shap_clusters.json",
    "bundle.json", "report.html",
    "manifest.json",
}


def read_all(root):
    return {p.name: p.read_bytes() for p in Path(root).iterdir()}


class TestRunConfig:
    def test_discovers_synth_layout(self, city_dir):
        config = RunConfig.from_input_dir(city_dir)
        assert sorted(config.panels) == [2006, 2011, 2016, 2021]
        assert config.catalog == city_dir / "catalog.json"
        assert config.labels == city_dir / "labels.csv"
        assert config.boundaries.name == "boundaries.geojson"

    def test_missing_directory_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            RunConfig.from_input_dir(tmp_path / "nowhere")

    def test_directory_without_panels_rejected(self, tmp_path):
        with pytest.raises(ConfigError, match="panel"):
            RunConfig.from_input_dir(tmp_path)

    def test_bad_knobs_rejected(self, city_dir):
        with pytest.raises(ConfigError, match="knn_k"):
            RunConfig.from_input_dir(city_dir, knn_k=0)
        with pytest.raises(ConfigError, match="n_trees"):
            RunConfig.from_input_dir(city_dir, n_trees=0)
        with pytest.raises(ConfigError, match="target year"):
            RunConfig.from_input_dir(city_dir, target_year=2021)
        with pytest.raises(ConfigError, match="three distinct"):
            RunConfig.from_input_dir(city_dir, init_das=("a", "a", "b"))

    def test_check_inputs_names_missing_file(self, city_dir, tmp_path):
        broken = tmp_path / "broken"
        shutil.copytree(city_dir, broken)
        (broken / "boundaries.geojson").unlink()
        config = RunConfig.from_input_dir(broken)
        with pytest.raises(MissingInputError, match="boundaries.geojson"):
            config.check_inputs()


class TestStageSeed:
    def test_deterministic(self):
        assert stage_seed(42, "cvi") == stage_seed(42, "cvi")

    def test_varies_by_stage_and_base(self):
        seeds = {stage_seed(42, s) for s in STAGE_ORDER}
        assert len(seeds) == len(STAGE_ORDER)
        assert stage_seed(42, "shap") != stage_seed(43, "shap")


class TestRun:
    def test_writes_every_artifact(self, snapshot):
        assert {p.name for p in snapshot.iterdir()} == ARTIFACTS

    def test_manifest_hashes_match_files(self, snapshot):
        manifest = json.loads((snapshot / "manifest.json").read_text())
        assert manifest["version"] == "1"
        assert set(manifest["stages"]) == set(STAGE_ORDER)
        for name, digest in manifest["files"].items():
            actual = hashlib.sha256((snapshot / name).read_bytes()).hexdigest()
            assert actual == digest, name
        assert sorted(manifest["files"]) == sorted(ARTIFACTS - {"manifest.json"})
        assert manifest["config"]["seed"] == 42
        assert manifest["config"]["n_trees"] == N_TREES
        assert set(manifest["inputs"]) == {
            "catalog", "labels", "boundaries", "addresses",
            "panel_2006", "panel_2011", "panel_2016", "panel_2021",
        }

    def test_rerun_is_byte_identical(self, city_dir, snapshot, tmp_path):
        run(small_config(city_dir, tmp_path / "again"))
        assert read_all(tmp_path / "again") == read_all(snapshot)

    def test_stage_by_stage_matches_full_run(self, city_dir, snapshot, tmp_path):
        out = tmp_path / "stepwise"
        for stage in STAGE_ORDER:
            # fresh config and state each time, as separate CLI calls would be
            run(small_config(city_dir, out), stages=[stage])
        assert read_all(out) == read_all(snapshot)

    def test_stage_filter_rewrites_only_its_artifacts(self, city_dir, tmp_path):
        out = tmp_path / "filtered"
        run(small_config(city_dir, out))
        before = {p.name: p.stat().st_mtime_ns for p in out.iterdir()}
        run(small_config(city_dir, out), stages=["cvi"])
        after = {p.name: p.stat().st_mtime_ns for p in out.iterdir()}
        rewritten = {n for n in before if after[n] != before[n]}
        assert rewritten == {"cvi.csv", "choropleth.geojson",
                             "histogram.json", "manifest.json"}

    def test_unknown_stage_rejected(self, city_dir, tmp_path):
        with pytest.raises(ConfigError, match="unknown stage"):
            run(small_config(city_dir, tmp_path / "x"), stages=["polish"])

    def test_missing_input_refused_before_any_stage(self, city_dir, tmp_path):
        broken = tmp_path / "broken"
        shutil.copytree(city_dir, broken)
        (broken / "boundaries.geojson").unlink()
        out = tmp_path / "never"
        with pytest.raises(MissingInputError, match="boundaries.geojson"):
            run(small_config(broken, out))
        assert not out.exists()

    def test_failed_stage_leaves_no_partial_outputs(self, city_dir, tmp_path):
        broken = tmp_path / "inconsistent"
        shutil.copytree(city_dir, broken)
        table = json.loads((broken / "addresses.json").read_text())
        table.pop(sorted(table)[0])
        (broken / "addresses.json").write_text(
            json.dumps(table, indent=2, sort_keys=True) + "\n"
        )
        out = tmp_path / "partial"
        with pytest.raises(StageError, match="ingest") as info:
            run(small_config(broken, out))
        assert info.value.stage == "ingest"
        assert not (out / "ingest.json").exists()
        assert not (out / "manifest.json").exists()

    def test_init_das_flag_matches_labels_medoids(self, city_dir, snapshot,
                                                  tmp_path):
        labels = (city_dir / "labels.csv").read_text().splitlines()[1:]
        medoids = [row.split(",")[0] for row in labels
                   if row.split(",")[2] == "1"]
        out = tmp_path / "pinned"
        config = RunConfig.from_input_dir(
            city_dir, out=out, n_trees=N_TREES, init_das=tuple(medoids))
        run(config, stages=["cluster"])
        assert ((out / "assignments.csv").read_bytes()
                == (snapshot / "assignments.csv").read_bytes())

    def test_cluster_without_init_or_labels_rejected(self, city_dir, tmp_path):
        config = RunConfig.from_input_dir(
            city_dir, out=tmp_path / "no_init", n_trees=N_TREES)
        config = RunConfig(
            panels=config.panels, boundaries=config.boundaries,
            addresses=config.addresses, out=config.out,
            catalog=config.catalog, labels=None, n_trees=N_TREES)
        with pytest.raises(ConfigError, match="init-das"):
            run(config, stages=["cluster"])


class TestCli:
    def test_synth_then_run(self, tmp_path, capsys):
        city = tmp_path / "city"
        assert main(["synth", "--seed", "7", "--n-das", "12",
                     "--out", str(city)]) == 0
        assert (city / "catalog.json").exists()
        out = tmp_path / "snap"
        rc = main(["run", "--input-dir", str(city), "--out", str(out),
                   "--n-trees", "30"])
        assert rc == 0
        assert (out / "manifest.json").exists()
        assert "snapshot" in capsys.readouterr().out

    def test_synth_deterministic(self, tmp_path):
        main(["synth", "--seed", "9", "--n-das", "8",
              "--out", str(tmp_path / "a")])
        main(["synth", "--seed", "9", "--n-das", "8",
              "--out", str(tmp_path / "b")])
        assert read_all(tmp_path / "a") == read_all(tmp_path / "b")

    def test_stage_subcommand(self, city_dir, tmp_path):
        out = tmp_path / "snap"
        rc = main(["cvi", "--input-dir", str(city_dir),
                   "--out", str(out), "--n-trees", str(N_TREES)])
        assert rc == 0
        assert (out / "cvi.csv").exists()
        assert not (out / "assignments.csv").exists()

    def test_lvi_subcommand_writes_selected_model(self, city_dir, tmp_path):
        out = tmp_path / "snap"
        rc = main(["lvi", "--input-dir", str(city_dir), "--out", str(out),
                   "--target-year", "2026", "--n-trees", str(N_TREES)])
        assert rc == 0
        doc = json.loads((out / "lvi.json").read_text())
        assert all("selected_model" in block for block in doc["sectors"])

    def test_flags_override_config_file(self, city_dir, tmp_path):
        config_path = tmp_path / "run.json"
        config_path.write_text(json.dumps({
            "input_dir": str(city_dir),
            "out": str(tmp_path / "snap"),
            "seed": 1,
            "n_trees": N_TREES,
        }))
        rc = main(["ingest", "--config", str(config_path), "--seed", "99"])
        assert rc == 0
        manifest = json.loads((tmp_path / "snap" / "manifest.json").read_text())
        assert manifest["config"]["seed"] == 99
        assert manifest["config"]["n_trees"] == N_TREES

    def test_unknown_config_key_exits_2(self, city_dir, tmp_path, capsys):
        config_path = tmp_path / "run.json"
        config_path.write_text(json.dumps({
            "input_dir": str(city_dir), "tres": 3}))
        assert main(["run", "--config", str(config_path)]) == 2
        assert "tres" in capsys.readouterr().err

    def test_malformed_config_file_exits_2(self, tmp_path, capsys):
        config_path = tmp_path / "run.json"
        config_path.write_text("{nope")
        assert main(["run", "--config", str(config_path)]) == 2
        assert "valid JSON" in capsys.readouterr().err

    def test_missing_boundaries_exits_1_naming_path(self, city_dir, tmp_path,
                                                    capsys):
        broken = tmp_path / "city"
        shutil.copytree(city_dir, broken)
        (broken / "boundaries.geojson").unlink()
        rc = main(["run", "--input-dir", str(broken),
                   "--out", str(tmp_path / "snap")])
        assert rc == 1
        assert "boundaries.geojson" in capsys.readouterr().err

    def test_panel_flag_year_form(self, city_dir, tmp_path):
        out = tmp_path / "snap"
        rc = main(["preprocess", "--input-dir", str(city_dir),
                   "--panel", f"2021={city_dir / 'panel_2021.csv'}",
                   "--out", str(out)])
        assert rc == 0

    def test_bare_panel_without_year_exits_2(self, tmp_path, capsys):
        plain = tmp_path / "p.csv"
        plain.write_text("da_id\n")
        rc = main(["cvi", "--panel", str(plain),
                   "--boundaries", "b.geojson", "--addresses", "a.json"])
        assert rc == 2
        assert "infer" in capsys.readouterr().err

    def test_bad_stage_name_is_usage_error(self, city_dir):
        with pytest.raises(SystemExit) as info:
            main(["run", "--input-dir", str(city_dir), "--stage", "polish"])
        assert info.value.code == 2
