"""Command-line tool end-to-end: exit codes, JSON schemas, config plumbing."""

import json
import subprocess
import sys
from pathlib import Path

import jsonschema
import numpy as np
import pytest

from collar_grasp import fileio, synth
from collar_grasp.config import PipelineConfig, load_config, override
from collar_grasp.synth import SceneParams, generate_scene, save_scene
from collar_grasp.types import BinaryMask

SCHEMA_DIR = Path(__file__).resolve().parents[1] / "src" / "collar_grasp" / "schemas"


def load_schema(name):
    return json.loads((SCHEMA_DIR / name).read_text())


def run_cli(*args, env=None):
    cmd = [sys.executable, "-m", "collar_grasp.cli", *map(str, args)]
    return subprocess.run(cmd, capture_output=True, text=True, env=env)


@pytest.fixture(scope="module")
def scene_dir(tmp_path_factory):
    path = tmp_path_factory.mktemp("scenes")
    for seed in (0, 1):
        save_scene(path / f"scene_{seed:04d}", generate_scene(SceneParams(), seed))
    return path


class TestGraspCommand:
    def test_json_validates_against_schema(self, scene_dir):
        s = scene_dir / "scene_0000"
        proc = run_cli("grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
                       "--intrinsics", s / "intrinsics.json")
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(proc.stdout)
        jsonschema.validate(doc, load_schema("grasp_plan_v1.schema.json"))
        assert doc["frame"] == "camera"

    def test_empty_mask_exits_2(self, scene_dir, tmp_path):
        s = scene_dir / "scene_0000"
        empty = tmp_path / "empty.png"
        fileio.save_mask(empty, BinaryMask(np.zeros((240, 320), dtype=bool)))
        proc = run_cli("grasp", "--depth", s / "depth.png", "--mask", empty,
                       "--intrinsics", s / "intrinsics.json")
        assert proc.returncode == 2
        assert "no-detection" in proc.stderr

    def test_missing_file_exits_4(self, scene_dir):
        s = scene_dir / "scene_0000"
        proc = run_cli("grasp", "--depth", "nope.png", "--mask", s / "mask.png",
                       "--intrinsics", s / "intrinsics.json")
        assert proc.returncode == 4

    def test_voxel_override_changes_cloud_size(self, scene_dir):
        s = scene_dir / "scene_0000"
        base_args = ("grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
                     "--intrinsics", s / "intrinsics.json")
        small = json.loads(run_cli(*base_args, "--voxel", "0.003").stdout)
        large = json.loads(run_cli(*base_args, "--voxel", "0.01").stdout)
        n_small = small["diagnostics"]["cloud_points_preprocessed"]
        n_large = large["diagnostics"]["cloud_points_preprocessed"]
        assert n_small > n_large
        again = json.loads(run_cli(*base_args, "--voxel", "0.003").stdout)
        assert again == small  # deterministic rerun

    def test_config_file_and_flag_precedence(self, scene_dir, tmp_path):
        s = scene_dir / "scene_0000"
        cfg = tmp_path / "conf.toml"
        cfg.write_text("[cloud]\nvoxel = 0.01\n")
        via_file = json.loads(run_cli(
            "grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
            "--intrinsics", s / "intrinsics.json", "--config", cfg).stdout)
        via_flag = json.loads(run_cli(
            "grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
            "--intrinsics", s / "intrinsics.json", "--config", cfg,
            "--voxel", "0.003").stdout)
        assert via_file["diagnostics"]["cloud_points_preprocessed"] < \
            via_flag["diagnostics"]["cloud_points_preprocessed"]

    def test_config_env_fallback(self, scene_dir, tmp_path):
        import os
        s = scene_dir / "scene_0000"
        cfg = tmp_path / "conf.toml"
        cfg.write_text("[cloud]\nvoxel = 0.01\n")
        env = dict(os.environ, COLLAR_GRASP_CONFIG=str(cfg))
        doc = json.loads(run_cli(
            "grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
            "--intrinsics", s / "intrinsics.json", env=env).stdout)
        plain = json.loads(run_cli(
            "grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
            "--intrinsics", s / "intrinsics.json").stdout)
        assert doc["diagnostics"]["cloud_points_preprocessed"] < \
            plain["diagnostics"]["cloud_points_preprocessed"]

    def test_extrinsics_to_world(self, scene_dir, tmp_path):
        s = scene_dir / "scene_0000"
        ext = tmp_path / "ext.json"
        ext.write_text(json.dumps({"rotation": [1, 0, 0, 0, 1, 0, 0, 0, 1],
                                   "translation": [0.0, 0.0, 0.5]}))
        doc = json.loads(run_cli(
            "grasp", "--depth", s / "depth.png", "--mask", s / "mask.png",
            "--intrinsics", s / "intrinsics.json", "--extrinsics", ext).stdout)
        assert doc["frame"] == "world"


class TestLabelCommand:
    FIXTURES = Path(__file__).resolve().parent / "fixtures" / "label"

    def test_golden_masks_bit_identical(self, tmp_path):
        proc = run_cli("label", "--in", self.FIXTURES, "--out", tmp_path,
                       "--seed", "0", "--splits", "1,0,0")
        assert proc.returncode == 0, proc.stderr
        for i in range(3):
            produced = fileio.load_mask(tmp_path / f"frame_{i:06d}_mask.png")
            golden = fileio.load_mask(self.FIXTURES / f"golden_{i:06d}_mask.png")
            np.testing.assert_array_equal(produced.bits, golden.bits)

    def test_repeat_runs_identical(self, tmp_path):
        run_cli("label", "--in", self.FIXTURES, "--out", tmp_path / "a", "--seed", "3")
        run_cli("label", "--in", self.FIXTURES, "--out", tmp_path / "b", "--seed", "3")
        a = (tmp_path / "a" / "manifest_train.jsonl").read_text()
        b = (tmp_path / "b" / "manifest_train.jsonl").read_text()
        assert [json.loads(l)["frame"] for l in a.splitlines()] == \
            [json.loads(l)["frame"] for l in b.splitlines()]


class TestEvalCommand:
    def test_identical_dirs_give_ones(self, tmp_path):
        from collar_grasp.labeler import DatasetManifest, ManifestEntry
        gt_dir = tmp_path / "gt"
        gt_dir.mkdir()
        rng = np.random.default_rng(0)
        entries = []
        for i in range(4):
            bits = rng.random((10, 12)) < 0.3
            name = f"m_{i:06d}_mask.png"
            fileio.save_mask(gt_dir / name, BinaryMask(bits))
            entries.append(ManifestEntry(depth="unused", mask=str(gt_dir / name), frame=i))
        DatasetManifest(tuple(entries), "test", 0).save(tmp_path / "manifest.jsonl")
        proc = run_cli("eval", "--manifest", tmp_path / "manifest.jsonl",
                       "--pred", gt_dir)
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(proc.stdout)
        jsonschema.validate(doc, load_schema("eval_report_v1.schema.json"))
        assert (doc["iou"], doc["recall"], doc["precision"]) == (1.0, 1.0, 1.0)

    def test_table_output(self, tmp_path):
        from collar_grasp.labeler import DatasetManifest, ManifestEntry
        gt_dir = tmp_path / "gt"
        gt_dir.mkdir()
        bits = np.zeros((8, 8), dtype=bool)
        bits[2:5, 2:5] = True
        fileio.save_mask(gt_dir / "m_000000_mask.png", BinaryMask(bits))
        entries = (ManifestEntry(depth="u", mask=str(gt_dir / "m_000000_mask.png"),
                                 frame=0),)
        DatasetManifest(entries, "test", 0).save(tmp_path / "manifest.jsonl")
        proc = run_cli("eval", "--manifest", tmp_path / "manifest.jsonl",
                       "--pred", gt_dir, "--table")
        assert "IoU" in proc.stdout and "Recall" in proc.stdout


class TestSynthCommands:
    def test_gen_writes_bundles(self, tmp_path):
        proc = run_cli("synth", "gen", "--out", tmp_path, "--seeds", "0..1")
        assert proc.returncode == 0, proc.stderr
        assert (tmp_path / "scene_0000" / "depth.png").exists()
        assert (tmp_path / "scene_0001" / "scene.json").exists()

    def test_trial_on_scene_dir_and_schema(self, scene_dir, tmp_path):
        report_path = tmp_path / "report.json"
        proc = run_cli("synth", "trial", "--scenes", scene_dir,
                       "--report", report_path)
        assert proc.returncode == 0, proc.stderr
        doc = json.loads(report_path.read_text())
        jsonschema.validate(doc, load_schema("trial_report_v1.schema.json"))
        assert doc["trials"] == 2

    def test_trial_deterministic_across_runs(self, tmp_path):
        p1 = run_cli("synth", "trial", "--seeds", "0..2", "--report", tmp_path / "a.json")
        p2 = run_cli("synth", "trial", "--seeds", "0..2", "--report", tmp_path / "b.json")
        assert p1.returncode == 0 and p2.returncode == 0
        assert (tmp_path / "a.json").read_text() == (tmp_path / "b.json").read_text()

    def test_seeds_and_scenes_mutually_exclusive(self, scene_dir):
        proc = run_cli("synth", "trial", "--scenes", scene_dir, "--seeds", "0..1")
        assert proc.returncode == 5


class TestConfigModule:
    def test_unknown_key_rejected(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[cloud]\nvoxxel = 0.01\n")
        with pytest.raises(ValueError, match="voxxel"):
            load_config(cfg)

    def test_values_validated(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[cloud]\nvoxel = -0.5\n")
        with pytest.raises(ValueError):
            load_config(cfg)

    def test_flags_override_file(self, tmp_path):
        cfg = tmp_path / "c.toml"
        cfg.write_text("[mask]\nlink_dist = 4.0\n[cloud]\nvoxel = 0.002\n")
        loaded = load_config(cfg)
        assert loaded.link_dist == 4.0 and loaded.voxel == 0.002
        final = override(loaded, link_dist=7.0, voxel=None)
        assert final.link_dist == 7.0
        assert final.voxel == 0.002

    def test_defaults_match_module_contracts(self):
        cfg = PipelineConfig()
        assert cfg.link_dist == 10.0
        assert cfg.voxel == 0.005
        assert cfg.outlier_radius == 0.010
        assert cfg.outlier_min == 5
        assert cfg.big_n == 50 and cfg.small_n == 50
        assert cfg.approach_offset == 0.050
        assert (cfg.h_min, cfg.h_max, cfg.s_min, cfg.v_min) == (200.0, 260.0, 0.4, 0.2)
