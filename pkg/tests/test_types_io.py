"""Domain type invariants and PNG/JSON round-trips."""

import json

import numpy as np
import pytest

from collar_grasp import fileio
from collar_grasp.camera import CameraIntrinsics, Extrinsics
from collar_grasp.types import BinaryMask, DepthImage, GraspPose, PointCloud, RgbImage


class TestTypeInvariants:
    def test_depth_shape_and_validity(self):
        d = DepthImage(np.array([[0, 100], [65535, 1]], dtype=np.uint16))
        assert d.width == 2 and d.height == 2
        np.testing.assert_array_equal(d.valid(), [[False, True], [True, True]])

    def test_depth_rejects_wrong_shape(self):
        with pytest.raises(ValueError):
            DepthImage(np.zeros(4, dtype=np.uint16))

    def test_rgb_requires_three_channels(self):
        with pytest.raises(ValueError):
            RgbImage(np.zeros((4, 4), dtype=np.uint8))

    def test_cloud_rejects_nonfinite(self):
        with pytest.raises(ValueError):
            PointCloud(np.array([[0.0, 0.0, np.nan]]))

    def test_camera_cloud_requires_positive_z(self):
        with pytest.raises(ValueError):
            PointCloud(np.array([[0.0, 0.0, -0.1]]))
        PointCloud(np.array([[0.0, 0.0, -0.1]]), frame="world")  # fine in world frame

    def test_pose_rejects_non_orthonormal(self):
        with pytest.raises(ValueError):
            GraspPose(np.zeros(3), np.eye(3) * 2.0)

    def test_pose_rejects_left_handed(self):
        flip = np.diag([1.0, 1.0, -1.0])
        with pytest.raises(ValueError):
            GraspPose(np.zeros(3), flip)

    def test_intrinsics_validation(self):
        with pytest.raises(ValueError):
            CameraIntrinsics(fx=-1, fy=600, cx=320, cy=240)
        with pytest.raises(ValueError):
            CameraIntrinsics(fx=600, fy=600, cx=320, cy=240, depth_scale=0.0)

    def test_types_are_immutable(self):
        d = DepthImage(np.ones((2, 2), dtype=np.uint16))
        with pytest.raises(ValueError):
            d.data[0, 0] = 5


class TestPngRoundTrips:
    def test_depth_16bit(self, tmp_path, rng):
        arr = rng.integers(0, 65536, size=(24, 32)).astype(np.uint16)
        fileio.save_depth(tmp_path / "d.png", DepthImage(arr))
        back = fileio.load_depth(tmp_path / "d.png")
        np.testing.assert_array_equal(back.data, arr)
        assert back.data.dtype == np.uint16

    def test_mask(self, tmp_path, rng):
        bits = rng.random((24, 32)) < 0.5
        fileio.save_mask(tmp_path / "m.png", BinaryMask(bits))
        back = fileio.load_mask(tmp_path / "m.png")
        np.testing.assert_array_equal(back.bits, bits)

    def test_rgb(self, tmp_path, rng):
        arr = rng.integers(0, 256, size=(16, 16, 3)).astype(np.uint8)
        fileio.save_rgb(tmp_path / "c.png", RgbImage(arr))
        back = fileio.load_rgb(tmp_path / "c.png")
        np.testing.assert_array_equal(back.data, arr)


class TestCameraJson:
    def test_intrinsics_round_trip(self, tmp_path, intr):
        fileio.save_intrinsics(tmp_path / "intr.json", intr)
        back = fileio.load_intrinsics(tmp_path / "intr.json")
        assert back == intr

    def test_intrinsics_schema_fields(self, tmp_path, intr):
        fileio.save_intrinsics(tmp_path / "intr.json", intr)
        doc = json.loads((tmp_path / "intr.json").read_text())
        assert set(doc) == {"fx", "fy", "cx", "cy", "depth_scale"}

    def test_extrinsics_round_trip(self, tmp_path, rng):
        from conftest import random_rotation
        ext = Extrinsics(random_rotation(rng), rng.normal(size=3))
        fileio.save_extrinsics(tmp_path / "ext.json", ext)
        back = fileio.load_extrinsics(tmp_path / "ext.json")
        np.testing.assert_allclose(back.rotation, ext.rotation, atol=1e-15)
        np.testing.assert_allclose(back.translation, ext.translation, atol=1e-15)

    def test_extrinsics_rejects_improper_rotation(self, tmp_path):
        doc = {"rotation": [1, 0, 0, 0, 1, 0, 0, 0, 2], "translation": [0, 0, 0]}
        path = tmp_path / "ext.json"
        path.write_text(json.dumps(doc))
        with pytest.raises(ValueError):
            fileio.load_extrinsics(path)


class TestPly:
    def test_header_and_vertex_count(self, tmp_path):
        cloud = PointCloud(np.array([[0.0, 0.1, 1.0], [0.2, -0.1, 2.0]]))
        fileio.save_ply(tmp_path / "c.ply", cloud)
        lines = (tmp_path / "c.ply").read_text().splitlines()
        assert lines[0] == "ply"
        assert "element vertex 2" in lines
        assert lines[-1].split() == ["0.2", "-0.1", "2"]
