"""Orientation estimation and grasp-plan construction."""

import numpy as np
import pytest

from collar_grasp import cloudops, pose
from collar_grasp.camera import Extrinsics
from collar_grasp.cloudops import GraspSelection, local_surface_stats
from collar_grasp.types import GraspPose

from conftest import random_rotation


def patch_stats(points):
    return local_surface_stats(np.asarray(points, dtype=float))


def make_selection(grasp_point, region_points):
    stats = patch_stats(region_points)
    return GraspSelection(
        grasp_point=np.asarray(grasp_point, dtype=float),
        grasp_index=0,
        grasp_region=np.arange(len(region_points)),
        region_stats=stats,
        center_point=np.asarray(grasp_point, dtype=float),
        sigma=stats.sigma,
    )


def planar_patch_at(z=1.0, elongate_axis=0):
    """Regular flat grid in the z=z plane, stretched along one axis, so the
    principal axes are exactly the coordinate axes."""
    long = np.linspace(-0.05, 0.05, 9)
    short = np.linspace(-0.01, 0.01, 3)
    gl, gs = np.meshgrid(long, short)
    pts = np.zeros((gl.size, 3))
    pts[:, elongate_axis] = gl.ravel()
    pts[:, 1 - elongate_axis] = gs.ravel()
    pts[:, 2] = z
    return pts


class TestEstimateOrientation:
    def test_planar_patch_analytic_frame(self):
        """Flat patch at z=1 elongated along camera X, viewed from the
        origin: Z must point back at the camera (0,0,-1), Y must be the
        elongation axis +-x, X completes right-handed."""
        stats = patch_stats(planar_patch_at(z=1.0, elongate_axis=0))
        rot, confidence = pose.estimate_orientation(stats, view_point=np.zeros(3))
        assert confidence == "normal"
        np.testing.assert_allclose(rot[:, 2], [0, 0, -1], atol=1e-9)
        np.testing.assert_allclose(np.abs(rot[:, 1]), [1, 0, 0], atol=1e-9)
        assert np.linalg.det(rot) == pytest.approx(1.0, abs=1e-9)

    def test_frame_orthonormal_on_random_patches(self, rng):
        for _ in range(30):
            pts = rng.normal(0, 0.01, size=(50, 3)) * [1.0, 0.5, 0.1] + [0, 0, 1.0]
            rot, _ = pose.estimate_orientation(patch_stats(pts))
            np.testing.assert_allclose(rot.T @ rot, np.eye(3), atol=1e-8)
            assert abs(np.linalg.det(rot) - 1.0) < 1e-9

    def test_z_points_toward_camera(self, rng):
        for _ in range(30):
            pts = rng.normal(0, 0.01, size=(50, 3)) * [1.0, 0.6, 0.05] + \
                rng.uniform(-0.2, 0.2, 3) + [0, 0, 1.0]
            stats = patch_stats(pts)
            rot, _ = pose.estimate_orientation(stats)
            assert rot[:, 2] @ (np.zeros(3) - stats.centroid) > 0

    def test_rotation_equivariance(self, rng):
        """Rotating the patch rotates the frame (up to per-axis sign)."""
        pts = rng.normal(0, 0.01, size=(60, 3)) * [1.0, 0.4, 0.05] + [0, 0, 1.0]
        rot0, _ = pose.estimate_orientation(patch_stats(pts))
        for _ in range(10):
            r = random_rotation(rng)
            shift = np.array([0, 0, 2.0])  # keep the patch in front of the camera
            rot1, _ = pose.estimate_orientation(patch_stats(pts @ r.T + shift))
            for k in range(3):
                expected = r @ rot0[:, k]
                dot = abs(expected @ rot1[:, k])
                angle = np.arccos(np.clip(dot, -1, 1))
                assert angle < 1e-6, f"axis {k} off by {angle} rad"

    def test_isotropic_fallback_low_confidence(self):
        corners = np.array([[sx, sy, sz] for sx in (-1, 1)
                            for sy in (-1, 1) for sz in (-1, 1)], dtype=float)
        corners = corners * 0.01 + [0.05, -0.02, 1.0]
        rot, confidence = pose.estimate_orientation(patch_stats(corners))
        assert confidence == "low"
        centroid = corners.mean(axis=0)
        to_camera = -centroid / np.linalg.norm(centroid)
        np.testing.assert_allclose(rot[:, 2], to_camera, atol=1e-9)
        np.testing.assert_allclose(rot.T @ rot, np.eye(3), atol=1e-9)
        assert abs(np.linalg.det(rot) - 1.0) < 1e-9


class TestBuildGraspPlan:
    def test_pre_grasp_arithmetic(self):
        """Goal (0.3, 0.2, 0.01) with Z = (0,0,1), offset 50 mm -> the
        pre-grasp sits at (0.3, 0.2, 0.06)."""
        sel = make_selection([0.3, 0.2, 0.01], planar_patch_at(z=0.01))
        rot = np.column_stack([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 1.0]])
        assert np.linalg.det(rot) == pytest.approx(1.0)
        plan = pose.build_grasp_plan(sel, rot, approach_offset=0.05)
        np.testing.assert_allclose(plan.pre_grasp.position, [0.3, 0.2, 0.06])

    def test_zero_offset_collapses(self):
        sel = make_selection([0.1, 0.0, 0.5], planar_patch_at(z=0.5))
        rot, _ = pose.estimate_orientation(sel.region_stats)
        plan = pose.build_grasp_plan(sel, rot, approach_offset=0.0)
        np.testing.assert_array_equal(plan.pre_grasp.position, plan.goal.position)

    def test_offset_norm_invariant(self, rng):
        for _ in range(20):
            pts = rng.normal(0, 0.01, size=(50, 3)) * [1, 0.5, 0.1] + [0, 0, 1.0]
            sel = make_selection(pts[0], pts)
            rot, conf = pose.estimate_orientation(sel.region_stats)
            plan = pose.build_grasp_plan(sel, rot, confidence=conf)
            gap = np.linalg.norm(plan.pre_grasp.position - plan.goal.position)
            assert abs(gap - 0.05) < 1e-9
            assert np.array_equal(plan.goal.orientation, plan.pre_grasp.orientation)


class TestPlanToWorld:
    def _plan(self, rng):
        pts = rng.normal(0, 0.01, size=(50, 3)) * [1, 0.5, 0.1] + [0, 0, 1.0]
        sel = make_selection(pts[0], pts)
        rot, conf = pose.estimate_orientation(sel.region_stats)
        return pose.build_grasp_plan(sel, rot, confidence=conf)

    def test_identity_unchanged(self, rng):
        plan = self._plan(rng)
        out = pose.plan_to_world(plan, Extrinsics.identity())
        np.testing.assert_array_equal(out.goal.position, plan.goal.position)
        assert out.frame == "world"

    def test_rotation_preserves_offset(self, rng):
        plan = self._plan(rng)
        ext = Extrinsics(random_rotation(rng), np.zeros(3))
        out = pose.plan_to_world(plan, ext)
        gap = np.linalg.norm(out.pre_grasp.position - out.goal.position)
        assert abs(gap - plan.approach_offset) < 1e-9

    def test_matches_homogeneous_matrix_composition(self, rng):
        plan = self._plan(rng)
        r = random_rotation(rng)
        t = rng.normal(size=3)
        out = pose.plan_to_world(plan, Extrinsics(r, t))
        for pose_in, pose_out in ((plan.goal, out.goal), (plan.pre_grasp, out.pre_grasp)):
            m_ext = np.eye(4)
            m_ext[:3, :3] = r
            m_ext[:3, 3] = t
            m_pose = np.eye(4)
            m_pose[:3, :3] = pose_in.orientation
            m_pose[:3, 3] = pose_in.position
            m_world = m_ext @ m_pose
            np.testing.assert_allclose(pose_out.orientation, m_world[:3, :3], atol=1e-9)
            np.testing.assert_allclose(pose_out.position, m_world[:3, 3], atol=1e-9)

    def test_build_then_transform_commutes(self, rng):
        """transform(build(sel)) == build(transformed goal) on positions."""
        pts = rng.normal(0, 0.01, size=(50, 3)) * [1, 0.5, 0.1] + [0, 0, 1.0]
        sel = make_selection(pts[0], pts)
        rot, conf = pose.estimate_orientation(sel.region_stats)
        plan = pose.build_grasp_plan(sel, rot, confidence=conf)
        r = random_rotation(rng)
        t = rng.normal(size=3)
        ext = Extrinsics(r, t)
        via_plan = pose.plan_to_world(plan, ext)
        # rebuild in world frame from transformed ingredients
        goal_w = r @ plan.goal.position + t
        z_w = r @ plan.goal.z_axis
        pre_w = goal_w + plan.approach_offset * z_w
        np.testing.assert_allclose(via_plan.pre_grasp.position, pre_w, atol=1e-9)


class TestPlanJson:
    def test_round_trip(self, rng):
        pts = rng.normal(0, 0.01, size=(50, 3)) * [1, 0.5, 0.1] + [0, 0, 1.0]
        sel = make_selection(pts[0], pts)
        rot, conf = pose.estimate_orientation(sel.region_stats)
        plan = pose.build_grasp_plan(sel, rot, confidence=conf)
        doc = plan.to_dict()
        back = pose.GraspPlan.from_dict(doc)
        np.testing.assert_allclose(back.goal.position, plan.goal.position, atol=1e-15)
        np.testing.assert_allclose(back.goal.orientation, plan.goal.orientation, atol=1e-15)
        assert back.confidence == plan.confidence

    def test_schema_shape(self, rng):
        pts = rng.normal(0, 0.01, size=(50, 3)) * [1, 0.5, 0.1] + [0, 0, 1.0]
        sel = make_selection(pts[0], pts)
        rot, conf = pose.estimate_orientation(sel.region_stats)
        doc = pose.build_grasp_plan(sel, rot, confidence=conf).to_dict()
        assert set(doc) == {"frame", "goal", "pre_grasp", "confidence"}
        assert set(doc["goal"]) == {"position", "rotation"}
        assert len(doc["goal"]["rotation"]) == 9
