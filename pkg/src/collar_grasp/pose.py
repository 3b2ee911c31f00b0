"""Grasp orientation from local PCA and pre-grasp/goal pose construction.

The grasp frame is built from the grasp region's eigenvectors: the
least-variance axis (the patch normal) becomes Z, signed to point from
the surface toward the camera so the gripper approaches from the visible
side; the most-variance axis (the fold's longitudinal direction) becomes
Y; X = Y x Z completes a right-handed frame.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .camera import Extrinsics, transform_pose
from .cloudops import GraspSelection, LocalSurfaceStats
from .errors import DegenerateGeometryError
from .types import GraspPose

DEFAULT_APPROACH_OFFSET = 0.050

CONFIDENCE_NORMAL = "normal"
CONFIDENCE_LOW = "low"

# Relative eigenvalue spread below which a patch is treated as isotropic
# (no meaningful normal / longitudinal direction).
_ISOTROPY_REL_TOL = 1e-9


def _first_nonzero_positive(v: np.ndarray) -> np.ndarray:
    """Flip v so its first nonzero component is positive (deterministic sign)."""
    for comp in v:
        if comp != 0.0:
            return v if comp > 0 else -v
    return v


def estimate_orientation(region_stats: LocalSurfaceStats,
                         view_point: np.ndarray = np.zeros(3)) -> tuple[np.ndarray, str]:
    """Orientation matrix (columns X, Y, Z) for a grasp region.

    Z is the patch normal signed toward view_point (the camera origin in
    camera frame); Y is the longitudinal eigenvector with a deterministic
    sign; X = Y x Z. Isotropic regions have no usable eigenvectors and fall
    back to a camera-facing frame flagged "low".

    Returns (orientation, confidence) with confidence "normal" or "low".
    """
    view_point = np.asarray(view_point, dtype=np.float64)
    lam = region_stats.eigenvalues
    trace = float(lam.sum())
    if trace <= 0.0:
        raise DegenerateGeometryError("cannot orient a zero-variance region")

    if (lam[2] - lam[0]) <= _ISOTROPY_REL_TOL * trace:
        to_view = view_point - region_stats.centroid
        norm = np.linalg.norm(to_view)
        if norm == 0.0:
            raise DegenerateGeometryError("view point coincides with region centroid")
        z = to_view / norm
        # Any in-plane direction works; derive one deterministically.
        ref = np.array([1.0, 0.0, 0.0])
        if abs(z @ ref) > 0.9:
            ref = np.array([0.0, 1.0, 0.0])
        y = np.cross(z, ref)
        y /= np.linalg.norm(y)
        x = np.cross(y, z)
        return np.column_stack([x, y, z]), CONFIDENCE_LOW

    z = region_stats.eigenvectors[:, 0]
    if z @ (view_point - region_stats.centroid) < 0:
        z = -z
    y = _first_nonzero_positive(region_stats.eigenvectors[:, 2])
    x = np.cross(y, z)
    return np.column_stack([x, y, z]), CONFIDENCE_NORMAL


@dataclass(frozen=True)
class GraspPlan:
    """Goal pose plus the pre-grasp pose offset along the approach axis.

    The pre-grasp sits approach_offset meters from the goal along +Z
    (away from the surface, toward the camera); the insertion motion then
    travels along -Z into the garment. Both poses share one orientation.
    """

    goal: GraspPose
    pre_grasp: GraspPose
    approach_offset: float
    confidence: str = CONFIDENCE_NORMAL

    def __post_init__(self):
        if not np.array_equal(self.goal.orientation, self.pre_grasp.orientation):
            raise ValueError("pre-grasp orientation must equal goal orientation")
        gap = float(np.linalg.norm(self.pre_grasp.position - self.goal.position))
        if abs(gap - self.approach_offset) > 1e-9:
            raise ValueError(
                f"pre-grasp offset {gap} != approach_offset {self.approach_offset}")
        if self.confidence not in (CONFIDENCE_NORMAL, CONFIDENCE_LOW):
            raise ValueError(f"unknown confidence {self.confidence!r}")

    @property
    def frame(self) -> str:
        return self.goal.frame

    def to_dict(self) -> dict:
        def pose_dict(pose: GraspPose) -> dict:
            return {
                "position": [float(v) for v in pose.position],
                "rotation": [float(v) for v in pose.orientation.ravel()],
            }

        return {
            "frame": self.frame,
            "goal": pose_dict(self.goal),
            "pre_grasp": pose_dict(self.pre_grasp),
            "confidence": self.confidence,
        }

    def to_json(self, **kwargs) -> str:
        return json.dumps(self.to_dict(), **kwargs)

    @staticmethod
    def from_dict(doc: dict) -> "GraspPlan":
        frame = doc["frame"]

        def pose(obj: dict) -> GraspPose:
            return GraspPose(
                np.array(obj["position"], dtype=np.float64),
                np.array(obj["rotation"], dtype=np.float64).reshape(3, 3),
                frame=frame,
            )

        goal = pose(doc["goal"])
        pre = pose(doc["pre_grasp"])
        offset = float(np.linalg.norm(pre.position - goal.position))
        return GraspPlan(goal, pre, offset, doc.get("confidence", CONFIDENCE_NORMAL))


def build_grasp_plan(grasp: GraspSelection, orientation: np.ndarray,
                     approach_offset: float = DEFAULT_APPROACH_OFFSET,
                     confidence: str = CONFIDENCE_NORMAL) -> GraspPlan:
    """Assemble goal and pre-grasp poses around the selected grasp point."""
    goal = GraspPose(grasp.grasp_point, orientation, frame="camera")
    pre_position = goal.position + approach_offset * goal.z_axis
    pre = GraspPose(pre_position, orientation, frame="camera")
    return GraspPlan(goal, pre, approach_offset, confidence)


def plan_to_world(plan: GraspPlan, ext: Extrinsics) -> GraspPlan:
    """Transform both poses into the world frame; the offset is preserved."""
    return GraspPlan(
        transform_pose(plan.goal, ext),
        transform_pose(plan.pre_grasp, ext),
        plan.approach_offset,
        plan.confidence,
    )
