"""Pinhole camera model: de-projection, projection, and frame transforms."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import BehindCameraError, InvalidDepthError
from .types import GraspPose, check_rotation


@dataclass(frozen=True)
class CameraIntrinsics:
    """Pinhole intrinsics. depth_scale converts raw depth units to meters."""

    fx: float
    fy: float
    cx: float
    cy: float
    depth_scale: float = 0.001

    def __post_init__(self):
        if self.fx <= 0 or self.fy <= 0:
            raise ValueError("focal lengths must be positive")
        if self.depth_scale <= 0:
            raise ValueError("depth_scale must be positive")


@dataclass(frozen=True)
class Extrinsics:
    """Camera-to-world rigid transform."""

    rotation: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        rot = check_rotation(self.rotation)
        t = np.asarray(self.translation, dtype=np.float64).reshape(3)
        rot = rot.copy()
        rot.setflags(write=False)
        t = t.copy()
        t.setflags(write=False)
        object.__setattr__(self, "rotation", rot)
        object.__setattr__(self, "translation", t)

    @staticmethod
    def identity() -> "Extrinsics":
        return Extrinsics(np.eye(3), np.zeros(3))


def deproject_pixel(u: float, v: float, depth_raw: float, intr: CameraIntrinsics) -> np.ndarray:
    """Lift pixel (u, v) with raw depth to a camera-frame 3-D point in meters."""
    if depth_raw <= 0:
        raise InvalidDepthError(f"pixel ({u}, {v}) has no valid depth")
    z = depth_raw * intr.depth_scale
    x = (u - intr.cx) * z / intr.fx
    y = (v - intr.cy) * z / intr.fy
    return np.array([x, y, z])


def deproject_pixels(us: np.ndarray, vs: np.ndarray, depth_raw: np.ndarray,
                     intr: CameraIntrinsics) -> np.ndarray:
    """Vectorized deprojection; all depths must be valid (> 0)."""
    depth_raw = np.asarray(depth_raw, dtype=np.float64)
    if depth_raw.size and depth_raw.min() <= 0:
        raise InvalidDepthError("deproject_pixels requires all depths > 0")
    z = depth_raw * intr.depth_scale
    x = (np.asarray(us, dtype=np.float64) - intr.cx) * z / intr.fx
    y = (np.asarray(vs, dtype=np.float64) - intr.cy) * z / intr.fy
    return np.stack([x, y, z], axis=-1)


def project_point(p: np.ndarray, intr: CameraIntrinsics) -> tuple[float, float, float]:
    """Project a camera-frame point to (u, v, depth_raw). Inverse of deproject_pixel."""
    x, y, z = np.asarray(p, dtype=np.float64).reshape(3)
    if z <= 0:
        raise BehindCameraError(f"point with z={z} is behind the camera")
    u = intr.fx * x / z + intr.cx
    v = intr.fy * y / z + intr.cy
    return float(u), float(v), float(z / intr.depth_scale)


def transform_pose(pose: GraspPose, ext: Extrinsics) -> GraspPose:
    """Map a camera-frame pose into the world frame."""
    if pose.frame != "camera":
        raise ValueError(f"expected camera-frame pose, got {pose.frame!r}")
    position = ext.rotation @ pose.position + ext.translation
    orientation = ext.rotation @ pose.orientation
    return GraspPose(position, orientation, frame="world")
