"""Core domain types: images, masks, point clouds and grasp poses.

All types are immutable value objects after construction. Arrays are
stored as numpy arrays with fixed dtypes; constructors validate shape
and value invariants once so downstream code can rely on them.

Frame convention: camera frame has +Z into the scene, +X right, +Y down.
Depth images hold raw 16-bit values; multiply by the camera's depth_scale
(default 0.001, i.e. millimeters) to get meters. Raw value 0 marks an
invalid pixel (sensor hole).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

ORTHONORMAL_TOL = 1e-9


@dataclass(frozen=True)
class DepthImage:
    """Per-pixel raw depth measurements, row-major (height, width) uint16."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 2:
            raise ValueError(f"depth image must be 2-D, got shape {arr.shape}")
        if arr.dtype != np.uint16:
            if not np.issubdtype(arr.dtype, np.integer):
                raise ValueError(f"depth image must be integer-typed, got {arr.dtype}")
            if arr.min(initial=0) < 0 or arr.max(initial=0) > 65535:
                raise ValueError("depth values must fit in uint16")
            arr = arr.astype(np.uint16)
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]

    def valid(self) -> np.ndarray:
        """Boolean map of pixels with a usable measurement (raw value > 0)."""
        return self.data > 0


@dataclass(frozen=True)
class RgbImage:
    """8-bit RGB image, row-major (height, width, 3) uint8."""

    data: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.data)
        if arr.ndim != 3 or arr.shape[2] != 3:
            raise ValueError(f"rgb image must have shape (h, w, 3), got {arr.shape}")
        if arr.dtype != np.uint8:
            raise ValueError(f"rgb image must be uint8, got {arr.dtype}")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "data", arr)

    @property
    def height(self) -> int:
        return self.data.shape[0]

    @property
    def width(self) -> int:
        return self.data.shape[1]


@dataclass(frozen=True)
class BinaryMask:
    """Per-pixel membership mask, row-major (height, width) bool."""

    bits: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.bits)
        if arr.ndim != 2:
            raise ValueError(f"mask must be 2-D, got shape {arr.shape}")
        arr = arr.astype(bool).copy()
        arr.setflags(write=False)
        object.__setattr__(self, "bits", arr)

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    def count(self) -> int:
        return int(self.bits.sum())

    def matches(self, other) -> bool:
        """True when dimensions agree with another image-like object."""
        return self.height == other.height and self.width == other.width


@dataclass(frozen=True)
class PointCloud:
    """3-D points in meters, (n, 3) float64, tagged with their frame."""

    points: np.ndarray
    frame: str = "camera"

    def __post_init__(self):
        arr = np.asarray(self.points, dtype=np.float64)
        if arr.ndim != 2 or arr.shape[1] != 3:
            raise ValueError(f"points must have shape (n, 3), got {arr.shape}")
        if not np.all(np.isfinite(arr)):
            raise ValueError("point cloud contains non-finite coordinates")
        if self.frame not in ("camera", "world"):
            raise ValueError(f"unknown frame {self.frame!r}")
        if self.frame == "camera" and arr.shape[0] > 0 and arr[:, 2].min() <= 0:
            raise ValueError("camera-frame points must have z > 0")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "points", arr)

    def __len__(self) -> int:
        return self.points.shape[0]


def check_rotation(rotation: np.ndarray, tol: float = ORTHONORMAL_TOL) -> np.ndarray:
    """Validate a 3x3 right-handed orthonormal matrix and return it as float64."""
    r = np.asarray(rotation, dtype=np.float64)
    if r.shape != (3, 3):
        raise ValueError(f"rotation must be 3x3, got shape {r.shape}")
    if not np.allclose(r.T @ r, np.eye(3), atol=tol, rtol=0):
        raise ValueError("rotation is not orthonormal")
    if abs(np.linalg.det(r) - 1.0) > tol:
        raise ValueError("rotation must have det = +1 (right-handed)")
    return r


@dataclass(frozen=True)
class GraspPose:
    """6-DoF pose: position in meters plus an orthonormal orientation frame.

    Orientation columns are the pose's X, Y, Z axes expressed in the
    tagged frame.
    """

    position: np.ndarray
    orientation: np.ndarray
    frame: str = "camera"

    def __post_init__(self):
        pos = np.asarray(self.position, dtype=np.float64).reshape(3)
        rot = check_rotation(self.orientation)
        if self.frame not in ("camera", "world"):
            raise ValueError(f"unknown frame {self.frame!r}")
        pos = pos.copy()
        pos.setflags(write=False)
        rot = rot.copy()
        rot.setflags(write=False)
        object.__setattr__(self, "position", pos)
        object.__setattr__(self, "orientation", rot)

    @property
    def x_axis(self) -> np.ndarray:
        return self.orientation[:, 0]

    @property
    def y_axis(self) -> np.ndarray:
        return self.orientation[:, 1]

    @property
    def z_axis(self) -> np.ndarray:
        return self.orientation[:, 2]
