"""Shared fixtures: a reference camera and small deterministic helpers."""

import numpy as np
import pytest

from collar_grasp.camera import CameraIntrinsics


@pytest.fixture
def intr():
    """A RealSense-like camera at VGA scale, millimeter depth units."""
    return CameraIntrinsics(fx=600.0, fy=600.0, cx=319.5, cy=239.5, depth_scale=0.001)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)


def random_rotation(rng) -> np.ndarray:
    """Uniform-ish random rotation via QR of a Gaussian matrix."""
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 2] = -q[:, 2]
    return q
