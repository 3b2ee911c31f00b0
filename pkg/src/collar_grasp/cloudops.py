"""Collar point-cloud processing and surface-variation grasp selection.

The grasp point is chosen by lifting the skeleton center to 3-D, taking
its N nearest cloud points as candidates, and scoring each candidate by
the surface variation of its own n-nearest-neighbor patch:

    sigma = lambda0 / (lambda0 + lambda1 + lambda2)

with eigenvalues (ascending) of the biased 3x3 covariance of the patch.
sigma is 0 on planes, 1/3 for fully isotropic scatter, and high on the
sharp folds a gripper can pinch.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

from .camera import CameraIntrinsics, deproject_pixel, deproject_pixels
from .errors import DegenerateGeometryError, NoDetectionError
from .types import BinaryMask, DepthImage, PointCloud

SIGMA_MAX = 1.0 / 3.0


@dataclass(frozen=True)
class LocalSurfaceStats:
    """PCA summary of a local neighborhood.

    eigenvalues are ascending (lambda0 <= lambda1 <= lambda2, clamped at 0);
    eigenvectors[:, k] is the unit eigenvector for eigenvalues[k]; sigma is
    the surface variation lambda0 / trace.
    """

    centroid: np.ndarray
    covariance: np.ndarray
    eigenvalues: np.ndarray
    eigenvectors: np.ndarray
    sigma: float

    @property
    def normal(self) -> np.ndarray:
        """Least-variance axis: the patch's surface normal (sign-ambiguous)."""
        return self.eigenvectors[:, 0]


@dataclass(frozen=True)
class GraspSelection:
    """Selected grasp point plus the neighborhood that justifies it."""

    grasp_point: np.ndarray
    grasp_index: int
    grasp_region: np.ndarray
    region_stats: LocalSurfaceStats
    center_point: np.ndarray
    sigma: float


def mask_to_cloud(depth: DepthImage, mask: BinaryMask, intr: CameraIntrinsics) -> PointCloud:
    """De-project every masked pixel with valid depth, in row-major order."""
    if not mask.matches(depth):
        raise ValueError(
            f"mask {mask.height}x{mask.width} does not match depth "
            f"{depth.height}x{depth.width}")
    select = mask.bits & depth.valid()
    rows, cols = np.nonzero(select)
    if rows.size == 0:
        raise NoDetectionError("no masked pixel has valid depth")
    pts = deproject_pixels(cols, rows, depth.data[rows, cols], intr)
    return PointCloud(pts, frame="camera")


def voxel_downsample(cloud: PointCloud, voxel: float) -> PointCloud:
    """One centroid per occupied voxel of an origin-anchored grid.

    Output order is sorted by voxel key, so the result is deterministic
    regardless of input order.
    """
    if voxel <= 0:
        raise ValueError("voxel size must be positive")
    if len(cloud) == 0:
        return cloud
    keys = np.floor(cloud.points / voxel).astype(np.int64)
    uniq, inverse = np.unique(keys, axis=0, return_inverse=True)
    sums = np.zeros((uniq.shape[0], 3))
    np.add.at(sums, inverse, cloud.points)
    counts = np.bincount(inverse, minlength=uniq.shape[0])
    return PointCloud(sums / counts[:, None], frame=cloud.frame)


def radius_outlier_removal(cloud: PointCloud, radius: float, min_neighbors: int) -> PointCloud:
    """Keep points with at least min_neighbors other points within radius."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    if min_neighbors < 1:
        raise ValueError("min_neighbors must be >= 1")
    if len(cloud) == 0:
        return cloud
    tree = cKDTree(cloud.points)
    counts = tree.query_ball_point(cloud.points, r=radius, return_length=True)
    keep = counts - 1 >= min_neighbors  # query includes the point itself
    return PointCloud(cloud.points[keep], frame=cloud.frame)


def knn(cloud: PointCloud, query: np.ndarray, k: int) -> np.ndarray:
    """Indices of the min(k, n) nearest points to query; ties keep lower index.

    Exact brute force: collar clouds are small after preprocessing, and the
    stable sort gives the deterministic tie-break the selection stage needs.
    """
    if k < 1:
        raise ValueError("k must be >= 1")
    if len(cloud) == 0:
        raise NoDetectionError("knn on empty cloud")
    d2 = np.sum((cloud.points - np.asarray(query, dtype=np.float64)) ** 2, axis=1)
    order = np.argsort(d2, kind="stable")
    return order[: min(k, len(cloud))]


def neighborhood_covariance(points: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Centroid and biased (1/n) covariance of an (n, 3) neighborhood."""
    pts = np.asarray(points, dtype=np.float64)
    centroid = pts.mean(axis=0)
    dev = pts - centroid
    return centroid, dev.T @ dev / pts.shape[0]


def eigh_psd(matrix: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Symmetric eigendecomposition, ascending, with tiny negative
    eigenvalues (floating-point noise on flat patches) clamped to zero."""
    eigenvalues, eigenvectors = np.linalg.eigh(matrix)
    if eigenvalues[0] < -1e-12:
        raise DegenerateGeometryError(
            f"covariance not positive semi-definite: lambda0 = {eigenvalues[0]}")
    return np.maximum(eigenvalues, 0.0), eigenvectors


def local_surface_stats(points: np.ndarray) -> LocalSurfaceStats:
    """Centroid, biased covariance, eigendecomposition and surface variation.

    Covariance uses the 1/n normalization. Raises on an empty input and on
    fully coincident points (zero trace), where no frame is defined.
    """
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 3:
        raise ValueError(f"points must be (n, 3), got {pts.shape}")
    n = pts.shape[0]
    if n == 0:
        raise NoDetectionError("cannot compute surface stats of an empty neighborhood")
    if bool((pts == pts[0]).all()):
        raise DegenerateGeometryError("all neighborhood points coincide")
    centroid, cov = neighborhood_covariance(pts)
    trace = float(np.trace(cov))
    if trace <= 0.0:
        raise DegenerateGeometryError("neighborhood has zero variance")
    eigenvalues, eigenvectors = eigh_psd(cov)
    # The mathematical bound sigma <= 1/3 can be breached by one ulp when the
    # trace rounds; clamp so the invariant holds exactly.
    sigma = min(max(float(eigenvalues[0] / eigenvalues.sum()), 0.0), SIGMA_MAX)
    return LocalSurfaceStats(centroid, cov, eigenvalues, eigenvectors, sigma)


def surface_variation(points: np.ndarray) -> float:
    return local_surface_stats(points).sigma


def lift_center_pixel(center: tuple[int, int], depth: DepthImage,
                      intr: CameraIntrinsics, mask: BinaryMask | None = None,
                      search_radius: int = 5) -> np.ndarray:
    """De-project the skeleton center pixel to 3-D.

    If the center lands on a sensor hole (depth 0), fall back to the
    nearest valid pixel within search_radius (restricted to the mask when
    given); ties break on (row, col). With no valid pixel nearby the
    detection is unusable.
    """
    row, col = center
    if depth.data[row, col] > 0:
        return deproject_pixel(col, row, float(depth.data[row, col]), intr)

    h, w = depth.data.shape
    best = None
    for r in range(max(0, row - search_radius), min(h, row + search_radius + 1)):
        for c in range(max(0, col - search_radius), min(w, col + search_radius + 1)):
            if depth.data[r, c] == 0:
                continue
            if mask is not None and not mask.bits[r, c]:
                continue
            d2 = (r - row) ** 2 + (c - col) ** 2
            if d2 > search_radius ** 2:
                continue
            key = (d2, r, c)
            if best is None or key < best:
                best = key
    if best is None:
        raise NoDetectionError(
            f"no valid depth within {search_radius} px of center {center}")
    _, r, c = best
    return deproject_pixel(c, r, float(depth.data[r, c]), intr)


def select_grasp_point(cloud: PointCloud, center_pixel: tuple[int, int],
                       depth: DepthImage, intr: CameraIntrinsics,
                       n_candidates: int = 50, n_region: int = 50,
                       mask: BinaryMask | None = None) -> GraspSelection:
    """Pick the candidate of maximum surface variation near the center.

    Candidates are the n_candidates nearest cloud points to the lifted
    center; each is scored by sigma over its own n_region nearest
    neighbors (itself included). Ties on sigma keep the lowest cloud
    index. Both counts clamp to the cloud size.
    """
    if len(cloud) == 0:
        raise NoDetectionError("empty point cloud")
    center_point = lift_center_pixel(center_pixel, depth, intr, mask)
    candidates = knn(cloud, center_point, n_candidates)

    best_idx = -1
    best_sigma = -1.0
    for idx in candidates:
        region = cloud.points[knn(cloud, cloud.points[idx], n_region)]
        try:
            sigma = local_surface_stats(region).sigma
        except DegenerateGeometryError:
            continue
        if sigma > best_sigma or (sigma == best_sigma and idx < best_idx):
            best_sigma = sigma
            best_idx = int(idx)
    if best_idx < 0:
        raise DegenerateGeometryError("every candidate neighborhood is degenerate")

    region_idx = knn(cloud, cloud.points[best_idx], n_region)
    region_stats = local_surface_stats(cloud.points[region_idx])
    return GraspSelection(
        grasp_point=cloud.points[best_idx].copy(),
        grasp_index=best_idx,
        grasp_region=region_idx,
        region_stats=region_stats,
        center_point=center_point,
        sigma=best_sigma,
    )
