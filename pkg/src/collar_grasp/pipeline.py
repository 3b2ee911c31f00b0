"""End-to-end grasp planning: mask + depth in, grasp plan out."""

from __future__ import annotations

from dataclasses import dataclass

from .camera import CameraIntrinsics
from .cloudops import (GraspSelection, mask_to_cloud, radius_outlier_removal,
                       select_grasp_point, voxel_downsample)
from .config import PipelineConfig
from .errors import NoDetectionError
from .maskops import extract_center
from .pose import GraspPlan, build_grasp_plan, estimate_orientation
from .types import BinaryMask, DepthImage


@dataclass(frozen=True)
class PipelineResult:
    plan: GraspPlan
    selection: GraspSelection
    center_pixel: tuple[int, int]
    cloud_points_raw: int
    cloud_points_preprocessed: int

    def diagnostics(self) -> dict:
        return {
            "center_pixel": list(self.center_pixel),
            "cloud_points_raw": self.cloud_points_raw,
            "cloud_points_preprocessed": self.cloud_points_preprocessed,
            "sigma": self.selection.sigma,
        }


def plan_grasp(depth: DepthImage, mask: BinaryMask, intr: CameraIntrinsics,
               cfg: PipelineConfig = PipelineConfig()) -> PipelineResult:
    """Run the full chain: center extraction, cloud preprocessing,
    surface-variation selection, orientation, pre-grasp construction."""
    center = extract_center(mask, cfg.link_dist, cfg.dilate_radius, cfg.dilate_iters,
                            closing=cfg.closing, diagonal_weight=cfg.diagonal_weight)

    cloud = mask_to_cloud(depth, mask, intr)
    raw_count = len(cloud)
    cloud = voxel_downsample(cloud, cfg.voxel)
    cloud = radius_outlier_removal(cloud, cfg.outlier_radius, cfg.outlier_min)
    if len(cloud) == 0:
        raise NoDetectionError("all cloud points removed by preprocessing")

    selection = select_grasp_point(cloud, center, depth, intr,
                                   n_candidates=cfg.big_n, n_region=cfg.small_n,
                                   mask=mask)
    orientation, confidence = estimate_orientation(selection.region_stats)
    plan = build_grasp_plan(selection, orientation, cfg.approach_offset, confidence)
    return PipelineResult(plan, selection, center, raw_count, len(cloud))
