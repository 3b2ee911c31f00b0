"""Collar-region grasp pose estimation for deformable garments.

Turns a depth image plus a collar segmentation mask into a 6-DoF grasp
plan: skeleton-based center extraction, surface-variation grasp point
selection, and eigenvector-based orientation estimation, together with
the dataset auto-labeling, perception metrics, and synthetic-scene
tooling used to exercise the pipeline.
"""

from .camera import CameraIntrinsics, Extrinsics, deproject_pixel, project_point, transform_pose
from .cloudops import (GraspSelection, LocalSurfaceStats, knn, local_surface_stats,
                       mask_to_cloud, radius_outlier_removal, select_grasp_point,
                       voxel_downsample)
from .config import PipelineConfig, load_config
from .errors import (BehindCameraError, CollarGraspError, DegenerateGeometryError,
                     InvalidDepthError, NoDetectionError)
from .labeler import DatasetManifest, HsvThresholds, build_dataset, extract_blue_mask
from .maskops import (PixelCluster, SkeletonGraph, closeness_center, cluster_mask,
                      dilate, extract_center, largest_cluster, skeleton_graph,
                      skeletonize)
# NB: the metrics() function itself is reachable as collar_grasp.metrics.metrics;
# re-exporting it bare would shadow the submodule.
from .metrics import ConfusionCounts, MetricReport, confusion, evaluate_set
from .pipeline import PipelineResult, plan_grasp
from .pose import GraspPlan, build_grasp_plan, estimate_orientation, plan_to_world
from .synth import SceneParams, SyntheticScene, generate_scene, oracle_sigma, run_trial
from .types import BinaryMask, DepthImage, GraspPose, PointCloud, RgbImage

__version__ = "0.1.0"
