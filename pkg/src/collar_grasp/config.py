"""Pipeline configuration: one flat document of every tunable.

Config files are TOML with per-module prefixes (mask.link_dist,
cloud.voxel, pose.approach_offset, label.h_min); CLI flags override
file values. Unknown keys are rejected so typos cannot silently fall
back to defaults.
"""

from __future__ import annotations

from dataclasses import dataclass, fields, replace

try:
    import tomllib
except ImportError:  # Python 3.10
    import tomli as tomllib

# TOML key -> PipelineConfig field
_KEY_MAP = {
    "mask.link_dist": "link_dist",
    "mask.dilate_radius": "dilate_radius",
    "mask.dilate_iters": "dilate_iters",
    "mask.closing": "closing",
    "mask.diagonal_weight": "diagonal_weight",
    "cloud.voxel": "voxel",
    "cloud.outlier_radius": "outlier_radius",
    "cloud.outlier_min": "outlier_min",
    "cloud.big_n": "big_n",
    "cloud.small_n": "small_n",
    "pose.approach_offset": "approach_offset",
    "label.h_min": "h_min",
    "label.h_max": "h_max",
    "label.s_min": "s_min",
    "label.v_min": "v_min",
}


@dataclass(frozen=True)
class PipelineConfig:
    # mask-ops
    link_dist: float = 10.0
    dilate_radius: int = 1
    dilate_iters: int = 1
    closing: bool = False
    diagonal_weight: float = 1.0
    # cloud-ops
    voxel: float = 0.005
    outlier_radius: float = 0.010
    outlier_min: int = 5
    big_n: int = 50
    small_n: int = 50
    # pose
    approach_offset: float = 0.050
    # labeler HSV thresholds
    h_min: float = 200.0
    h_max: float = 260.0
    s_min: float = 0.4
    v_min: float = 0.2

    def __post_init__(self):
        if self.link_dist <= 0:
            raise ValueError("mask.link_dist must be positive")
        if self.dilate_radius < 1 or self.dilate_iters < 1:
            raise ValueError("mask dilation parameters must be >= 1")
        if self.voxel <= 0 or self.outlier_radius <= 0:
            raise ValueError("cloud.voxel and cloud.outlier_radius must be positive")
        if self.outlier_min < 1 or self.big_n < 1 or self.small_n < 1:
            raise ValueError("cloud counts must be >= 1")
        if self.approach_offset < 0:
            raise ValueError("pose.approach_offset must be >= 0")
        if not 0 <= self.h_min < self.h_max < 360:
            raise ValueError("label hue window must satisfy 0 <= h_min < h_max < 360")
        if not (0 <= self.s_min <= 1 and 0 <= self.v_min <= 1):
            raise ValueError("label saturation/value thresholds must be in [0, 1]")
        if self.diagonal_weight <= 0:
            raise ValueError("mask.diagonal_weight must be positive")


def load_config(path) -> PipelineConfig:
    """Parse a TOML config file, rejecting unknown keys."""
    with open(path, "rb") as f:
        doc = tomllib.load(f)
    flat = {}
    for section, value in doc.items():
        if not isinstance(value, dict):
            raise ValueError(f"config key {section!r} must live in a module section")
        for key, v in value.items():
            flat[f"{section}.{key}"] = v
    unknown = sorted(set(flat) - set(_KEY_MAP))
    if unknown:
        raise ValueError(f"unknown config keys: {', '.join(unknown)}")
    return replace(PipelineConfig(), **{_KEY_MAP[k]: v for k, v in flat.items()})


def override(cfg: PipelineConfig, **updates) -> PipelineConfig:
    """Apply non-None keyword overrides (CLI flags beat file values)."""
    known = {f.name for f in fields(PipelineConfig)}
    bad = set(updates) - known
    if bad:
        raise ValueError(f"unknown config fields: {sorted(bad)}")
    changed = {k: v for k, v in updates.items() if v is not None}
    return replace(cfg, **changed) if changed else cfg
