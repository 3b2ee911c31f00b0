"""Automatic ground-truth extraction from RGB frames of blue-painted collars.

RGB frames are thresholded in HSV space to produce binary masks, then
depth/mask pairs are shuffled with a seeded permutation and partitioned
into train/val/test manifests. RGB images are used for labeling only and
never appear in manifests.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import fileio
from .types import BinaryMask, RgbImage

_RGB_PATTERN = re.compile(r"^frame_(\d{6})_rgb\.png$")


@dataclass(frozen=True)
class HsvThresholds:
    """Hue window (degrees) plus saturation/value floors (fractions)."""

    h_min: float = 200.0
    h_max: float = 260.0
    s_min: float = 0.4
    v_min: float = 0.2

    def __post_init__(self):
        if not 0 <= self.h_min < self.h_max < 360:
            raise ValueError("need 0 <= h_min < h_max < 360 (blue needs no wraparound)")
        if not (0 <= self.s_min <= 1 and 0 <= self.v_min <= 1):
            raise ValueError("s_min and v_min must be fractions in [0, 1]")


@dataclass(frozen=True)
class ManifestEntry:
    depth: str
    mask: str
    frame: int
    garment: str | None = None

    def to_dict(self) -> dict:
        doc = {"depth": self.depth, "mask": self.mask, "frame": self.frame}
        if self.garment is not None:
            doc["garment"] = self.garment
        return doc


@dataclass(frozen=True)
class DatasetManifest:
    entries: tuple[ManifestEntry, ...]
    split: str
    shuffle_seed: int

    def save(self, path) -> None:
        fileio.write_manifest(path, [e.to_dict() for e in self.entries])

    @staticmethod
    def load(path, split: str = "train", shuffle_seed: int = 0) -> "DatasetManifest":
        entries = tuple(
            ManifestEntry(d["depth"], d["mask"], int(d["frame"]), d.get("garment"))
            for d in fileio.read_manifest(path))
        return DatasetManifest(entries, split, shuffle_seed)


def rgb_to_hsv(rgb: np.ndarray) -> np.ndarray:
    """Hexcone RGB -> HSV. Input (..., 3) in [0, 255]; output (..., 3) with
    h in degrees [0, 360), s and v fractions. Gray pixels get h = 0."""
    arr = np.asarray(rgb, dtype=np.float64) / 255.0
    r, g, b = arr[..., 0], arr[..., 1], arr[..., 2]
    cmax = arr.max(axis=-1)
    cmin = arr.min(axis=-1)
    delta = cmax - cmin

    h = np.zeros_like(cmax)
    nonzero = delta > 0
    rmax = nonzero & (cmax == r)
    gmax = nonzero & ~rmax & (cmax == g)
    bmax = nonzero & ~rmax & ~gmax
    with np.errstate(invalid="ignore", divide="ignore"):
        h = np.where(rmax, np.mod((g - b) / np.where(delta == 0, 1, delta), 6.0), h)
        h = np.where(gmax, (b - r) / np.where(delta == 0, 1, delta) + 2.0, h)
        h = np.where(bmax, (r - g) / np.where(delta == 0, 1, delta) + 4.0, h)
    h = h * 60.0

    s = np.where(cmax > 0, delta / np.where(cmax == 0, 1, cmax), 0.0)
    return np.stack([h, s, cmax], axis=-1)


def extract_blue_mask(img: RgbImage, th: HsvThresholds = HsvThresholds()) -> BinaryMask:
    """Pixels whose HSV lands in the blue window; pure per-pixel threshold."""
    hsv = rgb_to_hsv(img.data)
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    bits = (h >= th.h_min) & (h <= th.h_max) & (s >= th.s_min) & (v >= th.v_min)
    return BinaryMask(bits)


def find_frame_pairs(frames_dir) -> list[tuple[int, Path, Path]]:
    """Paired frame_%06d_rgb.png / frame_%06d_depth.png files, sorted by index."""
    frames_dir = Path(frames_dir)
    pairs = []
    for rgb_path in sorted(frames_dir.iterdir()):
        m = _RGB_PATTERN.match(rgb_path.name)
        if not m:
            continue
        index = int(m.group(1))
        depth_path = frames_dir / f"frame_{index:06d}_depth.png"
        if not depth_path.exists():
            raise FileNotFoundError(f"missing depth pair for {rgb_path.name}")
        pairs.append((index, rgb_path, depth_path))
    return pairs


def _split_counts(n: int, splits: tuple[float, float, float]) -> tuple[int, int, int]:
    total = sum(splits)
    if total <= 0:
        raise ValueError("split fractions must sum to a positive value")
    a, b, _ = (s / total for s in splits)
    n_train = round(a * n)
    n_val = round((a + b) * n) - n_train
    return n_train, n_val, n - n_train - n_val


def build_dataset(frames_dir, out_dir, seed: int = 0,
                  splits: tuple[float, float, float] = (0.72, 0.18, 0.10),
                  thresholds: HsvThresholds = HsvThresholds(),
                  drop_empty: bool = False,
                  test_garments: tuple[str, ...] = ()) -> dict[str, DatasetManifest]:
    """Label every frame and write shuffled split manifests.

    frames_dir either holds frame pairs directly, or one subdirectory per
    garment. With test_garments given, those garments' frames form the
    test split outright (the paper's unseen-garment protocol) and the
    remaining frames shuffle into train/val.

    Masks land in out_dir as frame_%06d_mask.png (per garment subdirectory
    when present) alongside manifest_{train,val,test}.jsonl.
    """
    frames_dir = Path(frames_dir)
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    garment_dirs = sorted(d for d in frames_dir.iterdir() if d.is_dir())
    sources = [(d.name, d) for d in garment_dirs] if garment_dirs else [(None, frames_dir)]
    for name in test_garments:
        if name not in {g for g, _ in sources}:
            raise ValueError(f"test garment {name!r} has no directory under {frames_dir}")

    labeled: list[ManifestEntry] = []
    for garment, src in sources:
        mask_dir = out_dir / garment if garment else out_dir
        mask_dir.mkdir(parents=True, exist_ok=True)
        for index, rgb_path, depth_path in find_frame_pairs(src):
            rgb = fileio.load_rgb(rgb_path)
            depth = fileio.load_depth(depth_path)
            if rgb.height != depth.height or rgb.width != depth.width:
                raise ValueError(f"frame {index}: rgb {rgb.height}x{rgb.width} does not "
                                 f"match depth {depth.height}x{depth.width}")
            mask = extract_blue_mask(rgb, thresholds)
            if drop_empty and mask.count() == 0:
                continue
            mask_path = mask_dir / f"frame_{index:06d}_mask.png"
            fileio.save_mask(mask_path, mask)
            labeled.append(ManifestEntry(str(depth_path), str(mask_path), index, garment))

    rng = np.random.default_rng(seed)
    held_out = [e for e in labeled if e.garment in test_garments]
    pool = [e for e in labeled if e.garment not in test_garments]
    order = rng.permutation(len(pool))
    shuffled = [pool[i] for i in order]

    if test_garments:
        a, b, _ = splits
        n_train, n_val, _ = _split_counts(len(shuffled), (a, b, 0.0))
        parts = {
            "train": shuffled[:n_train],
            "val": shuffled[n_train:n_train + n_val],
            "test": held_out,
        }
    else:
        n_train, n_val, _ = _split_counts(len(shuffled), splits)
        parts = {
            "train": shuffled[:n_train],
            "val": shuffled[n_train:n_train + n_val],
            "test": shuffled[n_train + n_val:],
        }

    manifests = {}
    for split, entries in parts.items():
        manifest = DatasetManifest(tuple(entries), split, seed)
        manifest.save(out_dir / f"manifest_{split}.jsonl")
        manifests[split] = manifest
    return manifests
