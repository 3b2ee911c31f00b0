"""File I/O: PNG images, camera JSON, PLY clouds, dataset manifests.

File conventions:
  depth  -- 16-bit grayscale PNG, raw sensor units (millimeters by default)
  rgb    -- 8-bit RGB PNG
  mask   -- 8-bit grayscale PNG, 0 = background, 255 = collar
  camera -- JSON with fx, fy, cx, cy, depth_scale / rotation (9 row-major),
            translation (3)
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np
from PIL import Image

from .camera import CameraIntrinsics, Extrinsics
from .types import BinaryMask, DepthImage, PointCloud, RgbImage


def load_depth(path) -> DepthImage:
    with Image.open(path) as img:
        arr = np.asarray(img)
    if arr.ndim != 2:
        raise ValueError(f"{path}: depth PNG must be single-channel, got shape {arr.shape}")
    if arr.dtype not in (np.uint16, np.int32, np.uint8):
        raise ValueError(f"{path}: unexpected depth dtype {arr.dtype}")
    return DepthImage(arr.astype(np.uint16))


def save_depth(path, depth: DepthImage) -> None:
    # uint16 arrays map to Pillow mode "I;16", a 16-bit grayscale PNG.
    Image.fromarray(depth.data).save(path, format="PNG")


def load_rgb(path) -> RgbImage:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("RGB"))
    return RgbImage(arr)


def save_rgb(path, rgb: RgbImage) -> None:
    Image.fromarray(rgb.data, mode="RGB").save(path, format="PNG")


def load_mask(path) -> BinaryMask:
    with Image.open(path) as img:
        arr = np.asarray(img.convert("L"))
    return BinaryMask(arr >= 128)


def save_mask(path, mask: BinaryMask) -> None:
    arr = np.where(mask.bits, 255, 0).astype(np.uint8)
    Image.fromarray(arr, mode="L").save(path, format="PNG")


def load_intrinsics(path) -> CameraIntrinsics:
    with open(path) as f:
        doc = json.load(f)
    return CameraIntrinsics(
        fx=float(doc["fx"]),
        fy=float(doc["fy"]),
        cx=float(doc["cx"]),
        cy=float(doc["cy"]),
        depth_scale=float(doc.get("depth_scale", 0.001)),
    )


def save_intrinsics(path, intr: CameraIntrinsics) -> None:
    doc = {"fx": intr.fx, "fy": intr.fy, "cx": intr.cx, "cy": intr.cy,
           "depth_scale": intr.depth_scale}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def load_extrinsics(path) -> Extrinsics:
    with open(path) as f:
        doc = json.load(f)
    rotation = np.array(doc["rotation"], dtype=np.float64).reshape(3, 3)
    translation = np.array(doc["translation"], dtype=np.float64)
    return Extrinsics(rotation, translation)


def save_extrinsics(path, ext: Extrinsics) -> None:
    doc = {"rotation": [float(x) for x in ext.rotation.ravel()],
           "translation": [float(x) for x in ext.translation]}
    with open(path, "w") as f:
        json.dump(doc, f, indent=2)
        f.write("\n")


def save_ply(path, cloud: PointCloud) -> None:
    """ASCII PLY with float x y z in meters, for debugging in cloud viewers."""
    lines = [
        "ply",
        "format ascii 1.0",
        f"element vertex {len(cloud)}",
        "property float x",
        "property float y",
        "property float z",
        "end_header",
    ]
    with open(path, "w") as f:
        f.write("\n".join(lines) + "\n")
        for x, y, z in cloud.points:
            f.write(f"{x:.9g} {y:.9g} {z:.9g}\n")


def write_manifest(path, entries: list[dict]) -> None:
    """JSON lines, one {"depth": ..., "mask": ..., "frame": ...} entry per line."""
    with open(path, "w") as f:
        for entry in entries:
            f.write(json.dumps(entry) + "\n")


def read_manifest(path) -> list[dict]:
    entries = []
    with open(path) as f:
        for line in f:
            line = line.strip()
            if line:
                entries.append(json.loads(line))
    return entries


def atomic_write_bytes(path, payload: bytes) -> None:
    """Write via temp file + rename so readers never observe partial files."""
    path = Path(path)
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_bytes(payload)
    tmp.replace(path)
