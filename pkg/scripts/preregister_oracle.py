#!/usr/bin/env python3
"""Pre-registration run: brute-force surface-variation selection on the
100 canonical single-ridge scenes (seeds 0..99, 0.5 mm noise).

Everything here is deliberately naive and independent of the production
cloud path: explicit deprojection loops, dict-based voxel bucketing,
O(n^2) outlier counting, exhaustive neighbor sort, hand-rolled Jacobi
PCA. The resulting success rate is frozen into the acceptance suite as
the bar the production pipeline must clear (minus 5 percentage points).

Usage: python scripts/preregister_oracle.py [--dist-tol 0.010] [--angle-tol 30]
"""

import argparse
import math
import time

import numpy as np

from collar_grasp import synth
from collar_grasp.synth import (SceneParams, generate_scene, jacobi_eigh_3x3,
                                nearest_fold_normal, oracle_neighbors,
                                polyline_distance)


def naive_cloud(scene):
    """Per-pixel deprojection of masked valid pixels, plain loops."""
    intr = scene.intrinsics
    pts = []
    data = scene.depth.data
    bits = scene.gt_mask.bits
    for r in range(data.shape[0]):
        for c in range(data.shape[1]):
            if bits[r, c] and data[r, c] > 0:
                z = float(data[r, c]) * intr.depth_scale
                pts.append(((c - intr.cx) * z / intr.fx,
                            (r - intr.cy) * z / intr.fy,
                            z))
    return pts


def naive_voxel_downsample(pts, voxel):
    buckets = {}
    for p in pts:
        key = (math.floor(p[0] / voxel), math.floor(p[1] / voxel), math.floor(p[2] / voxel))
        buckets.setdefault(key, []).append(p)
    out = []
    for key in sorted(buckets):
        members = buckets[key]
        n = len(members)
        out.append((sum(m[0] for m in members) / n,
                    sum(m[1] for m in members) / n,
                    sum(m[2] for m in members) / n))
    return out


def naive_outlier_removal(pts, radius, min_neighbors):
    r2 = radius * radius
    kept = []
    for i, p in enumerate(pts):
        count = 0
        for j, q in enumerate(pts):
            if i == j:
                continue
            d2 = (p[0] - q[0]) ** 2 + (p[1] - q[1]) ** 2 + (p[2] - q[2]) ** 2
            if d2 <= r2:
                count += 1
        if count >= min_neighbors:
            kept.append(p)
    return kept


def naive_pca_normal(neighborhood, toward):
    n = len(neighborhood)
    mx = sum(p[0] for p in neighborhood) / n
    my = sum(p[1] for p in neighborhood) / n
    mz = sum(p[2] for p in neighborhood) / n
    cov = [[0.0] * 3 for _ in range(3)]
    for p in neighborhood:
        d = (p[0] - mx, p[1] - my, p[2] - mz)
        for i in range(3):
            for j in range(3):
                cov[i][j] += d[i] * d[j] / n
    _, vecs = jacobi_eigh_3x3(cov)
    normal = np.array([vecs[0][0], vecs[1][0], vecs[2][0]])
    centroid = np.array([mx, my, mz])
    if normal @ (np.asarray(toward) - centroid) < 0:
        normal = -normal
    return normal


def run(dist_tol, angle_tol_deg, n_scenes, noise_std):
    params = SceneParams(noise_std=noise_std)
    voxel, out_radius, out_min, n_region = 0.005, 0.010, 5, 50

    successes = 0
    within_10mm = 0
    within_5mm = 0
    t0 = time.time()
    for seed in range(n_scenes):
        scene = generate_scene(params, seed=seed)
        pts = naive_cloud(scene)
        pts = naive_voxel_downsample(pts, voxel)
        pts = naive_outlier_removal(pts, out_radius, out_min)

        cloud = synth.PointCloud(np.array(pts))
        sigmas = synth.oracle_sigma(cloud, n=n_region)
        best = max(range(len(sigmas)), key=lambda i: (sigmas[i], -i))

        grasp = np.array(pts[best])
        dist = polyline_distance(grasp, scene.fold_curve)
        nbrs = oracle_neighbors(pts, best, n_region)
        z_axis = naive_pca_normal([pts[j] for j in nbrs], toward=(0.0, 0.0, 0.0))
        fold_n = nearest_fold_normal(grasp, scene.fold_curve, scene.fold_normals[0])
        angle = math.degrees(math.acos(min(max(float(z_axis @ fold_n), -1.0), 1.0)))

        ok = dist <= dist_tol and angle <= angle_tol_deg
        successes += ok
        within_10mm += dist <= 0.010
        within_5mm += dist <= 0.005
        if not ok:
            print(f"  seed {seed:3d}: dist {dist * 1000:6.2f} mm  angle {angle:6.2f} deg  FAIL")
    elapsed = time.time() - t0

    print(f"scenes:          {n_scenes} (noise {noise_std * 1000:.1f} mm)")
    print(f"success rate:    {successes}/{n_scenes}  (dist <= {dist_tol * 1000:.0f} mm and angle <= {angle_tol_deg} deg)")
    print(f"within 10 mm:    {within_10mm}/{n_scenes}")
    print(f"within 5 mm:     {within_5mm}/{n_scenes}")
    print(f"elapsed:         {elapsed:.1f} s")


if __name__ == "__main__":
    ap = argparse.ArgumentParser()
    ap.add_argument("--dist-tol", type=float, default=0.010)
    ap.add_argument("--angle-tol", type=float, default=30.0)
    ap.add_argument("--scenes", type=int, default=100)
    ap.add_argument("--noise", type=float, default=0.0005)
    args = ap.parse_args()
    run(args.dist_tol, args.angle_tol, args.scenes, args.noise)
