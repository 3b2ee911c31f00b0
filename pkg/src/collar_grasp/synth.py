"""Synthetic crumpled-collar scenes and the brute-force selection oracle.

Scenes are height fields over the image plane: a low-frequency sum of
random sinusoids (the crumpled base cloth) plus Gaussian-profile ridges
along random circular arcs (the collar folds), rendered to a 16-bit
depth image with seeded sensor noise. The ground-truth mask is the band
within twice the ridge width of each arc, and the fold crest is stored
as a 3-D polyline with per-vertex surface normals, which makes grasp
trials checkable without any cloth simulation.

oracle_sigma is a deliberately naive, independent reimplementation of
the surface-variation scoring (plain Python loops, hand-rolled Jacobi
eigensolver) used only to cross-check the production path.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from . import fileio
from .camera import CameraIntrinsics
from .errors import CollarGraspError, DegenerateGeometryError, NoDetectionError
from .types import BinaryMask, DepthImage, PointCloud


@dataclass(frozen=True)
class SceneParams:
    """Knobs for scene generation. Lengths in meters."""

    width: int = 320
    height: int = 240
    fx: float = 280.0
    fy: float = 280.0
    base_depth: float = 0.5
    base_amplitude: float = 0.004
    base_waves: int = 3
    ridge_height: float = 0.018
    ridge_width: float = 0.010
    noise_std: float = 0.0005
    depth_scale: float = 0.001
    n_ridges: int = 1
    # The rendered fold continues this many radians past each end of the
    # masked band, like real cloth running beyond the segmented region;
    # without it the fold's end caps dominate the surface variation.
    ridge_end_extension: float = 0.6

    def __post_init__(self):
        if self.ridge_height <= 0 or self.ridge_width <= 0:
            raise ValueError("ridge height and width must be positive")
        if self.n_ridges < 1:
            raise ValueError("n_ridges must be >= 1")

    @property
    def cx(self) -> float:
        return (self.width - 1) / 2.0

    @property
    def cy(self) -> float:
        return (self.height - 1) / 2.0

    def intrinsics(self) -> CameraIntrinsics:
        return CameraIntrinsics(self.fx, self.fy, self.cx, self.cy, self.depth_scale)

    def to_dict(self) -> dict:
        return {
            "width": self.width, "height": self.height,
            "fx": self.fx, "fy": self.fy,
            "base_depth": self.base_depth,
            "base_amplitude": self.base_amplitude,
            "base_waves": self.base_waves,
            "ridge_height": self.ridge_height,
            "ridge_width": self.ridge_width,
            "noise_std": self.noise_std,
            "depth_scale": self.depth_scale,
            "n_ridges": self.n_ridges,
            "ridge_end_extension": self.ridge_end_extension,
        }

    @staticmethod
    def from_dict(doc: dict) -> "SceneParams":
        return SceneParams(**doc)


@dataclass(frozen=True)
class Arc:
    """Circular arc in the lateral plane: center, radius, start angle, span."""

    center_x: float
    center_y: float
    radius: float
    start: float
    span: float

    def distance(self, x, y):
        """Distance from lateral points to the arc (angle clamped to the span)."""
        dx = np.asarray(x) - self.center_x
        dy = np.asarray(y) - self.center_y
        angle = np.arctan2(dy, dx)
        rel = np.mod(angle - self.start, 2 * np.pi)
        on_arc = rel <= self.span
        dist_circle = np.abs(np.hypot(dx, dy) - self.radius)
        ex0 = self.point_at(0.0)
        ex1 = self.point_at(self.span)
        dist_ends = np.minimum(np.hypot(np.asarray(x) - ex0[0], np.asarray(y) - ex0[1]),
                               np.hypot(np.asarray(x) - ex1[0], np.asarray(y) - ex1[1]))
        return np.where(on_arc, dist_circle, dist_ends)

    def point_at(self, rel_angle: float) -> tuple[float, float]:
        a = self.start + rel_angle
        return (self.center_x + self.radius * math.cos(a),
                self.center_y + self.radius * math.sin(a))

    def in_band(self, x, y, halfwidth: float):
        """Tube membership: within the angular span and halfwidth of the circle.

        The cuts at the span ends are flat (no end caps), so every band
        point sits laterally next to the arc itself.
        """
        dx = np.asarray(x) - self.center_x
        dy = np.asarray(y) - self.center_y
        on_arc = np.mod(np.arctan2(dy, dx) - self.start, 2 * np.pi) <= self.span
        return on_arc & (np.abs(np.hypot(dx, dy) - self.radius) <= halfwidth)

    def to_dict(self) -> dict:
        return {"center_x": self.center_x, "center_y": self.center_y,
                "radius": self.radius, "start": self.start, "span": self.span}


@dataclass(frozen=True)
class SyntheticScene:
    depth: DepthImage
    gt_mask: BinaryMask
    fold_curves: tuple[np.ndarray, ...]
    fold_normals: tuple[np.ndarray, ...]
    intrinsics: CameraIntrinsics
    params: SceneParams
    seed: int
    ridge_masks: tuple[BinaryMask, ...] = ()
    # analytic geometry (base-wave coefficients and fold arcs), kept so the
    # noiseless surface stays recomputable in closed form
    waves: tuple = ()
    arcs: tuple = ()

    @property
    def fold_curve(self) -> np.ndarray:
        return self.fold_curves[0]


class _SceneField:
    """Noiseless analytic height field h(x, y) of a scene (base + ridges)."""

    def __init__(self, waves: list[tuple[float, float, float, float]], arcs: list[Arc],
                 ridge_height: float, ridge_width: float):
        self.waves = waves
        self.arcs = arcs
        self.ridge_height = ridge_height
        self.ridge_width = ridge_width

    def height(self, x, y):
        x = np.asarray(x, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        h = np.zeros(np.broadcast(x, y).shape)
        for amp, wavelength, theta, phase in self.waves:
            h = h + amp * np.cos(2 * np.pi / wavelength *
                                 (x * math.cos(theta) + y * math.sin(theta)) + phase)
        for arc in self.arcs:
            d = arc.distance(x, y)
            h = h + self.ridge_height * np.exp(-d ** 2 / (2 * self.ridge_width ** 2))
        return h


def _surface_point(x, y, field: _SceneField, base_depth: float):
    """3-D point of the rendered surface for lateral coordinates (x, y).

    Pixels are parametrized by their lateral position at the reference
    depth, so the true point shrinks laterally by z / base_depth.
    """
    z = base_depth - field.height(x, y)
    return np.stack(np.broadcast_arrays(x * z / base_depth, y * z / base_depth, z), axis=-1)


def _surface_normal(x: float, y: float, field: _SceneField, base_depth: float,
                    step: float = 1e-5) -> np.ndarray:
    """Unit surface normal at (x, y), oriented toward the camera origin."""
    p = _surface_point(np.array(x), np.array(y), field, base_depth)
    tx = (_surface_point(np.array(x + step), np.array(y), field, base_depth) -
          _surface_point(np.array(x - step), np.array(y), field, base_depth))
    ty = (_surface_point(np.array(x), np.array(y + step), field, base_depth) -
          _surface_point(np.array(x), np.array(y - step), field, base_depth))
    n = np.cross(tx, ty)
    n = n / np.linalg.norm(n)
    if n @ (-p) < 0:
        n = -n
    return n


def _lateral_extent(params: SceneParams) -> tuple[float, float]:
    half_x = (params.width / 2.0) * params.base_depth / params.fx
    half_y = (params.height / 2.0) * params.base_depth / params.fy
    return half_x, half_y


def _draw_arc(rng: np.random.Generator, params: SceneParams,
              x_range: tuple[float, float]) -> Arc:
    return Arc(
        center_x=rng.uniform(*x_range),
        center_y=rng.uniform(-0.03, 0.03),
        radius=rng.uniform(0.05, 0.09) if params.n_ridges == 1 else rng.uniform(0.035, 0.055),
        start=rng.uniform(0.0, 2 * np.pi),
        span=rng.uniform(2.0, 3.3),
    )


def _arc_fits(arc: Arc, params: SceneParams, margin: float) -> bool:
    half_x, half_y = _lateral_extent(params)
    band = 2 * params.ridge_width + margin
    angles = np.linspace(0.0, arc.span, 64)
    xs = arc.center_x + arc.radius * np.cos(arc.start + angles)
    ys = arc.center_y + arc.radius * np.sin(arc.start + angles)
    return bool(np.all(np.abs(xs) < half_x - band) and np.all(np.abs(ys) < half_y - band))


def generate_scene(params: SceneParams = SceneParams(), seed: int = 0) -> SyntheticScene:
    """Render one seeded scene; identical (params, seed) gives identical output."""
    rng = np.random.default_rng(seed)

    waves = []
    for _ in range(params.base_waves):
        waves.append((
            params.base_amplitude / max(params.base_waves, 1),
            rng.uniform(0.15, 0.40),
            rng.uniform(0.0, 2 * np.pi),
            rng.uniform(0.0, 2 * np.pi),
        ))

    half_x, _ = _lateral_extent(params)
    if params.n_ridges == 1:
        x_ranges = [(-0.04, 0.04)]
    else:
        # Spread ridge arcs across disjoint lateral strips so their
        # ground-truth bands cannot touch.
        strip = 2 * half_x / params.n_ridges
        x_ranges = [(-half_x + (i + 0.35) * strip, -half_x + (i + 0.65) * strip)
                    for i in range(params.n_ridges)]

    intr = params.intrinsics()
    us, vs = np.meshgrid(np.arange(params.width), np.arange(params.height))
    lat_x = (us - intr.cx) * params.base_depth / intr.fx
    lat_y = (vs - intr.cy) * params.base_depth / intr.fy

    ext = params.ridge_end_extension
    for _ in range(50):
        arcs: list[Arc] = []
        for x_range in x_ranges:
            for _ in range(200):
                arc = _draw_arc(rng, params, x_range)
                if _arc_fits(arc, params, margin=0.01):
                    arcs.append(arc)
                    break
            else:
                raise CollarGraspError("could not place a ridge arc inside the frame")
        ridge_arcs = [replace(a, start=a.start - ext, span=a.span + 2 * ext) for a in arcs]
        ridge_masks = [BinaryMask(a.in_band(lat_x, lat_y, 2 * params.ridge_width))
                       for a in arcs]
        # The rendered (extended) folds must stay clear of every other
        # band, or a foreign ridge would leak into that band's cloud.
        extended = [a.distance(lat_x, lat_y) <= 2 * params.ridge_width for a in ridge_arcs]
        clean = all(not (extended[i] & ridge_masks[j].bits).any()
                    for i in range(len(arcs)) for j in range(len(arcs)) if i != j)
        if clean:
            break
    else:
        raise CollarGraspError("could not place disjoint ridge bands")

    field = _SceneField(waves, ridge_arcs, params.ridge_height, params.ridge_width)

    z = params.base_depth - field.height(lat_x, lat_y)
    z = z + rng.normal(0.0, params.noise_std, z.shape) if params.noise_std > 0 else z
    raw = np.clip(np.rint(z / params.depth_scale), 1, 65535).astype(np.uint16)
    depth = DepthImage(raw)

    gt_bits = np.zeros((params.height, params.width), dtype=bool)
    for m in ridge_masks:
        gt_bits |= m.bits

    fold_curves = []
    fold_normals = []
    for arc in arcs:
        # Keep a small angular margin so every sampled vertex's pixel falls
        # strictly inside the band despite pixel-center quantization.
        margin = min(0.04, arc.span / 8)
        n_samples = max(int(arc.radius * arc.span / 0.002), 8)
        angles = np.linspace(margin, arc.span - margin, n_samples)
        xs = arc.center_x + arc.radius * np.cos(arc.start + angles)
        ys = arc.center_y + arc.radius * np.sin(arc.start + angles)
        pts = _surface_point(xs, ys, field, params.base_depth)
        normals = np.stack([_surface_normal(float(x), float(y), field, params.base_depth)
                            for x, y in zip(xs, ys)])
        fold_curves.append(pts)
        fold_normals.append(normals)

    return SyntheticScene(
        depth=depth,
        gt_mask=BinaryMask(gt_bits),
        fold_curves=tuple(fold_curves),
        fold_normals=tuple(fold_normals),
        intrinsics=intr,
        params=params,
        seed=seed,
        ridge_masks=tuple(ridge_masks),
        waves=tuple(waves),
        arcs=tuple(arcs),
    )


def noiseless_depth(scene: SyntheticScene) -> np.ndarray:
    """Float depth (meters) of the scene's analytic surface, before noise
    and 16-bit quantization."""
    params = scene.params
    ext = params.ridge_end_extension
    ridge_arcs = [replace(a, start=a.start - ext, span=a.span + 2 * ext)
                  for a in scene.arcs]
    field = _SceneField(list(scene.waves), ridge_arcs,
                        params.ridge_height, params.ridge_width)
    us, vs = np.meshgrid(np.arange(params.width), np.arange(params.height))
    lat_x = (us - params.cx) * params.base_depth / params.fx
    lat_y = (vs - params.cy) * params.base_depth / params.fy
    return params.base_depth - field.height(lat_x, lat_y)


# ---------------------------------------------------------------------------
# Brute-force oracle: independent of cloudops on purpose. Plain loops,
# hand-rolled Jacobi eigensolver, no shared numerics.
# ---------------------------------------------------------------------------

def jacobi_eigh_3x3(matrix, sweeps: int = 64) -> tuple[list[float], list[list[float]]]:
    """Cyclic Jacobi eigendecomposition of a symmetric 3x3 matrix.

    Returns (eigenvalues ascending, eigenvectors as column lists matching
    the eigenvalue order).
    """
    a = [[float(matrix[i][j]) for j in range(3)] for i in range(3)]
    v = [[1.0 if i == j else 0.0 for j in range(3)] for i in range(3)]
    for _ in range(sweeps):
        off = math.sqrt(a[0][1] ** 2 + a[0][2] ** 2 + a[1][2] ** 2)
        if off < 1e-30:
            break
        for p, q in ((0, 1), (0, 2), (1, 2)):
            if a[p][q] == 0.0:
                continue
            theta = (a[q][q] - a[p][p]) / (2.0 * a[p][q])
            t = math.copysign(1.0, theta) / (abs(theta) + math.sqrt(theta * theta + 1.0))
            c = 1.0 / math.sqrt(t * t + 1.0)
            s = t * c
            for k in range(3):
                akp, akq = a[k][p], a[k][q]
                a[k][p] = c * akp - s * akq
                a[k][q] = s * akp + c * akq
            for k in range(3):
                apk, aqk = a[p][k], a[q][k]
                a[p][k] = c * apk - s * aqk
                a[q][k] = s * apk + c * aqk
            for k in range(3):
                vkp, vkq = v[k][p], v[k][q]
                v[k][p] = c * vkp - s * vkq
                v[k][q] = s * vkp + c * vkq
    order = sorted(range(3), key=lambda i: a[i][i])
    eigenvalues = [a[i][i] for i in order]
    eigenvectors = [[v[r][i] for i in order] for r in range(3)]
    return eigenvalues, eigenvectors


def _oracle_sigma_at(points: list[tuple[float, float, float]]) -> float:
    """Eq.-by-eq surface variation of one neighborhood, all naive loops."""
    n = len(points)
    mx = sum(p[0] for p in points) / n
    my = sum(p[1] for p in points) / n
    mz = sum(p[2] for p in points) / n
    cov = [[0.0] * 3 for _ in range(3)]
    for p in points:
        d = (p[0] - mx, p[1] - my, p[2] - mz)
        for i in range(3):
            for j in range(3):
                cov[i][j] += d[i] * d[j]
    for i in range(3):
        for j in range(3):
            cov[i][j] /= n
    eigenvalues, _ = jacobi_eigh_3x3(cov)
    lam = [max(e, 0.0) for e in eigenvalues]
    total = lam[0] + lam[1] + lam[2]
    if total <= 0.0:
        raise DegenerateGeometryError("oracle: coincident neighborhood")
    return min(max(lam[0] / total, 0.0), 1.0 / 3.0)


def oracle_neighbors(points: list[tuple[float, float, float]], index: int,
                     n: int) -> list[int]:
    """Indices of the n nearest points to points[index] by exhaustive sort."""
    target = points[index]
    ranked = sorted(range(len(points)),
                    key=lambda j: ((points[j][0] - target[0]) ** 2 +
                                   (points[j][1] - target[1]) ** 2 +
                                   (points[j][2] - target[2]) ** 2, j))
    return ranked[: min(n, len(points))]


def oracle_sigma(cloud: PointCloud, n: int = 50) -> list[float]:
    """Surface variation of every cloud point over its n nearest neighbors."""
    pts = [tuple(map(float, p)) for p in cloud.points]
    sigmas = []
    for i in range(len(pts)):
        nbrs = oracle_neighbors(pts, i, n)
        sigmas.append(_oracle_sigma_at([pts[j] for j in nbrs]))
    return sigmas


def polyline_distance(point: np.ndarray, polyline: np.ndarray) -> float:
    """Min distance from a point to a polyline (exact point-to-segment)."""
    p = np.asarray(point, dtype=np.float64)
    a = polyline[:-1]
    b = polyline[1:]
    ab = b - a
    denom = np.einsum("ij,ij->i", ab, ab)
    t = np.clip(np.einsum("ij,ij->i", p - a, ab) / np.where(denom == 0, 1.0, denom), 0.0, 1.0)
    closest = a + t[:, None] * ab
    return float(np.min(np.linalg.norm(closest - p, axis=1)))


def nearest_fold_normal(point: np.ndarray, polyline: np.ndarray,
                        normals: np.ndarray) -> np.ndarray:
    """Surface normal stored at the polyline vertex closest to the point."""
    d = np.linalg.norm(polyline - np.asarray(point), axis=1)
    return normals[int(np.argmin(d))]


# ---------------------------------------------------------------------------
# Grasp trials
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TrialResult:
    """Outcome of one synthetic grasp trial.

    reason is "ok" on success, else one of "too-far", "bad-angle",
    "no-detection", "degenerate". ridge_distances holds the grasp point's
    distance to every planted fold (meters); on pipeline failure the plan
    and geometry fields are None/empty.
    """

    seed: int
    success: bool
    reason: str
    distance: float | None = None
    angle_deg: float | None = None
    ridge_distances: tuple[float, ...] = ()
    plan: object = None

    def to_dict(self) -> dict:
        return {
            "seed": self.seed,
            "success": self.success,
            "reason": self.reason,
            "distance": self.distance,
            "angle_deg": self.angle_deg,
            "ridge_distances": list(self.ridge_distances),
        }


def run_trial(scene: SyntheticScene, cfg=None, dist_tol: float = 0.010,
              angle_tol_deg: float = 30.0) -> TrialResult:
    """Run the grasp pipeline on a scene's ground-truth mask and score it.

    Success means the grasp point lies within dist_tol of the (nearest)
    planted fold crest and the approach Z-axis is within angle_tol_deg of
    the surface normal at the closest fold vertex.
    """
    from .config import PipelineConfig
    from .pipeline import plan_grasp

    if cfg is None:
        cfg = PipelineConfig()
    try:
        result = plan_grasp(scene.depth, scene.gt_mask, scene.intrinsics, cfg)
    except NoDetectionError:
        return TrialResult(scene.seed, False, "no-detection")
    except DegenerateGeometryError:
        return TrialResult(scene.seed, False, "degenerate")

    grasp = result.plan.goal.position
    ridge_distances = tuple(polyline_distance(grasp, c) for c in scene.fold_curves)
    nearest = int(np.argmin(ridge_distances))
    distance = ridge_distances[nearest]

    fold_normal = nearest_fold_normal(grasp, scene.fold_curves[nearest],
                                      scene.fold_normals[nearest])
    cos = float(np.clip(result.plan.goal.z_axis @ fold_normal, -1.0, 1.0))
    angle = math.degrees(math.acos(cos))

    if distance > dist_tol:
        reason = "too-far"
    elif angle > angle_tol_deg:
        reason = "bad-angle"
    else:
        reason = "ok"
    return TrialResult(scene.seed, reason == "ok", reason, distance, angle,
                       ridge_distances, result.plan)


def run_trials(params: SceneParams, seeds, cfg=None, dist_tol: float = 0.010,
               angle_tol_deg: float = 30.0, jobs: int = 1) -> list[TrialResult]:
    """Trial every seed; results are ordered by seed regardless of jobs."""
    seeds = list(seeds)
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            return list(pool.map(_trial_for_seed,
                                 [(params, s, cfg, dist_tol, angle_tol_deg) for s in seeds]))
    return [_trial_for_seed((params, s, cfg, dist_tol, angle_tol_deg)) for s in seeds]


def _trial_for_seed(args) -> TrialResult:
    params, seed, cfg, dist_tol, angle_tol = args
    return run_trial(generate_scene(params, seed), cfg, dist_tol, angle_tol)


def summarize_trials(results: list[TrialResult]) -> dict:
    reasons: dict[str, int] = {}
    for r in results:
        reasons[r.reason] = reasons.get(r.reason, 0) + 1
    return {
        "trials": len(results),
        "successes": sum(r.success for r in results),
        "success_rate": (sum(r.success for r in results) / len(results)) if results else 0.0,
        "failure_reasons": {k: v for k, v in sorted(reasons.items()) if k != "ok"},
        "results": [r.to_dict() for r in results],
    }


# ---------------------------------------------------------------------------
# Scene persistence
# ---------------------------------------------------------------------------

def save_scene(directory, scene: SyntheticScene) -> None:
    """Write depth.png, mask.png and scene.json into a directory."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    fileio.save_depth(directory / "depth.png", scene.depth)
    fileio.save_mask(directory / "mask.png", scene.gt_mask)
    fileio.save_intrinsics(directory / "intrinsics.json", scene.intrinsics)
    doc = {
        "seed": scene.seed,
        "params": scene.params.to_dict(),
        "fold_curves": [c.tolist() for c in scene.fold_curves],
        "fold_normals": [n.tolist() for n in scene.fold_normals],
        "waves": [list(wv) for wv in scene.waves],
        "arcs": [a.to_dict() for a in scene.arcs],
    }
    with open(directory / "scene.json", "w") as f:
        json.dump(doc, f)
        f.write("\n")


def load_scene(directory) -> SyntheticScene:
    directory = Path(directory)
    depth = fileio.load_depth(directory / "depth.png")
    mask = fileio.load_mask(directory / "mask.png")
    intr = fileio.load_intrinsics(directory / "intrinsics.json")
    with open(directory / "scene.json") as f:
        doc = json.load(f)
    params = SceneParams.from_dict(doc["params"])
    return SyntheticScene(
        depth=depth,
        gt_mask=mask,
        fold_curves=tuple(np.array(c) for c in doc["fold_curves"]),
        fold_normals=tuple(np.array(n) for n in doc["fold_normals"]),
        intrinsics=intr,
        params=params,
        seed=int(doc["seed"]),
        waves=tuple(tuple(wv) for wv in doc.get("waves", ())),
        arcs=tuple(Arc(**a) for a in doc.get("arcs", ())),
    )
