"""collar-grasp command line tool.

Commands:
  grasp        depth + mask -> grasp plan JSON on stdout
  label        RGB/depth frame directory -> masks + split manifests
  eval         manifest + prediction directory -> metric report
  synth gen    generate seeded synthetic scenes
  synth trial  run grasp trials over scenes or a seed range

Exit codes: 0 ok, 2 no detection, 3 degenerate geometry, 4 I/O error,
5 bad usage/config.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from . import fileio, metrics, synth
from .config import PipelineConfig, load_config, override
from .errors import DegenerateGeometryError, NoDetectionError
from .labeler import DatasetManifest, HsvThresholds, build_dataset
from .pipeline import plan_grasp
from .pose import plan_to_world

EXIT_OK = 0
EXIT_NO_DETECTION = 2
EXIT_DEGENERATE = 3
EXIT_IO = 4
EXIT_USAGE = 5

CONFIG_ENV = "COLLAR_GRASP_CONFIG"


def _resolve_config(args) -> PipelineConfig:
    path = getattr(args, "config", None) or os.environ.get(CONFIG_ENV)
    cfg = load_config(path) if path else PipelineConfig()
    return override(
        cfg,
        link_dist=getattr(args, "link_dist", None),
        dilate_radius=getattr(args, "dilate_radius", None),
        dilate_iters=getattr(args, "dilate_iters", None),
        voxel=getattr(args, "voxel", None),
        outlier_radius=getattr(args, "outlier_radius", None),
        outlier_min=getattr(args, "outlier_min", None),
        big_n=getattr(args, "big_n", None),
        small_n=getattr(args, "small_n", None),
        approach_offset=getattr(args, "approach_offset", None),
        h_min=getattr(args, "h_min", None),
        h_max=getattr(args, "h_max", None),
        s_min=getattr(args, "s_min", None),
        v_min=getattr(args, "v_min", None),
    )


def _add_pipeline_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help=f"TOML config file (or ${CONFIG_ENV})")
    p.add_argument("--link-dist", type=float, dest="link_dist")
    p.add_argument("--dilate-radius", type=int, dest="dilate_radius")
    p.add_argument("--dilate-iters", type=int, dest="dilate_iters")
    p.add_argument("--voxel", type=float)
    p.add_argument("--outlier-radius", type=float, dest="outlier_radius")
    p.add_argument("--outlier-min", type=int, dest="outlier_min")
    p.add_argument("--big-n", type=int, dest="big_n")
    p.add_argument("--small-n", type=int, dest="small_n")
    p.add_argument("--approach-offset", type=float, dest="approach_offset")


def cmd_grasp(args) -> int:
    cfg = _resolve_config(args)
    try:
        depth = fileio.load_depth(args.depth)
        mask = fileio.load_mask(args.mask)
        intr = fileio.load_intrinsics(args.intrinsics)
        ext = fileio.load_extrinsics(args.extrinsics) if args.extrinsics else None
    except (OSError, ValueError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO

    try:
        result = plan_grasp(depth, mask, intr, cfg)
    except NoDetectionError as exc:
        print(f"no-detection: {exc}", file=sys.stderr)
        return EXIT_NO_DETECTION
    except DegenerateGeometryError as exc:
        print(f"degenerate-geometry: {exc}", file=sys.stderr)
        return EXIT_DEGENERATE

    plan = plan_to_world(result.plan, ext) if ext else result.plan
    doc = plan.to_dict()
    doc["diagnostics"] = result.diagnostics()
    print(json.dumps(doc, indent=2))
    return EXIT_OK


def cmd_label(args) -> int:
    cfg = _resolve_config(args)
    thresholds = HsvThresholds(cfg.h_min, cfg.h_max, cfg.s_min, cfg.v_min)
    try:
        splits = tuple(float(x) for x in args.splits.split(","))
        if len(splits) != 3:
            raise ValueError("expected three comma-separated split fractions")
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        manifests = build_dataset(
            args.in_dir, args.out_dir, seed=args.seed, splits=splits,
            thresholds=thresholds, drop_empty=args.drop_empty,
            test_garments=tuple(args.test_garment or ()))
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    for split, manifest in manifests.items():
        print(f"{split}: {len(manifest.entries)} entries")
    return EXIT_OK


def cmd_eval(args) -> int:
    try:
        manifest = DatasetManifest.load(args.manifest)
        report = metrics.evaluate_set(manifest, args.pred, include_macro=args.macro)
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    if args.table:
        print(report.to_table())
    else:
        print(json.dumps(report.to_dict(), indent=2))
    return EXIT_OK


def _parse_seed_range(text: str) -> range:
    if ".." in text:
        lo, hi = text.split("..", 1)
        return range(int(lo), int(hi) + 1)
    return range(int(text), int(text) + 1)


def _scene_params(args) -> synth.SceneParams:
    return synth.SceneParams(
        noise_std=args.noise if args.noise is not None else 0.0005,
        n_ridges=args.ridges,
    )


def cmd_synth_gen(args) -> int:
    params = _scene_params(args)
    out = Path(args.out)
    for seed in _parse_seed_range(args.seeds):
        scene = synth.generate_scene(params, seed)
        synth.save_scene(out / f"scene_{seed:04d}", scene)
    print(f"wrote {len(_parse_seed_range(args.seeds))} scenes to {out}")
    return EXIT_OK


def cmd_synth_trial(args) -> int:
    cfg = _resolve_config(args)
    if bool(args.scenes) == bool(args.seeds):
        print("error: give exactly one of --scenes or --seeds", file=sys.stderr)
        return EXIT_USAGE
    if args.scenes:
        dirs = sorted(p for p in Path(args.scenes).iterdir() if p.is_dir())
        results = [synth.run_trial(synth.load_scene(d), cfg,
                                   args.dist_tol, args.angle_tol) for d in dirs]
    else:
        results = synth.run_trials(_scene_params(args), _parse_seed_range(args.seeds),
                                   cfg, args.dist_tol, args.angle_tol, jobs=args.jobs)
    summary = synth.summarize_trials(results)
    payload = json.dumps(summary, indent=2)
    if args.report:
        Path(args.report).write_text(payload + "\n")
    print(payload)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="collar-grasp", description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("grasp", help="compute a grasp plan from depth + mask")
    p.add_argument("--depth", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--intrinsics", required=True)
    p.add_argument("--extrinsics", help="transform the plan to world frame")
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_grasp)

    p = sub.add_parser("label", help="auto-label frames and build manifests")
    p.add_argument("--in", dest="in_dir", required=True)
    p.add_argument("--out", dest="out_dir", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--splits", default="0.72,0.18,0.10")
    p.add_argument("--drop-empty", action="store_true")
    p.add_argument("--test-garment", action="append",
                   help="hold this garment directory out as the test split (repeatable)")
    p.add_argument("--config", help=f"TOML config file (or ${CONFIG_ENV})")
    p.add_argument("--h-min", type=float, dest="h_min")
    p.add_argument("--h-max", type=float, dest="h_max")
    p.add_argument("--s-min", type=float, dest="s_min")
    p.add_argument("--v-min", type=float, dest="v_min")
    p.set_defaults(func=cmd_label)

    p = sub.add_parser("eval", help="score prediction masks against a manifest")
    p.add_argument("--manifest", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--macro", action="store_true", help="also report per-image macro average")
    p.add_argument("--table", action="store_true", help="print aligned table instead of JSON")
    p.set_defaults(func=cmd_eval)

    p_synth = sub.add_parser("synth", help="synthetic scenes and grasp trials")
    synth_sub = p_synth.add_subparsers(dest="synth_command", required=True)

    p = synth_sub.add_parser("gen", help="generate scene bundles")
    p.add_argument("--out", required=True)
    p.add_argument("--seeds", required=True, help="A..B inclusive, or a single seed")
    p.add_argument("--noise", type=float, help="depth noise std in meters")
    p.add_argument("--ridges", type=int, default=1)
    p.set_defaults(func=cmd_synth_gen)

    p = synth_sub.add_parser("trial", help="run grasp trials")
    p.add_argument("--scenes", help="directory of scene bundles")
    p.add_argument("--seeds", help="A..B inclusive: generate scenes on the fly")
    p.add_argument("--report", help="also write the JSON report here")
    p.add_argument("--noise", type=float, help="depth noise std for --seeds")
    p.add_argument("--ridges", type=int, default=1)
    p.add_argument("--dist-tol", type=float, default=0.010, dest="dist_tol")
    p.add_argument("--angle-tol", type=float, default=30.0, dest="angle_tol")
    p.add_argument("--jobs", type=int, default=1)
    _add_pipeline_flags(p)
    p.set_defaults(func=cmd_synth_trial)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
