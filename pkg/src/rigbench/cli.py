"""Command-line entry point: corrupt, metrics, lidar, histogram subcommands.

Exit codes: 0 success, 1 runtime failure, 2 usage error. Diagnostics go to
stderr; machine-readable reports go to files or stdout.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import analysis, lidar, metrics
from .corruptions import KINDS, SEVERITIES, CorruptionSpec, load_param_overrides
from .imaging import SeededRng, load_image
from .manifest import Manifest
from .pipeline import CorruptionJob, PipelineError, default_jobs, run_pipeline

DEFAULT_SEED = 2023


def cmd_corrupt(args) -> int:
    manifest = Manifest.load(args.manifest)
    overrides = load_param_overrides(args.params_file) if args.params_file else None
    severities = list(SEVERITIES) if args.all_severities else [args.severity]
    jobs = args.jobs if args.jobs else default_jobs()
    reports = []
    for severity in severities:
        spec = CorruptionSpec.resolve(args.corruption, severity, overrides)
        job = CorruptionJob(
            manifest=manifest,
            spec=spec,
            output_root=args.out,
            global_seed=args.seed,
            jobs=jobs,
            whole_sample_frames=args.whole_sample_frames,
        )
        report = run_pipeline(job)
        reports.append(report)
        print(
            f"{spec.kind}/{severity}: {report['total_images']} images "
            f"digest={report['content_digest'][:16]} ({report['elapsed_seconds']}s)",
            file=sys.stderr,
        )
    report_path = Path(args.report) if args.report else Path(args.out) / "report.json"
    report_path.parent.mkdir(parents=True, exist_ok=True)
    report_path.write_text(json.dumps(reports if args.all_severities else reports[0], indent=2) + "\n")
    print(f"report: {report_path}", file=sys.stderr)
    return 0


def cmd_metrics(args) -> int:
    results = metrics.BenchmarkResults.load(args.results)
    try:
        report = metrics.aggregate(results, baseline=args.baseline, reference_scale=args.reference_scale)
    except ValueError as exc:
        if "not in results" in str(exc):
            print(f"error: {exc}", file=sys.stderr)
            return 2
        raise
    text = metrics.render_report(report, fmt=args.format, detail=args.detail)
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def cmd_lidar(args) -> int:
    pc = lidar.load_points(args.input, layout=args.layout)
    kept = lidar.fov_crop(pc, half_angle=args.half_angle, yaw_offset=args.yaw_offset)
    lidar.save_points(kept, args.out)
    print(f"{args.input}: kept {len(kept)}/{len(pc)} points", file=sys.stderr)
    return 0


IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg")


def _dir_images(directory: Path, sample: int | None, seed: int) -> list[Path]:
    paths = sorted(p for p in directory.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES)
    if not paths:
        raise FileNotFoundError(f"no images under {directory}")
    if sample is not None and sample < len(paths):
        rng = SeededRng(seed).split(f"histogram-sample:{directory}")
        idx = sorted(rng.sample_without_replacement(len(paths), sample))
        paths = [paths[i] for i in idx]
    return paths


def cmd_histogram(args) -> int:
    histograms = []
    for directory in args.dirs:
        paths = _dir_images(Path(directory), args.sample, args.seed)
        hist = analysis.pixel_histogram((load_image(p) for p in paths), bins=args.bins)
        histograms.append({"dir": str(directory), "images": len(paths), **hist.to_dict()})
    payload: dict = {"bins": args.bins, "histograms": histograms}
    if len(histograms) > 1:
        dists = {}
        for i in range(len(histograms)):
            for j in range(i + 1, len(histograms)):
                a = analysis.Histogram.from_dict(histograms[i])
                b = analysis.Histogram.from_dict(histograms[j])
                dists[f"{i}-{j}"] = analysis.histogram_distance(a, b)
        payload["distances"] = dists
    text = json.dumps(payload, indent=2) + "\n"
    if args.out:
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="rigbench",
        description="Deterministic corruption synthesis and robustness metrics for camera rigs.",
    )
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="subcommand", required=True)

    corrupt = sub.add_parser("corrupt", help="generate a corrupted copy of a dataset")
    corrupt.add_argument("--manifest", required=True)
    corrupt.add_argument("--out", required=True)
    corrupt.add_argument("--corruption", required=True, choices=KINDS)
    group = corrupt.add_mutually_exclusive_group(required=True)
    group.add_argument("--severity", choices=SEVERITIES)
    group.add_argument("--all-severities", action="store_true")
    corrupt.add_argument("--seed", type=int, default=DEFAULT_SEED)
    corrupt.add_argument("--jobs", type=int, default=0, help="0 = RIGBENCH_JOBS env or core count")
    corrupt.add_argument("--params-file", default=None)
    corrupt.add_argument("--report", default=None)
    corrupt.add_argument(
        "--whole-sample-frames", action="store_true",
        help="frame_lost drops all cameras of a sample together",
    )
    corrupt.set_defaults(func=cmd_corrupt)

    met = sub.add_parser("metrics", help="compute CE/mCE and RR/mRR from a results file")
    met.add_argument("--results", required=True)
    met.add_argument("--baseline", default=metrics.DEFAULT_BASELINE)
    met.add_argument("--format", choices=("csv", "markdown"), default="markdown")
    met.add_argument("--detail", choices=("ce", "rr"), default="ce")
    met.add_argument("--reference-scale", type=float, default=None)
    met.add_argument("--out", default=None)
    met.set_defaults(func=cmd_metrics)

    lid = sub.add_parser("lidar", help="frontal field-of-view crop of a point cloud")
    lid.add_argument("--in", dest="input", required=True)
    lid.add_argument("--out", required=True)
    lid.add_argument("--half-angle", type=float, default=45.0)
    lid.add_argument("--layout", type=int, choices=(4, 5), default=4)
    lid.add_argument("--yaw-offset", type=float, default=0.0)
    lid.set_defaults(func=cmd_lidar)

    hist = sub.add_parser("histogram", help="joint RGB pixel histograms over image directories")
    hist.add_argument("--dir", dest="dirs", action="append", required=True)
    hist.add_argument("--bins", type=int, default=256)
    hist.add_argument("--sample", type=int, default=None)
    hist.add_argument("--seed", type=int, default=DEFAULT_SEED)
    hist.add_argument("--out", default=None)
    hist.set_defaults(func=cmd_histogram)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args)
    except PipelineError as exc:
        print(json.dumps({"errors": exc.errors, "completed": exc.completed}), file=sys.stderr)
        return 1
    except (ValueError, OSError, KeyError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
