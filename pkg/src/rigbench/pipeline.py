"""Deterministic batch executor that writes a corrupted copy of a dataset.

Every randomized decision is keyed by a seed derived from stable task
coordinates (scene, sample, camera, kind, severity), never from iteration
order, so output bytes are a pure function of (manifest, spec, global_seed)
regardless of worker count.
"""

from __future__ import annotations

import hashlib
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corruptions import CorruptionSpec, apply_corruption
from .imaging import SeededRng, image_size, load_image, save_png, stable_hash64
from .manifest import Manifest, Sample, Scene


def derive_seed(
    global_seed: int,
    scene_id: str,
    sample_index: int,
    camera_name: str,
    kind: str,
    severity: str,
) -> int:
    """Stable 64-bit seed for one (scene, sample, camera) work unit."""
    return stable_hash64("task", global_seed, scene_id, sample_index, camera_name, kind, severity)


def scene_level_seed(global_seed: int, scene_id: str, kind: str, severity: str) -> int:
    return stable_hash64("scene", global_seed, scene_id, kind, severity)


def select_dropped_cameras(cameras, n_dropped: int, rng: SeededRng) -> tuple[str, ...]:
    """Pick n_dropped cameras uniformly without replacement, once per scene."""
    if not 0 <= n_dropped <= len(cameras):
        raise ValueError(f"n_dropped={n_dropped} exceeds rig size {len(cameras)}")
    idx = rng.sample_without_replacement(len(cameras), n_dropped)
    return tuple(cameras[i] for i in sorted(idx))


def frame_lost_decisions(
    n_samples: int,
    n_cameras: int,
    p_drop: float,
    rng: SeededRng,
    whole_sample: bool = False,
) -> np.ndarray:
    """Boolean (n_samples, n_cameras) drop mask, i.i.d. Bernoulli(p_drop).

    whole_sample drops all cameras of a sample together, for rigs where a
    lost frame means the whole synchronized capture is gone.
    """
    if not 0.0 <= p_drop <= 1.0:
        raise ValueError("p_drop must be in [0, 1]")
    if whole_sample:
        per_sample = rng.random(n_samples) < p_drop
        return np.repeat(per_sample[:, None], n_cameras, axis=1)
    return rng.random((n_samples, n_cameras)) < p_drop


@dataclass
class CorruptionJob:
    manifest: Manifest
    spec: CorruptionSpec
    output_root: str
    global_seed: int = 2023
    jobs: int = 1
    whole_sample_frames: bool = False


class PipelineError(RuntimeError):
    """Raised when any task fails; carries per-path errors and partial count."""

    def __init__(self, errors: list[dict], completed: int):
        self.errors = errors
        self.completed = completed
        paths = ", ".join(e["path"] for e in errors[:5])
        super().__init__(
            f"{len(errors)} task(s) failed ({paths}{', ...' if len(errors) > 5 else ''}); "
            f"{completed} partial outputs written"
        )


def _execute_task(task: dict) -> tuple[str, str]:
    """Worker body: produce one output PNG, return (relpath, sha256)."""
    action = task["action"]
    dst = task["dst"]
    if action == "zero":
        h, w = image_size(task["src"])
        img = np.zeros((h, w, 3), dtype=np.uint8)
    else:
        img = load_image(task["src"])
        if action == "op":
            spec = CorruptionSpec(task["kind"], task["severity"], tuple(task["params"]))
            img = apply_corruption(img, spec, SeededRng(task["seed"]))
    Path(dst).parent.mkdir(parents=True, exist_ok=True)
    save_png(dst, img)
    digest = hashlib.sha256(Path(dst).read_bytes()).hexdigest()
    return task["rel"], digest


def _worker_init():
    # keep OpenCV from spawning its own pool inside each process
    import cv2

    cv2.setNumThreads(0)


def _build_tasks(job: CorruptionJob, tree_root: Path) -> list[dict]:
    spec = job.spec
    tasks = []
    for scene in job.manifest.scenes:
        dropped: tuple[str, ...] = ()
        lost = None
        if spec.kind == "camera_crash":
            rng = SeededRng(
                scene_level_seed(job.global_seed, scene.scene_id, spec.kind, spec.severity)
            ).split("camera-crash")
            dropped = select_dropped_cameras(job.manifest.cameras, int(spec.params[0]), rng)
        elif spec.kind == "frame_lost":
            rng = SeededRng(
                scene_level_seed(job.global_seed, scene.scene_id, spec.kind, spec.severity)
            ).split("frame-lost")
            lost = frame_lost_decisions(
                len(scene.samples), len(job.manifest.cameras), float(spec.params[0]),
                rng, job.whole_sample_frames,
            )
        for i, sample in enumerate(scene.samples):
            for c, cam in enumerate(job.manifest.cameras):
                rel = f"{scene.scene_id}/{i:04d}_{cam}.png"
                task = {
                    "src": sample.images[cam],
                    "dst": str(tree_root / rel),
                    "rel": rel,
                    "kind": spec.kind,
                    "severity": spec.severity,
                }
                if spec.kind == "camera_crash":
                    task["action"] = "zero" if cam in dropped else "copy"
                elif spec.kind == "frame_lost":
                    task["action"] = "zero" if lost[i, c] else "copy"
                else:
                    task["action"] = "op"
                    task["params"] = spec.params
                    task["seed"] = derive_seed(
                        job.global_seed, scene.scene_id, i, cam, spec.kind, spec.severity
                    )
                tasks.append(task)
    return tasks


def _check_output_root(job: CorruptionJob) -> None:
    root = Path(job.output_root).resolve()
    for scene in job.manifest.scenes:
        for sample in scene.samples:
            for path in sample.images.values():
                if Path(path).resolve().is_relative_to(root):
                    raise ValueError(f"output root {root} contains input file {path}")


def run_pipeline(job: CorruptionJob) -> dict:
    """Write output_root/<kind>/<severity>/... and return the generation report."""
    job.manifest.validate()
    spec = job.spec
    tree_root = Path(job.output_root) / spec.kind / spec.severity
    _check_output_root(job)
    tree_root.mkdir(parents=True, exist_ok=True)

    tasks = _build_tasks(job, tree_root)
    t0 = time.perf_counter()
    results: list[tuple[str, str]] = []
    errors: list[dict] = []
    if job.jobs <= 1 or len(tasks) <= 1:
        for task in tasks:
            try:
                results.append(_execute_task(task))
            except Exception as exc:  # noqa: BLE001 - every failure must name its path
                errors.append({"path": task["src"], "error": str(exc)})
    else:
        with ProcessPoolExecutor(max_workers=job.jobs, initializer=_worker_init) as pool:
            futures = {pool.submit(_execute_task, t): t for t in tasks}
            for future, task in futures.items():
                try:
                    results.append(future.result())
                except Exception as exc:  # noqa: BLE001
                    errors.append({"path": task["src"], "error": str(exc)})
    elapsed = time.perf_counter() - t0

    if errors:
        raise PipelineError(sorted(errors, key=lambda e: e["path"]), completed=len(results))

    out_manifest = _rewritten_manifest(job.manifest)
    manifest_path = tree_root / "manifest.json"
    if job.manifest.scenes:
        out_manifest.save(manifest_path)

    results.sort()
    digest = hashlib.sha256()
    for rel, sha in results:
        digest.update(f"{rel}\0{sha}\n".encode())

    scene_counts = {}
    for rel, _ in results:
        scene_id = rel.split("/", 1)[0]
        scene_counts[scene_id] = scene_counts.get(scene_id, 0) + 1

    return {
        "kind": spec.kind,
        "severity": spec.severity,
        "params": list(spec.params),
        "global_seed": job.global_seed,
        "jobs": job.jobs,
        "scene_counts": scene_counts,
        "total_images": len(results),
        "content_digest": digest.hexdigest(),
        "elapsed_seconds": round(elapsed, 3),
        "output_tree": str(tree_root),
        "manifest": str(manifest_path) if job.manifest.scenes else None,
    }


def _rewritten_manifest(src: Manifest) -> Manifest:
    """The input manifest with image paths rewritten to the output layout."""
    scenes = []
    for scene in src.scenes:
        samples = []
        for i, sample in enumerate(scene.samples):
            images = {cam: f"{scene.scene_id}/{i:04d}_{cam}.png" for cam in src.cameras}
            samples.append(Sample(sample.timestamp, images, sample.lidar_path))
        scenes.append(Scene(scene.scene_id, samples))
    return Manifest(cameras=list(src.cameras), scenes=scenes)


def rebuild_manifest(tree_root) -> Manifest:
    """Re-read the manifest of a generated tree, verifying every file exists."""
    tree_root = Path(tree_root)
    m = Manifest.load(tree_root / "manifest.json")
    for scene in m.scenes:
        for sample in scene.samples:
            for cam, path in sample.images.items():
                if not Path(path).is_file():
                    raise FileNotFoundError(f"{scene.scene_id}/{cam}: missing output file {path}")
    return m


def default_jobs(env: dict | None = None) -> int:
    """Worker count default: RIGBENCH_JOBS env var, else logical core count."""
    env = os.environ if env is None else env
    raw = env.get("RIGBENCH_JOBS")
    if raw:
        try:
            return max(1, int(raw))
        except ValueError:
            raise ValueError(f"RIGBENCH_JOBS must be an integer, got {raw!r}")
    return os.cpu_count() or 1
