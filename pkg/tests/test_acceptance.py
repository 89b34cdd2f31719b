"""Acceptance suite: one test per release criterion, one PASS line each.

Run with `pytest tests/test_acceptance.py -s` to see the per-criterion
report. Tolerances are pinned here and nowhere else.
"""

import json
import time

import numpy as np
import pytest

from rigbench import (
    SEVERITIES,
    SEVERITY_TABLE,
    BenchmarkResults,
    CorruptionJob,
    CorruptionSpec,
    DetectionSummary,
    SeededRng,
    aggregate,
    apply_brightness,
    apply_color_quant,
    apply_dark,
    apply_fog,
    apply_motion_blur,
    apply_snow,
    compute_nds,
    feature_mse,
    fov_crop,
    gram_relative_error,
    load_image,
    run_pipeline,
)
from rigbench.analysis import histogram_distance, pixel_histogram
from rigbench.metrics import ModelScores

from conftest import build_manifest, random_images


def _ok(n: int, text: str) -> None:
    print(f"\n[PASS] criterion {n}: {text}")


def test_criterion_1_nds_reproduces_published_rows():
    fused = DetectionSummary(mAP=0.6852, mATE=0.2874, mASE=0.2539, mAOE=0.3044,
                             mAVE=0.2554, mAAE=0.1874)
    camera = DetectionSummary(mAP=0.3556, mATE=0.6677, mASE=0.2727, mAOE=0.5612,
                              mAVE=0.8954, mAAE=0.2593)
    nds_fused = compute_nds(fused)
    nds_camera = compute_nds(camera)
    assert nds_fused == pytest.approx(0.7138, abs=0.0005)
    assert nds_camera == pytest.approx(0.4122, abs=0.0005)
    _ok(1, f"NDS aggregation gives {nds_fused:.4f} and {nds_camera:.4f} (within 0.0005)")


def test_criterion_2_metric_identities():
    kinds = ["brightness", "dark", "fog", "snow", "motion_blur", "color_quant",
             "camera_crash", "frame_lost"]
    rng = np.random.default_rng(0)
    corruptions = {
        k: {"easy": rng.uniform(0.2, 0.4), "moderate": rng.uniform(0.15, 0.3),
            "hard": rng.uniform(0.1, 0.2)}
        for k in kinds
    }
    clean = 0.4224
    results = BenchmarkResults(
        metric="NDS", direction="higher-better",
        models={
            "DETR3D": ModelScores(clean=clean, corruptions=corruptions),
            "steady": ModelScores(
                clean=clean,
                corruptions={k: {s: clean for s in SEVERITIES} for k in kinds},
            ),
        },
    )
    report = aggregate(results, baseline="DETR3D")

    for kind in kinds:
        assert report.ce["DETR3D"][kind] == pytest.approx(100.0, abs=1e-12)
        assert report.rr["steady"][kind] == pytest.approx(100.0, abs=1e-12)
    assert report.mce["DETR3D"] == pytest.approx(100.0, abs=1e-12)

    for name in ("DETR3D", "steady"):
        assert report.mce[name] == pytest.approx(
            sum(report.ce[name].values()) / len(kinds), abs=1e-12
        )
        assert report.mrr[name] == pytest.approx(
            sum(report.rr[name].values()) / len(kinds), abs=1e-12
        )
    _ok(2, "baseline-vs-self CE=mCE=100.00; unchanged scores RR=100.00; means exact to 1e-12")


def test_criterion_3_severity_table_conformance():
    # the published parameter table, verbatim
    expected = {
        "brightness": {"easy": (0.2,), "moderate": (0.4,), "hard": (0.5,)},
        "dark": {"easy": (0.5,), "moderate": (0.4,), "hard": (0.3,)},
        "fog": {"easy": (2.0, 2.0), "moderate": (2.5, 1.5), "hard": (3.0, 1.4)},
        "snow": {
            "easy": (0.1, 0.3, 3.0, 0.5, 10.0, 4.0, 0.8),
            "moderate": (0.2, 0.3, 2.0, 0.5, 12.0, 4.0, 0.7),
            "hard": (0.55, 0.3, 4.0, 0.9, 12.0, 8.0, 0.7),
        },
        "motion_blur": {"easy": (15, 5), "moderate": (15, 12), "hard": (20, 15)},
        "color_quant": {"easy": (5,), "moderate": (4,), "hard": (3,)},
        "camera_crash": {"easy": (2,), "moderate": (4,), "hard": (5,)},
        "frame_lost": {"easy": (2 / 6,), "moderate": (4 / 6,), "hard": (5 / 6,)},
    }
    checks = 0
    for kind, per_sev in expected.items():
        for sev, params in per_sev.items():
            assert CorruptionSpec.resolve(kind, sev).params == params, (kind, sev)
            checks += 1
    assert checks == 24
    assert set(SEVERITY_TABLE) == set(expected)
    _ok(3, "all 24 resolved (kind, severity) parameter tuples equal the published table")


def test_criterion_4_pipeline_determinism(tmp_path):
    from rigbench.cli import main

    src = tmp_path / "src"
    src.mkdir()
    manifest = build_manifest(src, n_scenes=2, n_samples=3, h=48, w=64, seed=3)
    assert manifest.image_count() == 36
    manifest_path = src / "manifest.json"
    manifest.save(manifest_path)

    t0 = time.perf_counter()
    digests = {}
    for label, jobs in (("serial-a", 1), ("serial-b", 1), ("pool-8", 8)):
        out = tmp_path / label
        code = main([
            "corrupt", "--manifest", str(manifest_path), "--out", str(out),
            "--corruption", "snow", "--severity", "moderate",
            "--seed", "2023", "--jobs", str(jobs),
        ])
        assert code == 0
        digests[label] = json.loads((out / "report.json").read_text())["content_digest"]
    elapsed = time.perf_counter() - t0

    assert digests["serial-a"] == digests["serial-b"], "repeated serial runs must be byte-identical"
    assert digests["serial-a"] == digests["pool-8"], "worker count must not change output bytes"

    # byte-identical includes the files themselves, not just the digest
    files_a = sorted((tmp_path / "serial-a").rglob("*.png"))
    files_b = sorted((tmp_path / "serial-b").rglob("*.png"))
    for a, b in zip(files_a, files_b):
        assert a.read_bytes() == b.read_bytes()

    assert elapsed < 60.0
    _ok(4, f"36-image fixture: jobs=1 twice and jobs=8 all byte-identical ({elapsed:.1f}s)")


def test_criterion_5_operator_properties():
    imgs = random_images(50, h=32, w=48, seed=17)

    # quant level bound at every severity
    for sev in SEVERITIES:
        (bits,) = CorruptionSpec.resolve("color_quant", sev).params
        for img in imgs[:5]:
            assert len(np.unique(apply_color_quant(img, bits))) <= 2**bits

    # identity parameters
    sample = imgs[0]
    assert np.array_equal(apply_brightness(sample, 0.0), sample)
    assert np.array_equal(apply_dark(sample, 1.0), sample)
    assert np.array_equal(apply_color_quant(sample, 8), sample)

    # motion blur preserves mean; snow and fog raise it per their contracts
    blurred = apply_motion_blur(sample, 15, 5, SeededRng(1))
    assert abs(blurred.astype(float).mean() - sample.astype(float).mean()) <= 1.0

    dark_scene = (imgs[1] * 0.3).astype(np.uint8)
    dark_scene[0, 0] = 255  # anchor the fog rescale at full range
    for sev in SEVERITIES:
        t, s = CorruptionSpec.resolve("fog", sev).params
        fogged = apply_fog(dark_scene, t, s, SeededRng(2))
        assert fogged.astype(float).mean() >= dark_scene.astype(float).mean()

        params = CorruptionSpec.resolve("snow", sev).params
        blend = params[6]
        x = imgs[2].astype(np.float64) / 255.0
        gray = x.mean(axis=2, keepdims=True)
        desat = np.clip(blend * x + (1 - blend) * np.maximum(x, gray * 1.5 + 0.5), 0, 1)
        snowed = apply_snow(imgs[2], params, SeededRng(3))
        assert snowed.astype(float).mean() / 255.0 >= desat.mean() - 1e-3

    # severity-monotone histogram distance on the 50-image sample
    clean_hist = pixel_histogram(imgs)
    for kind, op in (
        ("dark", lambda i, p: apply_dark(i, *p)),
        ("color_quant", lambda i, p: apply_color_quant(i, *p)),
    ):
        dists = []
        for sev in SEVERITIES:
            params = CorruptionSpec.resolve(kind, sev).params
            dists.append(
                histogram_distance(clean_hist, pixel_histogram([op(i, params) for i in imgs]))
            )
        assert dists[0] <= dists[1] <= dists[2], (kind, dists)

    _ok(5, "quant levels bounded, identity params exact, mean contracts hold, "
           "histogram distance severity-monotone")


def test_criterion_6_rig_corruptions(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    manifest = build_manifest(src, n_scenes=2, n_samples=2, h=16, w=16, seed=5)

    expected_drops = {"easy": 2, "moderate": 4, "hard": 5}
    for sev, n_expected in expected_drops.items():
        job = CorruptionJob(
            manifest=manifest,
            spec=CorruptionSpec.resolve("camera_crash", sev),
            output_root=str(tmp_path / f"crash-{sev}"),
            global_seed=11,
        )
        run_pipeline(job)
        tree = tmp_path / f"crash-{sev}" / "camera_crash" / sev
        for scene in manifest.scenes:
            per_sample = []
            for i in range(len(scene.samples)):
                dropped = frozenset(
                    cam for cam in manifest.cameras
                    if load_image(tree / scene.scene_id / f"{i:04d}_{cam}.png").max() == 0
                )
                per_sample.append(dropped)
            assert len(set(per_sample)) == 1, "dropped set must be constant within a scene"
            assert len(per_sample[0]) == n_expected

    from rigbench import frame_lost_decisions

    slots = 6000
    for sev in SEVERITIES:
        (p,) = CorruptionSpec.resolve("frame_lost", sev).params
        mask = frame_lost_decisions(1000, 6, p, SeededRng(2023 + hash(sev) % 1000))
        rate = mask.mean()
        sigma = (p * (1 - p) / slots) ** 0.5
        assert abs(rate - p) <= 3 * sigma, (sev, rate, p)

    _ok(6, "camera crash drops exactly {2,4,5} per severity (scene-constant); "
           "frame lost rates within 3 sigma over 6000 slots")


def test_criterion_7_lidar_fov_crop():
    import math

    rng = np.random.default_rng(7)
    pc = rng.uniform(-60, 60, size=(10_000, 4)).astype(np.float32)
    kept = fov_crop(pc, 45.0)
    oracle = np.array(
        [row for row in pc if abs(math.degrees(math.atan2(row[1], row[0]))) <= 45.0],
        dtype=np.float32,
    )
    assert np.array_equal(kept, oracle)
    assert np.array_equal(fov_crop(kept, 45.0), kept)
    assert np.array_equal(fov_crop(pc, 180.0), pc)
    _ok(7, f"FOV crop matches the brute-force oracle on 10,000 points "
           f"({len(kept)} retained), idempotent, identity at 180 degrees")


def test_criterion_8_analysis_oracles():
    rng = np.random.default_rng(8)
    a = rng.normal(size=(3, 4, 4))
    b = rng.normal(size=(3, 4, 4))

    mse_oracle = 0.0
    for c in range(3):
        for i in range(4):
            for j in range(4):
                mse_oracle += (a[c, i, j] - b[c, i, j]) ** 2
    mse_oracle /= 48
    assert feature_mse(a, b) == pytest.approx(mse_oracle, abs=1e-10)

    def gram(m):
        return [
            [sum(m[p, i, j] * m[q, i, j] for i in range(4) for j in range(4)) for q in range(3)]
            for p in range(3)
        ]

    ga, gb = gram(a), gram(b)
    num = sum((ga[p][q] - gb[p][q]) ** 2 for p in range(3) for q in range(3)) ** 0.5
    den = sum(gb[p][q] ** 2 for p in range(3) for q in range(3)) ** 0.5
    assert gram_relative_error(a, b) == pytest.approx(num / den, abs=1e-10)

    for c in (0.5, 2.0, 3.0):
        assert gram_relative_error(c * b, b) == pytest.approx(abs(c * c - 1), abs=1e-10)

    _ok(8, "feature MSE and Gram relative error match dense oracles to 1e-10; "
           "gram(c*F, F) = |c^2-1|")


def test_criterion_9_throughput_smoke(tmp_path):
    # soft criterion: report the numbers, never hard-fail
    import os

    rng = np.random.default_rng(9)
    base = np.linspace(0, 255, 1600, dtype=np.float64)
    images = []
    for _ in range(100):
        img = (base[None, :, None] + rng.normal(0, 12, size=(900, 1600, 3))).clip(0, 255)
        images.append(img.astype(np.uint8))

    t0 = time.perf_counter()
    for img in images:
        apply_brightness(img, 0.2)
    single = time.perf_counter() - t0

    cores = os.cpu_count() or 1
    lines = [f"brightness over 100 images at 1600x900: {single:.2f}s single-threaded "
             f"(target < 10s)"]

    src = tmp_path / "src"
    src.mkdir()
    manifest = build_manifest(src, n_scenes=1, n_samples=4, h=900, w=1600, seed=10)
    times = {}
    for jobs in (1, 8):
        t0 = time.perf_counter()
        run_pipeline(CorruptionJob(
            manifest=manifest,
            spec=CorruptionSpec.resolve("brightness", "easy"),
            output_root=str(tmp_path / f"jobs{jobs}"),
            jobs=jobs,
        ))
        times[jobs] = time.perf_counter() - t0
    speedup = times[1] / times[8] if times[8] > 0 else float("inf")
    lines.append(
        f"pipeline 24 images: {times[1]:.2f}s at jobs=1, {times[8]:.2f}s at jobs=8 "
        f"(speedup {speedup:.2f}x, target >= 3x, {cores} core(s) available)"
    )

    status = "PASS" if single < 10.0 else "REPORT"
    if speedup < 3.0:
        lines.append(
            "speedup below 3x is reported, not failed; it needs >= 8 physical cores"
        )
    print(f"\n[{status}] criterion 9 (soft): " + "; ".join(lines))
