from __future__ import annotations

import numpy as np
import pytest

from rigbench import Manifest, Sample, Scene, save_png


def random_images(n: int, h: int = 32, w: int = 48, seed: int = 0) -> list[np.ndarray]:
    rng = np.random.default_rng(seed)
    return [rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8) for _ in range(n)]


def build_manifest(
    root,
    n_scenes: int = 2,
    n_samples: int = 3,
    cameras: tuple[str, ...] = ("CAM_F", "CAM_FL", "CAM_FR", "CAM_B", "CAM_BL", "CAM_BR"),
    h: int = 48,
    w: int = 64,
    seed: int = 7,
) -> Manifest:
    """Write a small synthetic dataset under root and return its manifest."""
    rng = np.random.default_rng(seed)
    scenes = []
    for s in range(n_scenes):
        samples = []
        for t in range(n_samples):
            images = {}
            for cam in cameras:
                path = root / f"s{s}_t{t}_{cam}.png"
                save_png(path, rng.integers(0, 256, size=(h, w, 3), dtype=np.uint8))
                images[cam] = str(path.resolve())
            samples.append(Sample(timestamp=1_000_000 * (t + 1), images=images))
        scenes.append(Scene(scene_id=f"scene-{s:03d}", samples=samples))
    return Manifest(cameras=list(cameras), scenes=scenes).validate()


@pytest.fixture
def small_manifest(tmp_path):
    src = tmp_path / "src"
    src.mkdir()
    return build_manifest(src)
