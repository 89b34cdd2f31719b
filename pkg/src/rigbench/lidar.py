"""Point-cloud loading and the sensor-failure transforms.

Clouds are (N, 4) or (N, 5) float32 arrays of (x forward, y left, z up,
intensity[, ring]) in the right-handed sensor frame.
"""

from __future__ import annotations

from pathlib import Path

import numpy as np

POINT_LAYOUTS = (4, 5)


def load_points(path, layout: int = 4) -> np.ndarray:
    """Read packed little-endian float32 records; layout floats per point."""
    if layout not in POINT_LAYOUTS:
        raise ValueError(f"layout must be one of {POINT_LAYOUTS}, got {layout}")
    raw = Path(path).read_bytes()
    stride = 4 * layout
    if len(raw) % stride != 0:
        offset = len(raw) - len(raw) % stride
        raise ValueError(
            f"{path}: truncated point record at byte {offset} "
            f"(file length {len(raw)} not divisible by {stride})"
        )
    pts = np.frombuffer(raw, dtype="<f4").reshape(-1, layout)
    return np.ascontiguousarray(pts)


def save_points(pc: np.ndarray, path) -> None:
    pc = np.asarray(pc, dtype=np.float32)
    if pc.ndim != 2 or pc.shape[1] not in POINT_LAYOUTS:
        raise ValueError(f"expected an (N, 4) or (N, 5) array, got shape {pc.shape}")
    Path(path).write_bytes(pc.astype("<f4").tobytes())


def fov_crop(pc: np.ndarray, half_angle: float = 45.0, yaw_offset: float = 0.0) -> np.ndarray:
    """Retain points whose azimuth lies within +-half_angle degrees of forward.

    Azimuth is atan2(y, x); order is preserved. yaw_offset rotates the
    window for rigs whose LiDAR frame is not aligned with the vehicle frame.
    """
    if not 0.0 < half_angle <= 180.0:
        raise ValueError("half_angle must be in (0, 180]")
    pc = np.asarray(pc)
    if pc.shape[0] == 0:
        return pc.copy()
    azimuth = np.degrees(np.arctan2(pc[:, 1], pc[:, 0])) - yaw_offset
    azimuth = (azimuth + 180.0) % 360.0 - 180.0
    return pc[np.abs(azimuth) <= half_angle]


def blackout_camera(img: np.ndarray) -> np.ndarray:
    """Complete camera failure: an all-zero image of identical dimensions."""
    return np.zeros_like(img)
