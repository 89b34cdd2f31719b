"""Validity and diagnosis tooling: pixel histograms, feature-map errors.

The feature tools operate on externally exported (C, H, W) float tensors;
no model inference happens here.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

import numpy as np

from .imaging import validate_image

TENSOR_MAGIC = b"TNSR"


@dataclass
class Histogram:
    bins: int
    counts: np.ndarray  # int64, length == bins
    total: int

    def normalized(self) -> np.ndarray:
        return self.counts / self.total

    def to_dict(self) -> dict:
        return {"bins": self.bins, "counts": [int(c) for c in self.counts], "total": self.total}

    @classmethod
    def from_dict(cls, data: dict) -> "Histogram":
        counts = np.asarray(data["counts"], dtype=np.int64)
        return cls(bins=int(data["bins"]), counts=counts, total=int(data["total"]))


def pixel_histogram(images: Iterable[np.ndarray], bins: int = 256) -> Histogram:
    """Joint histogram over all RGB channels of all images."""
    if bins < 1 or 256 % bins != 0:
        raise ValueError(f"bins must divide 256 evenly, got {bins}")
    shift = 256 // bins
    counts = np.zeros(bins, dtype=np.int64)
    n = 0
    for img in images:
        validate_image(img)
        counts += np.bincount((img.reshape(-1) // shift).astype(np.int64), minlength=bins)
        n += 1
    if n == 0:
        raise ValueError("no images to histogram")
    return Histogram(bins=bins, counts=counts, total=int(counts.sum()))


def histogram_distance(a: Histogram, b: Histogram) -> float:
    """L1 distance of the normalized histograms, in [0, 2]."""
    if a.bins != b.bins:
        raise ValueError(f"bin count mismatch: {a.bins} vs {b.bins}")
    if a.total <= 0 or b.total <= 0:
        raise ValueError("histograms must be non-empty")
    return float(np.abs(a.normalized() - b.normalized()).sum())


def save_histogram(hist: Histogram, path, meta: dict | None = None) -> None:
    payload = hist.to_dict()
    if meta:
        payload["meta"] = meta
    Path(path).write_text(json.dumps(payload) + "\n")


def load_histogram(path) -> Histogram:
    return Histogram.from_dict(json.loads(Path(path).read_text()))


# ---------------------------------------------------------------------------
# Feature maps

def feature_mse(a: np.ndarray, b: np.ndarray) -> float:
    """Mean squared error over all elements of two same-shape tensors."""
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    return float(np.mean((a - b) ** 2))


def gram_relative_error(a: np.ndarray, b: np.ndarray) -> float:
    """Relative Frobenius error between channel Gram matrices.

    With F the (channels, h*w) flattening and G = F . F^T, returns
    ||G_a - G_b||_F / ||G_b||_F. Depends only on channel inner products, so
    it is invariant to any spatial permutation applied to both maps.
    """
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"shape mismatch: {a.shape} vs {b.shape}")
    if a.ndim != 3:
        raise ValueError(f"expected (channels, height, width), got shape {a.shape}")
    fa = a.reshape(a.shape[0], -1)
    fb = b.reshape(b.shape[0], -1)
    gb = fb @ fb.T
    norm_b = np.linalg.norm(gb)
    if norm_b == 0.0:
        raise ValueError("reference feature map is identically zero")
    ga = fa @ fa.T
    return float(np.linalg.norm(ga - gb) / norm_b)


def save_tensor(path, arr: np.ndarray) -> None:
    """Magic + 3 little-endian uint32 dims + packed little-endian float32."""
    arr = np.asarray(arr, dtype=np.float32)
    if arr.ndim != 3:
        raise ValueError(f"expected a 3-D tensor, got shape {arr.shape}")
    with open(path, "wb") as f:
        f.write(TENSOR_MAGIC)
        f.write(struct.pack("<III", *arr.shape))
        f.write(arr.astype("<f4").tobytes())


def load_tensor(path) -> np.ndarray:
    raw = Path(path).read_bytes()
    if raw[:4] != TENSOR_MAGIC:
        raise ValueError(f"{path}: not a tensor file (bad magic {raw[:4]!r})")
    c, h, w = struct.unpack("<III", raw[4:16])
    expected = 16 + 4 * c * h * w
    if len(raw) != expected:
        raise ValueError(f"{path}: expected {expected} bytes for shape ({c},{h},{w}), got {len(raw)}")
    return np.frombuffer(raw[16:], dtype="<f4").reshape(c, h, w).copy()
