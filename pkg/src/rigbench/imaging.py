"""Pixel-level primitives shared by the corruption operators.

Color conversion, Gaussian blur, diamond-square plasma noise, image I/O and
the seeded random-number contract everything stochastic is built on.
"""

from __future__ import annotations

import hashlib
import math
from typing import Sequence

import cv2
import numpy as np
from PIL import Image

_MASK64 = (1 << 64) - 1

# PNG is the output format for corrupted frames: lossless, so regenerated
# datasets are byte-stable. Level 1 trades file size for encode throughput.
PNG_COMPRESS_LEVEL = 1


def stable_hash64(*parts) -> int:
    """Order-sensitive 64-bit hash of strings/ints, identical on every platform.

    Each part is length-prefixed before hashing so ("ab", "c") and ("a", "bc")
    never collide.
    """
    h = hashlib.sha256()
    for part in parts:
        raw = str(part).encode("utf-8")
        h.update(len(raw).to_bytes(4, "little"))
        h.update(raw)
    return int.from_bytes(h.digest()[:8], "little")


class SeededRng:
    """Deterministic random stream, splittable into labeled child streams.

    The same seed plus the same call sequence yields bit-identical output;
    child streams with distinct labels are statistically independent. Backed
    by the counter-based Philox generator; the exact stream contract is
    pinned by the vectors in tests/data/rng_vectors.json.

    Instances are single-owner: to use randomness from several threads,
    split a child per thread first.
    """

    def __init__(self, seed: int):
        self.seed = int(seed) & _MASK64
        self._gen = np.random.Generator(np.random.Philox(key=self.seed))

    def split(self, label: str) -> "SeededRng":
        """Child stream derived from this stream's seed and a label."""
        return SeededRng(stable_hash64(self.seed, label))

    def random(self, size=None):
        return self._gen.random(size)

    def uniform(self, low: float, high: float, size=None):
        return self._gen.uniform(low, high, size)

    def normal(self, mean: float, std: float, size=None):
        return self._gen.normal(mean, std, size)

    def integers(self, low: int, high: int, size=None):
        return self._gen.integers(low, high, size)

    def poisson(self, lam, size=None):
        return self._gen.poisson(lam, size)

    def sample_without_replacement(self, n: int, k: int) -> np.ndarray:
        """k distinct integers drawn from range(n)."""
        return self._gen.choice(n, size=k, replace=False)


# ---------------------------------------------------------------------------
# Image buffers

def validate_image(img: np.ndarray) -> np.ndarray:
    """Check the (H, W, 3) uint8 image contract; returns the array unchanged."""
    if not isinstance(img, np.ndarray) or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 array, got shape {getattr(img, 'shape', None)}")
    if img.dtype != np.uint8:
        raise ValueError(f"expected uint8 channels, got {img.dtype}")
    if img.shape[0] == 0 or img.shape[1] == 0:
        raise ValueError("empty image")
    return img


def load_image(path) -> np.ndarray:
    """Decode a PNG/JPEG file to an (H, W, 3) uint8 RGB array."""
    with Image.open(path) as im:
        return np.asarray(im.convert("RGB"))


def save_png(path, img: np.ndarray, compress_level: int = PNG_COMPRESS_LEVEL) -> None:
    validate_image(img)
    Image.fromarray(img).save(path, format="PNG", compress_level=compress_level)


def save_jpeg(path, img: np.ndarray, quality: int = 95) -> None:
    validate_image(img)
    Image.fromarray(img).save(path, format="JPEG", quality=quality)


def image_size(path) -> tuple[int, int]:
    """(height, width) from the file header, without decoding pixel data."""
    with Image.open(path) as im:
        w, h = im.size
    return h, w


# ---------------------------------------------------------------------------
# HSV hexcone conversion
#
# h in degrees [0, 360), s and v fractions in [0, 1]; v = max(r, g, b) / 255.

def rgb_to_hsv(pixel: Sequence[int]) -> tuple[float, float, float]:
    r, g, b = (c / 255.0 for c in pixel)
    mx = max(r, g, b)
    mn = min(r, g, b)
    c = mx - mn
    if c == 0.0:
        h = 0.0
    elif mx == r:
        h = 60.0 * (((g - b) / c) % 6.0)
    elif mx == g:
        h = 60.0 * ((b - r) / c + 2.0)
    else:
        h = 60.0 * ((r - g) / c + 4.0)
    s = 0.0 if mx == 0.0 else c / mx
    return h, s, mx


def hsv_to_rgb(pixel: Sequence[float]) -> tuple[int, int, int]:
    h, s, v = pixel
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1.0 - abs(hp % 2.0 - 1.0))
    sector = int(hp) % 6
    r1, g1, b1 = (
        (c, x, 0.0), (x, c, 0.0), (0.0, c, x),
        (0.0, x, c), (x, 0.0, c), (c, 0.0, x),
    )[sector]
    m = v - c
    return tuple(int(round((u + m) * 255.0)) for u in (r1, g1, b1))


def rgb_image_to_hsv(img: np.ndarray) -> np.ndarray:
    """Vectorized hexcone conversion; float32 (H, W, 3) of (h deg, s, v)."""
    validate_image(img)
    x = img.astype(np.float32) / 255.0
    r, g, b = x[..., 0], x[..., 1], x[..., 2]
    mx = x.max(axis=2)
    mn = x.min(axis=2)
    c = mx - mn
    safe_c = np.where(c == 0.0, 1.0, c)
    h = np.where(
        mx == r, ((g - b) / safe_c) % 6.0,
        np.where(mx == g, (b - r) / safe_c + 2.0, (r - g) / safe_c + 4.0),
    )
    h = np.where(c == 0.0, 0.0, h * 60.0)
    s = np.where(mx == 0.0, 0.0, c / np.where(mx == 0.0, 1.0, mx))
    return np.stack([h, s, mx], axis=2)


def hsv_image_to_rgb(hsv: np.ndarray) -> np.ndarray:
    """Inverse of rgb_image_to_hsv, rounded back to uint8."""
    h, s, v = hsv[..., 0], hsv[..., 1], hsv[..., 2]
    c = v * s
    hp = (h % 360.0) / 60.0
    x = c * (1.0 - np.abs(hp % 2.0 - 1.0))
    m = v - c
    sector = hp.astype(np.int32) % 6
    zeros = np.zeros_like(c)
    r1 = np.choose(sector, [c, x, zeros, zeros, x, c])
    g1 = np.choose(sector, [x, c, c, x, zeros, zeros])
    b1 = np.choose(sector, [zeros, zeros, x, c, c, x])
    rgb = np.stack([r1 + m, g1 + m, b1 + m], axis=2)
    return np.rint(np.clip(rgb, 0.0, 1.0) * 255.0).astype(np.uint8)


# ---------------------------------------------------------------------------
# Blurs

def gaussian_kernel_1d(radius: int, sigma: float) -> np.ndarray:
    """Gaussian weights truncated at +-radius and renormalized to sum 1."""
    if radius < 0:
        raise ValueError("radius must be >= 0")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    t = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (t / sigma) ** 2)
    return k / k.sum()


def gaussian_blur(img: np.ndarray, radius: int, sigma: float) -> np.ndarray:
    """Separable Gaussian blur with reflect padding at the borders."""
    validate_image(img)
    k = gaussian_kernel_1d(radius, sigma).astype(np.float32)
    if radius == 0:
        return img.copy()
    out = cv2.sepFilter2D(img.astype(np.float32), -1, k, k, borderType=cv2.BORDER_REFLECT)
    return np.rint(np.clip(out, 0.0, 255.0)).astype(np.uint8)


def line_kernel(radius: int, sigma: float, angle_deg: float) -> np.ndarray:
    """Gaussian-weighted 1-D line of length 2*radius+1, rasterized at an angle.

    Taps are deposited bilinearly onto a (2r+1)^2 grid and the result is
    normalized, so convolution preserves the image mean. The kernel is
    symmetric under 180-degree rotation, hence correlation == convolution.
    """
    if radius < 1:
        raise ValueError("radius must be >= 1")
    if sigma <= 0:
        raise ValueError("sigma must be > 0")
    size = 2 * radius + 1
    k = np.zeros((size, size), dtype=np.float64)
    theta = math.radians(angle_deg)
    dx, dy = math.cos(theta), math.sin(theta)
    for t in range(-radius, radius + 1):
        w = math.exp(-0.5 * (t / sigma) ** 2)
        px = radius + t * dx
        py = radius + t * dy
        x0, y0 = int(math.floor(px)), int(math.floor(py))
        fx, fy = px - x0, py - y0
        k[y0, x0] += w * (1 - fx) * (1 - fy)
        if fx > 0:
            k[y0, x0 + 1] += w * fx * (1 - fy)
        if fy > 0:
            k[y0 + 1, x0] += w * (1 - fx) * fy
        if fx > 0 and fy > 0:
            k[y0 + 1, x0 + 1] += w * fx * fy
    return k / k.sum()


def convolve_reflect(field: np.ndarray, kernel: np.ndarray) -> np.ndarray:
    """2-D convolution with reflect padding; float32 in, float32 out.

    Works on single-channel or HxWxC inputs. The kernels used here are
    180-degree symmetric, so OpenCV's correlation is the same operation.
    """
    return cv2.filter2D(
        np.ascontiguousarray(field, dtype=np.float32), -1,
        kernel.astype(np.float32), borderType=cv2.BORDER_REFLECT,
    )


# ---------------------------------------------------------------------------
# Plasma fractal (diamond-square midpoint displacement)

def next_power_of_two(n: int) -> int:
    p = 1
    while p < n:
        p *= 2
    return p


def plasma_fractal(side: int, wibble_decay: float, rng: SeededRng) -> np.ndarray:
    """Diamond-square noise field, rescaled to [0, 1].

    The random perturbation amplitude is divided by wibble_decay after each
    subdivision level, so larger decay values give smoother fields. The grid
    wraps around at the borders, which keeps every midpoint average a mean
    of four neighbors.
    """
    if side < 2 or side & (side - 1) != 0:
        raise ValueError(f"side must be a power of two >= 2, got {side}")
    if wibble_decay <= 0:
        raise ValueError("wibble_decay must be > 0")

    field = np.zeros((side, side), dtype=np.float32)
    step = side
    amplitude = 1.0
    while step >= 2:
        half = step // 2
        corners = field[0:side:step, 0:side:step]
        square_sum = (
            corners
            + np.roll(corners, -1, axis=0)
            + np.roll(corners, -1, axis=1)
            + np.roll(np.roll(corners, -1, axis=0), -1, axis=1)
        )
        field[half::step, half::step] = (
            square_sum * 0.25 + rng.uniform(-amplitude, amplitude, corners.shape)
        )

        centers = field[half::step, half::step]
        corners = field[0:side:step, 0:side:step]
        top_sum = centers + np.roll(centers, 1, axis=0) + corners + np.roll(corners, -1, axis=1)
        field[0:side:step, half::step] = (
            top_sum * 0.25 + rng.uniform(-amplitude, amplitude, top_sum.shape)
        )
        left_sum = centers + np.roll(centers, 1, axis=1) + corners + np.roll(corners, -1, axis=0)
        field[half::step, 0:side:step] = (
            left_sum * 0.25 + rng.uniform(-amplitude, amplitude, left_sum.shape)
        )

        step //= 2
        amplitude /= wibble_decay

    field -= field.min()
    peak = field.max()
    if peak > 0:
        field /= peak
    return field
