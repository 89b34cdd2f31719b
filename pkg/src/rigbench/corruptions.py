"""The six per-image corruption operators and the severity parameter table.

Each operator maps an (H, W, 3) uint8 RGB array to a new one of the same
shape. Stochastic operators draw from labeled child streams of the supplied
SeededRng, so adding draws to one operator never perturbs another and a
fixed seed pins the output bytes exactly.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import cv2
import numpy as np

from .imaging import (
    SeededRng,
    convolve_reflect,
    line_kernel,
    next_power_of_two,
    plasma_fractal,
    validate_image,
)

SEVERITIES = ("easy", "moderate", "hard")

PER_IMAGE_KINDS = ("brightness", "dark", "fog", "snow", "motion_blur", "color_quant")
RIG_KINDS = ("camera_crash", "frame_lost")
KINDS = PER_IMAGE_KINDS + RIG_KINDS

# Resolved numeric parameters per (kind, severity).
# brightness: HSV value shift; dark: channel scale factor;
# fog: (thickness, smoothness); snow: (mean, std, scale, threshold,
# blur radius, blur std, blend); motion_blur: (radius, sigma);
# color_quant: kept bits; camera_crash: dropped cameras;
# frame_lost: per-frame drop probability.
SEVERITY_TABLE = {
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


@dataclass(frozen=True)
class CorruptionSpec:
    """A corruption kind at one severity, with its resolved parameters."""

    kind: str
    severity: str
    params: tuple

    @classmethod
    def resolve(cls, kind: str, severity: str, overrides: dict | None = None) -> "CorruptionSpec":
        if kind not in KINDS:
            raise ValueError(f"unknown corruption kind {kind!r}; expected one of {KINDS}")
        if severity not in SEVERITIES:
            raise ValueError(f"unknown severity {severity!r}; expected one of {SEVERITIES}")
        params = SEVERITY_TABLE[kind][severity]
        if overrides and kind in overrides and severity in overrides[kind]:
            raw = overrides[kind][severity]
            params = tuple(raw) if isinstance(raw, (list, tuple)) else (raw,)
        return cls(kind=kind, severity=severity, params=params)


def load_param_overrides(path) -> dict:
    """Parameter file for research variants: {kind: {severity: params}}.

    JSON always works; TOML is accepted when a toml parser is available
    (tomllib on Python 3.11+, tomli otherwise).
    """
    text = open(path, "rb").read()
    if str(path).endswith(".toml"):
        try:
            import tomllib
        except ImportError:
            try:
                import tomli as tomllib
            except ImportError:
                raise ValueError("TOML parameter files need Python 3.11+ or the tomli package")
        data = tomllib.loads(text.decode("utf-8"))
    else:
        data = json.loads(text)
    for kind in data:
        if kind not in KINDS:
            raise ValueError(f"parameter file names unknown corruption kind {kind!r}")
        for severity in data[kind]:
            if severity not in SEVERITIES:
                raise ValueError(f"parameter file names unknown severity {severity!r}")
    return data


# ---------------------------------------------------------------------------
# Operators

def apply_brightness(img: np.ndarray, delta_v: float) -> np.ndarray:
    """Raise HSV value by delta_v (clipped at 1) and convert back to RGB.

    In the hexcone model every RGB channel is proportional to v at fixed
    (h, s), so the conversion round trip reduces to scaling each channel by
    v'/v. That identity is evaluated through a 256x256 lookup table, which
    keeps the operator exact and fast.
    """
    validate_image(img)
    if not 0.0 <= delta_v <= 1.0:
        raise ValueError("delta_v must be in [0, 1]")
    vals = np.arange(256, dtype=np.float64)
    lifted = np.minimum(vals + delta_v * 255.0, 255.0)
    scale = lifted / np.maximum(vals, 1.0)
    table = np.rint(scale[:, None] * vals[None, :]).astype(np.uint8)
    # v == 0 is pure black: s == 0, so all channels become the lifted value
    table[0, :] = np.uint8(round(lifted[0]))
    v = img.max(axis=2)
    return table[v[..., None], img]


def apply_dark(
    img: np.ndarray,
    scale: float,
    rng: SeededRng | None = None,
    shot_noise: bool = False,
    photons_per_unit: float = 60.0,
) -> np.ndarray:
    """Scale every channel by `scale`; optionally add Poisson shot noise.

    The default path is pure multiplicative rounding, so regenerated
    datasets are deterministic without a seed. With shot_noise the photon
    budget shrinks proportionally to scale, mimicking low-light capture.
    """
    validate_image(img)
    if not 0.0 < scale <= 1.0:
        raise ValueError("scale must be in (0, 1]")
    table = np.rint(np.arange(256, dtype=np.float64) * scale).astype(np.uint8)
    out = table[img]
    if shot_noise:
        if rng is None:
            raise ValueError("shot_noise requires a SeededRng")
        budget = photons_per_unit * scale
        x = out.astype(np.float64) / 255.0
        noisy = rng.split("dark-shot").poisson(x * budget) / budget
        out = np.rint(np.clip(noisy, 0.0, 1.0) * 255.0).astype(np.uint8)
    return out


def apply_fog(img: np.ndarray, thickness: float, smoothness: float, rng: SeededRng) -> np.ndarray:
    """Blend a plasma-fractal haze into the image.

    x' = (x + thickness * f) * max_x / (max_x + thickness) per channel in
    [0, 1], where f is the fractal field and max_x the pre-fog image
    maximum, so the brightest pixel never clips past its original value.
    """
    validate_image(img)
    if thickness <= 0 or smoothness <= 0:
        raise ValueError("thickness and smoothness must be > 0")
    h, w = img.shape[:2]
    side = next_power_of_two(max(h, w, 2))
    field = plasma_fractal(side, smoothness, rng.split("fog-plasma"))[:h, :w]
    x = img.astype(np.float32) / 255.0
    max_x = float(x.max())
    x = x + thickness * field[..., None]
    x *= max_x / (max_x + thickness)
    return np.rint(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)


def apply_snow(img: np.ndarray, params: tuple, rng: SeededRng) -> np.ndarray:
    """Overlay motion-blurred snowflakes and lift the scene toward gray.

    params = (mean, std, scale, threshold, blur_radius, blur_std, blend).
    The flake layer is Gaussian noise generated at 1/scale resolution,
    upscaled bilinearly, thresholded, then streaked along a random angle in
    [-135, -45] degrees. The scene is partially desaturated before the layer
    and its 180-degree rotation are composited on top.
    """
    validate_image(img)
    mean, std, scale, threshold, blur_radius, blur_std, blend = params
    if std <= 0 or scale < 1 or not 0.0 <= blend <= 1.0:
        raise ValueError("snow params out of range: need std > 0, scale >= 1, blend in [0, 1]")
    h, w = img.shape[:2]

    small = (max(1, math.ceil(h / scale)), max(1, math.ceil(w / scale)))
    layer = rng.split("snow-layer").normal(mean, std, small).astype(np.float32)
    if small != (h, w):
        layer = cv2.resize(layer, (w, h), interpolation=cv2.INTER_LINEAR)
    layer[layer < threshold] = 0.0

    angle = rng.split("snow-angle").uniform(-135.0, -45.0)
    kernel = line_kernel(max(1, int(round(blur_radius))), blur_std, angle)
    layer = convolve_reflect(layer, kernel)

    x = img.astype(np.float32) / 255.0
    gray = x.mean(axis=2, keepdims=True)
    x = blend * x + (1.0 - blend) * np.maximum(x, gray * 1.5 + 0.5)
    x = x + layer[..., None] + layer[::-1, ::-1][..., None]
    return np.rint(np.clip(x, 0.0, 1.0) * 255.0).astype(np.uint8)


def apply_motion_blur(img: np.ndarray, radius: int, sigma: float, rng: SeededRng) -> np.ndarray:
    """Streak the image along a random angle in [-45, 45] degrees."""
    validate_image(img)
    if radius < 1:
        raise ValueError("radius must be >= 1")
    angle = rng.split("motion-angle").uniform(-45.0, 45.0)
    kernel = line_kernel(int(radius), sigma, angle)
    out = convolve_reflect(img.astype(np.float32), kernel)
    return np.rint(np.clip(out, 0.0, 255.0)).astype(np.uint8)


def apply_color_quant(img: np.ndarray, bits: int) -> np.ndarray:
    """Posterize: keep the top `bits` bits of every channel."""
    validate_image(img)
    if not 1 <= bits <= 8:
        raise ValueError("bits must be in [1, 8]")
    mask = np.uint8(0xFF & ~((1 << (8 - bits)) - 1))
    return img & mask


_OPERATORS = {
    "brightness": lambda img, params, rng: apply_brightness(img, *params),
    "dark": lambda img, params, rng: apply_dark(img, *params),
    "fog": lambda img, params, rng: apply_fog(img, *params, rng),
    "snow": lambda img, params, rng: apply_snow(img, params, rng),
    "motion_blur": lambda img, params, rng: apply_motion_blur(img, *params, rng),
    "color_quant": lambda img, params, rng: apply_color_quant(img, *params),
}


def apply_corruption(img: np.ndarray, spec: CorruptionSpec, rng: SeededRng | None = None) -> np.ndarray:
    """Dispatch a per-image CorruptionSpec. Rig-level kinds are rejected here."""
    if spec.kind in RIG_KINDS:
        raise ValueError(f"{spec.kind} operates on scenes, not single images; use the pipeline")
    if spec.kind in ("fog", "snow", "motion_blur") and rng is None:
        raise ValueError(f"{spec.kind} requires a SeededRng")
    return _OPERATORS[spec.kind](img, spec.params, rng)
