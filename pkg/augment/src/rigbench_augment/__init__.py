"""Data-augmentation bindings over the rigbench corruption operators.

Wraps the normative operators rather than re-implementing them, so
augmented training inputs are byte-identical to what the evaluation
pipeline generates for the same parameters and seed. Calls are pure
functions of (policy, step_index): safe from any number of data-loader
workers.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from typing import Mapping

import numpy as np
from PIL import Image

from rigbench import SeededRng, apply_corruption, stable_hash64
from rigbench.corruptions import PER_IMAGE_KINDS, SEVERITIES, CorruptionSpec

__version__ = "0.1.0"

_SEVERITY_MODES = ("uniform",) + SEVERITIES


@dataclass(frozen=True)
class AugmentPolicy:
    """Which corruptions to sample, how often, and at which severity.

    kinds maps each enabled per-image corruption to its application
    probability; the probabilities must sum to at most 1 because a call
    applies at most one corruption. severity is "uniform" (sampled over the
    three levels) or a fixed level.
    """

    kinds: Mapping[str, float]
    severity: str = "uniform"
    seed: int = 0
    param_overrides: dict | None = field(default=None, compare=False)

    def __post_init__(self):
        if not self.kinds:
            raise ValueError("at least one corruption kind must be enabled")
        for kind, prob in self.kinds.items():
            if kind not in PER_IMAGE_KINDS:
                raise ValueError(
                    f"unknown per-image corruption {kind!r}; expected one of {PER_IMAGE_KINDS}"
                )
            if not 0.0 <= prob <= 1.0:
                raise ValueError(f"probability for {kind!r} must be in [0, 1], got {prob}")
        if sum(self.kinds.values()) > 1.0 + 1e-12:
            raise ValueError("kind probabilities sum above 1; at most one corruption is applied per call")
        if self.severity not in _SEVERITY_MODES:
            raise ValueError(f"severity must be one of {_SEVERITY_MODES}, got {self.severity!r}")

    @classmethod
    def from_mapping(cls, data: Mapping) -> "AugmentPolicy":
        return cls(
            kinds=dict(data["kinds"]),
            severity=data.get("severity", "uniform"),
            seed=int(data.get("seed", 0)),
            param_overrides=data.get("param_overrides"),
        )


def _as_image(image) -> np.ndarray:
    if isinstance(image, (bytes, bytearray, memoryview)):
        with Image.open(io.BytesIO(image)) as im:
            image = np.asarray(im.convert("RGB"))
    arr = np.ascontiguousarray(image)
    if arr.ndim != 3 or arr.shape[2] != 3:
        raise ValueError(f"expected an HxWx3 array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        raise ValueError(f"expected 8-bit channels, got {arr.dtype}")
    return arr


def apply_operator(image, kind: str, severity: str, seed: int, overrides: dict | None = None) -> np.ndarray:
    """One corruption operator at an explicit seed; same bytes as the CLI."""
    img = _as_image(image)
    spec = CorruptionSpec.resolve(kind, severity, overrides)
    return apply_corruption(img, spec, SeededRng(seed))


def augment(image, policy: AugmentPolicy, step_index: int) -> np.ndarray:
    """Apply at most one sampled corruption; reproducible per (policy, step).

    The call seed derives from (policy.seed, step_index) alone, so a
    training run replays exactly regardless of worker scheduling.
    """
    img = _as_image(image)
    call_seed = stable_hash64("augment", policy.seed, step_index)
    rng = SeededRng(call_seed)

    u = rng.split("kind-select").random()
    chosen = None
    cumulative = 0.0
    for kind in PER_IMAGE_KINDS:
        if kind not in policy.kinds:
            continue
        cumulative += policy.kinds[kind]
        if u < cumulative:
            chosen = kind
            break
    if chosen is None:
        return img

    if policy.severity == "uniform":
        severity = SEVERITIES[int(rng.split("severity-select").integers(0, len(SEVERITIES)))]
    else:
        severity = policy.severity

    spec = CorruptionSpec.resolve(chosen, severity, policy.param_overrides)
    return apply_corruption(img, spec, rng.split(chosen))


def operator_seed(policy_seed: int, step_index: int, kind: str) -> int:
    """The seed augment() hands to `kind` at a given step; useful for replay."""
    return stable_hash64(stable_hash64("augment", policy_seed, step_index), kind)
