"""Deterministic corruption synthesis and robustness evaluation for camera rigs."""

from .analysis import (
    Histogram,
    feature_mse,
    gram_relative_error,
    histogram_distance,
    load_tensor,
    pixel_histogram,
    save_tensor,
)
from .corruptions import (
    KINDS,
    PER_IMAGE_KINDS,
    RIG_KINDS,
    SEVERITIES,
    SEVERITY_TABLE,
    CorruptionSpec,
    apply_brightness,
    apply_color_quant,
    apply_corruption,
    apply_dark,
    apply_fog,
    apply_motion_blur,
    apply_snow,
)
from .imaging import (
    SeededRng,
    gaussian_blur,
    hsv_to_rgb,
    load_image,
    plasma_fractal,
    rgb_to_hsv,
    save_png,
    stable_hash64,
)
from .lidar import blackout_camera, fov_crop, load_points, save_points
from .manifest import Manifest, Sample, Scene
from .metrics import (
    BenchmarkResults,
    DetectionSummary,
    aggregate,
    compute_ce,
    compute_nds,
    compute_rr,
    render_report,
)
from .pipeline import (
    CorruptionJob,
    PipelineError,
    derive_seed,
    frame_lost_decisions,
    run_pipeline,
    select_dropped_cameras,
)

__version__ = "0.1.0"
