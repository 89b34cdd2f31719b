"""Robustness evaluation arithmetic: NDS aggregation, CE/mCE, RR/mRR.

Corruption error compares a model's degraded-score mass to a baseline's
over the three severity levels; resilience rate compares it to the model's
own clean score. Both are percentages and both average over corruption
types into mCE/mRR.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Sequence

SEVERITIES = ("easy", "moderate", "hard")

DEFAULT_BASELINE = "DETR3D"


@dataclass(frozen=True)
class DetectionSummary:
    """Detection metric components: mAP plus the five true-positive errors."""

    mAP: float
    mATE: float
    mASE: float
    mAOE: float
    mAVE: float
    mAAE: float

    def __post_init__(self):
        if not 0.0 <= self.mAP <= 1.0:
            raise ValueError("mAP must be in [0, 1]")
        for name in ("mATE", "mASE", "mAOE", "mAVE", "mAAE"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")


def compute_nds(d: DetectionSummary) -> float:
    """Composite detection score: (1/10) * [5*mAP + sum(1 - min(1, mTP))]."""
    tp_errors = (d.mATE, d.mASE, d.mAOE, d.mAVE, d.mAAE)
    return (5.0 * d.mAP + sum(1.0 - min(1.0, e) for e in tp_errors)) / 10.0


def compute_ce(candidate: Sequence[float], baseline: Sequence[float]) -> float:
    """Corruption error percent for one corruption type.

    CE = 100 * sum_l(1 - s_l) / sum_l(1 - b_l) over the severity levels, for
    a higher-better score in [0, 1].
    """
    if len(candidate) != len(SEVERITIES) or len(baseline) != len(SEVERITIES):
        raise ValueError("need one score per severity level")
    num = sum(1.0 - v for v in candidate)
    den = sum(1.0 - v for v in baseline)
    if den == 0.0:
        raise ValueError("degenerate baseline: perfect score under corruption")
    return 100.0 * num / den


def compute_rr(candidate: Sequence[float], clean: float) -> float:
    """Resilience rate percent: 100 * sum_l(s_l) / (3 * clean)."""
    if len(candidate) != len(SEVERITIES):
        raise ValueError("need one score per severity level")
    if clean <= 0.0:
        raise ValueError("clean score must be positive")
    return 100.0 * sum(candidate) / (len(SEVERITIES) * clean)


@dataclass
class ModelScores:
    clean: float
    corruptions: dict[str, dict[str, float]]


@dataclass
class BenchmarkResults:
    metric: str
    direction: str  # "higher-better" | "lower-better"
    models: dict[str, ModelScores]

    def validate(self) -> "BenchmarkResults":
        if self.direction not in ("higher-better", "lower-better"):
            raise ValueError(f"unknown metric direction {self.direction!r}")
        if not self.models:
            raise ValueError("no models in results")
        kinds = None
        for name, scores in self.models.items():
            if kinds is None:
                kinds = set(scores.corruptions)
            elif set(scores.corruptions) != kinds:
                raise ValueError(f"model {name!r} covers a different corruption set")
            if not math.isfinite(scores.clean):
                raise ValueError(f"model {name!r}: clean score not finite")
            for kind, per_sev in scores.corruptions.items():
                for sev in SEVERITIES:
                    if sev not in per_sev:
                        raise ValueError(f"missing cell: model {name!r}, {kind}/{sev}")
                    if not math.isfinite(per_sev[sev]):
                        raise ValueError(f"non-finite cell: model {name!r}, {kind}/{sev}")
                extra = set(per_sev) - set(SEVERITIES)
                if extra:
                    raise ValueError(f"model {name!r}, {kind}: unknown severities {sorted(extra)}")
        return self

    @classmethod
    def from_dict(cls, data: dict) -> "BenchmarkResults":
        models = {
            name: ModelScores(
                clean=float(m["clean"]),
                corruptions={
                    kind: {sev: float(v) for sev, v in per_sev.items()}
                    for kind, per_sev in m["corruptions"].items()
                },
            )
            for name, m in data["models"].items()
        }
        return cls(
            metric=data.get("metric", "NDS"),
            direction=data.get("direction", "higher-better"),
            models=models,
        ).validate()

    @classmethod
    def load(cls, path) -> "BenchmarkResults":
        with open(path) as f:
            return cls.from_dict(json.load(f))


@dataclass
class RobustnessReport:
    metric: str
    baseline: str
    corruptions: list[str]
    clean: dict[str, float]
    ce: dict[str, dict[str, float]]
    rr: dict[str, dict[str, float]]
    mce: dict[str, float]
    mrr: dict[str, float]
    models: list[str] = field(default_factory=list)


def _to_goodness(results: BenchmarkResults, reference_scale: float | None) -> BenchmarkResults:
    """Map a lower-better metric onto a higher-better [0, 1]-style score.

    The CE/RR definitions presume a higher-better score with 1 as the
    ceiling; no canonical mapping exists for error-style metrics, so the
    caller must supply the finite scale that plays the role of the ceiling.
    """
    if results.direction == "higher-better":
        return results
    if reference_scale is None or not math.isfinite(reference_scale) or reference_scale <= 0:
        raise ValueError(
            "lower-better metrics need an explicit positive reference_scale to define "
            "CE/RR; refusing to invent one"
        )
    models = {
        name: ModelScores(
            clean=1.0 - m.clean / reference_scale,
            corruptions={
                kind: {sev: 1.0 - v / reference_scale for sev, v in per_sev.items()}
                for kind, per_sev in m.corruptions.items()
            },
        )
        for name, m in results.models.items()
    }
    return BenchmarkResults(metric=results.metric, direction="higher-better", models=models)


def aggregate(
    results: BenchmarkResults,
    baseline: str = DEFAULT_BASELINE,
    reference_scale: float | None = None,
) -> RobustnessReport:
    """Per-corruption CE/RR and their means for every model in the results."""
    results.validate()
    if baseline not in results.models:
        raise ValueError(
            f"baseline {baseline!r} not in results; available models: "
            + ", ".join(sorted(results.models))
        )
    work = _to_goodness(results, reference_scale)
    corruption_order = sorted(next(iter(work.models.values())).corruptions)
    if not corruption_order:
        raise ValueError("results contain no corruption entries")
    base = work.models[baseline]

    ce: dict[str, dict[str, float]] = {}
    rr: dict[str, dict[str, float]] = {}
    mce: dict[str, float] = {}
    mrr: dict[str, float] = {}
    for name, scores in work.models.items():
        ce[name] = {}
        rr[name] = {}
        for kind in corruption_order:
            cand = [scores.corruptions[kind][sev] for sev in SEVERITIES]
            ref = [base.corruptions[kind][sev] for sev in SEVERITIES]
            ce[name][kind] = compute_ce(cand, ref)
            rr[name][kind] = compute_rr(cand, scores.clean)
        mce[name] = sum(ce[name].values()) / len(corruption_order)
        mrr[name] = sum(rr[name].values()) / len(corruption_order)

    return RobustnessReport(
        metric=results.metric,
        baseline=baseline,
        corruptions=corruption_order,
        clean={name: results.models[name].clean for name in results.models},
        ce=ce,
        rr=rr,
        mce=mce,
        mrr=mrr,
        models=sorted(results.models),
    )


def render_report(report: RobustnessReport, fmt: str = "markdown", detail: str = "ce") -> str:
    """One row per model: clean score, mCE, mRR, then per-corruption CE or RR."""
    if fmt not in ("csv", "markdown"):
        raise ValueError(f"unknown format {fmt!r}")
    if detail not in ("ce", "rr"):
        raise ValueError(f"detail must be 'ce' or 'rr', got {detail!r}")
    per_kind = report.ce if detail == "ce" else report.rr
    header = ["model", "clean", "mCE", "mRR"] + [
        f"{detail.upper()}:{kind}" for kind in report.corruptions
    ]
    rows = []
    for name in report.models:
        rows.append(
            [name, f"{report.clean[name]:.4f}", f"{report.mce[name]:.2f}", f"{report.mrr[name]:.2f}"]
            + [f"{per_kind[name][kind]:.2f}" for kind in report.corruptions]
        )
    if fmt == "csv":
        lines = [",".join(header)] + [",".join(r) for r in rows]
        return "\n".join(lines) + "\n"
    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i])
              for i in range(len(header))]
    def fmt_row(cells):
        return "| " + " | ".join(c.ljust(widths[i]) for i, c in enumerate(cells)) + " |"
    lines = [fmt_row(header), "|" + "|".join("-" * (w + 2) for w in widths) + "|"]
    lines += [fmt_row(r) for r in rows]
    return "\n".join(lines) + "\n"


def parse_report_csv(text: str) -> dict[str, dict[str, float]]:
    """Numeric cells of a rendered CSV report, keyed by model then column."""
    lines = [ln for ln in text.strip().splitlines() if ln]
    header = lines[0].split(",")
    out: dict[str, dict[str, float]] = {}
    for line in lines[1:]:
        cells = line.split(",")
        out[cells[0]] = {header[i]: float(cells[i]) for i in range(1, len(cells))}
    return out
