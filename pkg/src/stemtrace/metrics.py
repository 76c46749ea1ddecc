"""Pixel-level comparison of predicted masks against ground-truth masks.

Counts are pooled per image into true/false positives and negatives, then
turned into precision, recall and F1.  Two F1 variants are supported:
"standard" is the usual harmonic mean 2PR/(P+R); "paper" is the halved
form PR/(P+R).  All three metrics return 0 when their denominator is 0,
so empty predictions are never rewarded.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .raster import BinaryMask

F1_FORMULAS = ("standard", "paper")

DEFAULT_AGGREGATION_NOTE = (
    "headline numbers are micro-aggregated (pixel counts pooled across images); "
    "macro (unweighted mean of per-image metrics) is reported alongside"
)


@dataclass(frozen=True)
class ConfusionCounts:
    """Pixel tallies between a prediction and a ground-truth mask."""

    tp: int
    fp: int
    fn: int
    tn: int

    def __post_init__(self) -> None:
        for name in ("tp", "fp", "fn", "tn"):
            v = getattr(self, name)
            if not isinstance(v, (int, np.integer)) or v < 0:
                raise ValueError(f"{name} must be a non-negative integer, got {v!r}")
            object.__setattr__(self, name, int(v))

    @property
    def total(self) -> int:
        return self.tp + self.fp + self.fn + self.tn

    def __add__(self, other: "ConfusionCounts") -> "ConfusionCounts":
        return ConfusionCounts(
            self.tp + other.tp, self.fp + other.fp, self.fn + other.fn, self.tn + other.tn
        )


def confusion(pred: BinaryMask, gt: BinaryMask) -> ConfusionCounts:
    """Count TP/FP/FN/TN pixels between same-sized masks.

    TP pixels are set in both, FP only in the prediction, FN only in the
    ground truth.  Counts add up exactly over any disjoint tiling.
    """
    if pred.pixels.shape != gt.pixels.shape:
        raise ValueError(
            f"mask dimensions differ: prediction is {pred.width}x{pred.height}, "
            f"ground truth is {gt.width}x{gt.height}"
        )
    p = pred.pixels
    g = gt.pixels
    tp = int(np.count_nonzero(p & g))
    fp = int(np.count_nonzero(p & ~g))
    fn = int(np.count_nonzero(~p & g))
    tn = p.size - tp - fp - fn
    return ConfusionCounts(tp, fp, fn, tn)


def precision(c: ConfusionCounts) -> float:
    """TP / (TP + FP); 0 when the prediction is empty."""
    denom = c.tp + c.fp
    return c.tp / denom if denom else 0.0


def recall(c: ConfusionCounts) -> float:
    """TP / (TP + FN); 0 when the ground truth is empty."""
    denom = c.tp + c.fn
    return c.tp / denom if denom else 0.0


def f1(c: ConfusionCounts, formula: str = "standard") -> float:
    """F1: "standard" is 2PR/(P+R), "paper" is PR/(P+R); 0 when P + R = 0."""
    if formula not in F1_FORMULAS:
        raise ValueError(f"formula must be one of {F1_FORMULAS}, got {formula!r}")
    p = precision(c)
    r = recall(c)
    if p + r == 0.0:
        return 0.0
    pr = p * r / (p + r)
    return 2.0 * pr if formula == "standard" else pr


@dataclass(frozen=True)
class ImageMetrics:
    image_id: str
    counts: ConfusionCounts
    precision: float
    recall: float
    f1_standard: float
    f1_paper: float


@dataclass(frozen=True)
class AggregateMetrics:
    mode: str  # "micro" | "macro"
    precision: float
    recall: float
    f1_standard: float
    f1_paper: float
    counts: ConfusionCounts | None = None  # pooled counts; only present for micro


@dataclass(frozen=True)
class MetricsReport:
    """Per-image metrics plus micro/macro aggregates for one evaluation run."""

    per_image: tuple[ImageMetrics, ...]
    aggregate_micro: AggregateMetrics | None
    aggregate_macro: AggregateMetrics | None
    aggregation_note: str = DEFAULT_AGGREGATION_NOTE
    warnings: tuple[str, ...] = ()
    errors: tuple[str, ...] = ()


def image_metrics(image_id: str, counts: ConfusionCounts) -> ImageMetrics:
    return ImageMetrics(
        image_id=image_id,
        counts=counts,
        precision=precision(counts),
        recall=recall(counts),
        f1_standard=f1(counts, "standard"),
        f1_paper=f1(counts, "paper"),
    )


def aggregate(counts: Sequence[ConfusionCounts], mode: str) -> AggregateMetrics:
    """Pool per-image counts: "micro" sums pixels first, "macro" averages metrics."""
    if not counts:
        raise ValueError("cannot aggregate an empty list of counts")
    if mode == "micro":
        pooled = counts[0]
        for c in counts[1:]:
            pooled = pooled + c
        return AggregateMetrics(
            mode="micro",
            precision=precision(pooled),
            recall=recall(pooled),
            f1_standard=f1(pooled, "standard"),
            f1_paper=f1(pooled, "paper"),
            counts=pooled,
        )
    if mode == "macro":
        n = len(counts)
        return AggregateMetrics(
            mode="macro",
            precision=sum(precision(c) for c in counts) / n,
            recall=sum(recall(c) for c in counts) / n,
            f1_standard=sum(f1(c, "standard") for c in counts) / n,
            f1_paper=sum(f1(c, "paper") for c in counts) / n,
            counts=None,
        )
    raise ValueError(f"mode must be 'micro' or 'macro', got {mode!r}")


def build_report(
    pairs: Iterable[tuple[str, ConfusionCounts]],
    warnings: Sequence[str] = (),
    errors: Sequence[str] = (),
) -> MetricsReport:
    """Assemble a report from (image_id, counts) pairs, sorted by image id."""
    per_image = tuple(
        image_metrics(image_id, counts)
        for image_id, counts in sorted(pairs, key=lambda item: item[0])
    )
    counts = [m.counts for m in per_image]
    return MetricsReport(
        per_image=per_image,
        aggregate_micro=aggregate(counts, "micro") if counts else None,
        aggregate_macro=aggregate(counts, "macro") if counts else None,
        warnings=tuple(warnings),
        errors=tuple(errors),
    )


CSV_HEADER = ("image_id", "tp", "fp", "fn", "tn", "precision", "recall", "f1_standard", "f1_paper")


def _metric_cell(v: float) -> str:
    return f"{v:.6f}"


def render_csv(report: MetricsReport) -> str:
    """CSV with one row per image and micro/macro summary rows."""
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(CSV_HEADER)
    for m in report.per_image:
        c = m.counts
        writer.writerow(
            [m.image_id, c.tp, c.fp, c.fn, c.tn]
            + [_metric_cell(v) for v in (m.precision, m.recall, m.f1_standard, m.f1_paper)]
        )
    micro = report.aggregate_micro
    if micro is not None and micro.counts is not None:
        c = micro.counts
        writer.writerow(
            ["micro", c.tp, c.fp, c.fn, c.tn]
            + [_metric_cell(v) for v in (micro.precision, micro.recall, micro.f1_standard, micro.f1_paper)]
        )
    macro = report.aggregate_macro
    if macro is not None:
        writer.writerow(
            ["macro", "", "", "", ""]
            + [_metric_cell(v) for v in (macro.precision, macro.recall, macro.f1_standard, macro.f1_paper)]
        )
    return buf.getvalue()


def render_table(report: MetricsReport, f1_mode: str = "standard") -> str:
    """Aligned text table; ``f1_mode`` picks which F1 column(s) to show."""
    if f1_mode not in ("standard", "paper", "both"):
        raise ValueError(f"f1_mode must be 'standard', 'paper' or 'both', got {f1_mode!r}")
    f1_cols = ["f1_standard", "f1_paper"] if f1_mode == "both" else [f"f1_{f1_mode}"]
    header = ["image_id", "precision", "recall"] + f1_cols

    def row_values(label: str, entry: ImageMetrics | AggregateMetrics) -> list[str]:
        vals = [f"{entry.precision:.4f}", f"{entry.recall:.4f}"]
        for col in f1_cols:
            vals.append(f"{getattr(entry, col):.4f}")
        return [label] + vals

    rows = [row_values(m.image_id, m) for m in report.per_image]
    if report.aggregate_micro is not None:
        rows.append(row_values("micro", report.aggregate_micro))
    if report.aggregate_macro is not None:
        rows.append(row_values("macro", report.aggregate_macro))

    widths = [max(len(header[i]), *(len(r[i]) for r in rows)) if rows else len(header[i]) for i in range(len(header))]
    lines = [
        "  ".join(h.ljust(widths[i]) for i, h in enumerate(header)).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(header))),
    ]
    for r in rows:
        lines.append("  ".join(r[i].ljust(widths[i]) for i in range(len(header))).rstrip())
    if report.aggregation_note:
        lines.append(f"note: {report.aggregation_note}")
    for w in report.warnings:
        lines.append(f"warning: {w}")
    for e in report.errors:
        lines.append(f"error: {e}")
    return "\n".join(lines) + "\n"
