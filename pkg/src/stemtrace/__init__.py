"""stemtrace: control-point stem annotations to binary masks, and back to numbers.

A few clicked control points per stem are interpolated with a uniform
cubic B-spline, rasterized into a one-pixel polyline and dilated to a
tau-pixel-wide binary mask; masks are compared pixel-wise with
precision/recall/F1.  LabelMe-compatible JSON in, PNG masks and CSV
reports out, with a CLI and a small HTTP service on top.
"""

__version__ = "0.1.0"

from .annotations import (
    DEFAULT_TAU,
    AnnotationError,
    AnnotationParseError,
    AnnotationValidationError,
    ControlPointAnnotation,
    parse_annotation,
    write_annotation,
)
from .dataset import (
    DatasetSplit,
    GeneratedMask,
    GenerateReport,
    TimingEntry,
    TimingLog,
    batch_evaluate,
    batch_generate,
    split_dataset,
    split_manifest_json,
)
from .mask_png import MaskFormatError, read_mask_png, write_mask_png
from .metrics import (
    AggregateMetrics,
    ConfusionCounts,
    ImageMetrics,
    MetricsReport,
    aggregate,
    build_report,
    confusion,
    f1,
    image_metrics,
    precision,
    recall,
    render_csv,
    render_table,
)
from .raster import (
    BinaryMask,
    StructuringElement,
    dilate,
    generate_annotation_mask,
    generate_stem_mask,
    rasterize_polyline,
    resolved_samples_per_segment,
    round_half_away,
)
from .spline import (
    SPLINE_ORDER,
    CurveSample,
    Point2,
    StemCurve,
    basis,
    default_samples_per_segment,
    eval_segment,
    eval_segment_derivative,
    num_segments,
    sample_curve,
)

__all__ = [
    "__version__",
    "SPLINE_ORDER",
    "DEFAULT_TAU",
    "Point2",
    "StemCurve",
    "CurveSample",
    "basis",
    "eval_segment",
    "eval_segment_derivative",
    "num_segments",
    "sample_curve",
    "default_samples_per_segment",
    "BinaryMask",
    "StructuringElement",
    "rasterize_polyline",
    "dilate",
    "generate_stem_mask",
    "generate_annotation_mask",
    "resolved_samples_per_segment",
    "round_half_away",
    "ConfusionCounts",
    "ImageMetrics",
    "AggregateMetrics",
    "MetricsReport",
    "confusion",
    "precision",
    "recall",
    "f1",
    "aggregate",
    "image_metrics",
    "build_report",
    "render_csv",
    "render_table",
    "AnnotationError",
    "AnnotationParseError",
    "AnnotationValidationError",
    "ControlPointAnnotation",
    "parse_annotation",
    "write_annotation",
    "MaskFormatError",
    "read_mask_png",
    "write_mask_png",
    "DatasetSplit",
    "split_dataset",
    "split_manifest_json",
    "TimingEntry",
    "TimingLog",
    "GeneratedMask",
    "GenerateReport",
    "batch_generate",
    "batch_evaluate",
]
