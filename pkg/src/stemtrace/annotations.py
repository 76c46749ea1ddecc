"""Read and write control-point annotations as LabelMe-compatible JSON.

Only two shape kinds are recognized, both labeled "stem": a "linestrip"
whose points are one stem's control points, and "point" shapes sharing a
group_id, collected in document order into one stem.  Everything else is
ignored with a logged warning.  An optional "tau" field (top-level, or on
a stem shape) overrides the default mask width of 30 pixels.
"""

from __future__ import annotations

import json
import logging
import math
from dataclasses import dataclass
from typing import Any

from .spline import Point2, as_point

logger = logging.getLogger(__name__)

DEFAULT_TAU = 30

_IMAGE_SUFFIXES = (".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".gif", ".webp")
_LABELME_VERSION = "5.2.1"


class AnnotationError(ValueError):
    """Base class for annotation ingest failures."""


class AnnotationParseError(AnnotationError):
    """The document is not valid JSON."""

    def __init__(self, message: str, offset: int = 0):
        super().__init__(message)
        self.offset = offset


class AnnotationValidationError(AnnotationError):
    """The document parsed but violates the annotation schema."""


@dataclass(frozen=True)
class ControlPointAnnotation:
    """One image's worth of human input: per-stem control points plus tau."""

    image_id: str
    image_width: int
    image_height: int
    stems: tuple[tuple[Point2, ...], ...]
    tau: int = DEFAULT_TAU

    def __post_init__(self) -> None:
        if not isinstance(self.image_width, int) or not isinstance(self.image_height, int):
            raise AnnotationValidationError("image dimensions must be integers")
        if self.image_width < 1 or self.image_height < 1:
            raise AnnotationValidationError(
                f"image dimensions must be >= 1, got {self.image_width}x{self.image_height}"
            )
        if not isinstance(self.tau, int) or self.tau < 1:
            raise AnnotationValidationError(f"tau must be an integer >= 1, got {self.tau!r}")
        stems = tuple(tuple(as_point(p) for p in stem) for stem in self.stems)
        object.__setattr__(self, "stems", stems)
        if not stems:
            raise AnnotationValidationError("annotation must contain at least one stem")
        diag = math.hypot(self.image_width, self.image_height)
        for i, stem in enumerate(stems):
            if len(stem) < 4:
                raise AnnotationValidationError(
                    f"stem {i} has {len(stem)} control points; at least 4 are required"
                )
            for j, p in enumerate(stem):
                dx = max(0.0, -p.x, p.x - self.image_width)
                dy = max(0.0, -p.y, p.y - self.image_height)
                if math.hypot(dx, dy) > diag:
                    raise AnnotationValidationError(
                        f"stem {i} point {j} at ({p.x}, {p.y}) is more than one image diagonal "
                        f"outside the {self.image_width}x{self.image_height} canvas"
                    )


def _strip_image_suffix(path: str) -> str:
    name = path.replace("\\", "/").rsplit("/", 1)[-1]
    lower = name.lower()
    for suffix in _IMAGE_SUFFIXES:
        if lower.endswith(suffix):
            return name[: -len(suffix)]
    return name


def _coerce_tau(value: Any, where: str) -> int:
    if isinstance(value, bool):
        raise AnnotationValidationError(f"{where} tau must be an integer >= 1, got {value!r}")
    if isinstance(value, int):
        tau = value
    elif isinstance(value, float) and value.is_integer():
        tau = int(value)
    else:
        raise AnnotationValidationError(f"{where} tau must be an integer >= 1, got {value!r}")
    if tau < 1:
        raise AnnotationValidationError(f"{where} tau must be >= 1, got {tau}")
    return tau


def _coerce_dimension(doc: dict, key: str) -> int:
    value = doc.get(key)
    if isinstance(value, bool) or value is None:
        raise AnnotationValidationError(f"document is missing a numeric {key}")
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise AnnotationValidationError(f"{key} must be an integer, got {value!r}")
    return value


def _shape_points(shape: dict, index: int) -> list[Point2]:
    raw = shape.get("points")
    if not isinstance(raw, list):
        raise AnnotationValidationError(f"shapes[{index}] has no points list")
    points: list[Point2] = []
    for entry in raw:
        if not isinstance(entry, (list, tuple)) or len(entry) != 2:
            raise AnnotationValidationError(f"shapes[{index}] has a malformed point: {entry!r}")
        try:
            points.append(as_point(entry))
        except (TypeError, ValueError) as exc:
            raise AnnotationValidationError(f"shapes[{index}] has an invalid point: {exc}") from exc
    return points


def parse_annotation(document: str) -> ControlPointAnnotation:
    """Parse a LabelMe-compatible JSON document into an annotation.

    Raises AnnotationParseError (with the failing byte offset) for invalid
    JSON, AnnotationError("no stems...") when nothing is labeled "stem",
    and AnnotationValidationError for schema violations such as a stem
    with fewer than 4 points.
    """
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as exc:
        raise AnnotationParseError(f"invalid JSON at offset {exc.pos}: {exc.msg}", offset=exc.pos) from exc
    if not isinstance(doc, dict):
        raise AnnotationParseError("document root must be a JSON object")

    shapes = doc.get("shapes")
    if not isinstance(shapes, list):
        raise AnnotationValidationError("document has no shapes list")

    # Stems come out in first-occurrence order: a linestrip is one stem, a
    # run of grouped points builds one up incrementally.
    stems: list[tuple[int, list[Point2]]] = []
    point_groups: dict[Any, int] = {}
    shape_tau: int | None = None
    ignored = 0
    for index, shape in enumerate(shapes):
        if not isinstance(shape, dict):
            raise AnnotationValidationError(f"shapes[{index}] is not an object")
        if shape.get("label") != "stem":
            ignored += 1
            continue
        shape_type = shape.get("shape_type")
        if shape_type == "linestrip":
            points = _shape_points(shape, index)
            if len(points) < 4:
                raise AnnotationValidationError(
                    f"shapes[{index}] has {len(points)} control points; at least 4 are required"
                )
            stems.append((index, points))
        elif shape_type == "point":
            group = shape.get("group_id")
            if group not in point_groups:
                point_groups[group] = len(stems)
                stems.append((index, []))
            stems[point_groups[group]][1].extend(_shape_points(shape, index))
        else:
            ignored += 1
            continue
        if "tau" in shape and shape_tau is None:
            shape_tau = _coerce_tau(shape["tau"], f"shapes[{index}]")

    if ignored:
        logger.warning("ignored %d shape(s) that are not stem linestrips or stem points", ignored)
    if not stems:
        raise AnnotationError('no stems: document contains no shapes labeled "stem"')
    for index, points in stems:
        if len(points) < 4:
            raise AnnotationValidationError(
                f"shapes[{index}] yields a stem with {len(points)} control points; "
                "at least 4 are required"
            )

    if "tau" in doc:
        tau = _coerce_tau(doc["tau"], "top-level")
    elif shape_tau is not None:
        tau = shape_tau
    else:
        tau = DEFAULT_TAU

    image_path = doc.get("imagePath")
    image_id = _strip_image_suffix(image_path) if isinstance(image_path, str) else ""

    return ControlPointAnnotation(
        image_id=image_id,
        image_width=_coerce_dimension(doc, "imageWidth"),
        image_height=_coerce_dimension(doc, "imageHeight"),
        stems=tuple(tuple(points) for _, points in stems),
        tau=tau,
    )


def write_annotation(annotation: ControlPointAnnotation) -> str:
    """Serialize an annotation to LabelMe-compatible JSON.

    parse_annotation maps the output back to an equal annotation, provided
    the image id does not itself end in an image-file suffix.
    """
    doc = {
        "version": _LABELME_VERSION,
        "flags": {},
        "shapes": [
            {
                "label": "stem",
                "points": [[p.x, p.y] for p in stem],
                "group_id": None,
                "shape_type": "linestrip",
                "flags": {},
            }
            for stem in annotation.stems
        ],
        "imagePath": annotation.image_id,
        "imageData": None,
        "imageHeight": annotation.image_height,
        "imageWidth": annotation.image_width,
        "tau": annotation.tau,
    }
    return json.dumps(doc, indent=2) + "\n"
