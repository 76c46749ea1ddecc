"""Dataset-scale plumbing: deterministic splits, timing logs, batch jobs.

Batch generation maps a directory of annotation JSON files to one mask PNG
per image (multiple stems are OR-ed together); batch evaluation pairs
prediction and ground-truth masks by image id and produces a metrics
report.  Both are pure functions of their inputs, so reruns yield
byte-identical artifacts.
"""

from __future__ import annotations

import csv
import io
import json
import random
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from .annotations import AnnotationError, ControlPointAnnotation, parse_annotation
from .mask_png import read_mask_png, write_mask_png
from .metrics import MetricsReport, build_report, confusion
from .raster import generate_annotation_mask

TIMING_METHODS = ("point-based", "detailed")
TIMING_CSV_HEADER = ("image_id", "seconds", "method")
MASK_SUFFIX = "_mask.png"
MANIFEST_NAME = "manifest.json"


@dataclass(frozen=True)
class DatasetSplit:
    """A train/val/test partition of image ids, 8:1:1 by the floor rule."""

    train: tuple[str, ...]
    val: tuple[str, ...]
    test: tuple[str, ...]
    seed: int

    @property
    def counts(self) -> tuple[int, int, int]:
        return (len(self.train), len(self.val), len(self.test))


def split_dataset(image_ids: Sequence[str], seed: int) -> DatasetSplit:
    """Shuffle ids deterministically under ``seed`` and split roughly 8:1:1.

    val and test each get floor(n / 10) ids, train gets the remainder, so
    the three lists always partition the input.
    """
    ids = list(image_ids)
    n = len(ids)
    if n < 3:
        raise ValueError(f"need at least 3 image ids to split, got {n}")
    if len(set(ids)) != n:
        raise ValueError("image ids must be unique")
    rng = random.Random(seed)
    rng.shuffle(ids)
    k = n // 10
    return DatasetSplit(
        train=tuple(ids[2 * k :]),
        val=tuple(ids[:k]),
        test=tuple(ids[k : 2 * k]),
        seed=seed,
    )


def split_manifest_json(split: DatasetSplit) -> str:
    doc = {
        "seed": split.seed,
        "counts": {"train": len(split.train), "val": len(split.val), "test": len(split.test)},
        "train": list(split.train),
        "val": list(split.val),
        "test": list(split.test),
    }
    return json.dumps(doc, indent=2) + "\n"


@dataclass(frozen=True)
class TimingEntry:
    image_id: str
    seconds: float
    method: str


@dataclass
class TimingLog:
    """Per-image annotation times, tagged point-based or detailed."""

    entries: list[TimingEntry] = field(default_factory=list)

    def append(self, image_id: str, seconds: float, method: str) -> None:
        if seconds <= 0:
            raise ValueError(f"annotation seconds must be > 0, got {seconds}")
        if method not in TIMING_METHODS:
            raise ValueError(f"method must be one of {TIMING_METHODS}, got {method!r}")
        self.entries.append(TimingEntry(image_id, float(seconds), method))

    def summary(self) -> dict[str, dict[str, float]]:
        """Per-method min/max/mean seconds."""
        out: dict[str, dict[str, float]] = {}
        for method in TIMING_METHODS:
            seconds = [e.seconds for e in self.entries if e.method == method]
            if seconds:
                out[method] = {
                    "min": min(seconds),
                    "max": max(seconds),
                    "mean": sum(seconds) / len(seconds),
                    "count": len(seconds),
                }
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(TIMING_CSV_HEADER)
        for e in self.entries:
            writer.writerow([e.image_id, f"{e.seconds:.3f}", e.method])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "TimingLog":
        log = cls()
        reader = csv.reader(io.StringIO(text))
        header = next(reader, None)
        if header is not None and tuple(header) != TIMING_CSV_HEADER:
            raise ValueError(f"unexpected timing CSV header: {header!r}")
        for row in reader:
            if not row:
                continue
            if len(row) != 3:
                raise ValueError(f"malformed timing row: {row!r}")
            log.append(row[0], float(row[1]), row[2])
        return log


@dataclass(frozen=True)
class GeneratedMask:
    image_id: str
    source: str  # annotation file name
    mask_file: str
    tau: int
    stems: int
    seconds: float


@dataclass(frozen=True)
class GenerateReport:
    successes: tuple[GeneratedMask, ...]
    failures: tuple[tuple[str, str], ...]  # (annotation file name, error)

    @property
    def ok(self) -> bool:
        return not self.failures


def _mask_name(image_id: str) -> str:
    return f"{image_id}{MASK_SUFFIX}"


def batch_generate(
    annotation_dir: str | Path,
    output_dir: str | Path,
    tau: int | None = None,
    samples_per_segment: int | None = None,
    clamp_ends: bool = False,
    jobs: int = 1,
) -> GenerateReport:
    """Generate one mask PNG per annotation file in ``annotation_dir``.

    ``tau`` and ``samples_per_segment`` override the per-annotation values
    when given.  Individual file failures are collected in the report and
    do not abort the batch.  Also writes a ``manifest.json`` describing
    the produced masks.
    """
    ann_dir = Path(annotation_dir)
    out_dir = Path(output_dir)
    if not ann_dir.is_dir():
        raise NotADirectoryError(f"annotation directory not found: {ann_dir}")
    out_dir.mkdir(parents=True, exist_ok=True)

    files = sorted(p for p in ann_dir.iterdir() if p.is_file() and p.suffix == ".json")
    failures: list[tuple[str, str]] = []
    parsed: list[tuple[Path, ControlPointAnnotation, str]] = []
    seen_ids: set[str] = set()
    for path in files:
        try:
            annotation = parse_annotation(path.read_text(encoding="utf-8"))
        except (AnnotationError, OSError, UnicodeDecodeError) as exc:
            failures.append((path.name, str(exc)))
            continue
        image_id = annotation.image_id or path.stem
        if image_id in seen_ids:
            failures.append((path.name, f"duplicate image id {image_id!r}"))
            continue
        seen_ids.add(image_id)
        parsed.append((path, annotation, image_id))

    def render(item: tuple[Path, ControlPointAnnotation, str]) -> GeneratedMask:
        path, annotation, image_id = item
        started = time.perf_counter()
        mask = generate_annotation_mask(
            annotation.stems,
            tau if tau is not None else annotation.tau,
            annotation.image_width,
            annotation.image_height,
            samples_per_segment=samples_per_segment,
            clamp_ends=clamp_ends,
        )
        payload = write_mask_png(mask)
        mask_file = _mask_name(image_id)
        (out_dir / mask_file).write_bytes(payload)
        return GeneratedMask(
            image_id=image_id,
            source=path.name,
            mask_file=mask_file,
            tau=tau if tau is not None else annotation.tau,
            stems=len(annotation.stems),
            seconds=time.perf_counter() - started,
        )

    successes: list[GeneratedMask] = []
    if jobs > 1 and len(parsed) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_guarded(render), parsed))
    else:
        outcomes = [_guarded(render)(item) for item in parsed]
    for item, outcome in zip(parsed, outcomes):
        if isinstance(outcome, GeneratedMask):
            successes.append(outcome)
        else:
            failures.append((item[0].name, outcome))

    successes.sort(key=lambda g: g.image_id)
    failures.sort()
    manifest = {
        "masks": [
            {
                "image_id": g.image_id,
                "source": g.source,
                "mask": g.mask_file,
                "tau": g.tau,
                "stems": g.stems,
                "samples_per_segment": samples_per_segment,
                "clamp_ends": clamp_ends,
            }
            for g in successes
        ]
    }
    (out_dir / MANIFEST_NAME).write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")
    return GenerateReport(successes=tuple(successes), failures=tuple(failures))


def _guarded(fn):
    """Wrap a worker so exceptions come back as error strings, not aborts."""

    def run(item):
        try:
            return fn(item)
        except Exception as exc:  # noqa: BLE001 - batch isolation by design
            return f"{type(exc).__name__}: {exc}"

    return run


def _mask_id(path: Path) -> str:
    stem = path.name[: -len(".png")]
    if stem.endswith("_mask"):
        stem = stem[: -len("_mask")]
    return stem


def _scan_masks(directory: Path) -> dict[str, Path]:
    return {
        _mask_id(p): p
        for p in sorted(directory.iterdir())
        if p.is_file() and p.suffix == ".png"
    }


def batch_evaluate(
    pred_dir: str | Path,
    gt_dir: str | Path,
    jobs: int = 1,
) -> MetricsReport:
    """Compare prediction masks against ground-truth masks, paired by image id.

    Unpaired images become warnings, undecodable or size-mismatched pairs
    become per-pair errors; both are excluded from the aggregates.
    """
    preds = Path(pred_dir)
    gts = Path(gt_dir)
    for d in (preds, gts):
        if not d.is_dir():
            raise NotADirectoryError(f"mask directory not found: {d}")
    pred_masks = _scan_masks(preds)
    gt_masks = _scan_masks(gts)

    warnings = [f"no ground truth for {i}" for i in sorted(set(pred_masks) - set(gt_masks))]
    warnings += [f"no prediction for {i}" for i in sorted(set(gt_masks) - set(pred_masks))]
    paired = sorted(set(pred_masks) & set(gt_masks))

    def compare(image_id: str):
        pred = read_mask_png(pred_masks[image_id].read_bytes())
        gt = read_mask_png(gt_masks[image_id].read_bytes())
        return confusion(pred, gt)

    if jobs > 1 and len(paired) > 1:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            outcomes = list(pool.map(_guarded(compare), paired))
    else:
        outcomes = [_guarded(compare)(i) for i in paired]

    pairs = []
    errors = []
    for image_id, outcome in zip(paired, outcomes):
        if isinstance(outcome, str):
            errors.append(f"{image_id}: {outcome}")
        else:
            pairs.append((image_id, outcome))
    return build_report(pairs, warnings=warnings, errors=errors)
