"""Command-line front door: generate, evaluate, split, serve, preview.

Exit codes: 0 on success, 1 when any per-file step failed (the report is
still emitted), 2 on usage errors.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from . import __version__
from .annotations import AnnotationError, parse_annotation
from .dataset import batch_evaluate, batch_generate, split_dataset, split_manifest_json
from .mask_png import MaskFormatError, write_mask_png
from .metrics import render_csv, render_table
from .raster import generate_annotation_mask

KNOWN_ID_SUFFIXES = (".json", ".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="stemtrace",
        description="Generate tau-pixel-wide stem masks from control points and evaluate them.",
    )
    parser.add_argument("--version", action="version", version=f"stemtrace {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="{generate,evaluate,split,serve,preview}")

    gen = sub.add_parser("generate", help="batch-generate masks from a directory of annotations")
    gen.add_argument("--in", dest="annotation_dir", required=True, help="annotation JSON directory")
    gen.add_argument("--out", dest="output_dir", required=True, help="mask output directory")
    gen.add_argument("--tau", type=int, default=None,
                     help="override mask width for all annotations (default: per-annotation tau, 30 if unset)")
    gen.add_argument("--samples-per-segment", type=int, default=None,
                     help="override sampling density (default: derived from control-polygon length)")
    gen.add_argument("--clamp-ends", action="store_true",
                     help="triplicate end control points so curves touch them")
    gen.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    gen.set_defaults(func=cmd_generate)

    ev = sub.add_parser("evaluate", help="compare prediction masks against ground-truth masks")
    ev.add_argument("--pred", dest="pred_dir", required=True, help="prediction mask directory")
    ev.add_argument("--gt", dest="gt_dir", required=True, help="ground-truth mask directory")
    ev.add_argument("--format", choices=("csv", "table"), default="table", help="report format")
    ev.add_argument("--f1", choices=("standard", "paper", "both"), default="standard",
                    help="which F1 column(s) the table shows (CSV always carries both)")
    ev.add_argument("--out", dest="out_file", default=None, help="write the report here instead of stdout")
    ev.add_argument("--jobs", type=int, default=1, help="parallel workers (default 1)")
    ev.set_defaults(func=cmd_evaluate)

    sp = sub.add_parser("split", help="deterministically split image ids 8:1:1")
    sp.add_argument("--n-from", dest="id_dir", required=True,
                    help="directory whose file names provide the image ids")
    sp.add_argument("--seed", type=int, default=0, help="shuffle seed (default 0)")
    sp.add_argument("--out", dest="out_file", default=None, help="write the manifest here instead of stdout")
    sp.set_defaults(func=cmd_split)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--addr", default=None, help="host:port (default $STEMTRACE_ADDR or 127.0.0.1:8080)")
    sv.set_defaults(func=cmd_serve)

    pv = sub.add_parser("preview", help="render a single annotation to a PNG mask")
    pv.add_argument("--annotation", required=True, help="annotation JSON file")
    pv.add_argument("--out", dest="out_file", default="-", help="output PNG path, or - for stdout")
    pv.add_argument("--tau", type=int, default=None, help="override the annotation's tau")
    pv.add_argument("--samples-per-segment", type=int, default=None, help="override sampling density")
    pv.add_argument("--clamp-ends", action="store_true",
                    help="triplicate end control points so curves touch them")
    pv.set_defaults(func=cmd_preview)

    return parser


def cmd_generate(args: argparse.Namespace) -> int:
    report = batch_generate(
        args.annotation_dir,
        args.output_dir,
        tau=args.tau,
        samples_per_segment=args.samples_per_segment,
        clamp_ends=args.clamp_ends,
        jobs=args.jobs,
    )
    for g in report.successes:
        print(f"ok   {g.source} -> {g.mask_file} (tau={g.tau}, stems={g.stems}, {g.seconds:.3f}s)")
    for name, error in report.failures:
        print(f"FAIL {name}: {error}")
    print(f"{len(report.successes)} generated, {len(report.failures)} failed")
    return 0 if report.ok else 1


def cmd_evaluate(args: argparse.Namespace) -> int:
    report = batch_evaluate(args.pred_dir, args.gt_dir, jobs=args.jobs)
    text = render_csv(report) if args.format == "csv" else render_table(report, f1_mode=args.f1)
    if args.out_file:
        Path(args.out_file).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    for w in report.warnings:
        print(f"warning: {w}", file=sys.stderr)
    for e in report.errors:
        print(f"error: {e}", file=sys.stderr)
    return 0 if not report.errors else 1


def _ids_from_dir(directory: str) -> list[str]:
    root = Path(directory)
    if not root.is_dir():
        raise NotADirectoryError(f"id directory not found: {root}")
    ids = set()
    for p in root.iterdir():
        if not p.is_file() or p.name.startswith("."):
            continue
        name = p.name
        for suffix in KNOWN_ID_SUFFIXES:
            if name.lower().endswith(suffix):
                name = name[: -len(suffix)]
                break
        if name.endswith("_mask"):
            name = name[: -len("_mask")]
        ids.add(name)
    return sorted(ids)


def cmd_split(args: argparse.Namespace) -> int:
    ids = _ids_from_dir(args.id_dir)
    split = split_dataset(ids, args.seed)
    text = split_manifest_json(split)
    if args.out_file:
        Path(args.out_file).write_text(text, encoding="utf-8")
        train, val, test = split.counts
        print(f"wrote {args.out_file}: {train}/{val}/{test} train/val/test from {len(ids)} ids")
    else:
        sys.stdout.write(text)
    return 0


def cmd_serve(args: argparse.Namespace) -> int:
    from .service import serve

    serve(args.addr)
    return 0


def cmd_preview(args: argparse.Namespace) -> int:
    annotation = parse_annotation(Path(args.annotation).read_text(encoding="utf-8"))
    mask = generate_annotation_mask(
        annotation.stems,
        args.tau if args.tau is not None else annotation.tau,
        annotation.image_width,
        annotation.image_height,
        samples_per_segment=args.samples_per_segment,
        clamp_ends=args.clamp_ends,
    )
    payload = write_mask_png(mask)
    if args.out_file == "-":
        sys.stdout.buffer.write(payload)
        sys.stdout.buffer.flush()
    else:
        Path(args.out_file).write_bytes(payload)
    return 0


def main(argv: Sequence[str] | None = None) -> int:
    logging.basicConfig(level=logging.WARNING, format="%(levelname)s %(name)s: %(message)s")
    parser = build_parser()
    args = parser.parse_args(argv)
    if not getattr(args, "func", None):
        parser.print_usage(sys.stderr)
        return 2
    try:
        return args.func(args)
    except (AnnotationError, MaskFormatError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
