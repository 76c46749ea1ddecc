#!/usr/bin/env python3
"""Timing and memory check at full camera resolution (5496x3670).

Run: python scripts/benchmark_scale.py
"""

from __future__ import annotations

import time
import tracemalloc

import numpy as np

from stemtrace import (
    BinaryMask,
    Point2,
    StemCurve,
    confusion,
    f1,
    generate_stem_mask,
    precision,
    read_mask_png,
    recall,
    write_mask_png,
)

WIDTH, HEIGHT = 5496, 3670


def main() -> int:
    curve = StemCurve((
        Point2(2700.0, 150.0),
        Point2(2450.0, 1100.0),
        Point2(2950.0, 2300.0),
        Point2(2600.0, 3500.0),
    ))

    started = time.perf_counter()
    mask = generate_stem_mask(curve, 30, WIDTH, HEIGHT)
    print(f"generate tau=30 on {WIDTH}x{HEIGHT}: {time.perf_counter() - started:.3f}s "
          f"({mask.count_set} set pixels)")

    tracemalloc.start()
    generate_stem_mask(curve, 30, WIDTH, HEIGHT)
    _, peak = tracemalloc.get_traced_memory()
    tracemalloc.stop()
    print(f"peak traced allocations: {peak / 1e6:.1f} MB")

    started = time.perf_counter()
    payload = write_mask_png(mask)
    print(f"png encode: {time.perf_counter() - started:.3f}s ({len(payload)} bytes)")

    started = time.perf_counter()
    decoded = read_mask_png(payload)
    print(f"png decode: {time.perf_counter() - started:.3f}s (round-trip ok: {decoded == mask})")

    shifted = np.zeros_like(mask.pixels)
    shifted[:, 2:] = mask.pixels[:, :-2]
    pred = BinaryMask(shifted)
    started = time.perf_counter()
    counts = confusion(pred, mask)
    p, r = precision(counts), recall(counts)
    v = f1(counts, "standard")
    print(f"evaluate pair: {time.perf_counter() - started:.3f}s "
          f"(P={p:.3f} R={r:.3f} F1={v:.3f} for a 2 px shift)")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
