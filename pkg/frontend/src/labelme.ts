/** Export: LabelMe-compatible JSON and the annotation-timing CSV. */

import { MIN_POINTS_PER_STEM, SessionState } from "./types.js";
import { missingPoints } from "./state.js";

const IMAGE_SUFFIXES = [".png", ".jpg", ".jpeg", ".bmp", ".tif", ".tiff", ".gif", ".webp"];

export const TIMING_CSV_HEADER = "image_id,seconds,method";

/** The mask-pairing id for an image file name (suffix stripped). */
export function imageId(name: string): string {
  const base = name.replace(/\\/g, "/").split("/").pop() ?? name;
  const lower = base.toLowerCase();
  for (const suffix of IMAGE_SUFFIXES) {
    if (lower.endsWith(suffix)) {
      return base.slice(0, base.length - suffix.length);
    }
  }
  return base;
}

/** Human-readable reasons the session cannot be exported yet. */
export function exportBlockers(state: SessionState): string[] {
  const blockers: string[] = [];
  if (state.imageName === null) {
    blockers.push("no image loaded");
  }
  const nonEmpty = state.stems.filter((stem) => stem.length > 0);
  if (!nonEmpty.length) {
    blockers.push("no control points placed");
  }
  state.stems.forEach((stem, index) => {
    if (stem.length > 0 && stem.length < MIN_POINTS_PER_STEM) {
      const n = missingPoints(stem);
      blockers.push(`stem ${index + 1} needs ${n} more point${n === 1 ? "" : "s"}`);
    }
  });
  return blockers;
}

/** Serialize the session as a LabelMe document the CLI ingests unchanged. */
export function toLabelMeJson(state: SessionState): string {
  const blockers = exportBlockers(state);
  if (blockers.length) {
    throw new Error(`cannot export: ${blockers.join("; ")}`);
  }
  const shapes = state.stems
    .filter((stem) => stem.length >= MIN_POINTS_PER_STEM)
    .map((stem) => ({
      label: "stem",
      points: stem.map((p) => [p.x, p.y]),
      group_id: null,
      shape_type: "linestrip",
      flags: {},
    }));
  const doc = {
    version: "5.2.1",
    flags: {},
    shapes,
    imagePath: state.imageName,
    imageData: null,
    imageHeight: state.imageHeight,
    imageWidth: state.imageWidth,
    tau: state.tau,
  };
  return JSON.stringify(doc, null, 2) + "\n";
}

/** Elapsed stopwatch seconds at export time. */
export function elapsedSeconds(state: SessionState, nowMs: number): number {
  if (state.startedAtMs === null) {
    throw new Error("stopwatch never started: no image was loaded");
  }
  return (nowMs - state.startedAtMs) / 1000;
}

export function timingRow(id: string, seconds: number, method = "point-based"): string {
  if (!(seconds > 0)) {
    throw new RangeError(`annotation seconds must be > 0, got ${seconds}`);
  }
  if (method !== "point-based" && method !== "detailed") {
    throw new RangeError(`method must be point-based or detailed, got ${method}`);
  }
  return `${id},${seconds.toFixed(3)},${method}`;
}

/** Accumulates one CSV row per export for the whole browser session. */
export class TimingLog {
  private rows: string[] = [];

  get count(): number {
    return this.rows.length;
  }

  append(id: string, seconds: number, method = "point-based"): string {
    const row = timingRow(id, seconds, method);
    this.rows.push(row);
    return row;
  }

  toCsv(): string {
    return [TIMING_CSV_HEADER, ...this.rows].join("\n") + "\n";
  }
}
