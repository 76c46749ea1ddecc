import { describe, expect, it } from "vitest";

import { buildMaskRequest } from "../src/api.js";
import {
  TIMING_CSV_HEADER,
  TimingLog,
  elapsedSeconds,
  exportBlockers,
  imageId,
  timingRow,
  toLabelMeJson,
} from "../src/labelme.js";
import { initialState, loadImage, placePoint, setTau } from "../src/state.js";
import { SessionState } from "../src/types.js";

function sessionWithStem(points: Array<[number, number]>): SessionState {
  let state = loadImage(initialState(), "plant_042.jpg", 640, 480, 0);
  for (const [x, y] of points) {
    state = placePoint(state, 0, { x, y });
  }
  return state;
}

const FOUR: Array<[number, number]> = [[40, 10], [42, 40], [45, 80], [41, 110]];

describe("export blockers", () => {
  it("blocks until an image and four points exist", () => {
    expect(exportBlockers(initialState())).toContain("no image loaded");
    const empty = loadImage(initialState(), "p.jpg", 10, 10, 0);
    expect(exportBlockers(empty)).toContain("no control points placed");
  });

  it("names the short stem and how many points it needs", () => {
    const state = sessionWithStem(FOUR.slice(0, 2));
    expect(exportBlockers(state)).toEqual(["stem 1 needs 2 more points"]);
  });

  it("clears once every stem has four points", () => {
    expect(exportBlockers(sessionWithStem(FOUR))).toEqual([]);
  });
});

describe("LabelMe export", () => {
  it("emits the document shape the CLI ingests", () => {
    const state = setTau(sessionWithStem(FOUR), 12);
    const doc = JSON.parse(toLabelMeJson(state));
    expect(doc.imagePath).toBe("plant_042.jpg");
    expect(doc.imageWidth).toBe(640);
    expect(doc.imageHeight).toBe(480);
    expect(doc.tau).toBe(12);
    expect(doc.shapes).toHaveLength(1);
    expect(doc.shapes[0].label).toBe("stem");
    expect(doc.shapes[0].shape_type).toBe("linestrip");
    expect(doc.shapes[0].points).toEqual(FOUR.map(([x, y]) => [x, y]));
  });

  it("throws instead of exporting an incomplete session", () => {
    expect(() => toLabelMeJson(sessionWithStem(FOUR.slice(0, 3)))).toThrow(/needs 1 more point/);
  });
});

describe("mask request building", () => {
  it("mirrors the session onto the wire", () => {
    const state = sessionWithStem(FOUR);
    const request = buildMaskRequest(state);
    expect(request).not.toBeNull();
    expect(request!.image_width).toBe(640);
    expect(request!.stems).toEqual([FOUR.map(([x, y]) => [x, y])]);
    expect(request!.tau).toBe(30);
    expect(request!.clamp_ends).toBe(false);
  });

  it("returns null when no stem is complete", () => {
    expect(buildMaskRequest(sessionWithStem(FOUR.slice(0, 3)))).toBeNull();
  });
});

describe("timing log", () => {
  it("strips image suffixes for the pairing id", () => {
    expect(imageId("plant_042.jpg")).toBe("plant_042");
    expect(imageId("dir/plant_042.PNG")).toBe("plant_042");
    expect(imageId("already_an_id")).toBe("already_an_id");
  });

  it("measures the stopwatch from image load", () => {
    const state = loadImage(initialState(), "p.jpg", 10, 10, 1_000);
    expect(elapsedSeconds(state, 28_000)).toBeCloseTo(27.0);
    expect(() => elapsedSeconds(initialState(), 5_000)).toThrow(/no image/);
  });

  it("rejects non-positive seconds and unknown methods", () => {
    expect(() => timingRow("a", 0)).toThrow(RangeError);
    expect(() => timingRow("a", 5, "telepathy")).toThrow(RangeError);
  });

  it("accumulates CSV rows under the fixed header", () => {
    const log = new TimingLog();
    log.append("plant_042", 27.125);
    log.append("plant_043", 13.5, "point-based");
    const lines = log.toCsv().trim().split("\n");
    expect(lines[0]).toBe(TIMING_CSV_HEADER);
    expect(lines[1]).toBe("plant_042,27.125,point-based");
    expect(lines).toHaveLength(3);
  });
});
