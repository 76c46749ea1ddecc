/** Pure session-state transitions.  Every function returns a new state and
 * never touches the input, so undo/redo can restore exact prior states by
 * keeping references. */

import {
  MIN_POINTS_PER_STEM,
  Point,
  SessionState,
  TAU_DEFAULT,
  TAU_MAX,
  TAU_MIN,
} from "./types.js";

export function initialState(): SessionState {
  return {
    imageName: null,
    imageWidth: 0,
    imageHeight: 0,
    stems: [[]],
    activeStem: 0,
    tau: TAU_DEFAULT,
    clampEnds: false,
    startedAtMs: null,
  };
}

export function loadImage(
  state: SessionState,
  name: string,
  width: number,
  height: number,
  nowMs: number,
): SessionState {
  if (width < 1 || height < 1) {
    throw new RangeError(`image dimensions must be >= 1, got ${width}x${height}`);
  }
  return {
    ...state,
    imageName: name,
    imageWidth: width,
    imageHeight: height,
    stems: [[]],
    activeStem: 0,
    startedAtMs: nowMs,
  };
}

function checkStemIndex(state: SessionState, stemIndex: number): void {
  if (stemIndex < 0 || stemIndex >= state.stems.length) {
    throw new RangeError(`stem index ${stemIndex} out of range [0, ${state.stems.length})`);
  }
}

function replaceStem(
  state: SessionState,
  stemIndex: number,
  stem: ReadonlyArray<Point>,
): SessionState {
  const stems = state.stems.map((s, i) => (i === stemIndex ? stem : s));
  return { ...state, stems };
}

export function addStem(state: SessionState): SessionState {
  return { ...state, stems: [...state.stems, []], activeStem: state.stems.length };
}

export function selectStem(state: SessionState, stemIndex: number): SessionState {
  checkStemIndex(state, stemIndex);
  return { ...state, activeStem: stemIndex };
}

export function removeStem(state: SessionState, stemIndex: number): SessionState {
  checkStemIndex(state, stemIndex);
  const stems = state.stems.filter((_, i) => i !== stemIndex);
  const remaining = stems.length ? stems : [[]];
  const active = Math.min(state.activeStem, remaining.length - 1);
  return { ...state, stems: remaining, activeStem: active };
}

export function placePoint(state: SessionState, stemIndex: number, point: Point): SessionState {
  checkStemIndex(state, stemIndex);
  const stem = state.stems[stemIndex];
  return replaceStem(state, stemIndex, [...stem, point]);
}

export function movePoint(
  state: SessionState,
  stemIndex: number,
  pointIndex: number,
  point: Point,
): SessionState {
  checkStemIndex(state, stemIndex);
  const stem = state.stems[stemIndex];
  if (pointIndex < 0 || pointIndex >= stem.length) {
    throw new RangeError(`point index ${pointIndex} out of range [0, ${stem.length})`);
  }
  return replaceStem(
    state,
    stemIndex,
    stem.map((p, i) => (i === pointIndex ? point : p)),
  );
}

export function deletePoint(
  state: SessionState,
  stemIndex: number,
  pointIndex: number,
): SessionState {
  checkStemIndex(state, stemIndex);
  const stem = state.stems[stemIndex];
  if (pointIndex < 0 || pointIndex >= stem.length) {
    throw new RangeError(`point index ${pointIndex} out of range [0, ${stem.length})`);
  }
  return replaceStem(
    state,
    stemIndex,
    stem.filter((_, i) => i !== pointIndex),
  );
}

export function setTau(state: SessionState, tau: number): SessionState {
  const clamped = Math.min(TAU_MAX, Math.max(TAU_MIN, Math.round(tau)));
  return { ...state, tau: clamped };
}

export function setClampEnds(state: SessionState, clampEnds: boolean): SessionState {
  return { ...state, clampEnds };
}

export function completeStems(state: SessionState): ReadonlyArray<ReadonlyArray<Point>> {
  return state.stems.filter((stem) => stem.length >= MIN_POINTS_PER_STEM);
}

export function missingPoints(stem: ReadonlyArray<Point>): number {
  return Math.max(0, MIN_POINTS_PER_STEM - stem.length);
}

/** Snapshot-based undo/redo; states are immutable so holding references
 * restores the exact prior session. */
export class History<T> {
  private past: T[] = [];
  private future: T[] = [];

  constructor(private present: T) {}

  get current(): T {
    return this.present;
  }

  get canUndo(): boolean {
    return this.past.length > 0;
  }

  get canRedo(): boolean {
    return this.future.length > 0;
  }

  apply(next: T): T {
    this.past.push(this.present);
    this.present = next;
    this.future = [];
    return next;
  }

  undo(): T | null {
    const previous = this.past.pop();
    if (previous === undefined) {
      return null;
    }
    this.future.push(this.present);
    this.present = previous;
    return previous;
  }

  redo(): T | null {
    const next = this.future.pop();
    if (next === undefined) {
      return null;
    }
    this.past.push(this.present);
    this.present = next;
    return next;
  }
}
