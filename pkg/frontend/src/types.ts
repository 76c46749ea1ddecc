export interface Point {
  readonly x: number;
  readonly y: number;
}

/** One image's worth of annotation work, in image-pixel coordinates. */
export interface SessionState {
  readonly imageName: string | null;
  readonly imageWidth: number;
  readonly imageHeight: number;
  readonly stems: ReadonlyArray<ReadonlyArray<Point>>;
  readonly activeStem: number;
  readonly tau: number;
  readonly clampEnds: boolean;
  /** Stopwatch start, set when the image loads; read at export. */
  readonly startedAtMs: number | null;
}

/** Wire form of a POST /v1/mask body. */
export interface MaskRequestWire {
  image_width: number;
  image_height: number;
  stems: number[][][];
  tau: number;
  clamp_ends: boolean;
  samples_per_segment?: number;
}

export const MIN_POINTS_PER_STEM = 4;
export const TAU_MIN = 1;
export const TAU_MAX = 100;
export const TAU_DEFAULT = 30;
