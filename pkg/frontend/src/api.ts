/** Fetch wrapper for the stemtrace HTTP service.  The UI never computes a
 * mask itself: every preview pixel comes from POST /v1/mask. */

import { MaskRequestWire, SessionState } from "./types.js";
import { completeStems } from "./state.js";

export class ApiError extends Error {
  constructor(
    readonly status: number,
    readonly code: string,
    message: string,
  ) {
    super(message);
    this.name = "ApiError";
  }
}

/** Wire request for the current session, or null when no stem is complete.
 * Incomplete stems are left out; they render as dashed hints instead. */
export function buildMaskRequest(state: SessionState): MaskRequestWire | null {
  const stems = completeStems(state);
  if (!stems.length || state.imageWidth < 1 || state.imageHeight < 1) {
    return null;
  }
  return {
    image_width: state.imageWidth,
    image_height: state.imageHeight,
    stems: stems.map((stem) => stem.map((p) => [p.x, p.y])),
    tau: state.tau,
    clamp_ends: state.clampEnds,
  };
}

async function errorFrom(response: Response): Promise<ApiError> {
  let code = "http_error";
  let message = `${response.status} ${response.statusText}`;
  try {
    const body = (await response.json()) as { error?: string; message?: string };
    if (body.error) {
      code = body.error;
    }
    if (body.message) {
      message = body.message;
    }
  } catch {
    // non-JSON error body; keep the status line
  }
  return new ApiError(response.status, code, message);
}

export class MaskApi {
  constructor(private readonly baseUrl: string = "") {}

  async fetchMask(request: MaskRequestWire): Promise<ArrayBuffer> {
    const response = await fetch(`${this.baseUrl}/v1/mask`, {
      method: "POST",
      headers: { "Content-Type": "application/json" },
      body: JSON.stringify(request),
    });
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return response.arrayBuffer();
  }

  async health(): Promise<string> {
    const response = await fetch(`${this.baseUrl}/healthz`);
    if (!response.ok) {
      throw await errorFrom(response);
    }
    return response.text();
  }
}
