/** Debounced preview requests with stale-response dropping.
 *
 * Every edit bumps a counter and (re)arms a debounce timer; at most one
 * request is in flight at a time, and a response is delivered only if no
 * newer edit has happened since it was sent.
 */

import { MaskRequestWire } from "./types.js";

export const DEBOUNCE_MS = 150;

export class PreviewScheduler {
  private editCounter = 0;
  private pending: MaskRequestWire | null = null;
  private inFlight = false;
  private timer: ReturnType<typeof setTimeout> | null = null;

  constructor(
    private readonly send: (request: MaskRequestWire) => Promise<ArrayBuffer>,
    private readonly onResult: (png: ArrayBuffer, editId: number) => void,
    private readonly onError: (error: unknown) => void,
    private readonly debounceMs: number = DEBOUNCE_MS,
  ) {}

  get currentEdit(): number {
    return this.editCounter;
  }

  /** Register an edit; the request goes out after the debounce window. */
  schedule(request: MaskRequestWire): number {
    this.editCounter += 1;
    this.pending = request;
    if (this.timer !== null) {
      clearTimeout(this.timer);
    }
    this.timer = setTimeout(() => {
      this.timer = null;
      void this.flush();
    }, this.debounceMs);
    return this.editCounter;
  }

  /** Drop any pending work and mark in-flight responses stale (e.g. the
   * image changed or no stem is complete anymore). */
  invalidate(): void {
    this.editCounter += 1;
    this.pending = null;
    if (this.timer !== null) {
      clearTimeout(this.timer);
      this.timer = null;
    }
  }

  private async flush(): Promise<void> {
    if (this.inFlight || this.pending === null) {
      return;
    }
    const request = this.pending;
    const editId = this.editCounter;
    this.pending = null;
    this.inFlight = true;
    try {
      const png = await this.send(request);
      if (editId === this.editCounter) {
        this.onResult(png, editId);
      }
    } catch (error) {
      if (editId === this.editCounter) {
        this.onError(error);
      }
    } finally {
      this.inFlight = false;
      if (this.pending !== null && this.timer === null) {
        void this.flush();
      }
    }
  }
}
