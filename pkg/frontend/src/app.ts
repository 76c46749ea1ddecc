/** Browser wiring: canvas, pointer edits, live mask overlay, export.
 *
 * All geometry lives in image-pixel coordinates; the canvas merely scales
 * for display.  Masks are never computed here: every overlay refresh is a
 * POST /v1/mask round-trip through the PreviewScheduler.
 */

import { ApiError, MaskApi, buildMaskRequest } from "./api.js";
import {
  History,
  addStem,
  deletePoint,
  initialState,
  loadImage,
  missingPoints,
  movePoint,
  placePoint,
  removeStem,
  selectStem,
  setClampEnds,
  setTau,
} from "./state.js";
import { TimingLog, elapsedSeconds, exportBlockers, imageId, toLabelMeJson } from "./labelme.js";
import { PreviewScheduler } from "./preview.js";
import { Point, SessionState, TAU_DEFAULT, TAU_MAX, TAU_MIN } from "./types.js";

const POINT_RADIUS = 5;
const HIT_RADIUS = 9;

function element<T extends HTMLElement>(id: string): T {
  const found = document.getElementById(id);
  if (!found) {
    throw new Error(`missing #${id} in index.html`);
  }
  return found as T;
}

class AnnotatorApp {
  private readonly canvas = element<HTMLCanvasElement>("canvas");
  private readonly ctx = this.canvas.getContext("2d")!;
  private readonly filePicker = element<HTMLInputElement>("file-picker");
  private readonly tauSlider = element<HTMLInputElement>("tau");
  private readonly tauValue = element<HTMLSpanElement>("tau-value");
  private readonly opacitySlider = element<HTMLInputElement>("opacity");
  private readonly clampToggle = element<HTMLInputElement>("clamp-ends");
  private readonly stemList = element<HTMLUListElement>("stem-list");
  private readonly addStemButton = element<HTMLButtonElement>("add-stem");
  private readonly undoButton = element<HTMLButtonElement>("undo");
  private readonly redoButton = element<HTMLButtonElement>("redo");
  private readonly exportButton = element<HTMLButtonElement>("export");
  private readonly timingButton = element<HTMLButtonElement>("download-timing");
  private readonly banner = element<HTMLDivElement>("banner");
  private readonly hint = element<HTMLDivElement>("hint");

  // same origin by default; ?service=http://host:port points elsewhere
  // (the service must then allow this origin via STEMTRACE_ALLOWED_ORIGINS)
  private readonly api = new MaskApi(
    new URLSearchParams(window.location.search).get("service") ?? "",
  );
  private readonly history = new History<SessionState>(initialState());
  private readonly timing = new TimingLog();
  private readonly scheduler = new PreviewScheduler(
    (request) => this.api.fetchMask(request),
    (png) => {
      void this.showOverlay(png);
    },
    (error) => this.handlePreviewError(error),
  );

  private image: HTMLImageElement | null = null;
  private overlay: ImageBitmap | null = null;
  private drag: { stem: number; point: number } | null = null;
  /** Transient state while dragging; committed to history on pointer-up. */
  private dragState: SessionState | null = null;

  constructor() {
    this.filePicker.addEventListener("change", () => this.onPickImage());
    this.tauSlider.min = String(TAU_MIN);
    this.tauSlider.max = String(TAU_MAX);
    this.tauSlider.value = String(TAU_DEFAULT);
    this.tauSlider.addEventListener("input", () => {
      this.apply(setTau(this.state, Number(this.tauSlider.value)));
    });
    this.opacitySlider.addEventListener("input", () => this.render());
    this.clampToggle.addEventListener("change", () => {
      this.apply(setClampEnds(this.state, this.clampToggle.checked));
    });
    this.addStemButton.addEventListener("click", () => this.apply(addStem(this.state)));
    this.undoButton.addEventListener("click", () => this.undo());
    this.redoButton.addEventListener("click", () => this.redo());
    this.exportButton.addEventListener("click", () => this.exportAnnotation());
    this.timingButton.addEventListener("click", () => this.downloadTiming());

    this.canvas.addEventListener("pointerdown", (event) => this.onPointerDown(event));
    this.canvas.addEventListener("pointermove", (event) => this.onPointerMove(event));
    this.canvas.addEventListener("pointerup", (event) => this.onPointerUp(event));
    this.canvas.addEventListener("contextmenu", (event) => event.preventDefault());
    window.addEventListener("keydown", (event) => {
      if ((event.ctrlKey || event.metaKey) && event.key.toLowerCase() === "z") {
        event.preventDefault();
        if (event.shiftKey) {
          this.redo();
        } else {
          this.undo();
        }
      }
    });

    void this.pollHealth();
    this.syncControls();
  }

  private get state(): SessionState {
    return this.dragState ?? this.history.current;
  }

  /** Record a new state and refresh everything that depends on it. */
  private apply(next: SessionState): void {
    this.history.apply(next);
    this.afterStateChange();
  }

  private afterStateChange(): void {
    this.syncControls();
    this.requestPreview();
    this.render();
  }

  private undo(): void {
    if (this.history.undo() !== null) {
      this.afterStateChange();
    }
  }

  private redo(): void {
    if (this.history.redo() !== null) {
      this.afterStateChange();
    }
  }

  private onPickImage(): void {
    const file = this.filePicker.files?.[0];
    if (!file) {
      return;
    }
    const url = URL.createObjectURL(file);
    const image = new Image();
    image.onload = () => {
      this.image = image;
      this.overlay = null;
      this.scheduler.invalidate();
      this.apply(
        loadImage(this.state, file.name, image.naturalWidth, image.naturalHeight, Date.now()),
      );
    };
    image.onerror = () => this.showBanner(`could not load ${file.name}`);
    image.src = url;
  }

  private canvasScale(): number {
    if (!this.state.imageWidth) {
      return 1;
    }
    return this.canvas.width / this.state.imageWidth;
  }

  private toImageCoords(event: PointerEvent): Point {
    const rect = this.canvas.getBoundingClientRect();
    const displayScale = this.canvas.width / rect.width;
    const scale = this.canvasScale();
    return {
      x: ((event.clientX - rect.left) * displayScale) / scale,
      y: ((event.clientY - rect.top) * displayScale) / scale,
    };
  }

  private hitTest(at: Point): { stem: number; point: number } | null {
    const scale = this.canvasScale();
    const tolerance = HIT_RADIUS / scale;
    for (let s = 0; s < this.state.stems.length; s += 1) {
      const stem = this.state.stems[s];
      for (let i = 0; i < stem.length; i += 1) {
        if (Math.hypot(stem[i].x - at.x, stem[i].y - at.y) <= tolerance) {
          return { stem: s, point: i };
        }
      }
    }
    return null;
  }

  private onPointerDown(event: PointerEvent): void {
    if (!this.image) {
      return;
    }
    const at = this.toImageCoords(event);
    const hit = this.hitTest(at);
    if (event.button === 2 || event.altKey) {
      if (hit) {
        this.apply(deletePoint(this.state, hit.stem, hit.point));
      }
      return;
    }
    if (hit) {
      this.drag = hit;
      this.canvas.setPointerCapture(event.pointerId);
      return;
    }
    this.apply(placePoint(this.state, this.state.activeStem, at));
  }

  private onPointerMove(event: PointerEvent): void {
    if (!this.drag) {
      return;
    }
    // history stays untouched while dragging; the whole drag becomes one
    // undo step on pointer-up
    this.dragState = movePoint(this.state, this.drag.stem, this.drag.point, this.toImageCoords(event));
    this.requestPreview();
    this.render();
  }

  private onPointerUp(event: PointerEvent): void {
    if (!this.drag) {
      return;
    }
    const finalState = this.dragState;
    this.drag = null;
    this.dragState = null;
    if (finalState !== null) {
      this.history.apply(finalState);
    }
    this.canvas.releasePointerCapture(event.pointerId);
    this.afterStateChange();
  }

  private requestPreview(): void {
    const request = buildMaskRequest(this.state);
    if (!request) {
      this.scheduler.invalidate();
      this.overlay = null;
      this.render();
      return;
    }
    this.scheduler.schedule(request);
  }

  private async showOverlay(png: ArrayBuffer): Promise<void> {
    this.overlay = await createImageBitmap(new Blob([png], { type: "image/png" }));
    this.hideBanner();
    this.render();
  }

  private handlePreviewError(error: unknown): void {
    if (error instanceof ApiError) {
      this.showBanner(`preview failed: ${error.message}`);
    } else {
      this.showBanner("mask service unreachable; edits are kept locally");
    }
  }

  private async pollHealth(): Promise<void> {
    try {
      await this.api.health();
      this.hideBanner();
    } catch {
      this.showBanner("mask service unreachable; edits are kept locally");
    }
    setTimeout(() => void this.pollHealth(), 5000);
  }

  private showBanner(message: string): void {
    this.banner.textContent = message;
    this.banner.hidden = false;
  }

  private hideBanner(): void {
    this.banner.hidden = true;
  }

  private syncControls(): void {
    this.tauSlider.value = String(this.state.tau);
    this.tauValue.textContent = String(this.state.tau);
    this.clampToggle.checked = this.state.clampEnds;
    this.undoButton.disabled = !this.history.canUndo;
    this.redoButton.disabled = !this.history.canRedo;

    this.stemList.replaceChildren(
      ...this.state.stems.map((stem, index) => {
        const item = document.createElement("li");
        const need = missingPoints(stem);
        item.textContent =
          `stem ${index + 1}: ${stem.length} point${stem.length === 1 ? "" : "s"}` +
          (need ? ` (needs ${need} more)` : "");
        if (index === this.state.activeStem) {
          item.classList.add("active");
        }
        item.addEventListener("click", () => this.apply(selectStem(this.state, index)));
        const remove = document.createElement("button");
        remove.textContent = "x";
        remove.title = "remove stem";
        remove.addEventListener("click", (event) => {
          event.stopPropagation();
          this.apply(removeStem(this.state, index));
        });
        item.appendChild(remove);
        return item;
      }),
    );

    const blockers = exportBlockers(this.state);
    this.exportButton.disabled = blockers.length > 0;
    this.hint.textContent = blockers.join("; ");
  }

  private render(): void {
    const ctx = this.ctx;
    ctx.clearRect(0, 0, this.canvas.width, this.canvas.height);
    if (!this.image) {
      ctx.fillStyle = "#888";
      ctx.font = "16px sans-serif";
      ctx.fillText("pick an image to start annotating", 20, 40);
      return;
    }
    const scale = this.canvasScale();
    this.canvas.height = Math.round(this.state.imageHeight * scale);
    ctx.drawImage(this.image, 0, 0, this.canvas.width, this.canvas.height);
    if (this.overlay) {
      ctx.save();
      ctx.globalAlpha = Number(this.opacitySlider.value) / 100;
      ctx.drawImage(this.overlay, 0, 0, this.canvas.width, this.canvas.height);
      ctx.restore();
    }

    for (let s = 0; s < this.state.stems.length; s += 1) {
      const stem = this.state.stems[s];
      const incomplete = missingPoints(stem) > 0;
      if (stem.length > 1) {
        ctx.save();
        ctx.strokeStyle = incomplete ? "#f80" : "#0c4";
        ctx.lineWidth = 1.5;
        if (incomplete) {
          ctx.setLineDash([6, 4]);
        }
        ctx.beginPath();
        ctx.moveTo(stem[0].x * scale, stem[0].y * scale);
        for (const p of stem.slice(1)) {
          ctx.lineTo(p.x * scale, p.y * scale);
        }
        ctx.stroke();
        ctx.restore();
      }
      for (const p of stem) {
        ctx.beginPath();
        ctx.fillStyle = s === this.state.activeStem ? "#e22" : "#26e";
        ctx.arc(p.x * scale, p.y * scale, POINT_RADIUS, 0, Math.PI * 2);
        ctx.fill();
      }
    }
  }

  private download(name: string, payload: string, type: string): void {
    const blob = new Blob([payload], { type });
    const url = URL.createObjectURL(blob);
    const link = document.createElement("a");
    link.href = url;
    link.download = name;
    link.click();
    URL.revokeObjectURL(url);
  }

  private exportAnnotation(): void {
    const blockers = exportBlockers(this.state);
    if (blockers.length) {
      this.hint.textContent = blockers.join("; ");
      return;
    }
    const seconds = elapsedSeconds(this.state, Date.now());
    const id = imageId(this.state.imageName ?? "annotation");
    this.timing.append(id, seconds, "point-based");
    this.download(`${id}.json`, toLabelMeJson(this.state), "application/json");
    this.timingButton.disabled = false;
  }

  private downloadTiming(): void {
    this.download("timing.csv", this.timing.toCsv(), "text/csv");
  }
}

new AnnotatorApp();
