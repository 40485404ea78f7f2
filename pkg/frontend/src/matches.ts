// Match examiner: two panes showing consecutive images; select one object in
// each pane and confirm to create a match group. Selecting an already
// matched pair offers breaking the group instead.

import { api, imageBytesUrl, type ImageSummary, type ObjectPayload } from "./api.js";
import { buildOverlays, hitTest } from "./geometry.js";
import { makeKeydownHandler } from "./keyboard.js";
import { drawImageWithOverlays, loadImage } from "./render.js";
import type { ViewState } from "./state.js";

interface Pane {
  canvas: HTMLCanvasElement;
  summary: ImageSummary | null;
  objects: ObjectPayload[];
  image: HTMLImageElement | null;
  selected: number | null;
}

export class MatchExaminer {
  private images: ImageSummary[] = [];
  private position = 0;
  private panes: [Pane, Pane] | null = null;

  constructor(
    private root: HTMLElement,
    private state: ViewState,
    private onError: (message: string) => void,
    private onHint: (message: string) => void
  ) {}

  async mount(): Promise<void> {
    this.root.innerHTML = `
      <div class="toolbar">
        <button data-action="prev">&larr; prev pair</button>
        <button data-action="next">next pair &rarr;</button>
        <button data-action="confirm">confirm match (Enter)</button>
        <button data-action="break">break match</button>
        <button data-action="commit">commit (<span data-role="pending">0</span> pending)</button>
        <span class="caption" data-role="caption"></span>
      </div>
      <div class="panes">
        <canvas data-pane="0" width="470" height="460"></canvas>
        <canvas data-pane="1" width="470" height="460"></canvas>
      </div>
    `;
    this.root.querySelector('[data-action="prev"]')!.addEventListener("click", () => this.step(-1));
    this.root.querySelector('[data-action="next"]')!.addEventListener("click", () => this.step(1));
    this.root.querySelector('[data-action="confirm"]')!.addEventListener("click", () => void this.confirm());
    this.root.querySelector('[data-action="break"]')!.addEventListener("click", () => void this.breakMatch());
    this.root.querySelector('[data-action="commit"]')!.addEventListener("click", () => void this.commit());
    this.root.addEventListener(
      "keydown",
      makeKeydownHandler({
        ArrowLeft: () => this.step(-1),
        ArrowRight: () => this.step(1),
        Enter: () => void this.confirm(),
      })
    );
    const canvases = [...this.root.querySelectorAll<HTMLCanvasElement>("canvas[data-pane]")];
    this.panes = [
      { canvas: canvases[0], summary: null, objects: [], image: null, selected: null },
      { canvas: canvases[1], summary: null, objects: [], image: null, selected: null },
    ];
    for (const pane of this.panes) {
      pane.canvas.addEventListener("click", (event) => this.select(pane, event));
    }
    try {
      const page = await api.listImages({ offset: 0, limit: 1000 });
      this.images = page.images;
    } catch (error) {
      this.onError(`cannot list images: ${(error as Error).message}`);
      return;
    }
    await this.render();
  }

  private step(direction: number): void {
    const last = Math.max(this.images.length - 2, 0);
    this.position = Math.min(Math.max(this.position + direction, 0), last);
    void this.render();
  }

  private async render(): Promise<void> {
    if (!this.panes) return;
    const caption = this.root.querySelector('[data-role="caption"]')!;
    this.updatePending();
    for (const [k, pane] of this.panes.entries()) {
      pane.summary = this.images[this.position + k] ?? null;
      pane.selected = null;
      if (!pane.summary) {
        pane.objects = [];
        continue;
      }
      try {
        [pane.image, pane.objects] = await Promise.all([
          loadImage(imageBytesUrl(pane.summary.imagefile)),
          api.getObjects(pane.summary.imagefile),
        ]);
        this.draw(pane);
      } catch (error) {
        this.onError((error as Error).message);
      }
    }
    caption.textContent = this.panes
      .map((pane) => pane.summary?.imagefile ?? "-")
      .join("  |  ");
  }

  private draw(pane: Pane): void {
    if (!pane.image) return;
    drawImageWithOverlays(pane.canvas, pane.image, pane.objects, this.state.toggles, pane.selected);
  }

  private select(pane: Pane, event: MouseEvent): void {
    if (!pane.image) return;
    const bounds = pane.canvas.getBoundingClientRect();
    const { rects } = buildOverlays(
      pane.objects,
      pane.image.naturalWidth,
      pane.image.naturalHeight,
      { width: pane.canvas.width, height: pane.canvas.height }
    );
    const hit = hitTest(rects, event.clientX - bounds.left, event.clientY - bounds.top);
    pane.selected = hit ? hit.objectid : null;
    this.draw(pane);
  }

  private selection(): [number, number] | null {
    if (!this.panes) return null;
    const [a, b] = this.panes;
    if (a.selected === null || b.selected === null) return null;
    return [a.selected, b.selected];
  }

  private async confirm(): Promise<void> {
    const picked = this.selection();
    if (!picked) {
      this.onHint("select one object in each pane first");
      return;
    }
    if (this.panes![0].summary?.imagefile === this.panes![1].summary?.imagefile) {
      this.onHint("pick objects from two different images");
      return;
    }
    try {
      await api.createMatch([picked[0], picked[1]]);
      this.state.recordEdit();
      await this.refreshObjects();
    } catch (error) {
      this.onError(`match rejected: ${(error as Error).message}`);
    }
  }

  private async breakMatch(): Promise<void> {
    const picked = this.selection();
    if (!picked || !this.panes) {
      this.onHint("select a matched pair first");
      return;
    }
    const [a, b] = this.panes;
    const objectA = a.objects.find((o) => o.objectid === picked[0]);
    const objectB = b.objects.find((o) => o.objectid === picked[1]);
    const shared = objectA?.matches.find((m) => objectB?.matches.includes(m));
    if (shared === undefined) {
      this.onHint("those objects are not matched");
      return;
    }
    try {
      await api.deleteMatch(shared);
      this.state.recordEdit();
      await this.refreshObjects();
    } catch (error) {
      this.onError(`unmatch rejected: ${(error as Error).message}`);
    }
  }

  private async refreshObjects(): Promise<void> {
    if (!this.panes) return;
    for (const pane of this.panes) {
      if (pane.summary) {
        pane.objects = await api.getObjects(pane.summary.imagefile);
        this.draw(pane);
      }
    }
    this.updatePending();
  }

  private async commit(): Promise<void> {
    try {
      await api.commit();
      this.state.acknowledgeCommit();
      this.updatePending();
    } catch (error) {
      this.onError(`commit rejected: ${(error as Error).message}`);
    }
  }

  private updatePending(): void {
    this.root.querySelector('[data-role="pending"]')!.textContent = String(this.state.pendingEdits);
  }
}
