// Image browser: loop through images with box/polygon overlays, optionally
// in a seed-deterministic shuffled order.

import { api, imageBytesUrl, type ImageSummary } from "./api.js";
import { makeKeydownHandler } from "./keyboard.js";
import { drawImageWithOverlays, loadImage } from "./render.js";
import type { ViewState } from "./state.js";

const PAGE_LIMIT = 1000;

export class ImageBrowser {
  private images: ImageSummary[] = [];

  constructor(
    private root: HTMLElement,
    private state: ViewState,
    private onError: (message: string) => void
  ) {}

  async mount(): Promise<void> {
    this.root.innerHTML = `
      <div class="toolbar">
        <button data-action="prev">&larr; prev</button>
        <button data-action="next">next &rarr;</button>
        <label><input type="checkbox" data-toggle="shuffle"> shuffle</label>
        <label><input type="checkbox" data-toggle="boxes" checked> boxes</label>
        <label><input type="checkbox" data-toggle="polygons" checked> polygons</label>
        <label><input type="checkbox" data-toggle="names" checked> names</label>
        <label><input type="checkbox" data-toggle="matchColors" checked> match colors</label>
        <span class="caption" data-role="caption"></span>
      </div>
      <canvas width="960" height="640"></canvas>
    `;
    this.root.querySelector('[data-action="prev"]')!.addEventListener("click", () => this.step(-1));
    this.root.querySelector('[data-action="next"]')!.addEventListener("click", () => this.step(1));
    for (const box of this.root.querySelectorAll<HTMLInputElement>("input[data-toggle]")) {
      box.addEventListener("change", () => {
        const key = box.dataset.toggle!;
        if (key === "shuffle") {
          this.state.toggleShuffle();
          void this.reload();
        } else {
          this.state.toggle(key as "boxes" | "polygons" | "names" | "matchColors");
          void this.render();
        }
      });
    }
    this.root.addEventListener(
      "keydown",
      makeKeydownHandler({ ArrowLeft: () => this.step(-1), ArrowRight: () => this.step(1) })
    );
    await this.reload();
  }

  private async reload(): Promise<void> {
    try {
      const page = await api.listImages({
        offset: 0,
        limit: PAGE_LIMIT,
        shuffle: this.state.shuffle,
        seed: this.state.seed,
      });
      this.images = page.images;
      this.state.setTotal(page.images.length);
      await this.render();
    } catch (error) {
      this.onError(`cannot list images: ${(error as Error).message}`);
    }
  }

  private step(direction: number): void {
    if (direction > 0) this.state.next();
    else this.state.previous();
    void this.render();
  }

  private async render(): Promise<void> {
    const canvas = this.root.querySelector("canvas")!;
    const caption = this.root.querySelector('[data-role="caption"]')!;
    const summary = this.images[this.state.index];
    if (!summary) {
      caption.textContent = "no images";
      return;
    }
    caption.textContent =
      `${this.state.index + 1}/${this.images.length}  ${summary.imagefile}` +
      ` (${summary.n_objects} objects${summary.has_mask ? ", mask" : ""})`;
    try {
      const [image, objects] = await Promise.all([
        loadImage(imageBytesUrl(summary.imagefile)),
        api.getObjects(summary.imagefile),
      ]);
      drawImageWithOverlays(canvas, image, objects, this.state.toggles);
    } catch (error) {
      this.onError((error as Error).message);
    }
  }
}
