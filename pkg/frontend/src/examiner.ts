// Object examiner: step object-by-object through server-rendered crops,
// typing a name and confirming with Enter. Commit pushes the pending edits.

import { api, objectCropUrl, type ObjectPayload } from "./api.js";
import { makeKeydownHandler } from "./keyboard.js";
import type { ViewState } from "./state.js";

export class ObjectExaminer {
  private objects: ObjectPayload[] = [];
  private cursor = 0;

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
        <input type="text" data-role="name" placeholder="object name, Enter to apply">
        <button data-action="apply">rename</button>
        <button data-action="commit">commit (<span data-role="pending">0</span> pending)</button>
        <span class="caption" data-role="caption"></span>
      </div>
      <img data-role="crop" alt="object crop">
    `;
    this.root.querySelector('[data-action="prev"]')!.addEventListener("click", () => this.step(-1));
    this.root.querySelector('[data-action="next"]')!.addEventListener("click", () => this.step(1));
    this.root.querySelector('[data-action="apply"]')!.addEventListener("click", () => void this.rename());
    this.root.querySelector('[data-action="commit"]')!.addEventListener("click", () => void this.commit());
    this.root.addEventListener(
      "keydown",
      makeKeydownHandler({
        ArrowLeft: () => this.step(-1),
        ArrowRight: () => this.step(1),
        Enter: () => void this.rename(),
      })
    );
    await this.reload();
  }

  private async reload(): Promise<void> {
    try {
      const page = await api.listImages({ offset: 0, limit: 1000 });
      const lists = await Promise.all(
        page.images.map((summary) => api.getObjects(summary.imagefile))
      );
      this.objects = lists.flat().filter((object) => object.x !== null);
      this.cursor = 0;
      this.render();
    } catch (error) {
      this.onError(`cannot load objects: ${(error as Error).message}`);
    }
  }

  private step(direction: number): void {
    if (this.objects.length === 0) return;
    this.cursor = (this.cursor + direction + this.objects.length) % this.objects.length;
    this.render();
  }

  private render(): void {
    const caption = this.root.querySelector('[data-role="caption"]')!;
    const crop = this.root.querySelector<HTMLImageElement>('[data-role="crop"]')!;
    const nameInput = this.root.querySelector<HTMLInputElement>('[data-role="name"]')!;
    this.updatePending();
    const object = this.objects[this.cursor];
    if (!object) {
      caption.textContent = "no boxed objects";
      crop.removeAttribute("src");
      return;
    }
    caption.textContent =
      `object ${this.cursor + 1}/${this.objects.length}  #${object.objectid}` +
      ` on ${object.imagefile}`;
    nameInput.value = object.name ?? "";
    crop.src = objectCropUrl(object.objectid) + `?cachebust=${Date.now()}`;
  }

  private async rename(): Promise<void> {
    const object = this.objects[this.cursor];
    if (!object) return;
    const name = this.root.querySelector<HTMLInputElement>('[data-role="name"]')!.value.trim();
    try {
      const updated = await api.renameObject(object.objectid, name);
      this.objects[this.cursor] = updated;
      this.state.recordEdit();
      this.render();
    } catch (error) {
      this.onError(`rename rejected: ${(error as Error).message}`);
    }
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
