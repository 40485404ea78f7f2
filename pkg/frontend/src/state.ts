// View state shared by the three views. No DOM, no network: every
// transition is a pure method, which keeps the contracts unit-testable.

export interface OverlayToggles {
  boxes: boolean;
  polygons: boolean;
  names: boolean;
  matchColors: boolean;
}

export class ViewState {
  index = 0;
  total = 0;
  shuffle = false;
  seed = 0;
  toggles: OverlayToggles = { boxes: true, polygons: true, names: true, matchColors: true };
  private editsSent = 0;
  private commitsAcknowledged = 0;

  get pendingEdits(): number {
    return this.editsSent - this.commitsAcknowledged;
  }

  recordEdit(): void {
    this.editsSent += 1;
  }

  acknowledgeCommit(): void {
    this.commitsAcknowledged = this.editsSent;
  }

  next(): number {
    if (this.total > 0) this.index = (this.index + 1) % this.total;
    return this.index;
  }

  previous(): number {
    if (this.total > 0) this.index = (this.index - 1 + this.total) % this.total;
    return this.index;
  }

  setTotal(total: number): void {
    this.total = total;
    if (this.index >= total) this.index = Math.max(total - 1, 0);
  }

  toggleShuffle(): void {
    this.shuffle = !this.shuffle;
    this.index = 0;
  }

  toggle(key: keyof OverlayToggles): void {
    this.toggles[key] = !this.toggles[key];
  }
}
