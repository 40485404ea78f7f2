// Overlay geometry: pure functions from API payloads + viewport to canvas
// coordinates. Kept DOM-free so rendering is testable without a browser.

import type { ObjectPayload } from "./api.js";

export interface Viewport {
  width: number;
  height: number;
}

export interface Placement {
  scale: number;
  offsetX: number;
  offsetY: number;
}

/** Contain-fit an image into a viewport, centered, never upscaled past fit. */
export function fitImage(imageW: number, imageH: number, viewport: Viewport): Placement {
  const scale = Math.min(viewport.width / imageW, viewport.height / imageH);
  return {
    scale,
    offsetX: (viewport.width - imageW * scale) / 2,
    offsetY: (viewport.height - imageH * scale) / 2,
  };
}

export interface OverlayRect {
  objectid: number;
  x: number;
  y: number;
  width: number;
  height: number;
  label: string;
}

export interface OverlayPath {
  objectid: number;
  points: [number, number][];
}

export function toCanvasRect(
  object: ObjectPayload,
  placement: Placement
): OverlayRect | null {
  if (object.x === null || object.y === null || object.width === null || object.height === null) {
    return null;
  }
  return {
    objectid: object.objectid,
    x: object.x * placement.scale + placement.offsetX,
    y: object.y * placement.scale + placement.offsetY,
    width: object.width * placement.scale,
    height: object.height * placement.scale,
    label: object.name ?? `#${object.objectid}`,
  };
}

export function toCanvasPaths(object: ObjectPayload, placement: Placement): OverlayPath[] {
  return object.polygons
    .filter((polygon) => polygon.points.length > 0)
    .map((polygon) => ({
      objectid: object.objectid,
      points: polygon.points.map(
        ([x, y]): [number, number] => [
          x * placement.scale + placement.offsetX,
          y * placement.scale + placement.offsetY,
        ]
      ),
    }));
}

/** Everything to draw for one image at one viewport. */
export function buildOverlays(
  objects: ObjectPayload[],
  imageW: number,
  imageH: number,
  viewport: Viewport
): { placement: Placement; rects: OverlayRect[]; paths: OverlayPath[] } {
  const placement = fitImage(imageW, imageH, viewport);
  const rects: OverlayRect[] = [];
  const paths: OverlayPath[] = [];
  for (const object of objects) {
    const rect = toCanvasRect(object, placement);
    if (rect) rects.push(rect);
    paths.push(...toCanvasPaths(object, placement));
  }
  return { placement, rects, paths };
}

/** Hit test in canvas coordinates; smallest hit box wins (innermost object). */
export function hitTest(rects: OverlayRect[], x: number, y: number): OverlayRect | null {
  let best: OverlayRect | null = null;
  for (const rect of rects) {
    const inside =
      x >= rect.x && x <= rect.x + rect.width && y >= rect.y && y <= rect.y + rect.height;
    if (inside && (best === null || rect.width * rect.height < best.width * best.height)) {
      best = rect;
    }
  }
  return best;
}
