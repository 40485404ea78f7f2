// Canvas drawing helpers shared by the browser and match views.

import type { ObjectPayload } from "./api.js";
import { colorForMatch, colorForName } from "./colors.js";
import type { OverlayToggles } from "./state.js";
import { buildOverlays, type Viewport } from "./geometry.js";

export function objectColor(object: ObjectPayload, toggles: OverlayToggles): string {
  if (toggles.matchColors && object.matches.length > 0) {
    return colorForMatch(object.matches[0]);
  }
  return colorForName(object.name);
}

export function loadImage(url: string): Promise<HTMLImageElement> {
  return new Promise((resolve, reject) => {
    const image = new Image();
    image.onload = () => resolve(image);
    image.onerror = () => reject(new Error(`cannot load ${url}`));
    image.src = url;
  });
}

export function drawImageWithOverlays(
  canvas: HTMLCanvasElement,
  image: HTMLImageElement,
  objects: ObjectPayload[],
  toggles: OverlayToggles,
  highlight: number | null = null
): void {
  const viewport: Viewport = { width: canvas.width, height: canvas.height };
  const { placement, rects, paths } = buildOverlays(
    objects,
    image.naturalWidth,
    image.naturalHeight,
    viewport
  );
  const byId = new Map(objects.map((object) => [object.objectid, object]));
  const ctx = canvas.getContext("2d")!;
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  ctx.drawImage(
    image,
    placement.offsetX,
    placement.offsetY,
    image.naturalWidth * placement.scale,
    image.naturalHeight * placement.scale
  );

  if (toggles.boxes) {
    for (const rect of rects) {
      const object = byId.get(rect.objectid)!;
      ctx.strokeStyle = objectColor(object, toggles);
      ctx.lineWidth = rect.objectid === highlight ? 4 : 2;
      ctx.strokeRect(rect.x, rect.y, rect.width, rect.height);
      if (toggles.names) {
        ctx.font = "13px sans-serif";
        ctx.fillStyle = ctx.strokeStyle;
        ctx.fillText(rect.label, rect.x + 2, Math.max(rect.y - 4, 12));
      }
    }
  }
  if (toggles.polygons) {
    for (const path of paths) {
      const object = byId.get(path.objectid)!;
      ctx.strokeStyle = objectColor(object, toggles);
      ctx.lineWidth = path.objectid === highlight ? 4 : 2;
      ctx.beginPath();
      path.points.forEach(([x, y], i) => (i === 0 ? ctx.moveTo(x, y) : ctx.lineTo(x, y)));
      ctx.closePath();
      ctx.stroke();
    }
  }
}
