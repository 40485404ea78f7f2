// Typed client for the inspection HTTP API. All server interaction of the
// app goes through this module; nothing here touches the DOM.

export interface ImageSummary {
  id: string;
  imagefile: string;
  width: number | null;
  height: number | null;
  name: string | null;
  has_mask: boolean;
  n_objects: number;
}

export interface ImagePage {
  total: number;
  offset: number;
  limit: number;
  images: ImageSummary[];
}

export interface PolygonPayload {
  name: string | null;
  points: [number, number][];
}

export interface ObjectPayload {
  objectid: number;
  imagefile: string;
  x: number | null;
  y: number | null;
  width: number | null;
  height: number | null;
  name: string | null;
  score: number | null;
  properties: { key: string; value: string | null }[];
  polygons: PolygonPayload[];
  matches: number[];
}

export interface DbInfo {
  "num images": number;
  "num objects": number;
  mode: string;
  writable: boolean;
  dirty: boolean;
  [key: string]: unknown;
}

/** URL-safe base64 of the imagefile, padding stripped (mirrors the server). */
export function encodeImageId(imagefile: string): string {
  const bytes = new TextEncoder().encode(imagefile);
  let binary = "";
  for (const b of bytes) binary += String.fromCharCode(b);
  return btoa(binary).replace(/\+/g, "-").replace(/\//g, "_").replace(/=+$/, "");
}

export interface ListImagesParams {
  offset?: number;
  limit?: number;
  where?: string;
  shuffle?: boolean;
  seed?: number;
}

export function imagesUrl(params: ListImagesParams): string {
  const query = new URLSearchParams();
  if (params.offset !== undefined) query.set("offset", String(params.offset));
  if (params.limit !== undefined) query.set("limit", String(params.limit));
  if (params.where) query.set("where", params.where);
  if (params.shuffle) {
    query.set("shuffle", "true");
    query.set("seed", String(params.seed ?? 0));
  }
  const text = query.toString();
  return "/api/images" + (text ? `?${text}` : "");
}

export function imageBytesUrl(imagefile: string): string {
  return `/api/images/${encodeImageId(imagefile)}/bytes`;
}

export function imageMaskUrl(imagefile: string): string {
  return `/api/images/${encodeImageId(imagefile)}/mask`;
}

export function objectCropUrl(objectid: number): string {
  return `/api/objects/${objectid}/crop`;
}

export class ApiError extends Error {
  constructor(public status: number, detail: string) {
    super(detail);
  }
}

async function request<T>(url: string, init?: RequestInit): Promise<T> {
  const response = await fetch(url, init);
  if (!response.ok) {
    let detail = response.statusText;
    try {
      detail = ((await response.json()) as { detail?: string }).detail ?? detail;
    } catch {
      // non-JSON error body; keep the status text
    }
    throw new ApiError(response.status, detail);
  }
  return (await response.json()) as T;
}

export const api = {
  info: () => request<DbInfo>("/api/info"),
  listImages: (params: ListImagesParams) => request<ImagePage>(imagesUrl(params)),
  getObjects: (imagefile: string) =>
    request<ObjectPayload[]>(`/api/images/${encodeImageId(imagefile)}/objects`),
  renameObject: (objectid: number, name: string) =>
    request<ObjectPayload>(`/api/objects/${objectid}`, {
      method: "PATCH",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ name }),
    }),
  createMatch: (objectids: number[]) =>
    request<{ match: number; objectids: number[] }>("/api/matches", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify({ objectids }),
    }),
  deleteMatch: (match: number) =>
    request<{ match: number; deleted: number }>(`/api/matches/${match}`, {
      method: "DELETE",
    }),
  commit: () => request<{ committed: boolean; path: string | null }>("/api/commit", { method: "POST" }),
};
