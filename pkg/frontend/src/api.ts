/** Typed fetch clients for the engine HTTP API and the embedding sidecar.
 *
 * The UI issues no writes except through these documented endpoints; every
 * mutation carries the revision it expects so the server can reject stale
 * writers with a 409.
 */

export interface EdgeRow {
  id: number;
  name: string;
  size: number;
  status: string;
  origin: string;
  dispersion: number;
  recency: string;
}

export interface EdgeDetail {
  id: number;
  name: string;
  members: number[];
  status: string;
  origin: string;
  summary?: {
    top3: number[];
    outlier: number | null;
    contrast_pair: number[] | null;
  };
}

export interface LayoutNode {
  id: number;
  x: number;
  y: number;
  r: number;
  recency: string;
}

export interface LayoutPayload {
  revision: number;
  edges: LayoutNode[];
  images: Record<string, { id: number; x: number; y: number }[]>;
}

export interface MatrixPayload {
  revision: number;
  edge_ids: number[];
  intersection: number[][];
  harmonic: number[][];
}

export interface QueryPage {
  query_tag: string;
  results: { image_id: number; score: number }[];
  cursor: number | null;
  total: number;
}

export interface ChangeEvent {
  revision: number;
  kind: string;
  [key: string]: unknown;
}

export class ApiConflictError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "ApiConflictError";
  }
}

export class ApiError extends Error {
  constructor(
    public status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

async function expectOk(res: Response): Promise<any> {
  if (res.ok) return res.json();
  let detail = res.statusText;
  try {
    detail = (await res.json()).detail ?? detail;
  } catch {
    /* non-JSON error body */
  }
  if (res.status === 409) throw new ApiConflictError(detail);
  throw new ApiError(res.status, detail);
}

export class ApiClient {
  constructor(public baseUrl: string) {}

  private async get(path: string): Promise<any> {
    return expectOk(await fetch(this.baseUrl + path));
  }

  private async post(path: string, body: unknown): Promise<any> {
    return expectOk(
      await fetch(this.baseUrl + path, {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify(body),
      }),
    );
  }

  listEdges(): Promise<{ revision: number; edges: EdgeRow[] }> {
    return this.get("/api/edges");
  }

  edge(id: number): Promise<EdgeDetail> {
    return this.get(`/api/edges/${id}`);
  }

  async renameEdge(id: number, name: string, expectedRevision: number): Promise<number> {
    const res = await expectOk(
      await fetch(`${this.baseUrl}/api/edges/${id}`, {
        method: "PATCH",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ name, expected_revision: expectedRevision }),
      }),
    );
    return res.revision;
  }

  async createEdge(
    members: number[],
    name: string,
    expectedRevision: number,
  ): Promise<{ revision: number; id: number }> {
    return this.post("/api/edges", { members, name, expected_revision: expectedRevision });
  }

  async deleteEdge(id: number, expectedRevision: number): Promise<number> {
    const res = await expectOk(
      await fetch(`${this.baseUrl}/api/edges/${id}?expected_revision=${expectedRevision}`, {
        method: "DELETE",
      }),
    );
    return res.revision;
  }

  layout(seed = 0, includeImages = false): Promise<LayoutPayload> {
    return this.get(`/api/layout?seed=${seed}&images=${includeImages ? 1 : 0}`);
  }

  matrix(): Promise<MatrixPayload> {
    return this.get("/api/matrix");
  }

  subclusters(
    edgeId: number,
    theta: number,
  ): Promise<{ edge_id: number; theta: number; max_height: number; subclusters: number[][] }> {
    return this.get(`/api/subclusters/${edgeId}?theta=${theta}`);
  }

  query(body: Record<string, unknown>): Promise<QueryPage> {
    return this.post("/api/query", body);
  }

  events(since: number): Promise<{ revision: number; events: ChangeEvent[] }> {
    return this.get(`/api/events?since=${since}`);
  }

  async fullImage(id: number): Promise<ArrayBuffer> {
    const res = await fetch(`${this.baseUrl}/api/images/${id}/full`);
    if (!res.ok) throw new ApiError(res.status, "image fetch failed");
    return res.arrayBuffer();
  }

  visitEdge(id: number): Promise<{ recency: string }> {
    return this.post(`/api/edges/${id}/visit`, {});
  }

  historyPush(view: Record<string, unknown>): Promise<{ position: number }> {
    return this.post("/api/history/push", view);
  }

  historyBack(): Promise<{ view: Record<string, unknown> | null; position: number }> {
    return this.post("/api/history/back", {});
  }

  historyForward(): Promise<{ view: Record<string, unknown> | null; position: number }> {
    return this.post("/api/history/forward", {});
  }
}

export class EmbedClient {
  constructor(public baseUrl: string) {}

  async embed(body: Record<string, unknown>): Promise<number[]> {
    const res = await fetch(this.baseUrl + "/embed", {
      method: "POST",
      headers: { "content-type": "application/json" },
      body: JSON.stringify(body),
    });
    const payload = await expectOk(res);
    return payload.vector;
  }

  embedText(text: string): Promise<number[]> {
    return this.embed({ kind: "text", model: "vision_language", text });
  }

  embedCropOfBytes(bytes: ArrayBuffer, rect: [number, number, number, number]): Promise<number[]> {
    return this.embed({
      kind: "crop",
      model: "vision_language",
      bytes_b64: Buffer.from(bytes).toString("base64"),
      rect,
    });
  }

  embedClipboard(bytes: ArrayBuffer): Promise<number[]> {
    return this.embed({
      kind: "image_bytes",
      model: "vision_language",
      bytes_b64: Buffer.from(bytes).toString("base64"),
    });
  }
}
