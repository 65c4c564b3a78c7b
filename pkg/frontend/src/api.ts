/** Typed client for the hydrograph service.
 *
 * Concurrent requests with the same key are deduplicated: a second call
 * while one is in flight joins the pending promise, so one interaction
 * never fans out into parallel identical queries.
 */

import type {
  DirectionResponse,
  FeatureCollection,
  LayerName,
  MetaResponse,
  NodesResponse,
  SummaryResponse,
  WhatIfResponse,
} from "./types.js";

export class ServiceUnreachableError extends Error {
  constructor(cause: unknown) {
    super("hydrograph service unreachable");
    this.name = "ServiceUnreachableError";
    this.cause = cause;
  }
}

export class OutsideWatershedsError extends Error {
  constructor(detail: string) {
    super(detail);
    this.name = "OutsideWatershedsError";
  }
}

export class ApiError extends Error {
  constructor(
    public readonly status: number,
    detail: string,
  ) {
    super(detail);
    this.name = "ApiError";
  }
}

export class ApiClient {
  private inflight = new Map<string, Promise<unknown>>();

  constructor(
    public readonly baseUrl: string,
    private readonly fetchImpl: typeof fetch = fetch,
  ) {}

  /** Number of currently pending requests (for tests and spinners). */
  get pendingCount(): number {
    return this.inflight.size;
  }

  private dedupe<T>(key: string, run: () => Promise<T>): Promise<T> {
    const existing = this.inflight.get(key);
    if (existing) {
      return existing as Promise<T>;
    }
    const pending = run().finally(() => {
      if (this.inflight.get(key) === pending) {
        this.inflight.delete(key);
      }
    });
    this.inflight.set(key, pending);
    return pending;
  }

  private async request<T>(
    path: string,
    init?: RequestInit,
  ): Promise<{ body: T; snapshotId: string | null }> {
    let response: Response;
    try {
      response = await this.fetchImpl(`${this.baseUrl}${path}`, init);
    } catch (err) {
      throw new ServiceUnreachableError(err);
    }
    if (!response.ok) {
      let detail = `${response.status}`;
      try {
        const doc = (await response.json()) as { detail?: string };
        if (doc.detail) detail = doc.detail;
      } catch {
        // non-JSON error body; keep the status text
      }
      if (response.status === 422 && detail.includes("no HUC12")) {
        throw new OutsideWatershedsError(detail);
      }
      throw new ApiError(response.status, detail);
    }
    const body = (await response.json()) as T;
    const headerId = response.headers.get("x-snapshot-id");
    const bodyId = (body as { snapshot_id?: string }).snapshot_id ?? null;
    return { body, snapshotId: bodyId ?? headerId };
  }

  meta(): Promise<MetaResponse> {
    return this.dedupe("meta", async () => (await this.request<MetaResponse>("/meta")).body);
  }

  layer(name: LayerName): Promise<FeatureCollection> {
    return this.dedupe(`layer:${name}`, async () => {
      return (await this.request<FeatureCollection>(`/layers/${name}`)).body;
    });
  }

  nodes(bbox?: [number, number, number, number]): Promise<NodesResponse> {
    const query = bbox ? `?bbox=${bbox.join(",")}` : "";
    return this.dedupe(`nodes:${query}`, async () => {
      return (await this.request<NodesResponse>(`/nodes${query}`)).body;
    });
  }

  summary(comid: number): Promise<SummaryResponse> {
    return this.dedupe(`summary:${comid}`, async () => {
      return (await this.request<SummaryResponse>(`/summary/${comid}`)).body;
    });
  }

  /** Direction bodies carry no snapshot_id; it rides the response header. */
  downstream(comid: number): Promise<{ body: DirectionResponse; snapshotId: string | null }> {
    return this.dedupe(`downstream:${comid}`, () =>
      this.request<DirectionResponse>(`/downstream/${comid}`),
    );
  }

  upstream(comid: number): Promise<{ body: DirectionResponse; snapshotId: string | null }> {
    return this.dedupe(`upstream:${comid}`, () =>
      this.request<DirectionResponse>(`/upstream/${comid}`),
    );
  }

  whatIf(x: number, y: number, label: string): Promise<WhatIfResponse> {
    return this.dedupe(`whatif:${x},${y}`, async () => {
      const { body } = await this.request<WhatIfResponse>("/whatif", {
        method: "POST",
        headers: { "content-type": "application/json" },
        body: JSON.stringify({ x, y, label }),
      });
      return body;
    });
  }
}
