/** Shared client view model: one revisioned source of truth for all views.
 *
 * Network change events are applied strictly in revision order; every edit any
 * view issues goes through `mutate`, which forwards the expected revision and
 * clears stale selections when the server reports a conflict.  Views register
 * listeners and re-render from the model only — there is no view-to-view
 * communication.
 */

import { ApiClient, ApiConflictError, ChangeEvent, EdgeRow } from "./api.js";

export interface Selections {
  edgeIds: Set<number>;
  imageIds: Set<number>;
  polygon: { x: number; y: number }[] | null;
}

export interface Camera {
  zoom: number;
  panX: number;
  panY: number;
}

export type ViewName = "list" | "grid" | "spatial" | "matrix";

const VIEW_NAMES: ViewName[] = ["list", "grid", "spatial", "matrix"];

export class ClientViewModel {
  revision = -1;
  edges: EdgeRow[] = [];
  selections: Selections = { edgeIds: new Set(), imageIds: new Set(), polygon: null };
  cameras: Record<ViewName, Camera>;
  subclusterTheta = 0;
  hideReviewed = false;
  pulseQueue: number[] = [];

  private listeners: (() => void)[] = [];

  constructor(public api: ApiClient) {
    this.cameras = Object.fromEntries(
      VIEW_NAMES.map((v) => [v, { zoom: 1, panX: 0, panY: 0 }]),
    ) as Record<ViewName, Camera>;
  }

  subscribe(listener: () => void): () => void {
    this.listeners.push(listener);
    return () => {
      this.listeners = this.listeners.filter((l) => l !== listener);
    };
  }

  private notify(): void {
    for (const l of this.listeners) l();
  }

  /** Pull the edge list at the current server revision and fan out. */
  async refresh(): Promise<void> {
    const { revision, edges } = await this.api.listEdges();
    this.revision = revision;
    this.edges = edges;
    const known = new Set(edges.map((e) => e.id));
    for (const id of [...this.selections.edgeIds]) {
      if (!known.has(id)) this.selections.edgeIds.delete(id);
    }
    this.notify();
  }

  /** Apply one change event; events must arrive in revision order. */
  async applyEvent(event: ChangeEvent): Promise<void> {
    if (event.revision <= this.revision) return; // already seen
    await this.refresh();
  }

  /** Route an edit through the server; conflicts clear stale selections. */
  async mutate<T>(fn: (expectedRevision: number) => Promise<T>): Promise<T> {
    try {
      return await fn(this.revision);
    } catch (err) {
      if (err instanceof ApiConflictError) {
        this.selections.edgeIds.clear();
        this.selections.imageIds.clear();
        this.selections.polygon = null;
        await this.refresh();
      }
      throw err;
    }
  }

  selectEdges(ids: number[]): void {
    this.selections.edgeIds = new Set(ids);
    this.pulseQueue.push(...ids);
    this.notify();
  }

  selectImages(ids: number[]): void {
    this.selections.imageIds = new Set(ids);
    this.notify();
  }

  setTheta(theta: number): void {
    this.subclusterTheta = theta;
    this.notify();
  }

  setHideReviewed(on: boolean): void {
    this.hideReviewed = on;
    this.notify();
  }
}

/** Exactly-once, in-order delivery of server change events by polling.
 *
 * `?since=` filtering is done server-side on the revision counter, so a poll
 * can never return an event twice and never out of order.
 */
export class ChangeFeed {
  delivered = 0;

  constructor(
    private api: ApiClient,
    private model: ClientViewModel,
  ) {}

  async pollOnce(): Promise<ChangeEvent[]> {
    const { events } = await this.api.events(this.model.revision);
    for (const event of events) {
      await this.model.applyEvent(event);
      this.delivered += 1;
    }
    return events;
  }
}
