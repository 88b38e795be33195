/** The four coordinated views.
 *
 * Each view renders a plain-data snapshot from the shared model; interaction
 * handlers either update shared selection state or issue server edits through
 * the model.  Nothing here touches the DOM directly, so the same classes back
 * both the canvas renderers and the automated tests.
 */

import { ApiClient, EdgeRow, LayoutNode, MatrixPayload } from "./api.js";
import { lassoSelect, Point } from "./lasso.js";
import { ClientViewModel } from "./model.js";

abstract class CoordinatedView {
  renderCount = 0;

  constructor(protected model: ClientViewModel) {
    model.subscribe(() => this.render());
  }

  abstract render(): void;
}

/** Sortable/filterable hyperedge table with row actions. */
export class ListView extends CoordinatedView {
  rows: EdgeRow[] = [];
  nameFilter = "";

  render(): void {
    this.renderCount += 1;
    const f = this.nameFilter.toLowerCase();
    this.rows = this.model.edges.filter((e) => e.name.toLowerCase().includes(f));
  }

  setFilter(filter: string): void {
    this.nameFilter = filter;
    this.render();
  }

  selectRow(edgeId: number): void {
    this.model.selectEdges([edgeId]); // pulses the spatial node too
  }

  async rename(edgeId: number, name: string): Promise<void> {
    await this.model.mutate((rev) => this.model.api.renameEdge(edgeId, name, rev));
  }

  async remove(edgeId: number): Promise<void> {
    await this.model.mutate((rev) => this.model.api.deleteEdge(edgeId, rev));
  }

  async addEdge(members: number[], name: string): Promise<number> {
    const res = await this.model.mutate((rev) =>
      this.model.api.createEdge(members, name, rev),
    );
    return res.id;
  }
}

export interface GridGroup {
  representative: number;
  imageIds: number[];
  expanded: boolean;
}

/** Virtualized thumbnail grid; the slider collapses an edge into subcluster
 * groups without touching the hypergraph. */
export class GridView extends CoordinatedView {
  edgeId: number | null = null;
  groups: GridGroup[] = [];
  thumbPx = 128;

  render(): void {
    this.renderCount += 1;
  }

  async showEdge(edgeId: number): Promise<void> {
    this.edgeId = edgeId;
    const detail = await this.model.api.edge(edgeId);
    this.groups = detail.members.map((id) => ({
      representative: id,
      imageIds: [id],
      expanded: true,
    }));
    this.render();
  }

  /** Slider position in [0,1]: 0 = every image, 1 = coarsest grouping. */
  async collapse(slider: number): Promise<void> {
    if (this.edgeId === null) return;
    if (slider <= 0) {
      await this.showEdge(this.edgeId);
      return;
    }
    const probe = await this.model.api.subclusters(this.edgeId, 0);
    const theta = slider * (probe.max_height + 1e-9);
    const res = await this.model.api.subclusters(this.edgeId, theta);
    this.groups = res.subclusters.map((ids) => ({
      representative: ids[0],
      imageIds: ids,
      expanded: false,
    }));
    this.render();
  }

  expandGroup(index: number): number[] {
    this.groups[index].expanded = true;
    this.render();
    return this.groups[index].imageIds;
  }
}

/** Zoom/pan canvas of edge nodes with lasso selection. */
export class SpatialView extends CoordinatedView {
  nodes: LayoutNode[] = [];
  pulsing: number[] = [];

  render(): void {
    this.renderCount += 1;
    this.pulsing = [...this.model.pulseQueue];
  }

  async reload(seed = 0): Promise<void> {
    const payload = await this.model.api.layout(seed);
    this.nodes = payload.edges;
    this.render();
  }

  /** Lasso over edge nodes: exactly the node centers inside the polygon. */
  lassoEdges(polygon: Point[]): number[] {
    const picked = lassoSelect(this.nodes, polygon);
    this.model.selections.polygon = polygon;
    this.model.selectEdges(picked);
    return picked;
  }
}

/** Pairwise-intersection matrix with overlap-strength coloring. */
export class MatrixView extends CoordinatedView {
  payload: MatrixPayload | null = null;

  render(): void {
    this.renderCount += 1;
  }

  async reload(): Promise<void> {
    this.payload = await this.model.api.matrix();
    this.render();
  }

  /** Color ramp position in [0,1] from the harmonic overlap of a cell. */
  cellStrength(i: number, j: number): number {
    if (!this.payload) return 0;
    return i === j ? 0 : this.payload.harmonic[i][j];
  }
}

export function makeViews(model: ClientViewModel): {
  list: ListView;
  grid: GridView;
  spatial: SpatialView;
  matrix: MatrixView;
} {
  return {
    list: new ListView(model),
    grid: new GridView(model),
    spatial: new SpatialView(model),
    matrix: new MatrixView(model),
  };
}

/** Navigation bar: server-held view history plus the query input. */
export class NavigationBar {
  constructor(
    private model: ClientViewModel,
    private api: ApiClient,
  ) {}

  push(view: Record<string, unknown>): Promise<{ position: number }> {
    return this.api.historyPush(view);
  }

  async back(): Promise<Record<string, unknown> | null> {
    return (await this.api.historyBack()).view;
  }

  async forward(): Promise<Record<string, unknown> | null> {
    return (await this.api.historyForward()).view;
  }

  async textQuery(embedText: (t: string) => Promise<number[]>, text: string, limit = 50) {
    const vector = await embedText(text);
    return this.model.api.query({ mode: "text", vector, limit });
  }
}
