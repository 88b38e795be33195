export { ApiClient, ApiConflictError, ApiError, EmbedClient } from "./api.js";
export type {
  ChangeEvent,
  EdgeDetail,
  EdgeRow,
  LayoutNode,
  LayoutPayload,
  MatrixPayload,
  QueryPage,
} from "./api.js";
export { lassoSelect, pointInPolygon } from "./lasso.js";
export type { Point, SelectableNode } from "./lasso.js";
export { ChangeFeed, ClientViewModel } from "./model.js";
export type { Camera, Selections, ViewName } from "./model.js";
export {
  GridView,
  ListView,
  MatrixView,
  NavigationBar,
  SpatialView,
  makeViews,
} from "./views.js";
export type { GridGroup } from "./views.js";
