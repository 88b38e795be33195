/** Lasso geometry: a free-form polygon selects exactly the nodes whose
 * centers lie inside it (even-odd ray casting; boundary counts as inside).
 */

export interface Point {
  x: number;
  y: number;
}

const EPS = 1e-12;

function onSegment(p: Point, a: Point, b: Point): boolean {
  const cross = (b.x - a.x) * (p.y - a.y) - (b.y - a.y) * (p.x - a.x);
  if (Math.abs(cross) > EPS * (1 + Math.abs(b.x - a.x) + Math.abs(b.y - a.y))) return false;
  return (
    p.x >= Math.min(a.x, b.x) - EPS &&
    p.x <= Math.max(a.x, b.x) + EPS &&
    p.y >= Math.min(a.y, b.y) - EPS &&
    p.y <= Math.max(a.y, b.y) + EPS
  );
}

export function pointInPolygon(p: Point, polygon: Point[]): boolean {
  if (polygon.length < 3) return false;
  let inside = false;
  for (let i = 0, j = polygon.length - 1; i < polygon.length; j = i++) {
    const a = polygon[i];
    const b = polygon[j];
    if (onSegment(p, a, b)) return true;
    const crosses = a.y > p.y !== b.y > p.y;
    if (crosses && p.x < ((b.x - a.x) * (p.y - a.y)) / (b.y - a.y) + a.x) {
      inside = !inside;
    }
  }
  return inside;
}

export interface SelectableNode extends Point {
  id: number;
}

export function lassoSelect(nodes: SelectableNode[], polygon: Point[]): number[] {
  return nodes.filter((n) => pointInPolygon(n, polygon)).map((n) => n.id);
}
