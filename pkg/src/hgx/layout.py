"""Spatial layout: 2D neighbor-preserving projection, node sizing, overlap removal.

The projector is a deterministic k-NN attraction / all-pairs repulsion force
embedding seeded from a PCA initialization; it preserves local neighborhoods
without pulling in an external projection dependency.
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .core import EmbeddingMatrix, Hypergraph, edge_centroid
from .errors import NotFoundError

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class LayoutParams:
    r_min: float = 8.0
    scale: float = 2.0
    margin: float = 0.5
    max_iter: int = 500
    spread: float = 100.0  # target span of projected coordinates in screen units

    def radius(self, size: int) -> float:
        return self.r_min + self.scale * np.sqrt(size)


@dataclass
class LayoutResult:
    edge_nodes: list[dict]
    image_nodes: dict[int, list[dict]]
    seed: int
    projector_tag: str = "knn-force"
    residual_overlaps: list[tuple[int, int]] = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "edges": [
                {"id": e["edge_id"], "x": e["x"], "y": e["y"], "r": e["radius"]}
                for e in self.edge_nodes
            ],
            "images": {
                str(eid): [{"id": n["image_id"], "x": n["x"], "y": n["y"]} for n in nodes]
                for eid, nodes in self.image_nodes.items()
            },
        }


def _pca_2d(X: np.ndarray) -> np.ndarray:
    Xc = X - X.mean(axis=0)
    U, s, Vt = np.linalg.svd(Xc, full_matrices=False)
    dims = min(2, Vt.shape[0])
    P = np.zeros((X.shape[0], 2))
    comp = Xc @ Vt[:dims].T
    # deterministic sign: largest-magnitude loading positive per component
    for j in range(dims):
        lead = np.argmax(np.abs(Vt[j]))
        if Vt[j, lead] < 0:
            comp[:, j] *= -1
    P[:, :dims] = comp
    return P


def neighbor_projection(
    X: np.ndarray, seed: int = 0, n_neighbors: int = 10, iters: int = 200
) -> np.ndarray:
    """Deterministic nonlinear 2D embedding preserving k-NN structure.

    Local-MDS springs along the k-NN graph (rest length proportional to the
    input-space distance) plus a weak clamped all-pairs repulsion, iterated
    from a sign-fixed PCA initialization.
    """
    X = np.asarray(X, dtype=np.float64)
    m = X.shape[0]
    if m == 1:
        return np.zeros((1, 2))
    rng = np.random.default_rng(seed)
    pos = _pca_2d(X)
    span = np.abs(pos).max()
    pos = pos / span if span > 0 else pos
    pos = pos + rng.normal(scale=1e-3, size=pos.shape)

    k = min(n_neighbors, m - 1)
    tree = cKDTree(X)
    d_hi, idx = tree.query(X, k=k + 1)
    neigh = idx[:, 1:]
    d_hi = d_hi[:, 1:]
    med = np.median(d_hi[d_hi > 0]) if (d_hi > 0).any() else 1.0
    rest = d_hi / med * 0.15
    # repulsion scaled to the local spacing so degenerate (all-equal) inputs
    # collapse to a point instead of inflating to an artificial ring
    rep_coeff = 0.05 * float(rest.mean()) / 0.15

    step = 0.1
    for _ in range(iters):
        vec = pos[neigh] - pos[:, None, :]
        dist = np.linalg.norm(vec, axis=-1)
        stretch = (dist - rest) / np.maximum(dist, 1e-9)
        attract = (stretch[..., None] * vec).mean(axis=1)
        diff = pos[:, None, :] - pos[None, :, :]
        d2 = (diff**2).sum(axis=-1) + 1e-2
        np.fill_diagonal(d2, np.inf)
        rep = (diff / d2[..., None]).sum(axis=1) / m
        force = attract + rep_coeff * rep
        norm = np.linalg.norm(force, axis=1, keepdims=True)
        force = force * np.minimum(1.0, 0.5 / np.maximum(norm, 1e-12))
        pos = pos + step * force
        step *= 0.995
    pos = pos - pos.mean(axis=0)
    return pos


def project_edges_2d(
    hypergraph: Hypergraph, embeddings: EmbeddingMatrix, seed: int = 0
) -> dict[int, np.ndarray]:
    """Raw 2D point per non-metadata edge from its centroid embedding."""
    edges = [e for e in hypergraph.edges if e.origin != "metadata"]
    if not edges:
        return {}
    centroids = np.vstack([edge_centroid(e, embeddings) for e in edges])
    pos = neighbor_projection(centroids, seed=seed)
    return {e.id: pos[i] for i, e in enumerate(edges)}


def _pair_angle(id_a: int, id_b: int, seed: int) -> float:
    digest = hashlib.sha256(f"{seed}:{min(id_a, id_b)}:{max(id_a, id_b)}".encode()).digest()
    return 2 * np.pi * int.from_bytes(digest[:8], "little") / 2**64


def remove_overlaps(
    positions: dict[int, np.ndarray],
    sizes: dict[int, int],
    params: LayoutParams = LayoutParams(),
    seed: int = 0,
):
    """Iterative symmetric pairwise separation until no two nodes overlap.

    Returns (positions, radii, residual_overlaps).  On non-convergence the
    margin is raised once and the pass repeated; any remaining overlaps are
    reported rather than raised.
    """
    ids = sorted(positions)
    pos = np.array([np.asarray(positions[i], dtype=np.float64) for i in ids])
    radii = np.array([params.radius(sizes[i]) for i in ids])

    def separate(pos, margin):
        for _ in range(params.max_iter):
            d = cdist(pos, pos)
            need = radii[:, None] + radii[None, :]
            np.fill_diagonal(d, np.inf)
            overlap_i, overlap_j = np.nonzero(d < need - 1e-9)
            pairs = [(a, b) for a, b in zip(overlap_i, overlap_j) if a < b]
            if not pairs:
                return pos, True
            disp = np.zeros_like(pos)
            for a, b in pairs:
                delta = pos[b] - pos[a]
                dist = np.linalg.norm(delta)
                if dist < 1e-12:
                    angle = _pair_angle(ids[a], ids[b], seed)
                    unit = np.array([np.cos(angle), np.sin(angle)])
                else:
                    unit = delta / dist
                push = 0.5 * (need[a, b] - dist + margin)
                disp[a] -= push * unit
                disp[b] += push * unit
            pos = pos + disp
        return pos, False

    pos, ok = separate(pos, params.margin)
    if not ok:
        pos, ok = separate(pos, params.margin * 4)
    residual = []
    if not ok:
        d = cdist(pos, pos)
        need = radii[:, None] + radii[None, :]
        for a in range(len(ids)):
            for b in range(a + 1, len(ids)):
                if d[a, b] < need[a, b] - 1e-6:
                    residual.append((ids[a], ids[b]))
        log.warning("overlap removal left %d overlapping pairs", len(residual))
    out = {i: pos[idx] for idx, i in enumerate(ids)}
    rad = {i: float(radii[idx]) for idx, i in enumerate(ids)}
    return out, rad, residual


def project_images_within_edge(
    edge, embeddings: EmbeddingMatrix, seed: int = 0, max_radius: float = 0.9
) -> dict[int, np.ndarray]:
    """Member positions inside the unit disk from a per-edge projection."""
    members = sorted(edge.members)
    if len(members) == 1:
        return {members[0]: np.zeros(2)}
    if len(members) == 2:
        angle = _pair_angle(members[0], members[1], seed)
        unit = np.array([np.cos(angle), np.sin(angle)])
        return {members[0]: -max_radius * unit, members[1]: max_radius * unit}
    pos = neighbor_projection(embeddings.data[members], seed=seed)
    pos = pos - pos.mean(axis=0)
    norm = np.linalg.norm(pos, axis=1).max()
    if norm > 0:
        pos = pos * (max_radius / norm)
    return {img: pos[i] for i, img in enumerate(members)}


def shared_image_links(
    hypergraph: Hypergraph,
    selected_edges: set[int] = frozenset(),
    selected_images: set[int] = frozenset(),
) -> list[tuple[int, int, int]]:
    """Cross-edge links (edge_a, image, edge_b) within the selection scope."""
    edge_by_id = {e.id: e for e in hypergraph.edges}
    for eid in selected_edges:
        if eid not in edge_by_id:
            raise NotFoundError(f"no edge {eid}")
    for img in selected_images:
        if not (0 <= img < hypergraph.n):
            raise NotFoundError(f"no image {img}")
    scope = set(selected_edges)
    for eid in selected_edges:
        members = edge_by_id[eid].members
        for other in hypergraph.edges:
            if other.id != eid and members & other.members:
                scope.add(other.id)
    if selected_images:
        for e in hypergraph.edges:
            if e.members & selected_images:
                scope.add(e.id)
    candidates = set(selected_images)
    for eid in selected_edges:
        candidates |= edge_by_id[eid].members
    links = set()
    scope_edges = [edge_by_id[eid] for eid in sorted(scope)]
    for img in sorted(candidates):
        containing = [e.id for e in scope_edges if img in e.members]
        for i in range(len(containing)):
            for j in range(i + 1, len(containing)):
                links.add((containing[i], img, containing[j]))
    return sorted(links)


def compute_layout(
    hypergraph: Hypergraph,
    embeddings: EmbeddingMatrix,
    seed: int = 0,
    params: LayoutParams = LayoutParams(),
    include_images: bool = True,
) -> LayoutResult:
    """Full layout: project, size, push apart; metadata edges pinned right.

    ``include_images=False`` skips the within-edge image projections, which
    clients usually fetch lazily on zoom.
    """
    raw = project_edges_2d(hypergraph, embeddings, seed=seed)
    scaled = {eid: p * params.spread for eid, p in raw.items()}
    sizes = {e.id: len(e) for e in hypergraph.edges if e.id in scaled}
    pos, rad, residual = remove_overlaps(scaled, sizes, params, seed=seed)
    edge_nodes = [
        {"edge_id": eid, "x": float(pos[eid][0]), "y": float(pos[eid][1]), "radius": rad[eid]}
        for eid in sorted(pos)
    ]
    right = max((n["x"] + n["radius"] for n in edge_nodes), default=0.0) + 2 * params.r_min
    y = 0.0
    for e in hypergraph.edges:
        if e.origin != "metadata":
            continue
        r = params.radius(len(e))
        edge_nodes.append({"edge_id": e.id, "x": right + r, "y": y + r, "radius": float(r)})
        y += 2 * r + params.margin
    image_nodes = {}
    if include_images:
        image_nodes = {
            e.id: [
                {"image_id": img, "x": float(p[0]), "y": float(p[1])}
                for img, p in sorted(
                    project_images_within_edge(e, embeddings, seed=seed).items()
                )
            ]
            for e in hypergraph.edges
        }
    return LayoutResult(edge_nodes, image_nodes, seed=seed, residual_overlaps=residual)
