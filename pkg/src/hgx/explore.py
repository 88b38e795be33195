"""Analyst-facing analytics: edge summaries, subclusters, meta-edges, rankings,
intersections, and embedding queries.

Everything here is read-only except :func:`consolidate_meta_edge`, which edits
the hypergraph in place; the service wraps that call in its edit log so it can
be undone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.cluster.hierarchy import linkage
from scipy.spatial.distance import pdist

from .core import EmbeddingMatrix, Hyperedge, Hypergraph, edge_centroid
from .errors import DimensionMismatchError, NotFoundError, ParameterError

QUERY_MODES = ("images", "edge", "roi", "clipboard", "text")

# role-fill priority: most-similar trio first, then the outlier, then the
# contrast pair from whatever members remain
SUMMARY_SAMPLE_CAP = 500


@dataclass(frozen=True)
class EdgeSummary:
    edge_id: int
    top3: tuple[int, ...]
    outlier: int | None
    contrast_pair: tuple[int, int] | None

    def image_ids(self) -> list[int]:
        out = list(self.top3)
        if self.outlier is not None:
            out.append(self.outlier)
        if self.contrast_pair is not None:
            out.extend(self.contrast_pair)
        return out


def _centroid_sims(members: list[int], embeddings: EmbeddingMatrix) -> np.ndarray:
    X = embeddings.data[members]
    centroid = X.mean(axis=0)
    cn = np.linalg.norm(centroid)
    if cn == 0.0:
        return np.zeros(len(members))
    return X @ centroid / (np.linalg.norm(X, axis=1) * cn)


def six_image_summary(
    edge: Hyperedge, embeddings: EmbeddingMatrix, seed: int = 0
) -> EdgeSummary:
    """Representative members: 3 closest to the centroid, the farthest one,
    and the mutually most-dissimilar pair, each member used at most once."""
    members = sorted(edge.members)
    sims = _centroid_sims(members, embeddings)
    order = sorted(range(len(members)), key=lambda i: (-sims[i], members[i]))
    top3 = tuple(members[i] for i in order[:3])
    rest = order[3:]
    outlier = None
    if rest:
        outlier = members[min(rest, key=lambda i: (sims[i], members[i]))]
        rest = [i for i in rest if members[i] != outlier]
    pair = None
    if len(rest) >= 2:
        pool = [members[i] for i in rest]
        if len(pool) > SUMMARY_SAMPLE_CAP:
            rng = np.random.default_rng(seed)
            pool = sorted(rng.choice(pool, size=SUMMARY_SAMPLE_CAP, replace=False).tolist())
        X = embeddings.data[pool]
        S = (X @ X.T) / np.outer(np.linalg.norm(X, axis=1), np.linalg.norm(X, axis=1))
        best = None
        for a in range(len(pool)):
            for b in range(a + 1, len(pool)):
                key = (S[a, b], pool[a], pool[b])
                if best is None or key < best:
                    best = key
        pair = (best[1], best[2])
    return EdgeSummary(edge.id, top3, outlier, pair)


@dataclass
class SubclusterTree:
    """Average-linkage dendrogram over one edge's members (cosine distance)."""

    members: list[int]
    merges: np.ndarray  # scipy linkage matrix, empty for singleton edges

    def cut(self, theta: float) -> list[frozenset[int]]:
        """Disjoint subclusters covering the edge: merges with height < theta
        are applied, so theta=0 keeps every member separate."""
        n = len(self.members)
        clusters: dict[int, set[int]] = {i: {i} for i in range(n)}
        for row_idx, (a, b, height, _) in enumerate(self.merges):
            if height >= theta:
                break
            a, b = int(a), int(b)
            clusters[n + row_idx] = clusters.pop(a) | clusters.pop(b)
        return sorted(
            (frozenset(self.members[i] for i in c) for c in clusters.values()),
            key=min,
        )

    @property
    def max_height(self) -> float:
        return float(self.merges[-1, 2]) if len(self.merges) else 0.0


def subcluster_tree(edge: Hyperedge, embeddings: EmbeddingMatrix) -> SubclusterTree:
    members = sorted(edge.members)
    if len(members) == 1:
        return SubclusterTree(members, np.empty((0, 4)))
    dist = np.maximum(pdist(embeddings.data[members], metric="cosine"), 0.0)
    return SubclusterTree(members, linkage(dist, method="average"))


def _guarded_centroid_sim_matrix(
    edges: list[Hyperedge], embeddings: EmbeddingMatrix
) -> np.ndarray:
    C = np.vstack([edge_centroid(e, embeddings) for e in edges])
    norms = np.linalg.norm(C, axis=1)
    S = np.full((len(edges), len(edges)), -np.inf)
    ok = norms > 0
    idx = np.flatnonzero(ok)
    if idx.size:
        sub = C[idx] @ C[idx].T / np.outer(norms[idx], norms[idx])
        S[np.ix_(idx, idx)] = sub
    return S


def meta_edge_grouping(
    hypergraph: Hypergraph, embeddings: EmbeddingMatrix, theta: float
) -> list[list[int]]:
    """Partition edge ids into groups: connected components of the graph
    linking edges whose centroid cosine similarity is >= theta.

    Purely presentational -- the hypergraph itself is untouched.  theta may go
    down to -1 (one group) and up to 1 (near-duplicates only).
    """
    if not -1.0 <= theta <= 1.0:
        raise ParameterError(f"theta must be in [-1, 1], got {theta}")
    edges = hypergraph.edges
    if not edges:
        return []
    S = _guarded_centroid_sim_matrix(edges, embeddings)
    parent = list(range(len(edges)))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a in range(len(edges)):
        for b in range(a + 1, len(edges)):
            if S[a, b] >= theta:
                ra, rb = find(a), find(b)
                if ra != rb:
                    parent[rb] = ra
    groups: dict[int, list[int]] = {}
    for i, e in enumerate(edges):
        groups.setdefault(find(i), []).append(e.id)
    return sorted((sorted(g) for g in groups.values()), key=min)


def plan_consolidation(hypergraph: Hypergraph, edge_ids: list[int]) -> Hyperedge:
    """The merged edge that consolidating ``edge_ids`` would produce.

    Union of members, status=modified, origin kept when uniform else "user";
    the name and id come from the lowest-id constituent's name and the next
    free edge id.
    """
    ids = sorted(set(int(i) for i in edge_ids))
    if len(ids) < 2:
        raise ParameterError("consolidation needs at least 2 distinct edges")
    parts = [hypergraph.edge(i) for i in ids]
    members = frozenset().union(*(e.members for e in parts))
    origins = {e.origin for e in parts}
    new_id = max(e.id for e in hypergraph.edges) + 1
    return Hyperedge(
        id=new_id,
        members=members,
        name=parts[0].name,
        status="modified",
        origin=origins.pop() if len(origins) == 1 else "user",
    )


def consolidate_meta_edge(hypergraph: Hypergraph, edge_ids: list[int]) -> Hyperedge:
    """Replace ``edge_ids`` with their union in place; returns the new edge."""
    merged = plan_consolidation(hypergraph, edge_ids)
    drop = set(int(i) for i in edge_ids)
    hypergraph.edges = [e for e in hypergraph.edges if e.id not in drop]
    hypergraph.edges.append(merged)
    return merged


def rank_edges_by_similarity(
    hypergraph: Hypergraph, embeddings: EmbeddingMatrix, ref_edge_id: int
) -> list[dict]:
    """Every other edge sorted by centroid cosine similarity to the reference,
    ties broken by intersection size then id; includes the overlap column."""
    ref = hypergraph.edge(ref_edge_id)
    others = [e for e in hypergraph.edges if e.id != ref.id]
    S = _guarded_centroid_sim_matrix([ref] + others, embeddings)
    rows = [
        {
            "edge_id": e.id,
            "sim": float(S[0, i + 1]),
            "intersection": len(ref.members & e.members),
        }
        for i, e in enumerate(others)
    ]
    rows.sort(key=lambda r: (-r["sim"], -r["intersection"], r["edge_id"]))
    return rows


def intersecting_edges_for_images(
    hypergraph: Hypergraph, image_ids: list[int]
) -> list[dict]:
    """Edges containing any listed image, with overlap counts, count-descending."""
    imgs = set(int(i) for i in image_ids)
    for i in imgs:
        if not 0 <= i < hypergraph.n:
            raise NotFoundError(f"no image {i}")
    rows = []
    for e in hypergraph.edges:
        count = len(e.members & imgs)
        if count:
            rows.append({"edge_id": e.id, "overlap_count": count})
    rows.sort(key=lambda r: (-r["overlap_count"], r["edge_id"]))
    return rows


@dataclass(frozen=True)
class QueryResult:
    ranked: tuple[tuple[int, float], ...]  # (image_id, cosine), non-increasing
    query_tag: str

    def page(self, cursor: int = 0, limit: int = 50) -> dict:
        chunk = self.ranked[cursor : cursor + limit]
        nxt = cursor + limit if cursor + limit < len(self.ranked) else None
        return {
            "results": [{"image_id": i, "score": s} for i, s in chunk],
            "cursor": nxt,
            "total": len(self.ranked),
        }


def _rank_all(vector: np.ndarray, embeddings: EmbeddingMatrix, tag: str) -> QueryResult:
    vn = np.linalg.norm(vector)
    if vn == 0.0:
        scores = np.zeros(embeddings.n)
    else:
        scores = embeddings.data @ vector / (embeddings.norms * vn)
    order = np.lexsort((np.arange(embeddings.n), -scores))
    return QueryResult(
        tuple((int(i), float(scores[i])) for i in order), query_tag=tag
    )


def query(
    mode: str,
    embeddings: EmbeddingMatrix,
    hypergraph: Hypergraph | None = None,
    image_ids: list[int] | None = None,
    edge_id: int | None = None,
    vector: np.ndarray | None = None,
    query_embeddings: EmbeddingMatrix | None = None,
) -> QueryResult:
    """Rank every image by cosine similarity to a query vector.

    images/edge modes average rows of the construction-space matrix; roi,
    clipboard and text modes take an externally supplied vector and rank in
    the query-space matrix (``query_embeddings``, falling back to the primary
    matrix when the collection has only one space).
    """
    if mode not in QUERY_MODES:
        raise ParameterError(f"unknown query mode {mode!r}")
    if mode == "images":
        if not image_ids:
            raise ParameterError("images query needs at least one image id")
        for i in image_ids:
            if not 0 <= int(i) < embeddings.n:
                raise NotFoundError(f"no image {i}")
        vec = embeddings.data[sorted(set(int(i) for i in image_ids))].mean(axis=0)
        return _rank_all(vec, embeddings, mode)
    if mode == "edge":
        if hypergraph is None or edge_id is None:
            raise ParameterError("edge query needs a hypergraph and an edge id")
        vec = edge_centroid(hypergraph.edge(edge_id), embeddings)
        return _rank_all(vec, embeddings, mode)
    # external-vector modes
    if vector is None:
        raise ParameterError(f"{mode} query needs an embedding vector")
    space = query_embeddings if query_embeddings is not None else embeddings
    vec = np.asarray(vector, dtype=np.float64).reshape(-1)
    if vec.shape[0] != space.d:
        raise DimensionMismatchError(
            f"query vector has dimension {vec.shape[0]}, expected {space.d}"
        )
    return _rank_all(vec, space, mode)


def review_status(
    image_ids: list[int],
    hypergraph: Hypergraph,
    last_selected_edge: int | None = None,
) -> dict[int, str]:
    """Per-image review marker for border rendering and the hide-reviewed
    filter; membership in the last-selected edge outranks modified edges."""
    for i in image_ids:
        if not 0 <= int(i) < hypergraph.n:
            raise NotFoundError(f"no image {i}")
    selected_members: frozenset[int] = frozenset()
    if last_selected_edge is not None:
        selected_members = hypergraph.edge(last_selected_edge).members
    touched: set[int] = set()
    for e in hypergraph.edges:
        if e.status != "original":
            touched |= e.members
    out = {}
    for i in image_ids:
        if i in selected_members:
            out[i] = "in_last_selected_edge"
        elif i in touched:
            out[i] = "in_modified_edge"
        else:
            out[i] = "unreviewed"
    return out
