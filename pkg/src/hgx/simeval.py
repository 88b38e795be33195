"""Hypergraph-vs-ground-truth similarity: CES (with diagnostics) and hNMI.

CES scores how efficiently the generated hyperedges cover each ground-truth
hyperedge under a greedy selection with diminishing returns, then multiplies
by the used-edge ratio R = u/m as an anti-redundancy diagnostic.

hNMI treats every hyperedge as a binary node indicator and computes an
overlapping-cover normalized mutual information with best-match conditional
entropies and a max-entropy normalizer.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import Hypergraph
from .errors import DimensionMismatchError, ValidationError


@dataclass
class PerEdgeScore:
    gt_edge_id: int
    score: float
    selected_generated_edges: list[int]
    covered_fraction: float


@dataclass
class CesReport:
    S: float
    R: float
    ces: float
    per_edge: list[PerEdgeScore]
    used_count: int
    generated_count: int
    weighted: bool = False

    def to_json(self) -> dict:
        return {
            "S": self.S,
            "R": self.R,
            "ces": self.ces,
            "used_count": self.used_count,
            "generated_count": self.generated_count,
            "weighted": self.weighted,
            "per_edge": [
                {
                    "gt_edge_id": p.gt_edge_id,
                    "score": p.score,
                    "selected_generated_edges": list(p.selected_generated_edges),
                    "covered_fraction": p.covered_fraction,
                }
                for p in self.per_edge
            ],
        }


def _check_pair(gt: Hypergraph, gen: Hypergraph) -> None:
    if gt.n != gen.n:
        raise DimensionMismatchError(f"vertex universes differ: {gt.n} vs {gen.n}")
    if gt.m < 1 or gen.m < 1:
        raise ValidationError("both hypergraphs need at least one edge")


def _greedy_cover(gt_members: frozenset[int], gen_sets: list[frozenset[int]], c: np.ndarray):
    """Greedy cover of one ground-truth edge.

    First pick maximizes the candidate score c (ties: smaller generated edge,
    then lower index).  Later picks maximize newly covered members (ties:
    higher c, then lower index) and contribute with a 1/k diminishing factor.
    Selection stops once the edge is covered or nothing adds coverage.
    """
    size = len(gt_members)
    positive = [j for j in range(len(gen_sets)) if c[j] > 0.0]
    if not positive:
        return 0.0, [], 0.0
    jstar = min(positive, key=lambda j: (-c[j], len(gen_sets[j]), j))
    selected = [jstar]
    covered = gt_members & gen_sets[jstar]
    score = c[jstar] / size
    k = 1
    while len(covered) < size:
        best = None
        best_key = None
        for j in positive:
            if j in selected:
                continue
            new = len((gt_members & gen_sets[j]) - covered)
            if new == 0:
                continue
            key = (-new, -c[j], j)
            if best_key is None or key < best_key:
                best, best_key = j, key
        if best is None:
            break
        k += 1
        selected.append(best)
        covered |= gt_members & gen_sets[best]
        score += c[best] / (size * k)
    return min(score, 1.0), selected, len(covered) / size


def _ces_core(gt: Hypergraph, gen: Hypergraph) -> tuple[list[PerEdgeScore], int]:
    _check_pair(gt, gen)
    Ht = gt.incidence().astype(np.int64)
    Hg = gen.incidence().astype(np.int64)
    T = Ht.T @ Hg
    gen_sizes = Hg.sum(axis=0)
    gen_sets = gen.member_sets()
    C = (T.astype(np.float64) ** 2) / gen_sizes
    per_edge = []
    used: set[int] = set()
    for i, e in enumerate(gt.edges):
        score, selected, covered = _greedy_cover(e.members, gen_sets, C[i])
        used.update(selected)
        per_edge.append(
            PerEdgeScore(e.id, score, [gen.edges[j].id for j in selected], covered)
        )
    return per_edge, len(used)


def ces(gt: Hypergraph, gen: Hypergraph) -> CesReport:
    per_edge, u = _ces_core(gt, gen)
    S = float(np.mean([p.score for p in per_edge]))
    R = u / gen.m
    return CesReport(S, R, R * S, per_edge, u, gen.m)


def ces_weighted(gt: Hypergraph, gen: Hypergraph) -> CesReport:
    """CES with per-edge scores weighted by ground-truth edge size."""
    per_edge, u = _ces_core(gt, gen)
    sizes = np.array([len(e.members) for e in gt.edges], dtype=np.float64)
    scores = np.array([p.score for p in per_edge])
    S = float((sizes * scores).sum() / sizes.sum())
    R = u / gen.m
    return CesReport(S, R, R * S, per_edge, u, gen.m, weighted=True)


# ---------------------------------------------------------------------------
# hNMI


def _h(w: np.ndarray, n: int) -> np.ndarray:
    """Elementwise -(w/n) log2(w/n) with h(0) = 0."""
    w = np.asarray(w, dtype=np.float64)
    out = np.zeros_like(w)
    pos = w > 0
    p = w[pos] / n
    out[pos] = -p * np.log2(p)
    return out


def _cover_entropies(X: np.ndarray, Y: np.ndarray, n: int) -> np.ndarray:
    """Best-match conditional entropies H(x_i | Y) for every edge of X.

    For each pair, counts a = |~x & ~y|, b = |~x & y|, c = |x & ~y|,
    d = |x & y|; the joint-entropy decomposition is accepted only when
    h(d) + h(a) >= h(b) + h(c), otherwise H(x_i) is used.
    """
    sx = X.sum(axis=1, dtype=np.int64)
    sy = Y.sum(axis=1, dtype=np.int64)
    d = X.astype(np.int64) @ Y.T.astype(np.int64)
    c = sx[:, None] - d
    b = sy[None, :] - d
    a = n - sx[:, None] - sy[None, :] + d
    joint = _h(a, n) + _h(b, n) + _h(c, n) + _h(d, n)
    cond = joint - (_h(b + d, n) + _h(a + c, n))
    hx = (_h(sx, n) + _h(n - sx, n))[:, None]
    accepted = _h(d, n) + _h(a, n) >= _h(b, n) + _h(c, n)
    cond = np.where(accepted, cond, hx)
    return cond.min(axis=1)


def hnmi(x: Hypergraph, y: Hypergraph) -> float:
    _check_pair(x, y)
    n = x.n
    X = x.incidence().T
    Y = y.incidence().T
    sx = X.sum(axis=1, dtype=np.int64)
    sy = Y.sum(axis=1, dtype=np.int64)
    HX = float((_h(sx, n) + _h(n - sx, n)).sum())
    HY = float((_h(sy, n) + _h(n - sy, n)).sum())
    if HX == 0.0 and HY == 0.0:
        # all edges are V (or the degenerate n=1 universe): defined by cover equality
        return 1.0 if sorted(map(frozenset, x.member_sets())) == sorted(map(frozenset, y.member_sets())) else 0.0
    HX_given_Y = float(_cover_entropies(X, Y, n).sum())
    HY_given_X = float(_cover_entropies(Y, X, n).sum())
    I = 0.5 * ((HX - HX_given_Y) + (HY - HY_given_X))
    value = I / max(HX, HY)
    return float(min(max(value, 0.0), 1.0))


def ces_sym(a: Hypergraph, b: Hypergraph) -> float:
    """Arithmetic mean of both CES directions (CES itself is asymmetric)."""
    return 0.5 * (ces(a, b).ces + ces(b, a).ces)


_MEASURES = {"ces_sym": ces_sym, "hnmi": hnmi}


def pairwise_similarity_matrix(graphs: list[Hypergraph], measure: str) -> np.ndarray:
    if measure not in _MEASURES:
        raise ValidationError(f"unknown measure {measure!r}")
    fn = _MEASURES[measure]
    sizes = {g.n for g in graphs}
    if len(sizes) > 1:
        raise DimensionMismatchError(f"mixed vertex counts: {sorted(sizes)}")
    m = len(graphs)
    M = np.ones((m, m))
    for i in range(m):
        M[i, i] = fn(graphs[i], graphs[i])
        for j in range(i + 1, m):
            M[i, j] = M[j, i] = fn(graphs[i], graphs[j])
    return M
