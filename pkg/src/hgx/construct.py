"""Build hypergraphs from embeddings via overlapping clustering and metadata.

All fit operations are deterministic for a fixed seed.  Cluster centers are
seeded with greedy farthest-point selection; distances are squared Euclidean
on the raw embeddings.
"""

from __future__ import annotations

import struct
from dataclasses import dataclass
from numbers import Number
from typing import Sequence

import numpy as np
from scipy.spatial.distance import cdist

from .core import EmbeddingMatrix, Hyperedge, Hypergraph, ImageManifest, SoftMembership
from .errors import FormatError, NotFoundError, ParameterError

MEMBERSHIP_MAGIC = b"HGSMX1"

_EPS = 1e-12


@dataclass(frozen=True)
class FcmParams:
    k: int
    f: float = 1.05
    tol: float = 1e-5
    max_iter: int = 300
    seed: int = 0

    def validate(self, n: int) -> None:
        if self.k < 2:
            raise ParameterError("k must be >= 2")
        if self.k > n:
            raise ParameterError(f"k ({self.k}) exceeds item count ({n})")
        if self.f <= 1.0:
            raise ParameterError("fuzzifier f must be > 1")
        if self.tol <= 0 or self.max_iter < 1:
            raise ParameterError("tol must be > 0 and max_iter >= 1")


@dataclass(frozen=True)
class ThresholdPolicy:
    t: float
    min_edge_size: int = 1

    def validate(self) -> None:
        if not (0.0 < self.t <= 1.0):
            raise ParameterError("threshold t must be in (0, 1]")
        if self.min_edge_size < 1:
            raise ParameterError("min_edge_size must be >= 1")


def _farthest_point_centers(X: np.ndarray, k: int, rng: np.random.Generator) -> np.ndarray:
    """Greedy k-means++-style seeding: random first point, then farthest-first."""
    n = X.shape[0]
    centers = [int(rng.integers(n))]
    d2 = ((X - X[centers[0]]) ** 2).sum(axis=1)
    for _ in range(1, k):
        nxt = int(np.argmax(d2))
        centers.append(nxt)
        d2 = np.minimum(d2, ((X - X[nxt]) ** 2).sum(axis=1))
    return X[centers].copy()


def _fcm_memberships(d2: np.ndarray, f: float) -> np.ndarray:
    """Row-stochastic memberships from squared distances, u ∝ (1/d2)^(1/(f-1))."""
    expo = 1.0 / (f - 1.0)
    zero_rows = d2.min(axis=1) < _EPS
    with np.errstate(divide="ignore", over="ignore"):
        w = np.power(np.maximum(d2, _EPS), -expo)
    w_sum = w.sum(axis=1, keepdims=True)
    finite = np.isfinite(w_sum[:, 0]) & ~zero_rows
    u = np.empty_like(d2)
    u[finite] = w[finite] / w_sum[finite]
    # point coincides with a center (or weights overflowed): split evenly
    # over the (near-)zero-distance centers
    special_idx = np.flatnonzero(~finite)
    if special_idx.size:
        hit = d2[special_idx] < _EPS
        no_hit = np.flatnonzero(~hit.any(axis=1))
        if no_hit.size:
            # overflow without an exact hit: fall back to the nearest center
            hit[no_hit, np.argmin(d2[special_idx[no_hit]], axis=1)] = True
        u[special_idx] = hit / hit.sum(axis=1, keepdims=True)
    return u


def fcm_fit(embeddings: EmbeddingMatrix, params: FcmParams) -> SoftMembership:
    """Fuzzy c-means: centers v_j = Σ u^f x / Σ u^f, u ∝ (1/d²)^(1/(f-1))."""
    X = embeddings.data
    params.validate(X.shape[0])
    rng = np.random.default_rng(params.seed)
    centers = _farthest_point_centers(X, params.k, rng)
    u = _fcm_memberships(cdist(X, centers, "sqeuclidean"), params.f)
    for _ in range(params.max_iter):
        uf = u**params.f
        denom = uf.sum(axis=0)[:, None]
        dead = denom[:, 0] < _EPS
        centers = (uf.T @ X) / np.maximum(denom, _EPS)
        if dead.any():
            # re-seed clusters that lost all weight at the worst-covered points
            worst = np.argsort(u.max(axis=1))[: int(dead.sum())]
            centers[dead] = X[worst]
        u_new = _fcm_memberships(cdist(X, centers, "sqeuclidean"), params.f)
        delta = float(np.abs(u_new - u).max())
        u = u_new
        if delta < params.tol:
            break
    u = np.clip(u, 0.0, 1.0)
    return SoftMembership(u, source_tag=f"fcm(k={params.k},f={params.f},seed={params.seed})")


def pcm_fit(embeddings: EmbeddingMatrix, params: FcmParams) -> SoftMembership:
    """Possibilistic c-means typicalities, FCM-initialized.

    Per-cluster scale eta_j is the FCM-membership-weighted mean squared
    distance; typicality t = 1 / (1 + (d²/eta)^(1/(f-1))).
    """
    X = embeddings.data
    params.validate(X.shape[0])
    fcm = fcm_fit(embeddings, params)
    u = fcm.degrees
    uf = u**params.f
    centers = (uf.T @ X) / np.maximum(uf.sum(axis=0)[:, None], _EPS)
    d2 = cdist(X, centers, "sqeuclidean")
    eta = (uf * d2).sum(axis=0) / np.maximum(uf.sum(axis=0), _EPS)
    eta = np.maximum(eta, _EPS)
    expo = 1.0 / (params.f - 1.0)
    t = u
    for _ in range(params.max_iter):
        tf = t**params.f
        centers = (tf.T @ X) / np.maximum(tf.sum(axis=0)[:, None], _EPS)
        d2 = cdist(X, centers, "sqeuclidean")
        t_new = 1.0 / (1.0 + np.power(d2 / eta, expo))
        delta = float(np.abs(t_new - t).max())
        t = t_new
        if delta < params.tol:
            break
    t = np.clip(t, 0.0, 1.0)
    return SoftMembership(t, source_tag=f"pcm(k={params.k},f={params.f},seed={params.seed})")


def _kmeans(X: np.ndarray, k: int, rng: np.random.Generator, max_iter: int = 100, tol: float = 1e-4):
    centers = _farthest_point_centers(X, k, rng)
    labels = np.zeros(X.shape[0], dtype=np.int64)
    for _ in range(max_iter):
        labels = np.argmin(cdist(X, centers, "sqeuclidean"), axis=1)
        new_centers = centers.copy()
        for j in range(k):
            mask = labels == j
            if mask.any():
                new_centers[j] = X[mask].mean(axis=0)
        shift = float(np.abs(new_centers - centers).max())
        centers = new_centers
        if shift < tol:
            break
    labels = np.argmin(cdist(X, centers, "sqeuclidean"), axis=1)
    return labels


def multi_granularity_kmeans(
    embeddings: EmbeddingMatrix, k_list: Sequence[int], seed: int = 0
) -> Hypergraph:
    """One k-means run per k; every nonempty cluster becomes a hyperedge."""
    if not k_list:
        raise ParameterError("k_list must be nonempty")
    X = embeddings.data
    n = X.shape[0]
    for k in k_list:
        if not (1 <= k <= n):
            raise ParameterError(f"invalid k={k} for n={n}")
    edges = []
    next_id = 0
    rng = np.random.default_rng(seed)
    for k in k_list:
        labels = _kmeans(X, k, rng)
        for j in range(k):
            members = np.flatnonzero(labels == j)
            if members.size == 0:
                continue
            edges.append(
                Hyperedge(
                    id=next_id,
                    members=frozenset(members.tolist()),
                    name=f"k{k}-cluster-{j}",
                    origin="model",
                )
            )
            next_id += 1
    return Hypergraph(edges, n)


def threshold_membership(soft: SoftMembership, policy: ThresholdPolicy) -> Hypergraph:
    """Image i joins edge j iff degrees[i,j] >= t; small edges are dropped.

    Images matching no edge simply stay unassigned.
    """
    policy.validate()
    mask = soft.degrees >= policy.t
    edges = []
    next_id = 0
    for j in range(soft.k):
        members = np.flatnonzero(mask[:, j])
        if members.size < policy.min_edge_size or members.size == 0:
            continue
        edges.append(
            Hyperedge(
                id=next_id,
                members=frozenset(members.tolist()),
                name=f"cluster-{j}",
                origin="model",
            )
        )
        next_id += 1
    return Hypergraph(edges, soft.n)


def uncovered_images(h: Hypergraph) -> list[int]:
    covered = set()
    for e in h.edges:
        covered |= e.members
    return sorted(set(range(h.n)) - covered)


def _is_numeric_field(values) -> bool:
    return all(isinstance(v, Number) and not isinstance(v, bool) for v in values)


def metadata_edges(
    manifest: ImageManifest, field: str, bins: int = 10, start_id: int = 0
) -> list[Hyperedge]:
    """One has:{field} edge plus per-value (categorical) or per-bin (numeric) edges.

    Numeric fields are binned equal-width over the observed range with
    half-open intervals; the last bin is closed.  Empty values count as
    invalid.
    """
    valid: dict[int, object] = {}
    for rec in manifest.images:
        if field in rec.metadata:
            v = rec.metadata[field]
            if v is None or v == "":
                continue
            valid[rec.id] = v
    if not valid:
        raise NotFoundError(f"metadata field {field!r} has no valid value")
    edges = [
        Hyperedge(
            id=start_id,
            members=frozenset(valid),
            name=f"has:{field}",
            origin="metadata",
        )
    ]
    next_id = start_id + 1
    values = list(valid.values())
    if _is_numeric_field(values):
        lo, hi = float(min(values)), float(max(values))
        if lo == hi:
            groups = {f"{field}∈[{lo:g},{hi:g}]": set(valid)}
        else:
            width = (hi - lo) / bins
            groups = {}
            for img, v in valid.items():
                b = min(int((float(v) - lo) / width), bins - 1)
                b_lo, b_hi = lo + b * width, lo + (b + 1) * width
                close = "]" if b == bins - 1 else ")"
                groups.setdefault(f"{field}∈[{b_lo:g},{b_hi:g}{close}", set()).add(img)
    else:
        groups = {}
        for img, v in valid.items():
            groups.setdefault(f"{field}={v}", set()).add(img)
    for name in sorted(groups):
        edges.append(
            Hyperedge(id=next_id, members=frozenset(groups[name]), name=name, origin="metadata")
        )
        next_id += 1
    return edges


def metadata_field_stats(manifest: ImageManifest) -> list[dict]:
    """Per-field valid-value and unique-value counts over the whole manifest."""
    fields: dict[str, list] = {}
    for rec in manifest.images:
        for key, v in rec.metadata.items():
            if v is None or v == "":
                continue
            fields.setdefault(key, []).append(v)
    return [
        {"field": k, "valid_count": len(vs), "unique_count": len(set(map(str, vs)))}
        for k, vs in sorted(fields.items())
    ]


def save_membership(soft: SoftMembership, path) -> None:
    tag = soft.source_tag.encode("utf-8")
    with open(path, "wb") as fh:
        fh.write(MEMBERSHIP_MAGIC)
        fh.write(struct.pack("<III", soft.n, soft.k, len(tag)))
        fh.write(tag)
        fh.write(np.asarray(soft.degrees, dtype="<f4").tobytes())


def import_membership(path, expected_n: int | None = None) -> SoftMembership:
    with open(path, "rb") as fh:
        magic = fh.read(6)
        if magic != MEMBERSHIP_MAGIC:
            raise FormatError(f"bad membership magic {magic!r}")
        header = fh.read(12)
        if len(header) != 12:
            raise FormatError("truncated membership header")
        n, k, tag_len = struct.unpack("<III", header)
        tag = fh.read(tag_len).decode("utf-8")
        raw = fh.read(n * k * 4)
        if len(raw) != n * k * 4:
            raise FormatError("truncated membership data")
        degrees = np.frombuffer(raw, dtype="<f4").reshape(n, k).astype(np.float64)
    if expected_n is not None and n != expected_n:
        raise FormatError(f"membership has n={n}, manifest has n={expected_n}")
    bad = np.argwhere((degrees < 0) | (degrees > 1) | ~np.isfinite(degrees))
    if bad.size:
        r, c = bad[0]
        raise FormatError(f"membership degree out of range at row {r}, col {c}")
    return SoftMembership(degrees, source_tag=tag)
