"""Core hypergraph and embedding data model plus the similarity primitives.

Vertices are images identified by dense integer ids ``0..n-1`` whose order
matches the rows of the embedding matrix.  Hyperedges are nonempty subsets of
those ids carrying a name, a status and an origin.
"""

from __future__ import annotations

import json
import struct
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

from .errors import (
    DimensionMismatchError,
    FormatError,
    UndefinedSimilarityError,
    ValidationError,
)

EMBEDDING_MAGIC = b"HGEMB1"

STATUS_VALUES = ("original", "modified", "new")
ORIGIN_VALUES = ("model", "metadata", "user")


@dataclass(frozen=True)
class ImageRecord:
    id: int
    path: str
    metadata: Mapping[str, object] = field(default_factory=dict)


@dataclass(frozen=True)
class ImageManifest:
    """Ordered image list; ids are dense 0..n-1 and match embedding rows."""

    images: tuple[ImageRecord, ...]

    def __post_init__(self):
        for i, rec in enumerate(self.images):
            if rec.id != i:
                raise ValidationError(f"manifest ids must be dense 0..n-1; got {rec.id} at position {i}")
            if not rec.path:
                raise ValidationError(f"image {i} has an empty path")

    def __len__(self) -> int:
        return len(self.images)

    @classmethod
    def from_paths(cls, paths: Sequence[str], metadata: Sequence[Mapping] | None = None) -> "ImageManifest":
        metadata = metadata or [{} for _ in paths]
        return cls(tuple(ImageRecord(i, p, dict(m)) for i, (p, m) in enumerate(zip(paths, metadata))))

    def to_json(self) -> dict:
        return {
            "images": [
                {"id": r.id, "path": r.path, "metadata": dict(r.metadata)} for r in self.images
            ]
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "ImageManifest":
        try:
            recs = tuple(
                ImageRecord(int(r["id"]), str(r["path"]), dict(r.get("metadata") or {}))
                for r in obj["images"]
            )
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad manifest JSON: {exc}") from exc
        return cls(recs)

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "ImageManifest":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))


class EmbeddingMatrix:
    """n x d real feature matrix aligned to a manifest.

    Zero rows are rejected at construction: they have no direction and would
    make cosine similarity undefined downstream.
    """

    def __init__(self, data: np.ndarray, model_tag: str = ""):
        data = np.asarray(data, dtype=np.float64)
        if data.ndim != 2 or data.shape[1] < 1:
            raise ValidationError(f"embedding matrix must be 2-D with d >= 1, got shape {data.shape}")
        if not np.all(np.isfinite(data)):
            raise ValidationError("embedding matrix contains non-finite entries")
        norms = np.linalg.norm(data, axis=1)
        zero = np.flatnonzero(norms == 0.0)
        if zero.size:
            raise ValidationError(f"all-zero embedding row(s) at index {zero[0]}")
        self.data = data
        self.norms = norms
        self.model_tag = model_tag

    @property
    def n(self) -> int:
        return self.data.shape[0]

    @property
    def d(self) -> int:
        return self.data.shape[1]

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(EMBEDDING_MAGIC)
            fh.write(struct.pack("<II", self.n, self.d))
            fh.write(self.data.astype("<f4").tobytes())

    @classmethod
    def load(cls, path, model_tag: str = "") -> "EmbeddingMatrix":
        with open(path, "rb") as fh:
            magic = fh.read(6)
            if magic != EMBEDDING_MAGIC:
                raise FormatError(f"bad embedding magic {magic!r}")
            header = fh.read(8)
            if len(header) != 8:
                raise FormatError("truncated embedding header")
            n, d = struct.unpack("<II", header)
            raw = fh.read(n * d * 4)
            if len(raw) != n * d * 4:
                raise FormatError("truncated embedding data")
            data = np.frombuffer(raw, dtype="<f4").reshape(n, d)
        return cls(data, model_tag=model_tag)


@dataclass
class Hyperedge:
    id: int
    members: frozenset[int]
    name: str = ""
    status: str = "original"
    origin: str = "model"
    last_visited: float | None = None

    def __post_init__(self):
        self.members = frozenset(int(m) for m in self.members)
        if not self.members:
            raise ValidationError(f"edge {self.id} is empty")
        if self.status not in STATUS_VALUES:
            raise ValidationError(f"bad status {self.status!r}")
        if self.origin not in ORIGIN_VALUES:
            raise ValidationError(f"bad origin {self.origin!r}")

    def __len__(self) -> int:
        return len(self.members)


class Hypergraph:
    """A list of hyperedges over a fixed vertex universe of size n."""

    def __init__(self, edges: Iterable[Hyperedge], n: int):
        edges = list(edges)
        ids = [e.id for e in edges]
        if len(set(ids)) != len(ids):
            raise ValidationError("duplicate edge ids")
        for e in edges:
            if e.members and (min(e.members) < 0 or max(e.members) >= n):
                raise ValidationError(f"edge {e.id} has members outside 0..{n - 1}")
        self.edges = edges
        self.n = int(n)

    @property
    def m(self) -> int:
        return len(self.edges)

    def edge(self, edge_id: int) -> Hyperedge:
        for e in self.edges:
            if e.id == edge_id:
                return e
        from .errors import NotFoundError

        raise NotFoundError(f"no edge with id {edge_id}")

    def incidence(self) -> np.ndarray:
        """n x m binary matrix; column order follows edge order."""
        H = np.zeros((self.n, self.m), dtype=np.uint8)
        for j, e in enumerate(self.edges):
            H[list(e.members), j] = 1
        return H

    @classmethod
    def from_incidence(cls, H: np.ndarray, **edge_kwargs) -> "Hypergraph":
        H = np.asarray(H)
        n, m = H.shape
        edges = [
            Hyperedge(id=j, members=frozenset(np.flatnonzero(H[:, j]).tolist()), **edge_kwargs)
            for j in range(m)
        ]
        return cls(edges, n)

    @classmethod
    def from_member_sets(cls, sets: Sequence[Iterable[int]], n: int, **edge_kwargs) -> "Hypergraph":
        return cls([Hyperedge(id=j, members=frozenset(s), **edge_kwargs) for j, s in enumerate(sets)], n)

    def member_sets(self) -> list[frozenset[int]]:
        return [e.members for e in self.edges]

    def copy(self) -> "Hypergraph":
        return Hypergraph(
            [
                Hyperedge(e.id, e.members, e.name, e.status, e.origin, e.last_visited)
                for e in self.edges
            ],
            self.n,
        )

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "edges": [
                {
                    "id": e.id,
                    "name": e.name,
                    "members": sorted(e.members),
                    "status": e.status,
                    "origin": e.origin,
                }
                for e in self.edges
            ],
        }

    @classmethod
    def from_json(cls, obj: Mapping) -> "Hypergraph":
        try:
            edges = [
                Hyperedge(
                    id=int(e["id"]),
                    members=frozenset(int(v) for v in e["members"]),
                    name=str(e.get("name", "")),
                    status=str(e.get("status", "original")),
                    origin=str(e.get("origin", "model")),
                )
                for e in obj["edges"]
            ]
            return cls(edges, int(obj["n"]))
        except (KeyError, TypeError) as exc:
            raise FormatError(f"bad hypergraph JSON: {exc}") from exc

    def save(self, path) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh)

    @classmethod
    def load(cls, path) -> "Hypergraph":
        with open(path, encoding="utf-8") as fh:
            return cls.from_json(json.load(fh))

    def __eq__(self, other) -> bool:
        if not isinstance(other, Hypergraph):
            return NotImplemented
        return self.n == other.n and [
            (e.id, e.members, e.name, e.status, e.origin) for e in self.edges
        ] == [(e.id, e.members, e.name, e.status, e.origin) for e in other.edges]


class SoftMembership:
    """n x k membership-degree matrix in [0, 1] from a clusterer."""

    def __init__(self, degrees: np.ndarray, source_tag: str = ""):
        degrees = np.asarray(degrees)
        if degrees.ndim != 2:
            raise ValidationError("membership matrix must be 2-D")
        if not np.all(np.isfinite(degrees)):
            raise ValidationError("membership matrix contains non-finite entries")
        lo, hi = float(degrees.min(initial=0.0)), float(degrees.max(initial=0.0))
        if lo < 0.0 or hi > 1.0:
            bad = np.argwhere((degrees < 0) | (degrees > 1))[0]
            raise ValidationError(
                f"membership degree out of [0,1] at row {bad[0]}, col {bad[1]}"
            )
        self.degrees = degrees
        self.source_tag = source_tag

    @property
    def n(self) -> int:
        return self.degrees.shape[0]

    @property
    def k(self) -> int:
        return self.degrees.shape[1]


# ---------------------------------------------------------------------------
# similarity primitives


def edge_centroid(edge: Hyperedge | Iterable[int], embeddings: EmbeddingMatrix) -> np.ndarray:
    members = sorted(edge.members if isinstance(edge, Hyperedge) else edge)
    if not members:
        raise ValidationError("cannot take the centroid of an empty edge")
    return embeddings.data[members].mean(axis=0)


def sim_images(i: int, j: int, embeddings: EmbeddingMatrix) -> float:
    xi, xj = embeddings.data[i], embeddings.data[j]
    return float(xi @ xj / (embeddings.norms[i] * embeddings.norms[j]))


def sim_edges(edge_a, edge_b, embeddings: EmbeddingMatrix) -> float:
    ca = edge_centroid(edge_a, embeddings)
    cb = edge_centroid(edge_b, embeddings)
    na, nb = np.linalg.norm(ca), np.linalg.norm(cb)
    if na == 0.0 or nb == 0.0:
        raise UndefinedSimilarityError("edge centroid is a zero vector")
    return float(ca @ cb / (na * nb))


def intersection_size(edge_a: Hyperedge, edge_b: Hyperedge) -> int:
    return len(edge_a.members & edge_b.members)


def harmonic_overlap(edge_a: Hyperedge, edge_b: Hyperedge) -> float:
    """Harmonic mean of |A∩B|/|A| and |A∩B|/|B|, i.e. 2|A∩B|/(|A|+|B|)."""
    inter = len(edge_a.members & edge_b.members)
    return 2.0 * inter / (len(edge_a.members) + len(edge_b.members))


def edge_dispersion(edge, embeddings: EmbeddingMatrix) -> float:
    """Population std-dev of member-to-centroid cosine similarity.

    Singleton edges yield 0.  If the centroid is a zero vector the notion is
    undefined and 0 is returned (all directions equally dissimilar).
    """
    members = sorted(edge.members if isinstance(edge, Hyperedge) else edge)
    if not members:
        raise ValidationError("dispersion of an empty edge")
    if len(members) == 1:
        return 0.0
    X = embeddings.data[members]
    centroid = X.mean(axis=0)
    cn = np.linalg.norm(centroid)
    if cn == 0.0:
        return 0.0
    sims = X @ centroid / (np.linalg.norm(X, axis=1) * cn)
    return float(np.std(sims))


def check_aligned(embeddings: EmbeddingMatrix, manifest: ImageManifest) -> None:
    if embeddings.n != len(manifest):
        raise DimensionMismatchError(
            f"embedding rows ({embeddings.n}) != manifest size ({len(manifest)})"
        )
