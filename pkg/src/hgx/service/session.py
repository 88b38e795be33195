"""Session state: revisioned hypergraph, append-only edit log with undo,
view history, visit times, and save/load.

Edits arrive as client-level requests (create/delete/rename/add/remove/merge/
split) and are decomposed into primitive ops, each carrying the inverse ops
needed to roll it back bit-exactly.  A request is applied as one transaction:
all of its ops share a txn id, the revision counter moves by exactly one, and
replaying the whole log from the initial hypergraph reproduces the live state.
"""

from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

from ..core import EmbeddingMatrix, Hyperedge, Hypergraph, ImageManifest, edge_dispersion
from ..errors import (
    ConflictError,
    FormatError,
    NotFoundError,
    ParameterError,
    ValidationError,
)

SESSION_FORMAT = "HGSESS1"
SESSION_VERSION = 1
EDIT_KINDS = ("create_edge", "delete_edge", "rename", "add_images", "remove_images", "merge", "split")
HISTORY_LIMIT = 200

RECENCY_BUCKETS = ("fresh", "lt1h", "lt1d", "older", "never")


def recency_bucket(visited_at: float | None, now: float) -> str:
    if visited_at is None:
        return "never"
    age = now - visited_at
    if age < 60:
        return "fresh"
    if age < 3600:
        return "lt1h"
    if age < 86400:
        return "lt1d"
    return "older"


@dataclass
class EditOp:
    kind: str
    payload: dict
    inverse: list  # list of [kind, payload] pairs that roll this op back
    timestamp: float
    revision: int
    txn: int

    def to_json(self) -> dict:
        return {
            "kind": self.kind,
            "payload": self.payload,
            "inverse": self.inverse,
            "timestamp": self.timestamp,
            "revision": self.revision,
            "txn": self.txn,
        }

    @classmethod
    def from_json(cls, obj: dict) -> "EditOp":
        return cls(
            kind=obj["kind"],
            payload=obj["payload"],
            inverse=[[k, p] for k, p in obj["inverse"]],
            timestamp=float(obj["timestamp"]),
            revision=int(obj["revision"]),
            txn=int(obj["txn"]),
        )


def _snapshot(rec: dict, pos: int) -> dict:
    return {
        "id": rec["id"],
        "members": sorted(rec["members"]),
        "name": rec["name"],
        "status": rec["status"],
        "origin": rec["origin"],
        "pos": pos,
    }


class _EdgeStore:
    """Ordered edge records; empty member sets are tolerated only within a
    transaction (the hyperedge non-emptiness invariant is checked on commit)."""

    def __init__(self, edges: list[Hyperedge] | None = None):
        self.order: list[int] = []
        self.recs: dict[int, dict] = {}
        for e in edges or []:
            self.order.append(e.id)
            self.recs[e.id] = {
                "id": e.id,
                "members": set(e.members),
                "name": e.name,
                "status": e.status,
                "origin": e.origin,
            }

    def copy(self) -> "_EdgeStore":
        s = _EdgeStore()
        s.order = list(self.order)
        s.recs = {i: {**r, "members": set(r["members"])} for i, r in self.recs.items()}
        return s

    def get(self, edge_id: int) -> dict:
        try:
            return self.recs[edge_id]
        except KeyError:
            raise NotFoundError(f"no edge with id {edge_id}") from None

    def pos(self, edge_id: int) -> int:
        return self.order.index(edge_id)

    def next_id(self) -> int:
        return max(self.recs, default=-1) + 1

    def insert(self, snap: dict) -> None:
        if snap["id"] in self.recs:
            raise ValidationError(f"edge id {snap['id']} already exists")
        pos = min(snap.get("pos", len(self.order)), len(self.order))
        self.order.insert(pos, snap["id"])
        self.recs[snap["id"]] = {
            "id": snap["id"],
            "members": set(snap["members"]),
            "name": snap["name"],
            "status": snap["status"],
            "origin": snap["origin"],
        }

    def remove(self, edge_id: int) -> None:
        self.get(edge_id)
        self.order.remove(edge_id)
        del self.recs[edge_id]

    def to_hypergraph(self, n: int) -> Hypergraph:
        return Hypergraph(
            [
                Hyperedge(
                    r["id"], frozenset(r["members"]), r["name"], r["status"], r["origin"]
                )
                for r in (self.recs[i] for i in self.order)
            ],
            n,
        )


def _apply_op(store: _EdgeStore, kind: str, payload: dict) -> None:
    if kind == "create_edge":
        store.insert(payload)
    elif kind == "delete_edge":
        store.remove(payload["id"])
    elif kind == "rename":
        rec = store.get(payload["id"])
        rec["name"] = payload["name"]
        rec["status"] = payload["status"]
    elif kind == "add_images":
        rec = store.get(payload["id"])
        rec["members"] |= set(payload["images"])
        rec["status"] = payload["status"]
    elif kind == "remove_images":
        rec = store.get(payload["id"])
        rec["members"] -= set(payload["images"])
        rec["status"] = payload["status"]
    elif kind == "merge":
        for rid in payload["removed_ids"]:
            store.remove(rid)
        store.insert(payload["edge"])
    else:
        raise ValidationError(f"unknown op kind {kind!r}")


def _inverse_of(store: _EdgeStore, kind: str, payload: dict) -> list:
    """Ops that undo (kind, payload), given the state *before* it applies."""
    if kind == "create_edge":
        return [["delete_edge", {"id": payload["id"]}]]
    if kind == "delete_edge":
        rec = store.get(payload["id"])
        return [["create_edge", _snapshot(rec, store.pos(payload["id"]))]]
    if kind == "rename":
        rec = store.get(payload["id"])
        return [["rename", {"id": payload["id"], "name": rec["name"], "status": rec["status"]}]]
    if kind == "add_images":
        rec = store.get(payload["id"])
        added = sorted(set(payload["images"]) - rec["members"])
        return [["remove_images", {"id": payload["id"], "images": added, "status": rec["status"]}]]
    if kind == "remove_images":
        rec = store.get(payload["id"])
        removed = sorted(set(payload["images"]) & rec["members"])
        return [["add_images", {"id": payload["id"], "images": removed, "status": rec["status"]}]]
    if kind == "merge":
        snaps = [
            ["create_edge", _snapshot(store.get(rid), store.pos(rid))]
            for rid in payload["removed_ids"]
        ]
        return [["delete_edge", {"id": payload["edge"]["id"]}]] + snaps
    raise ValidationError(f"unknown op kind {kind!r}")


class SessionState:
    def __init__(
        self,
        hypergraph: Hypergraph,
        embeddings: EmbeddingMatrix | None = None,
        manifest: ImageManifest | None = None,
        query_embeddings: EmbeddingMatrix | None = None,
        clock=time.time,
    ):
        self.n = hypergraph.n
        self.manifest = manifest
        self.embeddings = embeddings
        self.query_embeddings = query_embeddings
        self.clock = clock
        self._initial = _EdgeStore(hypergraph.edges)
        self._store = self._initial.copy()
        self.revision = 0
        self.edit_log: list[EditOp] = []
        self.edge_visit_times: dict[int, float] = {}
        self.view_history: list[dict] = []
        self._history_pos = -1
        self.events: list[dict] = []
        self._subscribers: list = []
        self._lock = threading.Lock()
        self._dispersion_cache: dict[int, float] = {}
        self._next_txn = 1
        self._txns: list[int] = []  # txn ids in commit order
        self._undo_cursor = 0  # txns[:cursor] are not-yet-undone

    # --- views of the state -------------------------------------------------

    @property
    def hypergraph(self) -> Hypergraph:
        return self._store.to_hypergraph(self.n)

    def initial_hypergraph(self) -> Hypergraph:
        return self._initial.to_hypergraph(self.n)

    def replayed_hypergraph(self) -> Hypergraph:
        store = self._initial.copy()
        for op in self.edit_log:
            _apply_op(store, op.kind, op.payload)
        return store.to_hypergraph(self.n)

    def dispersion(self, edge_id: int) -> float:
        if self.embeddings is None:
            return 0.0
        if edge_id not in self._dispersion_cache:
            rec = self._store.get(edge_id)
            self._dispersion_cache[edge_id] = edge_dispersion(rec["members"], self.embeddings)
        return self._dispersion_cache[edge_id]

    def warm_dispersion_cache(self) -> None:
        for eid in self._store.order:
            self.dispersion(eid)

    # --- edits --------------------------------------------------------------

    def _build_ops(self, store: _EdgeStore, kind: str, payload: dict) -> list:
        """Translate a client edit into primitive ops against ``store``."""
        if kind == "create_edge":
            members = sorted(set(int(i) for i in payload["members"]))
            self._check_images(members)
            if not members:
                raise ValidationError("cannot create an empty edge")
            snap = {
                "id": store.next_id(),
                "members": members,
                "name": str(payload.get("name", "")),
                "status": str(payload.get("status", "new")),
                "origin": str(payload.get("origin", "user")),
                "pos": len(store.order),
            }
            return [["create_edge", snap]]
        if kind == "delete_edge":
            store.get(int(payload["id"]))
            return [["delete_edge", {"id": int(payload["id"])}]]
        if kind == "rename":
            rec = store.get(int(payload["id"]))
            status = "modified" if rec["status"] == "original" else rec["status"]
            return [["rename", {"id": rec["id"], "name": str(payload["name"]), "status": status}]]
        if kind == "add_images":
            rec = store.get(int(payload["id"]))
            images = sorted(set(int(i) for i in payload["images"]))
            self._check_images(images)
            status = "modified" if rec["status"] == "original" else rec["status"]
            return [["add_images", {"id": rec["id"], "images": images, "status": status}]]
        if kind == "remove_images":
            rec = store.get(int(payload["id"]))
            images = sorted(set(int(i) for i in payload["images"]) & rec["members"])
            status = "modified" if rec["status"] == "original" else rec["status"]
            ops = [["remove_images", {"id": rec["id"], "images": images, "status": status}]]
            if images and not (rec["members"] - set(images)):
                # non-emptiness invariant: dropping the last member deletes the
                # edge, as its own logged op so undo can restore it
                ops.append(["delete_edge", {"id": rec["id"]}])
            return ops
        if kind == "merge":
            ids = sorted(set(int(i) for i in payload["ids"]))
            if len(ids) < 2:
                raise ValidationError("merge needs at least 2 distinct edges")
            parts = [store.get(i) for i in ids]
            members = sorted(set().union(*(p["members"] for p in parts)))
            origins = {p["origin"] for p in parts}
            snap = {
                "id": store.next_id(),
                "members": members,
                "name": str(payload.get("name", parts[0]["name"])),
                "status": "modified",
                "origin": origins.pop() if len(origins) == 1 else "user",
                "pos": len(store.order) - len(ids),
            }
            return [["merge", {"removed_ids": ids, "edge": snap}]]
        if kind == "split":
            rec = store.get(int(payload["id"]))
            images = sorted(set(int(i) for i in payload["images"]))
            if not images or not set(images) <= rec["members"]:
                raise ValidationError("split subset must be nonempty members of the source edge")
            snap = {
                "id": store.next_id(),
                "members": images,
                "name": str(payload.get("name", rec["name"])),
                "status": "new",
                "origin": "user",
                "pos": len(store.order),
            }
            ops = [["create_edge", snap]]
            status = "modified" if rec["status"] == "original" else rec["status"]
            ops.append(["remove_images", {"id": rec["id"], "images": images, "status": status}])
            if not (rec["members"] - set(images)):
                ops.append(["delete_edge", {"id": rec["id"]}])
            return ops
        raise ValidationError(f"unknown edit kind {kind!r}")

    def _check_images(self, images) -> None:
        for i in images:
            if not 0 <= int(i) < self.n:
                raise NotFoundError(f"no image {i}")

    def _commit(self, ops: list) -> int:
        """Apply primitive ops as one transaction; returns the new revision."""
        scratch = self._store.copy()
        records = []
        txn = self._next_txn
        now = self.clock()
        new_rev = self.revision + 1
        for kind, payload in ops:
            inverse = _inverse_of(scratch, kind, payload)
            _apply_op(scratch, kind, payload)
            records.append(EditOp(kind, payload, inverse, now, new_rev, txn))
        for rid in scratch.order:
            if not scratch.recs[rid]["members"]:
                raise ValidationError(f"edit would leave edge {rid} empty")
        changed = sorted(
            {p["id"] for _, p in ops if "id" in p}
            | {p["edge"]["id"] for k, p in ops if k == "merge"}
            | {rid for k, p in ops if k == "merge" for rid in p["removed_ids"]}
        )
        self._store = scratch
        self.revision = new_rev
        self._next_txn += 1
        self._txns.append(txn)
        self.edit_log.extend(records)
        for eid in changed:
            self._dispersion_cache.pop(eid, None)
        event = {"revision": new_rev, "changed": changed}
        self.events.append(event)
        for q in list(self._subscribers):
            q.put(event)
        return new_rev

    def apply_edit(self, kind: str, payload: dict, expected_revision: int) -> int:
        with self._lock:
            if int(expected_revision) != self.revision:
                raise ConflictError(
                    f"expected revision {expected_revision}, live revision is {self.revision}"
                )
            ops = self._build_ops(self._store, kind, payload)
            rev = self._commit(ops)
            self._undo_cursor = len(self._txns)
            return rev

    def undo(self) -> int | None:
        """Invert one transaction; returns the new revision, or None when the
        log is empty.

        Consecutive undos walk backwards through history (n undos revert the
        last n edits).  Once the chain is exhausted, the next undo starts over
        from the most recent transaction -- which is itself an undo -- so it
        acts as a redo.
        """
        with self._lock:
            if not self._txns:
                return None
            if self._undo_cursor == 0:
                self._undo_cursor = len(self._txns)
            target = self._txns[self._undo_cursor - 1]
            tail = [op for op in self.edit_log if op.txn == target]
            ops = [pair for op in reversed(tail) for pair in op.inverse]
            rev = self._commit(ops)
            self._undo_cursor -= 1
            return rev

    # --- visits and history -------------------------------------------------

    def visit_edge(self, edge_id: int) -> None:
        self._store.get(int(edge_id))
        self.edge_visit_times[int(edge_id)] = self.clock()

    def edge_recency(self, edge_id: int) -> str:
        return recency_bucket(self.edge_visit_times.get(int(edge_id)), self.clock())

    def push_view(self, view: dict) -> None:
        if view.get("view") not in ("list", "grid", "spatial", "matrix"):
            raise ParameterError(f"unknown view {view.get('view')!r}")
        del self.view_history[self._history_pos + 1 :]
        self.view_history.append({**view, "timestamp": self.clock()})
        if len(self.view_history) > HISTORY_LIMIT:
            del self.view_history[0]
        self._history_pos = len(self.view_history) - 1

    def back_view(self) -> dict | None:
        if self._history_pos <= 0:
            return None
        self._history_pos -= 1
        return self.view_history[self._history_pos]

    def forward_view(self) -> dict | None:
        if self._history_pos >= len(self.view_history) - 1:
            return None
        self._history_pos += 1
        return self.view_history[self._history_pos]

    def subscribe(self):
        import queue

        q = queue.Queue()
        self._subscribers.append(q)
        return q

    def unsubscribe(self, q) -> None:
        if q in self._subscribers:
            self._subscribers.remove(q)


# --- persistence -----------------------------------------------------------


def save_session(session: SessionState, path) -> None:
    """Write the session container plus sibling embedding files it references."""
    path = os.fspath(path)
    refs = {}
    if session.embeddings is not None:
        refs["primary"] = os.path.basename(path) + ".emb"
        session.embeddings.save(os.path.join(os.path.dirname(path) or ".", refs["primary"]))
    if session.query_embeddings is not None:
        refs["query"] = os.path.basename(path) + ".qemb"
        session.query_embeddings.save(os.path.join(os.path.dirname(path) or ".", refs["query"]))
    doc = {
        "format": SESSION_FORMAT,
        "version": SESSION_VERSION,
        "n": session.n,
        "manifest": session.manifest.to_json() if session.manifest else None,
        "embedding_refs": refs,
        "initial_hypergraph": session.initial_hypergraph().to_json(),
        "edit_log": [op.to_json() for op in session.edit_log],
        "edge_visit_times": {str(k): v for k, v in session.edge_visit_times.items()},
        "view_history": session.view_history,
        "history_pos": session._history_pos,
        "revision": session.revision,
        "next_txn": session._next_txn,
    }
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(doc, fh)


def load_session(path, clock=time.time) -> SessionState:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(f"corrupt session file at line {exc.lineno} col {exc.colno}") from exc
    if doc.get("format") != SESSION_FORMAT:
        raise FormatError(f"not a {SESSION_FORMAT} session file")
    if doc.get("version", 0) > SESSION_VERSION:
        raise FormatError(
            f"session version {doc['version']} is newer than supported {SESSION_VERSION}; migrate first"
        )
    base = os.path.dirname(path) or "."
    refs = doc.get("embedding_refs", {})
    embeddings = (
        EmbeddingMatrix.load(os.path.join(base, refs["primary"])) if "primary" in refs else None
    )
    query = EmbeddingMatrix.load(os.path.join(base, refs["query"])) if "query" in refs else None
    manifest = ImageManifest.from_json(doc["manifest"]) if doc.get("manifest") else None
    session = SessionState(
        Hypergraph.from_json(doc["initial_hypergraph"]),
        embeddings=embeddings,
        manifest=manifest,
        query_embeddings=query,
        clock=clock,
    )
    for op_doc in doc["edit_log"]:
        op = EditOp.from_json(op_doc)
        _apply_op(session._store, op.kind, op.payload)
        session.edit_log.append(op)
    session.revision = int(doc["revision"])
    session._next_txn = int(doc.get("next_txn", (session.edit_log[-1].txn + 1) if session.edit_log else 1))
    session._txns = sorted({op.txn for op in session.edit_log})
    session._undo_cursor = len(session._txns)
    session.edge_visit_times = {int(k): float(v) for k, v in doc["edge_visit_times"].items()}
    session.view_history = list(doc.get("view_history", []))
    session._history_pos = int(doc.get("history_pos", len(session.view_history) - 1))
    return session
