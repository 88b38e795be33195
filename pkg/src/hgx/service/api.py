"""HTTP API for the exploration client.

All state lives in one SessionState; mutations go through its serialized edit
path, reads see the live revision.  Domain errors map onto 404/409/422.
"""

from __future__ import annotations

import hashlib
import json
import os
import tempfile

import numpy as np
from fastapi import Body, FastAPI, Request, Response
from fastapi.responses import FileResponse, JSONResponse, StreamingResponse

from .. import explore
from ..construct import metadata_edges, metadata_field_stats
from ..core import harmonic_overlap
from ..errors import (
    ConflictError,
    HgxError,
    NotFoundError,
    ParameterError,
)
from ..layout import LayoutParams, compute_layout
from .session import SessionState

THUMB_DEFAULT_PX = 128


def _status_code(exc: HgxError) -> int:
    if isinstance(exc, NotFoundError):
        return 404
    if isinstance(exc, ConflictError):
        return 409
    return 422


def create_app(session: SessionState, thumb_cache_dir: str | None = None) -> FastAPI:
    app = FastAPI(title="hgx", openapi_url=None)
    cache_dir = thumb_cache_dir or os.path.join(tempfile.gettempdir(), "hgx-thumbs")

    @app.exception_handler(HgxError)
    async def _domain_error(request: Request, exc: HgxError):
        return JSONResponse(status_code=_status_code(exc), content={"detail": str(exc)})

    # --- edges --------------------------------------------------------------

    @app.get("/api/edges")
    def list_edges():
        g = session.hypergraph
        rows = [
            {
                "id": e.id,
                "name": e.name,
                "size": len(e),
                "status": e.status,
                "origin": e.origin,
                "dispersion": session.dispersion(e.id),
                "recency": session.edge_recency(e.id),
            }
            for e in g.edges
        ]
        return {"revision": session.revision, "edges": rows}

    @app.get("/api/edges/{edge_id}")
    def get_edge(edge_id: int):
        e = session.hypergraph.edge(edge_id)
        out = {
            "id": e.id,
            "name": e.name,
            "members": sorted(e.members),
            "status": e.status,
            "origin": e.origin,
        }
        if session.embeddings is not None:
            s = explore.six_image_summary(e, session.embeddings)
            out["summary"] = {
                "top3": list(s.top3),
                "outlier": s.outlier,
                "contrast_pair": list(s.contrast_pair) if s.contrast_pair else None,
            }
        return out

    @app.post("/api/edges")
    def create_edge(body: dict = Body(...)):
        rev = session.apply_edit(
            "create_edge",
            {k: body[k] for k in ("members", "name", "origin", "status") if k in body},
            body.get("expected_revision", session.revision),
        )
        new_id = max(e.id for e in session.hypergraph.edges)
        return {"revision": rev, "id": new_id}

    @app.patch("/api/edges/{edge_id}")
    def rename_edge(edge_id: int, body: dict = Body(...)):
        rev = session.apply_edit(
            "rename",
            {"id": edge_id, "name": body["name"]},
            body.get("expected_revision", session.revision),
        )
        return {"revision": rev}

    @app.delete("/api/edges/{edge_id}")
    def delete_edge(edge_id: int, expected_revision: int | None = None):
        rev = session.apply_edit(
            "delete_edge",
            {"id": edge_id},
            expected_revision if expected_revision is not None else session.revision,
        )
        return {"revision": rev}

    @app.post("/api/edges/{edge_id}/images")
    def edit_edge_images(edge_id: int, body: dict = Body(...)):
        expected = body.get("expected_revision", session.revision)
        rev = session.revision
        if body.get("add"):
            rev = session.apply_edit("add_images", {"id": edge_id, "images": body["add"]}, expected)
            expected = rev
        if body.get("remove"):
            rev = session.apply_edit(
                "remove_images", {"id": edge_id, "images": body["remove"]}, expected
            )
        return {"revision": rev}

    @app.post("/api/edges/{edge_id}/visit")
    def visit_edge(edge_id: int):
        session.visit_edge(edge_id)
        return {"recency": session.edge_recency(edge_id)}

    @app.post("/api/edges/merge")
    def merge_edges(body: dict = Body(...)):
        rev = session.apply_edit(
            "merge",
            {k: body[k] for k in ("ids", "name") if k in body},
            body.get("expected_revision", session.revision),
        )
        return {"revision": rev, "id": max(e.id for e in session.hypergraph.edges)}

    @app.post("/api/edges/{edge_id}/split")
    def split_edge(edge_id: int, body: dict = Body(...)):
        rev = session.apply_edit(
            "split",
            {"id": edge_id, "images": body["images"], **({"name": body["name"]} if "name" in body else {})},
            body.get("expected_revision", session.revision),
        )
        return {"revision": rev}

    @app.post("/api/edits/undo")
    def undo():
        rev = session.undo()
        if rev is None:
            return {"revision": session.revision, "undone": False}
        return {"revision": rev, "undone": True}

    # --- analytics ----------------------------------------------------------

    @app.post("/api/query")
    def run_query(body: dict = Body(...)):
        mode = body.get("mode")
        vector = np.asarray(body["vector"], dtype=np.float64) if "vector" in body else None
        res = explore.query(
            mode,
            session.embeddings,
            hypergraph=session.hypergraph,
            image_ids=body.get("image_ids"),
            edge_id=body.get("edge_id"),
            vector=vector,
            query_embeddings=session.query_embeddings,
        )
        ranked = res.ranked
        if body.get("hide_reviewed"):
            # drop bordered (user-touched) images before paginating
            status = explore.review_status(
                [i for i, _ in ranked], session.hypergraph, body.get("last_selected_edge")
            )
            ranked = tuple(r for r in ranked if status[r[0]] == "unreviewed")
            res = explore.QueryResult(ranked, res.query_tag)
        return {"query_tag": res.query_tag, **res.page(body.get("cursor", 0), body.get("limit", 50))}

    @app.get("/api/layout")
    def layout(seed: int = 0, images: int = 1):
        if session.embeddings is None:
            raise ParameterError("layout needs embeddings")
        result = compute_layout(
            session.hypergraph,
            session.embeddings,
            seed=seed,
            params=LayoutParams(),
            include_images=bool(images),
        )
        payload = result.to_json()
        for node in payload["edges"]:
            node["recency"] = session.edge_recency(node["id"])
        payload["revision"] = session.revision
        return payload

    @app.get("/api/matrix")
    def matrix():
        from scipy.sparse import csr_matrix

        g = session.hypergraph
        # sparse incidence: dense H.T @ H is quadratic in n at scale
        rows, cols = [], []
        for j, e in enumerate(g.edges):
            rows.extend(e.members)
            cols.extend([j] * len(e))
        H = csr_matrix(
            (np.ones(len(rows), dtype=np.int64), (rows, cols)), shape=(g.n, g.m)
        )
        inter = np.asarray((H.T @ H).todense())
        sizes = inter.diagonal()
        denom = (sizes[:, None] + sizes[None, :]).astype(np.float64)
        harmonic = np.divide(2.0 * inter, denom, out=np.zeros_like(denom), where=denom > 0)
        return {
            "revision": session.revision,
            "edge_ids": [e.id for e in g.edges],
            "intersection": inter.tolist(),
            "harmonic": np.round(harmonic, 6).tolist(),
        }

    @app.get("/api/summary/{edge_id}")
    def summary(edge_id: int):
        e = session.hypergraph.edge(edge_id)
        s = explore.six_image_summary(e, session.embeddings)
        return {
            "edge_id": e.id,
            "top3": list(s.top3),
            "outlier": s.outlier,
            "contrast_pair": list(s.contrast_pair) if s.contrast_pair else None,
        }

    @app.get("/api/subclusters/{edge_id}")
    def subclusters(edge_id: int, theta: float = 0.5):
        e = session.hypergraph.edge(edge_id)
        tree = explore.subcluster_tree(e, session.embeddings)
        return {
            "edge_id": e.id,
            "theta": theta,
            "max_height": tree.max_height,
            "subclusters": [sorted(c) for c in tree.cut(theta)],
        }

    @app.get("/api/meta-edges")
    def meta_edges(theta: float = 0.9):
        groups = explore.meta_edge_grouping(session.hypergraph, session.embeddings, theta)
        return {"theta": theta, "groups": groups}

    # --- images -------------------------------------------------------------

    def _image_path(image_id: int) -> str:
        if session.manifest is None:
            raise NotFoundError("session has no image manifest")
        if not 0 <= image_id < len(session.manifest):
            raise NotFoundError(f"no image {image_id}")
        path = session.manifest.images[image_id].path
        if not os.path.exists(path):
            raise NotFoundError(f"image file missing: {path}")
        return path

    @app.get("/api/images/{image_id}/thumb")
    def thumbnail(image_id: int, px: int = THUMB_DEFAULT_PX):
        from PIL import Image

        path = _image_path(image_id)
        mtime = os.stat(path).st_mtime_ns
        key = hashlib.sha256(f"{path}:{mtime}:{px}".encode()).hexdigest()
        os.makedirs(cache_dir, exist_ok=True)
        cached = os.path.join(cache_dir, key + ".png")
        if not os.path.exists(cached):
            with Image.open(path) as im:
                im = im.convert("RGB")
                im.thumbnail((px, px))
                im.save(cached, format="PNG")
        with open(cached, "rb") as fh:
            return Response(content=fh.read(), media_type="image/png")

    @app.get("/api/images/{image_id}/full")
    def full_image(image_id: int):
        return FileResponse(_image_path(image_id))

    # --- metadata -----------------------------------------------------------

    @app.get("/api/metadata/fields")
    def metadata_fields():
        if session.manifest is None:
            return {"fields": []}
        return {"fields": metadata_field_stats(session.manifest)}

    @app.post("/api/metadata/edges")
    def make_metadata_edges(body: dict = Body(...)):
        if session.manifest is None:
            raise NotFoundError("session has no image manifest")
        edges = metadata_edges(
            session.manifest, body["field"], bins=body.get("bins", 10), start_id=0
        )
        expected = body.get("expected_revision", session.revision)
        rev = session.revision
        created = []
        for e in edges:
            rev = session.apply_edit(
                "create_edge",
                {
                    "members": sorted(e.members),
                    "name": e.name,
                    "origin": "metadata",
                    "status": "original",
                },
                expected,
            )
            expected = rev
            created.append(max(x.id for x in session.hypergraph.edges))
        return {"revision": rev, "ids": created}

    # --- history and events -------------------------------------------------

    @app.get("/api/history")
    def history():
        return {"stack": session.view_history, "position": session._history_pos}

    @app.post("/api/history/push")
    def history_push(body: dict = Body(...)):
        session.push_view(body)
        return {"position": session._history_pos}

    @app.post("/api/history/back")
    def history_back():
        view = session.back_view()
        return {"view": view, "position": session._history_pos}

    @app.post("/api/history/forward")
    def history_forward():
        view = session.forward_view()
        return {"view": view, "position": session._history_pos}

    @app.get("/api/events")
    def events(since: int | None = None):
        if since is not None:
            pending = [e for e in session.events if e["revision"] > since]
            return {"revision": session.revision, "events": pending}

        def stream():
            q = session.subscribe()
            try:
                for event in session.events:
                    yield f"data: {json.dumps(event)}\n\n"
                while True:
                    event = q.get()
                    if event is None:
                        break
                    yield f"data: {json.dumps(event)}\n\n"
            finally:
                session.unsubscribe(q)

        return StreamingResponse(stream(), media_type="text/event-stream")

    return app
