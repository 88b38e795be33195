import numpy as np
import pytest
from fastapi.testclient import TestClient

from hgx.core import EmbeddingMatrix, Hypergraph, ImageManifest, intersection_size
from hgx.service import SessionState
from hgx.service.api import create_app


@pytest.fixture
def session(tmp_path):
    rng = np.random.default_rng(0)
    emb = EmbeddingMatrix(rng.normal(size=(20, 6)))
    manifest = ImageManifest.from_paths(
        [str(tmp_path / f"img{i}.png") for i in range(20)],
        [{"camera": "A" if i < 10 else "B"} for i in range(20)],
    )
    g = Hypergraph.from_member_sets([{0, 1, 2, 3}, {3, 4, 5}, {10, 11}], 20)
    return SessionState(g, embeddings=emb, manifest=manifest)


@pytest.fixture
def client(session, tmp_path):
    return TestClient(create_app(session, thumb_cache_dir=str(tmp_path / "thumbs")))


# --- edges ----------------------------------------------------------------


def test_list_edges_fresh_construct(client):
    body = client.get("/api/edges").json()
    assert body["revision"] == 0
    assert len(body["edges"]) == 3
    for row in body["edges"]:
        assert row["status"] == "original" and row["origin"] == "model"
        assert row["recency"] == "never"
        assert row["dispersion"] >= 0
    assert body["edges"][0]["size"] == 4


def test_get_edge_with_summary(client):
    body = client.get("/api/edges/1").json()
    assert body["members"] == [3, 4, 5]
    assert body["summary"]["top3"] and body["summary"]["outlier"] is None
    assert client.get("/api/edges/99").status_code == 404


def test_create_patch_delete_cycle(client, session):
    r = client.post("/api/edges", json={"members": [7, 8], "name": "pair", "expected_revision": 0})
    assert r.status_code == 200
    new_id = r.json()["id"]
    r = client.patch(f"/api/edges/{new_id}", json={"name": "renamed", "expected_revision": 1})
    assert r.json()["revision"] == 2
    assert session.hypergraph.edge(new_id).name == "renamed"
    r = client.delete(f"/api/edges/{new_id}?expected_revision=2")
    assert r.json()["revision"] == 3
    assert client.get(f"/api/edges/{new_id}").status_code == 404


def test_stale_revision_409(client):
    client.post("/api/edges", json={"members": [7], "expected_revision": 0})
    r = client.post("/api/edges", json={"members": [8], "expected_revision": 0})
    assert r.status_code == 409


def test_edit_images_and_undo(client, session):
    r = client.post("/api/edges/2/images", json={"add": [12], "expected_revision": 0})
    assert session.hypergraph.edge(2).members == frozenset({10, 11, 12})
    r = client.post("/api/edits/undo")
    assert r.json()["undone"] is True
    assert session.hypergraph.edge(2).members == frozenset({10, 11})
    # empty-log undo on a fresh session
    fresh = SessionState(Hypergraph.from_member_sets([{0}], 2))
    c2 = TestClient(create_app(fresh))
    assert c2.post("/api/edits/undo").json()["undone"] is False


def test_validation_422(client):
    r = client.post("/api/edges", json={"members": [], "expected_revision": 0})
    assert r.status_code == 422
    r = client.post("/api/edges", json={"members": [999], "expected_revision": 0})
    assert r.status_code == 404


def test_merge_and_split_endpoints(client, session):
    r = client.post("/api/edges/merge", json={"ids": [0, 1], "expected_revision": 0})
    merged_id = r.json()["id"]
    assert session.hypergraph.edge(merged_id).members == frozenset({0, 1, 2, 3, 4, 5})
    r = client.post(
        f"/api/edges/{merged_id}/split",
        json={"images": [0, 1], "expected_revision": r.json()["revision"]},
    )
    assert r.status_code == 200
    assert frozenset({0, 1}) in [e.members for e in session.hypergraph.edges]


def test_visit_endpoint(client):
    assert client.post("/api/edges/0/visit").json()["recency"] == "fresh"
    assert client.get("/api/edges").json()["edges"][0]["recency"] == "fresh"
    assert client.post("/api/edges/77/visit").status_code == 404


# --- analytics ------------------------------------------------------------


def test_query_endpoint_images_mode(client):
    r = client.post("/api/query", json={"mode": "images", "image_ids": [5]}).json()
    assert r["query_tag"] == "images"
    assert r["results"][0]["image_id"] == 5
    assert r["results"][0]["score"] == pytest.approx(1.0)
    assert r["total"] == 20


def test_query_pagination_and_hide_reviewed(client, session):
    client.patch("/api/edges/0", json={"name": "seen", "expected_revision": 0})
    r = client.post(
        "/api/query", json={"mode": "images", "image_ids": [5], "hide_reviewed": True}
    ).json()
    ids = {row["image_id"] for row in r["results"]}
    assert ids.isdisjoint({0, 1, 2, 3})  # members of the modified edge hidden
    assert r["total"] == 16
    r2 = client.post(
        "/api/query",
        json={"mode": "images", "image_ids": [5], "hide_reviewed": True, "cursor": 10, "limit": 10},
    ).json()
    assert len(r2["results"]) == 6 and r2["cursor"] is None


def test_query_bad_mode_422(client):
    assert client.post("/api/query", json={"mode": "nope"}).status_code == 422


def test_layout_endpoint(client):
    r = client.get("/api/layout?seed=3").json()
    assert r["revision"] == 0
    assert len(r["edges"]) == 3
    for node in r["edges"]:
        assert set(node) == {"id", "x", "y", "r", "recency"}
    assert r == client.get("/api/layout?seed=3").json()


def test_matrix_matches_intersection_size(client, session):
    r = client.get("/api/matrix").json()
    g = session.hypergraph
    ids = r["edge_ids"]
    for a, ea in enumerate(g.edges):
        for b, eb in enumerate(g.edges):
            assert r["intersection"][a][b] == intersection_size(ea, eb)
    assert r["harmonic"][0][1] == pytest.approx(2 * 1 / (4 + 3), abs=1e-6)
    assert ids == [0, 1, 2]


def test_summary_and_subclusters_endpoints(client):
    s = client.get("/api/summary/0").json()
    assert s["edge_id"] == 0 and len(s["top3"]) == 3 and s["outlier"] is not None
    sub = client.get("/api/subclusters/0?theta=0").json()
    assert sub["subclusters"] == [[0], [1], [2], [3]]
    sub_all = client.get(f"/api/subclusters/0?theta={sub['max_height'] + 1}").json()
    assert sub_all["subclusters"] == [[0, 1, 2, 3]]


def test_meta_edges_endpoint(client):
    r = client.get("/api/meta-edges?theta=-1").json()
    assert r["groups"] == [[0, 1, 2]]
    r = client.get("/api/meta-edges?theta=1.5")
    assert r.status_code == 422


# --- images ---------------------------------------------------------------


def test_thumbnail_and_full(client, session, tmp_path):
    from PIL import Image

    Image.new("RGB", (64, 32), (255, 0, 0)).save(tmp_path / "img0.png")
    r = client.get("/api/images/0/thumb?px=16")
    assert r.status_code == 200 and r.headers["content-type"] == "image/png"
    import io

    with Image.open(io.BytesIO(r.content)) as im:
        assert max(im.size) == 16
    # cached second hit identical
    assert client.get("/api/images/0/thumb?px=16").content == r.content
    assert client.get("/api/images/0/full").status_code == 200
    assert client.get("/api/images/1/thumb").status_code == 404  # file missing
    assert client.get("/api/images/999/thumb").status_code == 404
    # thumbnails never mutate session state
    assert session.revision == 0 and client.get("/api/edges").json()["revision"] == 0


# --- metadata -------------------------------------------------------------


def test_metadata_fields_and_edges(client, session):
    fields = client.get("/api/metadata/fields").json()["fields"]
    cam = next(f for f in fields if f["field"] == "camera")
    assert cam["valid_count"] == 20 and cam["unique_count"] == 2
    r = client.post("/api/metadata/edges", json={"field": "camera", "expected_revision": 0}).json()
    names = {session.hypergraph.edge(i).name for i in r["ids"]}
    assert names == {"has:camera", "camera=A", "camera=B"}
    assert all(session.hypergraph.edge(i).origin == "metadata" for i in r["ids"])
    assert client.post("/api/metadata/edges", json={"field": "nope"}).status_code == 404


# --- history and events ---------------------------------------------------


def test_history_endpoints(client):
    client.post("/api/history/push", json={"view": "list"})
    client.post("/api/history/push", json={"view": "grid"})
    r = client.post("/api/history/back").json()
    assert r["view"]["view"] == "list"
    r = client.post("/api/history/forward").json()
    assert r["view"]["view"] == "grid"
    assert client.get("/api/history").json()["position"] == 1
    assert client.post("/api/history/push", json={"view": "nope"}).status_code == 422


def test_events_poll(client):
    client.post("/api/edges", json={"members": [7], "expected_revision": 0})
    client.patch("/api/edges/0", json={"name": "x", "expected_revision": 1})
    r = client.get("/api/events?since=0").json()
    assert [e["revision"] for e in r["events"]] == [1, 2]
    assert r["events"][1]["changed"] == [0]
    r2 = client.get("/api/events?since=1").json()
    assert [e["revision"] for e in r2["events"]] == [2]
    assert client.get("/api/events?since=2").json()["events"] == []
