"""Planted-patch retrieval through the sidecar and the engine HTTP API.

100 noise images, one carrying a distinctive magenta patch.  The collection is
extracted with the sidecar, loaded into the engine through its file formats,
and a crop of the patch is issued as a region query over HTTP.  The source
image must rank in the top 5.
"""

import numpy as np
import pytest
from PIL import Image

from hgx_embedder import embed_one, extract_collection

hgx = pytest.importorskip("hgx")
from fastapi.testclient import TestClient  # noqa: E402

from hgx import EmbeddingMatrix, Hyperedge, Hypergraph  # noqa: E402
from hgx.service import SessionState  # noqa: E402
from hgx.service.api import create_app  # noqa: E402

PATCH_RECT = [20, 20, 24, 24]


@pytest.fixture(scope="module")
def collection(tmp_path_factory):
    d = tmp_path_factory.mktemp("imgs")
    rng = np.random.default_rng(42)
    for i in range(100):
        px = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
        if i == 37:
            x, y, w, h = PATCH_RECT
            px[y : y + h, x : x + w] = (230, 40, 230)
        Image.fromarray(px).save(d / f"img_{i:03d}.png")
    out = tmp_path_factory.mktemp("out")
    primary = extract_collection(d, "primary_vision", out / "vis")
    vl = extract_collection(d, "vision_language", out / "vl")
    return d, primary, vl


def test_planted_patch_ranks_source_top5(collection):
    image_dir, primary, vl = collection
    emb = EmbeddingMatrix.load(primary.embedding_path)
    qemb = EmbeddingMatrix.load(vl.embedding_path)
    assert emb.n == qemb.n == 100

    graph = Hypergraph(n=100, edges=[Hyperedge(id=0, members=frozenset(range(100)))])
    session = SessionState(graph, embeddings=emb, query_embeddings=qemb)
    client = TestClient(create_app(session))

    source = str(image_dir / "img_037.png")
    vector = embed_one("crop", "vision_language", path=source, rect=PATCH_RECT)
    r = client.post("/api/query", json={"mode": "roi", "vector": vector.tolist(), "limit": 5})
    assert r.status_code == 200
    top5 = [row["image_id"] for row in r.json()["results"]]
    assert 37 in top5, f"planted image not in top-5: {top5}"
