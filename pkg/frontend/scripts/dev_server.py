"""Fixture server for the frontend test suite.

Builds a synthetic 1000-image collection (noise images, one carrying a planted
magenta patch at id 37), extracts both embedding spaces with the sidecar,
loads everything into the engine through its file formats, and serves the
engine API with the embedder mounted under /embedder — one process, one port.
"""

import argparse
import sys
import tempfile
from pathlib import Path

import numpy as np
import uvicorn
from PIL import Image

from hgx import EmbeddingMatrix, Hyperedge, Hypergraph, ImageManifest
from hgx.service import SessionState
from hgx.service.api import create_app
from hgx_embedder import extract_collection
from hgx_embedder.api import create_app as create_embed_app

N_IMAGES = 1000
PLANTED_ID = 37
PATCH_RECT = (20, 20, 24, 24)


def build_collection(root: Path) -> tuple[Path, Path]:
    img_dir = root / "imgs"
    img_dir.mkdir()
    rng = np.random.default_rng(42)
    for i in range(N_IMAGES):
        px = rng.integers(0, 256, size=(64, 64, 3), dtype=np.uint8)
        if i == PLANTED_ID:
            x, y, w, h = PATCH_RECT
            px[y : y + h, x : x + w] = (230, 40, 230)
        Image.fromarray(px).save(img_dir / f"img_{i:04d}.png")
    return img_dir, root / "out"


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--port", type=int, default=8931)
    parser.add_argument("--host", default="127.0.0.1")
    args = parser.parse_args()

    tmp = tempfile.TemporaryDirectory(prefix="hgx-frontend-fixture-")
    root = Path(tmp.name)
    img_dir, out = build_collection(root)
    out.mkdir()
    primary = extract_collection(img_dir, "primary_vision", out / "vis")
    vl = extract_collection(img_dir, "vision_language", out / "vl")

    emb = EmbeddingMatrix.load(primary.embedding_path)
    qemb = EmbeddingMatrix.load(vl.embedding_path)
    manifest = ImageManifest.load(primary.manifest_path)

    graph = Hypergraph(
        n=N_IMAGES,
        edges=[
            Hyperedge(id=0, members=frozenset(range(N_IMAGES)), name="everything"),
            Hyperedge(id=1, members=frozenset(range(0, 50)), name="block a"),
            Hyperedge(id=2, members=frozenset(range(25, 75)), name="block b"),
            Hyperedge(id=3, members=frozenset(range(900, 1000)), name="tail block"),
        ],
    )
    session = SessionState(graph, embeddings=emb, manifest=manifest, query_embeddings=qemb)

    app = create_app(session, thumb_cache_dir=str(root / "thumbs"))
    app.mount("/embedder", create_embed_app())

    print("FIXTURE-READY", flush=True)
    uvicorn.run(app, host=args.host, port=args.port, log_level="warning")
    sys.exit(0)


if __name__ == "__main__":
    main()
