"""Walkthrough: an editable exploration session over a small collection.

Builds a session from a constructed hypergraph, looks at per-edge digests,
lays the edges out in 2D, performs a few human-style edits with undo, runs a
similarity query, and round-trips the whole thing through the session file
format.

Run:  python3 demos/03_explore_session.py
"""

import tempfile
from pathlib import Path

import numpy as np

from hgx import EmbeddingMatrix
from hgx.construct import FcmParams, ThresholdPolicy, fcm_fit, threshold_membership
from hgx.explore import query, six_image_summary
from hgx.layout import compute_layout
from hgx.service import SessionState, load_session, save_session

rng = np.random.default_rng(11)

# ---------------------------------------------------------------------------
# 1. A small collection and a constructed hypergraph.
# ---------------------------------------------------------------------------
centers = rng.normal(scale=6.0, size=(3, 8))
emb = EmbeddingMatrix(np.vstack([c + rng.normal(size=(30, 8)) for c in centers]))
graph = threshold_membership(fcm_fit(emb, FcmParams(k=3, seed=0)), ThresholdPolicy(t=0.5))
session = SessionState(graph, embeddings=emb)
print(f"session: n={session.n}, m={session.hypergraph.m}, revision={session.revision}")

# ---------------------------------------------------------------------------
# 2. Per-edge digest: three most central members, the farthest member, and
#    the most mutually dissimilar pair.
# ---------------------------------------------------------------------------
edge = session.hypergraph.edges[0]
s = six_image_summary(edge, emb)
print(f"\nedge {edge.id} ({len(edge)} members):")
print(f"  central trio  {s.top3}")
print(f"  outlier       {s.outlier}")
print(f"  contrast pair {s.contrast_pair}")

# ---------------------------------------------------------------------------
# 3. 2D layout: neighbor-preserving projection of edge centroids, nodes sized
#    by member count and pushed apart until none overlap.
# ---------------------------------------------------------------------------
layout = compute_layout(session.hypergraph, emb, seed=0)
for node in layout.edge_nodes:
    print(
        f"  edge {node['edge_id']}: ({node['x']:7.1f}, {node['y']:7.1f}) "
        f"r={node['radius']:.1f}"
    )
print(f"residual overlaps: {len(layout.residual_overlaps)}")

# ---------------------------------------------------------------------------
# 4. Edits go through the revisioned log: rename, carve off a subset, undo.
#    Every call states the revision it expects, which is how concurrent
#    writers get detected.
# ---------------------------------------------------------------------------
rev = session.apply_edit("rename", {"id": edge.id, "name": "seaside"}, session.revision)
some = sorted(edge.members)[:5]
rev = session.apply_edit("split", {"id": edge.id, "images": some, "name": "seaside (detail)"}, rev)
print(f"\nafter rename+split: m={session.hypergraph.m}, revision={session.revision}")
session.undo()
print(f"after undo:         m={session.hypergraph.m}, revision={session.revision}")

# ---------------------------------------------------------------------------
# 5. Query by example images: rank the whole collection against the mean
#    embedding of a seed set, with cursor pagination.
# ---------------------------------------------------------------------------
res = query("images", emb, hypergraph=session.hypergraph, image_ids=[0, 1, 2])
page = res.page(cursor=0, limit=5)
print(f"\nquery top-5 of {page['total']}: {[r['image_id'] for r in page['results']]}")

# ---------------------------------------------------------------------------
# 6. Save and reload: the file carries the hypergraph, edit log, embeddings
#    and visit times; the reloaded session replays to the same state.
# ---------------------------------------------------------------------------
with tempfile.TemporaryDirectory() as tmp:
    path = Path(tmp) / "demo.hgsess"
    save_session(session, path)
    back = load_session(path)
    same = back.hypergraph.member_sets() == session.hypergraph.member_sets()
    print(f"\nsaved {path.name} ({path.stat().st_size} bytes); reload identical: {same}")
