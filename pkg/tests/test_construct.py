import numpy as np
import pytest
from sklearn.metrics import adjusted_rand_score

from hgx.construct import (
    FcmParams,
    ThresholdPolicy,
    fcm_fit,
    import_membership,
    metadata_edges,
    metadata_field_stats,
    multi_granularity_kmeans,
    pcm_fit,
    save_membership,
    threshold_membership,
    uncovered_images,
)
from hgx.core import EmbeddingMatrix, ImageManifest, SoftMembership
from hgx.errors import FormatError, NotFoundError, ParameterError


def blobs(rng, centers, per=20, scale=0.05):
    pts, labels = [], []
    for lbl, c in enumerate(centers):
        pts.append(rng.normal(loc=c, scale=scale, size=(per, len(c))))
        labels += [lbl] * per
    return EmbeddingMatrix(np.vstack(pts)), np.array(labels)


# --- FCM ------------------------------------------------------------------


def test_fcm_two_blobs_recovers_partition():
    rng = np.random.default_rng(0)
    emb, labels = blobs(rng, [(0, 0), (10, 10)])
    soft = fcm_fit(emb, FcmParams(k=2, f=1.05, seed=1))
    assert np.allclose(soft.degrees.sum(axis=1), 1.0, atol=1e-6)
    hard = soft.degrees.argmax(axis=1)
    assert adjusted_rand_score(labels, hard) > 0.95
    g = threshold_membership(soft, ThresholdPolicy(t=0.5))
    got = np.zeros(emb.n, dtype=int)
    for j, e in enumerate(g.edges):
        got[sorted(e.members)] = j
    assert adjusted_rand_score(labels, got) > 0.95


def test_fcm_high_fuzzifier_degenerates_to_uniform():
    rng = np.random.default_rng(2)
    emb = EmbeddingMatrix(rng.normal(size=(200, 64)))
    soft = fcm_fit(emb, FcmParams(k=5, f=2.0, seed=0))
    assert np.abs(soft.degrees - 1 / 5).max() < 0.05


def test_fcm_n_equals_k():
    emb = EmbeddingMatrix(np.array([[0.0, 0.0], [10.0, 0.0], [0.0, 10.0]]) + 1.0)
    soft = fcm_fit(emb, FcmParams(k=3, f=1.05, seed=4))
    assert (soft.degrees.max(axis=1) > 0.9).all()
    # each point dominates a distinct cluster
    assert len(set(soft.degrees.argmax(axis=1).tolist())) == 3


def test_fcm_identical_points_equal_memberships():
    emb = EmbeddingMatrix(np.ones((6, 3)))
    soft = fcm_fit(emb, FcmParams(k=2, f=1.5, seed=0))
    assert np.allclose(soft.degrees.sum(axis=1), 1.0, atol=1e-6)


def test_fcm_param_errors():
    emb = EmbeddingMatrix(np.ones((3, 2)))
    with pytest.raises(ParameterError):
        fcm_fit(emb, FcmParams(k=4))
    with pytest.raises(ParameterError):
        fcm_fit(emb, FcmParams(k=2, f=1.0))


def test_fcm_deterministic():
    rng = np.random.default_rng(6)
    emb = EmbeddingMatrix(rng.normal(size=(40, 5)))
    a = fcm_fit(emb, FcmParams(k=3, seed=7))
    b = fcm_fit(emb, FcmParams(k=3, seed=7))
    assert np.array_equal(a.degrees, b.degrees)


# --- PCM ------------------------------------------------------------------


def test_pcm_blob_typicalities():
    rng = np.random.default_rng(1)
    emb, labels = blobs(rng, [(0, 0), (8, 8)])
    soft = pcm_fit(emb, FcmParams(k=2, f=1.5, seed=3))
    own = soft.degrees[np.arange(emb.n), :].max(axis=1)
    # figure out which cluster matches which blob by mean typicality
    blob0 = soft.degrees[labels == 0].mean(axis=0)
    c0 = int(np.argmax(blob0))
    for i in range(emb.n):
        c = c0 if labels[i] == 0 else 1 - c0
        assert soft.degrees[i, c] > soft.degrees[i, 1 - c]
    assert own.max() <= 1.0 and own.min() >= 0.0


def test_pcm_duplicate_points_symmetric():
    emb = EmbeddingMatrix(np.array([[1.0, 1.0], [1.0, 1.0], [5.0, 5.0], [5.0, 5.0]]))
    soft = pcm_fit(emb, FcmParams(k=2, f=1.5, seed=0))
    assert np.allclose(soft.degrees[0], soft.degrees[1])
    assert np.allclose(soft.degrees[2], soft.degrees[3])


def test_pcm_high_threshold_keeps_near_center_points():
    rng = np.random.default_rng(9)
    emb, _ = blobs(rng, [(0, 0), (6, 6)], per=30, scale=0.5)
    soft = pcm_fit(emb, FcmParams(k=2, f=1.5, seed=2))
    sizes = []
    for t in (0.3, 0.6, 0.9):
        g = threshold_membership(soft, ThresholdPolicy(t=t))
        sizes.append(sum(len(e) for e in g.edges))
    assert sizes[0] >= sizes[1] >= sizes[2]


# --- multi-granularity k-means -------------------------------------------


def test_mgk_k1():
    emb = EmbeddingMatrix(np.random.default_rng(0).normal(size=(10, 3)))
    g = multi_granularity_kmeans(emb, [1], seed=0)
    assert g.m == 1 and g.edges[0].members == frozenset(range(10))


def test_mgk_nested_granularities():
    rng = np.random.default_rng(4)
    emb, labels = blobs(rng, [(0, 0), (0, 20), (20, 0), (20, 20)], per=10)
    g = multi_granularity_kmeans(emb, [2, 4], seed=1)
    assert g.m == 6
    per_image = g.incidence().sum(axis=1)
    assert (per_image == 2).all()
    coarse = [e.members for e in g.edges[:2]]
    fine = [e.members for e in g.edges[2:]]
    for f in fine:
        assert any(f <= c for c in coarse)


def test_mgk_singletons():
    emb = EmbeddingMatrix(np.arange(8, dtype=float).reshape(4, 2) + 1)
    g = multi_granularity_kmeans(emb, [4], seed=0)
    assert g.m == 4 and all(len(e) == 1 for e in g.edges)


def test_mgk_invalid_k():
    emb = EmbeddingMatrix(np.ones((3, 2)))
    with pytest.raises(ParameterError):
        multi_granularity_kmeans(emb, [5])
    with pytest.raises(ParameterError):
        multi_granularity_kmeans(emb, [])


def test_mgk_deterministic():
    rng = np.random.default_rng(8)
    emb = EmbeddingMatrix(rng.normal(size=(30, 4)))
    a = multi_granularity_kmeans(emb, [2, 3], seed=5)
    b = multi_granularity_kmeans(emb, [2, 3], seed=5)
    assert a == b


# --- thresholding ---------------------------------------------------------


def test_threshold_direct():
    soft = SoftMembership(np.array([[0.6, 0.4], [0.5, 0.5]]))
    g = threshold_membership(soft, ThresholdPolicy(t=0.5))
    assert [sorted(e.members) for e in g.edges] == [[0, 1], [1]]
    assert all(e.origin == "model" and e.status == "original" for e in g.edges)
    assert g.edges[0].name == "cluster-0"


def test_threshold_boundary_t1():
    soft = SoftMembership(np.array([[0.9, 0.4], [0.5, 0.5]]))
    g = threshold_membership(soft, ThresholdPolicy(t=1.0))
    assert g.m == 0
    assert uncovered_images(g) == [0, 1]


def test_threshold_overlap():
    soft = SoftMembership(np.array([[0.45, 0.55], [0.5, 0.5], [0.9, 0.05]]))
    g = threshold_membership(soft, ThresholdPolicy(t=0.4))
    assert [sorted(e.members) for e in g.edges] == [[0, 1, 2], [0, 1]]


def test_threshold_monotone():
    rng = np.random.default_rng(12)
    soft = SoftMembership(rng.uniform(size=(50, 6)))
    prev = None
    for t in (0.2, 0.4, 0.6, 0.8):
        mask = soft.degrees >= t
        cur = [frozenset(np.flatnonzero(mask[:, j]).tolist()) for j in range(6)]
        if prev is not None:
            assert all(c <= p for c, p in zip(cur, prev))
        prev = cur


def test_threshold_min_edge_size():
    soft = SoftMembership(np.array([[1.0, 1.0], [0.0, 1.0]]))
    g = threshold_membership(soft, ThresholdPolicy(t=0.5, min_edge_size=2))
    assert g.m == 1 and g.edges[0].members == frozenset({0, 1})


# --- metadata edges -------------------------------------------------------


def manifest_with(meta):
    return ImageManifest.from_paths([f"{i}.jpg" for i in range(len(meta))], meta)


def test_metadata_categorical():
    m = manifest_with([{"camera": "A"}, {"camera": "A"}, {"camera": "B"}, {}])
    edges = metadata_edges(m, "camera")
    by_name = {e.name: sorted(e.members) for e in edges}
    assert by_name == {"has:camera": [0, 1, 2], "camera=A": [0, 1], "camera=B": [2]}
    assert all(e.origin == "metadata" for e in edges)


def test_metadata_numeric_bins():
    m = manifest_with([{"v": 0}, {"v": 99}, {"v": 100}])
    edges = metadata_edges(m, "v", bins=10)
    by_name = {e.name: sorted(e.members) for e in edges}
    assert by_name["has:v"] == [0, 1, 2]
    assert by_name["v∈[0,10)"] == [0]
    assert by_name["v∈[90,100]"] == [1, 2]
    assert len(edges) == 3  # has-edge + two nonempty bins


def test_metadata_single_value_everywhere():
    m = manifest_with([{"x": "q"}, {"x": "q"}])
    edges = metadata_edges(m, "x")
    assert edges[0].members == edges[1].members == frozenset({0, 1})


def test_metadata_union_and_disjointness():
    m = manifest_with([{"c": "a"}, {"c": "b"}, {"c": "a"}, {}])
    edges = metadata_edges(m, "c")
    has = edges[0].members
    values = [e.members for e in edges[1:]]
    assert frozenset().union(*values) == has
    assert not (values[0] & values[1])


def test_metadata_field_absent():
    m = manifest_with([{}, {"a": ""}])
    with pytest.raises(NotFoundError):
        metadata_edges(m, "a")


def test_metadata_field_stats():
    m = manifest_with([{"a": 1, "b": ""}, {"a": 2}, {"b": "x"}])
    stats = {s["field"]: s for s in metadata_field_stats(m)}
    assert stats["a"]["valid_count"] == 2 and stats["a"]["unique_count"] == 2
    assert stats["b"]["valid_count"] == 1


# --- membership file format ----------------------------------------------


def test_membership_round_trip(tmp_path):
    soft = SoftMembership(np.random.default_rng(0).uniform(size=(7, 3)), source_tag="temi")
    p = tmp_path / "m.hgsmx"
    save_membership(soft, p)
    loaded = import_membership(p, expected_n=7)
    assert loaded.source_tag == "temi"
    assert np.allclose(loaded.degrees, soft.degrees, atol=1e-6)


def test_membership_range_error(tmp_path):
    import struct

    p = tmp_path / "bad.hgsmx"
    data = np.array([[0.5, 1.2]], dtype="<f4")
    p.write_bytes(b"HGSMX1" + struct.pack("<III", 1, 2, 0) + data.tobytes())
    with pytest.raises(FormatError) as exc:
        import_membership(p)
    assert "row 0" in str(exc.value) and "col 1" in str(exc.value)


def test_membership_shape_error(tmp_path):
    soft = SoftMembership(np.zeros((4, 2)))
    p = tmp_path / "m.hgsmx"
    save_membership(soft, p)
    with pytest.raises(FormatError):
        import_membership(p, expected_n=5)
