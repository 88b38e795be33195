import json

import numpy as np
import pytest
from PIL import Image

from hgx_embedder import (
    EmbedderError,
    RectError,
    embed_one,
    extract_collection,
    model_dim,
)
from hgx_embedder.features import embed_text


def make_image(path, color, size=(48, 32)):
    Image.new("RGB", size, color).save(path)


@pytest.fixture
def image_dir(tmp_path):
    d = tmp_path / "imgs"
    d.mkdir()
    make_image(d / "a.png", (200, 30, 30))
    make_image(d / "b.png", (30, 200, 30))
    make_image(d / "c.png", (30, 30, 200))
    return d


def read_emb(path):
    raw = open(path, "rb").read()
    assert raw[:6] == b"HGEMB1"
    n = int.from_bytes(raw[6:10], "little")
    d = int.from_bytes(raw[10:14], "little")
    return np.frombuffer(raw[14:], dtype="<f4").reshape(n, d)


def test_three_image_dir(image_dir, tmp_path):
    res = extract_collection(image_dir, "primary_vision", tmp_path / "out")
    assert res.n == 3 and not res.skipped
    M = read_emb(res.embedding_path)
    assert M.shape == (3, model_dim("primary_vision"))
    manifest = json.load(open(res.manifest_path))
    assert [r["id"] for r in manifest["images"]] == [0, 1, 2]
    # manifest order is the sorted path order and matches matrix rows
    assert [r["path"].rsplit("/", 1)[-1] for r in manifest["images"]] == [
        "a.png",
        "b.png",
        "c.png",
    ]
    for r in manifest["images"]:
        assert r["metadata"]["width"] == 48 and r["metadata"]["height"] == 32


def test_rerun_byte_identical(image_dir, tmp_path):
    res1 = extract_collection(image_dir, "vision_language", tmp_path / "one")
    res2 = extract_collection(image_dir, "vision_language", tmp_path / "two")
    assert open(res1.embedding_path, "rb").read() == open(res2.embedding_path, "rb").read()
    m1 = json.load(open(res1.manifest_path))
    m2 = json.load(open(res2.manifest_path))
    assert [r["metadata"] for r in m1["images"]] == [r["metadata"] for r in m2["images"]]


def test_corrupt_image_skipped(image_dir, tmp_path):
    (image_dir / "b.png").write_bytes(b"not an image at all")
    res = extract_collection(image_dir, "primary_vision", tmp_path / "out")
    assert res.n == 2
    assert len(res.skipped) == 1 and res.skipped[0]["path"].endswith("b.png")
    report = json.load(open(str(tmp_path / "out") + ".report.json"))
    assert report["embedded"] == 2 and len(report["skipped"]) == 1


def test_all_vectors_unit_norm(image_dir, tmp_path):
    res = extract_collection(image_dir, "primary_vision", tmp_path / "out")
    M = read_emb(res.embedding_path)
    assert np.allclose(np.linalg.norm(M, axis=1), 1.0, atol=1e-5)
    for model in ("primary_vision", "vision_language"):
        v = embed_one("image_path", model, path=str(image_dir / "a.png"))
        assert v.size == model_dim(model)
        assert abs(np.linalg.norm(v) - 1.0) < 1e-5
    t = embed_text("a bright red boat")
    assert abs(np.linalg.norm(t) - 1.0) < 1e-5


def test_full_image_crop_equals_image_path(image_dir):
    p = str(image_dir / "a.png")
    direct = embed_one("image_path", "primary_vision", path=p)
    cropped = embed_one("crop", "primary_vision", path=p, rect=[0, 0, 48, 32])
    assert np.linalg.norm(direct - cropped) < 1e-5


def test_crop_from_bytes_matches_crop_from_path(image_dir):
    p = image_dir / "b.png"
    rect = [4, 4, 20, 16]
    from_path = embed_one("crop", "vision_language", path=str(p), rect=rect)
    from_bytes = embed_one("crop", "vision_language", data=p.read_bytes(), rect=rect)
    assert np.linalg.norm(from_path - from_bytes) < 1e-9


def test_crop_rect_out_of_bounds(image_dir):
    with pytest.raises(RectError):
        embed_one("crop", "primary_vision", path=str(image_dir / "a.png"), rect=[40, 0, 20, 20])
    with pytest.raises(RectError):
        embed_one("crop", "primary_vision", path=str(image_dir / "a.png"), rect=[0, 0, 0, 5])


def test_text_dimension_and_model_guard():
    v = embed_one("text", "vision_language", text="red sunset over water")
    assert v.size == model_dim("vision_language")
    with pytest.raises(EmbedderError):
        embed_one("text", "primary_vision", text="red")


def test_image_bytes_matches_path(image_dir):
    p = image_dir / "c.png"
    from_path = embed_one("image_path", "vision_language", path=str(p))
    from_bytes = embed_one("image_bytes", "vision_language", data=p.read_bytes())
    assert np.linalg.norm(from_path - from_bytes) < 1e-9


def test_text_color_matches_image(image_dir):
    reds = embed_one("image_path", "vision_language", path=str(image_dir / "a.png"))
    greens = embed_one("image_path", "vision_language", path=str(image_dir / "b.png"))
    q = embed_text("red")
    assert float(q @ reds) > float(q @ greens)
