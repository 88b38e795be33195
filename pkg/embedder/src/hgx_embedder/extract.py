"""Collection extraction: directory of images -> embedding file + manifest.

Output formats are the engine's external interfaces: an "HGEMB1" binary matrix
(little-endian header ``n, d`` then float32 rows) and a manifest JSON whose
row order matches the matrix.  Undecodable files are skipped and reported, not
fatal.  Reruns over the same inputs are byte-identical.
"""

from __future__ import annotations

import io
import json
import struct
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from PIL import Image
from PIL.ExifTags import TAGS

from .features import embed_image, model_dim

EMBEDDING_MAGIC = b"HGEMB1"
IMAGE_SUFFIXES = {".png", ".jpg", ".jpeg", ".gif", ".bmp", ".webp", ".tif", ".tiff"}


class EmbedderError(Exception):
    pass


class UnknownModelError(EmbedderError):
    pass


class RectError(EmbedderError):
    pass


def check_model(model: str) -> None:
    try:
        model_dim(model)
    except KeyError:
        raise UnknownModelError(f"unknown model {model!r}") from None


def write_embedding_file(matrix: np.ndarray, path) -> None:
    matrix = np.asarray(matrix, dtype=np.float64)
    with open(path, "wb") as fh:
        fh.write(EMBEDDING_MAGIC)
        fh.write(struct.pack("<II", matrix.shape[0], matrix.shape[1]))
        fh.write(matrix.astype("<f4").tobytes())


def exif_metadata(image: Image.Image) -> dict:
    meta: dict[str, object] = {"width": image.width, "height": image.height}
    try:
        exif = image.getexif()
    except Exception:
        return meta
    for tag_id, value in exif.items():
        name = TAGS.get(tag_id, str(tag_id))
        if isinstance(value, bytes):
            continue
        if isinstance(value, (int, float, str)):
            meta[name] = value
        else:
            meta[name] = str(value)
    return meta


def open_image(source: str | bytes) -> Image.Image:
    if isinstance(source, bytes):
        im = Image.open(io.BytesIO(source))
    else:
        im = Image.open(source)
    im.load()
    return im


def crop_rect(image: Image.Image, rect) -> Image.Image:
    x, y, w, h = (int(v) for v in rect)
    if w <= 0 or h <= 0 or x < 0 or y < 0 or x + w > image.width or y + h > image.height:
        raise RectError(
            f"rect {list(rect)} outside image bounds {image.width}x{image.height}"
        )
    return image.crop((x, y, x + w, y + h))


@dataclass
class ExtractResult:
    embedding_path: str
    manifest_path: str
    n: int
    skipped: list[dict] = field(default_factory=list)


def extract_collection(image_dir, model: str, out_prefix) -> ExtractResult:
    """Embed every decodable image under ``image_dir`` (sorted, recursive).

    Writes ``<out_prefix>.emb`` (HGEMB1), ``<out_prefix>.manifest.json`` and
    ``<out_prefix>.report.json``; a ``<out_prefix>.progress.json`` file tracks
    the sequential job.
    """
    check_model(model)
    image_dir = Path(image_dir)
    if not image_dir.is_dir():
        raise EmbedderError(f"not a directory: {image_dir}")
    paths = sorted(
        p for p in image_dir.rglob("*") if p.suffix.lower() in IMAGE_SUFFIXES and p.is_file()
    )
    out_prefix = str(out_prefix)
    progress_path = Path(out_prefix + ".progress.json")

    rows, records, skipped = [], [], []
    for i, p in enumerate(paths):
        progress_path.write_text(
            json.dumps({"done": i, "total": len(paths), "current": str(p)})
        )
        try:
            with open_image(str(p)) as im:
                meta = exif_metadata(im)
                rows.append(embed_image(im, model))
        except (OSError, SyntaxError) as exc:
            skipped.append({"path": str(p), "reason": str(exc)})
            continue
        records.append({"id": len(records), "path": str(p), "metadata": meta})
    progress_path.write_text(json.dumps({"done": len(paths), "total": len(paths)}))

    matrix = np.vstack(rows) if rows else np.zeros((0, model_dim(model)))
    emb_path = out_prefix + ".emb"
    man_path = out_prefix + ".manifest.json"
    write_embedding_file(matrix, emb_path)
    with open(man_path, "w", encoding="utf-8") as fh:
        json.dump({"images": records}, fh, indent=1, sort_keys=True)
    with open(out_prefix + ".report.json", "w", encoding="utf-8") as fh:
        json.dump({"model": model, "embedded": len(records), "skipped": skipped}, fh, indent=1)
    return ExtractResult(emb_path, man_path, len(records), skipped)


def embed_one(
    kind: str,
    model: str,
    path: str | None = None,
    data: bytes | None = None,
    rect=None,
    text: str | None = None,
) -> np.ndarray:
    """Single query vector for an image, raw bytes, crop, or text request."""
    check_model(model)
    if kind == "text":
        if model != "vision_language":
            raise EmbedderError("text requests require the vision_language model")
        if text is None:
            raise EmbedderError("text request needs 'text'")
        from .features import embed_text

        return embed_text(text)
    if kind == "image_path":
        if path is None:
            raise EmbedderError("image_path request needs 'path'")
        with open_image(path) as im:
            return embed_image(im, model)
    if kind == "image_bytes":
        if data is None:
            raise EmbedderError("image_bytes request needs image data")
        with open_image(data) as im:
            return embed_image(im, model)
    if kind == "crop":
        source = path if path is not None else data
        if source is None or rect is None:
            raise EmbedderError("crop request needs 'path' or image bytes, and 'rect'")
        with open_image(source) as im:
            return embed_image(crop_rect(im, rect), model)
    raise EmbedderError(f"unknown request kind {kind!r}")
