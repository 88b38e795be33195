"""Deterministic feature extractors.

Two embedding spaces are exposed behind a stable interface:

- ``primary_vision``: a spatially aware descriptor (per-cell color moments and
  gradient energy over a 4x4 grid) used for hypergraph construction.
- ``vision_language``: a joint image/text space built on a coarse RGB color
  histogram; text is mapped into the same space through a small color-word
  vocabulary plus hashed character trigrams, so text-to-image retrieval works
  on color vocabulary out of the box.

Both extractors are pure functions of the pixel/text content: no model
download, no randomness, byte-identical output across reruns.
"""

from __future__ import annotations

import hashlib
import re

import numpy as np
from PIL import Image

GRID = 4
GRAY_BINS = 6
PRIMARY_VISION_DIM = GRID * GRID * (3 + GRAY_BINS + 1)  # 160

RGB_BINS = 4  # per channel -> 64 color bins
VL_TEXTURE_BINS = 16
VISION_LANGUAGE_DIM = RGB_BINS**3 + VL_TEXTURE_BINS  # 80

MODELS = ("primary_vision", "vision_language")

_WORD = re.compile(r"[a-z]+")

# color vocabulary anchored at RGB coordinates; each word spreads its mass
# over the histogram bins nearest its anchor
_COLOR_WORDS = {
    "black": (0, 0, 0),
    "white": (255, 255, 255),
    "gray": (128, 128, 128),
    "grey": (128, 128, 128),
    "red": (220, 40, 40),
    "green": (40, 200, 40),
    "blue": (40, 40, 220),
    "yellow": (230, 230, 40),
    "orange": (240, 150, 40),
    "purple": (150, 40, 200),
    "magenta": (230, 40, 230),
    "pink": (250, 160, 200),
    "cyan": (40, 220, 220),
    "brown": (140, 90, 40),
    "dark": (40, 40, 40),
    "bright": (230, 230, 230),
}


def model_dim(model: str) -> int:
    if model == "primary_vision":
        return PRIMARY_VISION_DIM
    if model == "vision_language":
        return VISION_LANGUAGE_DIM
    raise KeyError(model)


def _unit(v: np.ndarray) -> np.ndarray:
    v = np.asarray(v, dtype=np.float64)
    norm = np.linalg.norm(v)
    if norm == 0:
        # blank content still needs a direction; use a fixed basis vector
        v = v.copy()
        v[0] = 1.0
        norm = 1.0
    return v / norm


def _to_array(image: Image.Image, side: int = 64) -> np.ndarray:
    im = image.convert("RGB").resize((side, side), Image.BILINEAR)
    return np.asarray(im, dtype=np.float64) / 255.0


def embed_image_primary(image: Image.Image) -> np.ndarray:
    px = _to_array(image)
    gray = px.mean(axis=2)
    gy, gx = np.gradient(gray)
    energy = np.hypot(gx, gy)
    cell = px.shape[0] // GRID
    feats = []
    for r in range(GRID):
        for c in range(GRID):
            sl = np.s_[r * cell : (r + 1) * cell, c * cell : (c + 1) * cell]
            feats.extend(px[sl].reshape(-1, 3).mean(axis=0))
            hist, _ = np.histogram(gray[sl], bins=GRAY_BINS, range=(0.0, 1.0))
            feats.extend(hist / hist.sum())
            feats.append(energy[sl].mean())
    return _unit(np.array(feats))


def _color_histogram(px: np.ndarray) -> np.ndarray:
    idx = np.minimum((px * RGB_BINS).astype(int), RGB_BINS - 1)
    flat = (idx[..., 0] * RGB_BINS + idx[..., 1]) * RGB_BINS + idx[..., 2]
    hist = np.bincount(flat.ravel(), minlength=RGB_BINS**3).astype(np.float64)
    return hist / hist.sum()


def embed_image_vl(image: Image.Image) -> np.ndarray:
    px = _to_array(image)
    gray = px.mean(axis=2)
    gy, gx = np.gradient(gray)
    tex, _ = np.histogram(np.hypot(gx, gy), bins=VL_TEXTURE_BINS, range=(0.0, 1.0))
    tex = tex / max(tex.sum(), 1)
    # texture half-weighted so color dominates cross-modal matching
    return _unit(np.concatenate([_color_histogram(px), 0.5 * tex]))


def _word_vector(word: str) -> np.ndarray:
    v = np.zeros(VISION_LANGUAGE_DIM)
    if word in _COLOR_WORDS:
        r, g, b = (min(int(c / 256 * RGB_BINS), RGB_BINS - 1) for c in _COLOR_WORDS[word])
        v[(r * RGB_BINS + g) * RGB_BINS + b] = 1.0
        return v
    for i in range(len(word) - 2):
        tri = word[i : i + 3]
        digest = hashlib.sha256(tri.encode()).digest()
        v[int.from_bytes(digest[:4], "little") % VISION_LANGUAGE_DIM] += 0.1
    return v


def embed_text(text: str) -> np.ndarray:
    words = _WORD.findall(text.lower())
    v = np.zeros(VISION_LANGUAGE_DIM)
    for w in words:
        v += _word_vector(w)
    return _unit(v)


def embed_image(image: Image.Image, model: str) -> np.ndarray:
    if model == "primary_vision":
        return embed_image_primary(image)
    if model == "vision_language":
        return embed_image_vl(image)
    raise KeyError(model)
