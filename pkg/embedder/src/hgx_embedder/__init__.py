"""Embedding sidecar: collection extraction and live query vectors."""

from .extract import (
    EmbedderError,
    ExtractResult,
    RectError,
    UnknownModelError,
    embed_one,
    extract_collection,
    write_embedding_file,
)
from .features import MODELS, model_dim

__all__ = [
    "EmbedderError",
    "ExtractResult",
    "MODELS",
    "RectError",
    "UnknownModelError",
    "embed_one",
    "extract_collection",
    "model_dim",
    "write_embedding_file",
]

__version__ = "0.1.0"
