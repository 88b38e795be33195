"""hgx: hypergraph construction, evaluation and exploration for image collections."""

from .core import (
    EmbeddingMatrix,
    Hyperedge,
    Hypergraph,
    ImageManifest,
    ImageRecord,
    SoftMembership,
    edge_centroid,
    edge_dispersion,
    harmonic_overlap,
    intersection_size,
    sim_edges,
    sim_images,
)

__all__ = [
    "EmbeddingMatrix",
    "Hyperedge",
    "Hypergraph",
    "ImageManifest",
    "ImageRecord",
    "SoftMembership",
    "edge_centroid",
    "edge_dispersion",
    "harmonic_overlap",
    "intersection_size",
    "sim_edges",
    "sim_images",
]

__version__ = "0.1.0"
