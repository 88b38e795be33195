"""Command line entry points for the embedding sidecar."""

from __future__ import annotations

import sys

import click

from .extract import EmbedderError, extract_collection


@click.group()
def main():
    """Embedding sidecar: batch extraction and the /embed service."""


@main.command()
@click.option("--dir", "image_dir", required=True, type=click.Path(exists=True, file_okay=False))
@click.option(
    "--model",
    default="primary_vision",
    type=click.Choice(["primary_vision", "vision_language"]),
)
@click.option("--out", "out_prefix", required=True)
def extract(image_dir, model, out_prefix):
    """Embed every image under --dir into <out>.emb + <out>.manifest.json."""
    try:
        res = extract_collection(image_dir, model, out_prefix)
    except EmbedderError as exc:
        click.echo(str(exc), err=True)
        sys.exit(1)
    click.echo(f"embedded {res.n} images -> {res.embedding_path}")
    if res.skipped:
        click.echo(f"skipped {len(res.skipped)} undecodable file(s); see report")


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", default=8100, type=int)
def serve(host, port):
    """Serve POST /embed."""
    import uvicorn

    from .api import create_app

    uvicorn.run(create_app(), host=host, port=port)
