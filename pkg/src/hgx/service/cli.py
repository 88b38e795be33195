"""Command-line entry point.

Exit codes: 0 success, 1 domain error (bad data, missing ids, conflicts),
2 usage error (click's default for bad flags/arguments).
"""

from __future__ import annotations

import csv
import json
import sys

import click

from ..construct import FcmParams, ThresholdPolicy, fcm_fit, multi_granularity_kmeans, pcm_fit, threshold_membership
from ..core import EmbeddingMatrix, Hypergraph
from ..errors import HgxError
from ..layout import compute_layout
from ..simeval import ces, ces_weighted, hnmi
from ..synthbench import BenchConfig, RocConfig, run_perturbation_bench, run_roc_bench, write_roc_csv


def _run(fn):
    try:
        fn()
    except HgxError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(1)


@click.group()
def main():
    """Hypergraph construction, evaluation, benchmarking, layout, and serving."""


@main.command()
@click.option("--embeddings", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--method", type=click.Choice(["fcm", "pcm", "mgk"]), default="fcm")
@click.option("--k", default=16, show_default=True, help="cluster count (fcm/pcm)")
@click.option("--k-list", default="16,64,256", show_default=True, help="granularities (mgk)")
@click.option("--fuzzifier", "-f", default=1.05, show_default=True)
@click.option("--threshold", "-t", default=0.5, show_default=True)
@click.option("--min-edge-size", default=1, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def construct(emb_path, method, k, k_list, fuzzifier, threshold, min_edge_size, seed, out):
    """Build a hypergraph from an embedding file and write it as JSON."""

    def go():
        emb = EmbeddingMatrix.load(emb_path)
        if method == "mgk":
            ks = [int(x) for x in k_list.split(",") if x]
            graph = multi_granularity_kmeans(emb, ks, seed=seed)
        else:
            fit = fcm_fit if method == "fcm" else pcm_fit
            soft = fit(emb, FcmParams(k=k, f=fuzzifier, seed=seed))
            graph = threshold_membership(
                soft, ThresholdPolicy(t=threshold, min_edge_size=min_edge_size)
            )
        graph.save(out)
        click.echo(f"wrote {graph.m} edges over {graph.n} images to {out}")

    _run(go)


@main.command("eval")
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--gen", "gen_path", required=True, type=click.Path(exists=True))
@click.option("--out", type=click.Path(), default=None)
def eval_cmd(gt_path, gen_path, out):
    """Score a generated hypergraph against ground truth (CES and hNMI)."""

    def go():
        gt = Hypergraph.load(gt_path)
        gen = Hypergraph.load(gen_path)
        report = ces(gt, gen).to_json()
        report["ces_weighted"] = ces_weighted(gt, gen).ces
        report["hnmi"] = hnmi(gt, gen)
        text = json.dumps(report, indent=1)
        if out:
            with open(out, "w", encoding="utf-8") as fh:
                fh.write(text)
        click.echo(text)

    _run(go)


@main.command()
@click.argument("kind", type=click.Choice(["replace", "rewire", "overseg", "imbalanced_small", "imbalanced_large", "roc"]))
@click.option("--reps", default=50, show_default=True)
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def synthbench(kind, reps, seed, out):
    """Run a synthetic benchmark and write bench.json/bench.csv (or roc.csv)."""

    def go():
        import os

        if kind == "roc":
            result = run_roc_bench(RocConfig(seed=seed))
            os.makedirs(out, exist_ok=True)
            with open(os.path.join(out, "roc.json"), "w", encoding="utf-8") as fh:
                json.dump(
                    {m: {"auc": result["measures"][m]["auc"]} for m in result["measures"]},
                    fh,
                    indent=1,
                )
            write_roc_csv(result, os.path.join(out, "roc.csv"))
        else:
            result = run_perturbation_bench(BenchConfig(kind=kind, reps=reps, seed=seed))
            result.write(out)
        click.echo(f"wrote benchmark results to {out}")

    _run(go)


@main.command()
@click.option("--graph", "graph_path", required=True, type=click.Path(exists=True))
@click.option("--embeddings", "emb_path", required=True, type=click.Path(exists=True))
@click.option("--seed", default=0, show_default=True)
@click.option("--out", required=True, type=click.Path())
def layout(graph_path, emb_path, seed, out):
    """Compute 2D node positions for a hypergraph and write them as JSON."""

    def go():
        graph = Hypergraph.load(graph_path)
        emb = EmbeddingMatrix.load(emb_path)
        result = compute_layout(graph, emb, seed=seed)
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(result.to_json(), fh)
        click.echo(f"wrote layout for {len(result.edge_nodes)} edges to {out}")

    _run(go)


@main.command()
@click.option("--session", "session_path", required=True, type=click.Path(exists=True))
@click.option("--port", default=8000, show_default=True)
@click.option("--host", default="127.0.0.1", show_default=True)
def serve(session_path, port, host):
    """Serve the HTTP API for a saved session."""

    def go():
        import uvicorn

        from .api import create_app
        from .session import load_session

        app = create_app(load_session(session_path))
        uvicorn.run(app, host=host, port=port)

    _run(go)


@main.group()
def export():
    """Export session or benchmark artifacts to portable files."""


@export.command("hypergraph")
@click.option("--session", "session_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def export_hypergraph(session_path, out):
    """Write the live hypergraph of a saved session as JSON."""

    def go():
        from .session import load_session

        load_session(session_path).hypergraph.save(out)
        click.echo(f"wrote {out}")

    _run(go)


@export.command("report")
@click.option("--gt", "gt_path", required=True, type=click.Path(exists=True))
@click.option("--gen", "gen_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def export_report(gt_path, gen_path, out):
    """Write a CES/hNMI evaluation report as JSON."""

    def go():
        gt = Hypergraph.load(gt_path)
        gen = Hypergraph.load(gen_path)
        report = ces(gt, gen).to_json()
        report["ces_weighted"] = ces_weighted(gt, gen).ces
        report["hnmi"] = hnmi(gt, gen)
        with open(out, "w", encoding="utf-8") as fh:
            json.dump(report, fh, indent=1)
        click.echo(f"wrote {out}")

    _run(go)


@export.command("csv")
@click.option("--bench", "bench_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path())
def export_csv(bench_path, out):
    """Flatten a bench.json file into long-format CSV."""

    def go():
        with open(bench_path, encoding="utf-8") as fh:
            doc = json.load(fh)
        with open(out, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "level", "rep", "measure", "value"])
            for r in doc["runs"]:
                for m in doc["config"]["measures"]:
                    w.writerow([doc["config"]["kind"], r["level"], r["rep"], m, repr(r[m])])
        click.echo(f"wrote {out}")

    _run(go)


if __name__ == "__main__":
    main()
