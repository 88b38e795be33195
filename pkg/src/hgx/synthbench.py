"""Synthetic hypergraph generators, perturbations and the benchmark harness.

All randomness flows through numpy's PCG64 generators; benchmark repetitions
derive child seeds via ``SeedSequence.spawn`` so runs parallelize and
reproduce deterministically.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from .core import Hyperedge, Hypergraph
from .errors import ParameterError
from .simeval import ces, ces_weighted, hnmi, pairwise_similarity_matrix

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class GenSpec:
    model: str  # er | sf | ws
    n: int
    m: int
    k: int
    p_rw: float = 0.1
    seed: int = 0

    def validate(self) -> None:
        if self.model not in ("er", "sf", "ws"):
            raise ParameterError(f"unknown model {self.model!r}")
        if self.k > self.n or self.k < 1 or self.m < 1:
            raise ParameterError("need 1 <= k <= n and m >= 1")
        if not (0.0 <= self.p_rw <= 1.0):
            raise ParameterError("p_rw must be in [0, 1]")


def _mk(sets, n, prefix):
    return Hypergraph(
        [Hyperedge(id=j, members=frozenset(s), name=f"{prefix}-{j}") for j, s in enumerate(sets)],
        n,
    )


def gen_er(spec: GenSpec) -> Hypergraph:
    """m independent uniform k-subsets (duplicates allowed)."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    sets = [rng.choice(spec.n, size=spec.k, replace=False).tolist() for _ in range(spec.m)]
    return _mk(sets, spec.n, "er")


def gen_sf(spec: GenSpec) -> Hypergraph:
    """Preferential edges: vertices weighted 1/rank over current degree order."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    degree = np.zeros(spec.n, dtype=np.int64)
    sets = []
    for _ in range(spec.m):
        # rank 1 = highest current degree, ties by vertex index
        order = np.lexsort((np.arange(spec.n), -degree))
        weight = np.empty(spec.n)
        weight[order] = 1.0 / np.arange(1, spec.n + 1)
        weight /= weight.sum()
        picked = rng.choice(spec.n, size=spec.k, replace=False, p=weight)
        degree[picked] += 1
        sets.append(picked.tolist())
    return _mk(sets, spec.n, "sf")


def gen_ws(spec: GenSpec) -> Hypergraph:
    """Ring lattice of k consecutive vertices, each edge rewired with prob p_rw."""
    spec.validate()
    rng = np.random.default_rng(spec.seed)
    sets = []
    for j in range(spec.m):
        if rng.random() < spec.p_rw:
            sets.append(rng.choice(spec.n, size=spec.k, replace=False).tolist())
        else:
            start = (j * spec.n) // spec.m
            sets.append([(start + t) % spec.n for t in range(spec.k)])
    return _mk(sets, spec.n, "ws")


GENERATORS: dict[str, Callable[[GenSpec], Hypergraph]] = {
    "er": gen_er,
    "sf": gen_sf,
    "ws": gen_ws,
}


def generate(spec: GenSpec) -> Hypergraph:
    spec.validate()
    return GENERATORS[spec.model](spec)


def _select_edges(h: Hypergraph, fraction: float, rng, eligible: Sequence[int] | None):
    if not (0.0 <= fraction <= 1.0):
        raise ParameterError("fraction must be in [0, 1]")
    pool = list(range(h.m)) if eligible is None else list(eligible)
    count = int(np.floor(fraction * len(pool)))
    if count == 0:
        return []
    return sorted(rng.choice(len(pool), size=count, replace=False).tolist()) if eligible is None else [
        pool[i] for i in sorted(rng.choice(len(pool), size=count, replace=False).tolist())
    ]


def perturb_replace(
    h: Hypergraph, fraction: float, seed: int = 0, eligible: Sequence[int] | None = None
) -> Hypergraph:
    """Swap a fraction of edges for uniform random edges of the same size."""
    rng = np.random.default_rng(seed)
    chosen = set(_select_edges(h, fraction, rng, eligible))
    out = h.copy()
    for idx in sorted(chosen):
        e = out.edges[idx]
        members = frozenset(rng.choice(h.n, size=len(e), replace=False).tolist())
        out.edges[idx] = Hyperedge(e.id, members, e.name, e.status, e.origin, e.last_visited)
    return out


def perturb_rewire(
    h: Hypergraph, fraction: float, seed: int = 0, eligible: Sequence[int] | None = None
) -> Hypergraph:
    """Replace one random member per selected edge with an outside vertex."""
    rng = np.random.default_rng(seed)
    chosen = set(_select_edges(h, fraction, rng, eligible))
    out = h.copy()
    skipped = 0
    for idx in sorted(chosen):
        e = out.edges[idx]
        outside = sorted(set(range(h.n)) - e.members)
        if not outside:
            skipped += 1
            continue
        members = sorted(e.members)
        drop = members[int(rng.integers(len(members)))]
        add = outside[int(rng.integers(len(outside)))]
        new = (e.members - {drop}) | {add}
        out.edges[idx] = Hyperedge(e.id, frozenset(new), e.name, e.status, e.origin, e.last_visited)
    if skipped:
        log.warning("perturb_rewire skipped %d full edges (size == n)", skipped)
    return out


def perturb_oversegment(h: Hypergraph, r: int, seed: int = 0) -> Hypergraph:
    """Keep every edge and add r disjoint near-equal sub-edges per edge with |e| >= r."""
    if r < 1:
        raise ParameterError("r must be >= 1")
    if r == 1:
        return h.copy()
    rng = np.random.default_rng(seed)
    out = h.copy()
    next_id = max((e.id for e in out.edges), default=-1) + 1
    for e in list(h.edges):
        if len(e) < r:
            continue
        members = np.array(sorted(e.members))
        rng.shuffle(members)
        for part in np.array_split(members, r):
            out.edges.append(
                Hyperedge(id=next_id, members=frozenset(part.tolist()), name=f"{e.name}/part")
            )
            next_id += 1
    return out


def gen_imbalanced(n: int, m: int, seed: int = 0) -> Hypergraph:
    """m/2 edges of 100 random vertices and m/2 edges of 10 random vertices."""
    if n < 100:
        raise ParameterError("imbalanced generator needs n >= 100")
    if m % 2:
        raise ParameterError("m must be even")
    rng = np.random.default_rng(seed)
    sets = [rng.choice(n, size=100, replace=False).tolist() for _ in range(m // 2)]
    sets += [rng.choice(n, size=10, replace=False).tolist() for _ in range(m // 2)]
    return _mk(sets, n, "imb")


# ---------------------------------------------------------------------------
# benchmark harness

DEFAULT_LEVELS = [round(0.1 * i, 1) for i in range(11)]
DEFAULT_OVERSEG_LEVELS = [1, 2, 3, 4, 6, 8]

_MEASURES = {
    "ces": lambda gt, gen: ces(gt, gen).ces,
    "ces_weighted": lambda gt, gen: ces_weighted(gt, gen).ces,
    "hnmi": hnmi,
}


@dataclass(frozen=True)
class BenchConfig:
    kind: str  # replace | rewire | overseg | imbalanced_small | imbalanced_large
    levels: tuple = ()
    reps: int = 50
    n: int = 99
    m: int = 50
    k: int = 4
    seed: int = 0
    measures: tuple = ("ces", "ces_weighted", "hnmi")

    def resolved_levels(self):
        if self.levels:
            return list(self.levels)
        return DEFAULT_OVERSEG_LEVELS if self.kind == "overseg" else DEFAULT_LEVELS


@dataclass
class BenchResult:
    config: dict
    runs: list[dict] = field(default_factory=list)

    def mean(self, measure: str) -> dict[float, float]:
        out: dict[float, list[float]] = {}
        for r in self.runs:
            out.setdefault(r["level"], []).append(r[measure])
        return {lvl: float(np.mean(v)) for lvl, v in sorted(out.items())}

    def to_json(self) -> dict:
        return {"config": self.config, "runs": self.runs}

    def write(self, out_dir) -> None:
        out_dir = Path(out_dir)
        out_dir.mkdir(parents=True, exist_ok=True)
        with open(out_dir / "bench.json", "w", encoding="utf-8") as fh:
            json.dump(self.to_json(), fh, indent=1)
        with open(out_dir / "bench.csv", "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["kind", "level", "rep", "measure", "value"])
            for r in self.runs:
                for m in self.config["measures"]:
                    w.writerow([self.config["kind"], r["level"], r["rep"], m, repr(r[m])])


def _perturbed(kind: str, gt: Hypergraph, level, seed: int) -> Hypergraph:
    if kind == "replace":
        return perturb_replace(gt, level, seed)
    if kind == "rewire":
        return perturb_rewire(gt, level, seed)
    if kind == "overseg":
        return perturb_oversegment(gt, int(level), seed)
    if kind in ("imbalanced_small", "imbalanced_large"):
        want_small = kind.endswith("small")
        eligible = [i for i, e in enumerate(gt.edges) if (len(e) == 10) == want_small]
        return perturb_replace(gt, level, seed, eligible=eligible)
    raise ParameterError(f"unknown perturbation kind {kind!r}")


def run_perturbation_bench(config: BenchConfig) -> BenchResult:
    levels = config.resolved_levels()
    result = BenchResult(
        config={
            "kind": config.kind,
            "levels": levels,
            "reps": config.reps,
            "n": config.n,
            "m": config.m,
            "k": config.k,
            "seed": config.seed,
            "measures": list(config.measures),
        }
    )
    root = np.random.SeedSequence(config.seed)
    rep_seeds = root.spawn(config.reps)
    for rep, rep_seed in enumerate(rep_seeds):
        gen_seed, perturb_seed = [int(s.generate_state(1)[0]) for s in rep_seed.spawn(2)]
        if config.kind.startswith("imbalanced"):
            gt = gen_imbalanced(config.n, config.m, seed=gen_seed)
        else:
            gt = gen_er(GenSpec("er", config.n, config.m, config.k, seed=gen_seed))
        for li, level in enumerate(levels):
            perturbed = _perturbed(config.kind, gt, level, perturb_seed + li)
            row = {"level": level, "rep": rep, "seed": gen_seed}
            for m in config.measures:
                row[m] = float(_MEASURES[m](gt, perturbed))
            result.runs.append(row)
    return result


@dataclass(frozen=True)
class RocConfig:
    per_model: int = 25
    n: int = 40
    m: int = 50
    k: int = 5
    p_rw: float = 0.1
    seed: int = 0
    measures: tuple = ("ces_sym", "hnmi")


def roc_curve_points(scores: np.ndarray, labels: np.ndarray):
    """Threshold sweep over the observed scores; returns (fpr, tpr) arrays."""
    order = np.argsort(-scores, kind="stable")
    labels = labels[order].astype(bool)
    tp = np.concatenate([[0], np.cumsum(labels)])
    fp = np.concatenate([[0], np.cumsum(~labels)])
    tpr = tp / max(tp[-1], 1)
    fpr = fp / max(fp[-1], 1)
    return fpr, tpr


def auc_score(scores: np.ndarray, labels: np.ndarray) -> float:
    """Rank-based (Mann-Whitney) AUC with tie correction."""
    labels = labels.astype(bool)
    n_pos, n_neg = int(labels.sum()), int((~labels).sum())
    if n_pos == 0 or n_neg == 0:
        raise ParameterError("AUC needs both classes")
    from scipy.stats import rankdata

    ranks = rankdata(scores)
    return float((ranks[labels].sum() - n_pos * (n_pos + 1) / 2) / (n_pos * n_neg))


def run_roc_bench(config: RocConfig) -> dict:
    """Generator-separation study: pairwise similarities -> ROC/AUC."""
    root = np.random.SeedSequence(config.seed)
    graphs, model_of = [], []
    for model in ("er", "sf", "ws"):
        for seed_seq in root.spawn(config.per_model):
            spec = GenSpec(
                model, config.n, config.m, config.k, p_rw=config.p_rw,
                seed=int(seed_seq.generate_state(1)[0]),
            )
            graphs.append(generate(spec))
            model_of.append(model)
    model_of = np.array(model_of)
    iu = np.triu_indices(len(graphs), k=1)
    same = (model_of[iu[0]] == model_of[iu[1]]).astype(int)
    out = {"config": config.__dict__ | {}, "labels": same.tolist(), "measures": {}}
    for measure in config.measures:
        M = pairwise_similarity_matrix(graphs, measure)
        scores = M[iu]
        fpr, tpr = roc_curve_points(scores, same)
        out["measures"][measure] = {
            "matrix": M.tolist(),
            "scores": scores.tolist(),
            "auc": auc_score(scores, same),
            "roc": {"fpr": fpr.tolist(), "tpr": tpr.tolist()},
        }
    return out


def roc_projection_coords(matrix: np.ndarray, seed: int = 0) -> np.ndarray:
    """2D projection of the similarity-matrix rows for the constructor scatter."""
    from .layout import neighbor_projection

    return neighbor_projection(np.asarray(matrix), seed=seed)


def write_roc_csv(result: dict, path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        w = csv.writer(fh)
        w.writerow(["measure", "fpr", "tpr", "auc"])
        for measure, data in result["measures"].items():
            for f, t in zip(data["roc"]["fpr"], data["roc"]["tpr"]):
                w.writerow([measure, repr(f), repr(t), repr(data["auc"])])
