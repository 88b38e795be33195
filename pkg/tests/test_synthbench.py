import numpy as np
import pytest
from scipy.stats import spearmanr

from hgx.core import Hypergraph
from hgx.errors import ParameterError
from hgx.simeval import ces, hnmi
from hgx.synthbench import (
    BenchConfig,
    GenSpec,
    RocConfig,
    auc_score,
    gen_er,
    gen_imbalanced,
    gen_sf,
    gen_ws,
    perturb_oversegment,
    perturb_replace,
    perturb_rewire,
    roc_curve_points,
    run_perturbation_bench,
    run_roc_bench,
)


def degrees(h):
    return h.incidence().sum(axis=1)


def edge_size_multiset(h):
    return sorted(len(e) for e in h.edges)


# --- generators -----------------------------------------------------------


def test_er_single_possible_subset():
    g = gen_er(GenSpec("er", 4, 3, 4, seed=0))
    assert all(e.members == frozenset(range(4)) for e in g.edges)


def test_er_deterministic():
    a = gen_er(GenSpec("er", 99, 50, 4, seed=5))
    b = gen_er(GenSpec("er", 99, 50, 4, seed=5))
    assert a == b


def test_er_narrower_degree_spread_than_sf():
    ratios = []
    for seed in range(10):
        er = degrees(gen_er(GenSpec("er", 99, 50, 4, seed=seed)))
        sf = degrees(gen_sf(GenSpec("sf", 99, 50, 4, seed=seed)))
        ratios.append((er.std() / er.mean(), sf.std() / sf.mean()))
    assert np.mean([e for e, _ in ratios]) < np.mean([s for _, s in ratios])


def test_sf_first_edge_valid_and_hubs_emerge():
    wins = 0
    for seed in range(100):
        er = degrees(gen_er(GenSpec("er", 99, 50, 4, seed=seed))).max()
        sf = degrees(gen_sf(GenSpec("sf", 99, 50, 4, seed=seed))).max()
        wins += sf > er
    assert wins >= 90


def test_sf_deterministic():
    a = gen_sf(GenSpec("sf", 50, 20, 3, seed=1))
    assert a == gen_sf(GenSpec("sf", 50, 20, 3, seed=1))
    assert all(len(e) == 3 for e in a.edges)


def test_ws_ring_lattice():
    g = gen_ws(GenSpec("ws", 20, 5, 4, p_rw=0.0, seed=0))
    for j, e in enumerate(g.edges):
        start = (j * 20) // 5
        assert e.members == frozenset((start + t) % 20 for t in range(4))


def test_ws_full_rewire_matches_er_spread():
    ws_spread = [degrees(gen_ws(GenSpec("ws", 99, 50, 4, p_rw=1.0, seed=s))).std() for s in range(50)]
    er_spread = [degrees(gen_er(GenSpec("er", 99, 50, 4, seed=s + 1000))).std() for s in range(50)]
    assert abs(np.mean(ws_spread) - np.mean(er_spread)) < 0.1


def test_ws_deterministic():
    assert gen_ws(GenSpec("ws", 30, 10, 3, p_rw=0.5, seed=3)) == gen_ws(
        GenSpec("ws", 30, 10, 3, p_rw=0.5, seed=3)
    )


def test_generator_param_errors():
    with pytest.raises(ParameterError):
        gen_er(GenSpec("er", 3, 2, 5, seed=0))
    with pytest.raises(ParameterError):
        GenSpec("bogus", 5, 2, 2).validate()


# --- perturbations --------------------------------------------------------


@pytest.fixture
def base():
    return gen_er(GenSpec("er", 99, 50, 4, seed=7))


def test_replace_identity_at_zero(base):
    assert perturb_replace(base, 0.0, seed=1) == base


def test_replace_full_destroys_similarity(base):
    out = perturb_replace(base, 1.0, seed=2)
    assert hnmi(base, out) < 0.1


def test_replace_preserves_size_multiset(base):
    for frac in (0.2, 0.5, 0.9):
        out = perturb_replace(base, frac, seed=3)
        assert edge_size_multiset(out) == edge_size_multiset(base)
        assert out.m == base.m


def test_rewire_identity_and_single_swap(base):
    assert perturb_rewire(base, 0.0, seed=0) == base
    out = perturb_rewire(base, 0.6, seed=4)
    changed = 0
    for a, b in zip(base.edges, out.edges):
        assert len(a) == len(b)
        if a.members != b.members:
            assert len(a.members & b.members) == len(a) - 1
            changed += 1
    assert changed == int(0.6 * base.m)


def test_rewire_monotone_hnmi(base):
    levels = [round(0.1 * i, 1) for i in range(11)]
    means = []
    for p in levels:
        vals = [hnmi(base, perturb_rewire(base, p, seed=s)) for s in range(10)]
        means.append(np.mean(vals))
    rho, _ = spearmanr(levels, means)
    assert rho <= -0.95


def test_overseg_identity_and_structure():
    g = Hypergraph.from_member_sets([{1, 2, 3, 4}, {0, 5}], 6)
    assert perturb_oversegment(g, 1) == g
    out = perturb_oversegment(g, 2, seed=0)
    # both originals kept, r sub-edges per edge with |e| >= r
    assert out.m == 2 + 2 + 2
    subs = [e.members for e in out.edges[2:4]]
    assert subs[0] | subs[1] == {1, 2, 3, 4} and not subs[0] & subs[1]
    assert {len(s) for s in subs} == {2}


def test_overseg_small_edges_unchanged():
    g = Hypergraph.from_member_sets([{0, 1}], 4)
    out = perturb_oversegment(g, 3, seed=0)
    assert out.m == 1


def test_overseg_edge_count_invariant(base):
    for r in (2, 3, 4):
        out = perturb_oversegment(base, r, seed=1)
        expected = base.m + sum(r for e in base.edges if len(e) >= r)
        assert out.m == expected


def test_overseg_ces_penalty(base):
    scores = [ces(base, perturb_oversegment(base, r, seed=2)).ces for r in (1, 2, 4)]
    assert scores[0] > scores[1] > scores[2]


def test_imbalanced_histogram_and_determinism():
    g = gen_imbalanced(200, 20, seed=0)
    sizes = edge_size_multiset(g)
    assert sizes.count(100) == 10 and sizes.count(10) == 10
    assert g == gen_imbalanced(200, 20, seed=0)
    with pytest.raises(ParameterError):
        gen_imbalanced(50, 4)


# --- benchmark harness ----------------------------------------------------


def test_bench_level_zero_scores_one():
    cfg = BenchConfig(kind="replace", levels=(0.0,), reps=3)
    res = run_perturbation_bench(cfg)
    for r in res.runs:
        assert r["ces"] == 1.0 and r["hnmi"] >= 1 - 1e-9


def test_bench_reproducible_and_writable(tmp_path):
    cfg = BenchConfig(kind="replace", levels=(0.0, 0.5), reps=2, seed=9)
    a = run_perturbation_bench(cfg)
    b = run_perturbation_bench(cfg)
    assert a.runs == b.runs
    a.write(tmp_path)
    assert (tmp_path / "bench.csv").exists() and (tmp_path / "bench.json").exists()
    assert (tmp_path / "bench.csv").read_bytes() == (
        lambda: (a.write(tmp_path), (tmp_path / "bench.csv").read_bytes())
    )()[1]


def test_bench_replace_tracks_one_minus_p_small():
    cfg = BenchConfig(kind="replace", levels=(0.0, 0.3, 0.7, 1.0), reps=8, seed=1)
    res = run_perturbation_bench(cfg)
    for level, mean in res.mean("hnmi").items():
        assert abs(mean - (1 - level)) < 0.08


def test_roc_helpers():
    scores = np.array([0.9, 0.8, 0.2, 0.1])
    labels = np.array([1, 1, 0, 0])
    assert auc_score(scores, labels) == 1.0
    fpr, tpr = roc_curve_points(scores, labels)
    assert fpr[-1] == 1.0 and tpr[-1] == 1.0
    rng = np.random.default_rng(0)
    s = rng.uniform(size=4000)
    l = rng.integers(0, 2, size=4000)
    assert abs(auc_score(s, l) - 0.5) < 0.05


def test_roc_bench_small_scale():
    res = run_roc_bench(RocConfig(per_model=4, n=30, m=20, k=4, seed=2))
    for measure in ("ces_sym", "hnmi"):
        data = res["measures"][measure]
        assert 0.5 < data["auc"] <= 1.0
        assert len(data["scores"]) == (12 * 11) // 2
