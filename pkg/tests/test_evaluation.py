import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causeway.evaluation import METRICS, SweepCell, score_graphs, sweep, truth_pattern
from causeway.exceptions import ValidationError
from causeway.graph import PartialDAG
from causeway.pc import PriorKnowledge
from causeway.synth import random_dag, random_gaussian_bn

from oracles import brute_force_counts, random_mixed_graph


def expected_report(c):
    def ratio(a, b):
        return a / b if b else None

    return (ratio(c["matched_undirected"], c["learned_edges"]),
            ratio(c["matched_undirected"], c["true_edges"]),
            ratio(c["matched_oriented"], c["learned_oriented"]),
            ratio(c["matched_oriented"], c["true_oriented"]))


def test_identity_all_ones():
    g = PartialDAG.from_edges(3, directed=[(0, 1), (1, 2)])
    r = score_graphs(g, g)
    assert [r.metric(m) for m in METRICS] == [1.0] * 4


def test_extra_edge_precision_two_thirds():
    truth = PartialDAG.from_edges(3, undirected=[(0, 1), (1, 2)])
    learned = PartialDAG.from_edges(3, undirected=[(0, 1), (1, 2), (0, 2)])
    r = score_graphs(learned, truth)
    assert r.undirected_precision == 2 / 3 and r.undirected_recall == 1.0


def test_half_directions_right():
    truth = PartialDAG.from_edges(3, directed=[(0, 1), (1, 2)])
    learned = PartialDAG.from_edges(3, directed=[(0, 1), (2, 1)])
    r = score_graphs(learned, truth)
    assert r.directed_precision == 0.5 and r.directed_recall == 0.5


def test_undefined_metrics_are_none():
    truth = PartialDAG.from_edges(3, undirected=[(0, 1)])
    r = score_graphs(PartialDAG(3), truth)
    assert r.undirected_precision is None and r.undirected_recall == 0.0
    assert r.directed_precision is None and r.directed_recall is None


def test_node_mismatch():
    with pytest.raises(ValidationError):
        score_graphs(PartialDAG(2), PartialDAG(3))


def test_brute_force_random_pairs(rng):
    for _ in range(200):
        n = int(rng.integers(2, 21))
        learned, truth = random_mixed_graph(rng, n), random_mixed_graph(rng, n)
        c = brute_force_counts(learned, truth)
        r = score_graphs(learned, truth)
        assert {k: getattr(r, k) for k in c} == c
        assert (r.undirected_precision, r.undirected_recall,
                r.directed_precision, r.directed_recall) == expected_report(c)


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 2**32 - 1))
def test_self_score_and_edge_monotonicity(seed):
    r = np.random.default_rng(seed)
    n = int(r.integers(3, 12))
    truth = random_mixed_graph(r, n)
    rep = score_graphs(truth, truth)
    assert all(v in (None, 1.0) for v in (rep.metric(m) for m in METRICS))
    learned = random_mixed_graph(r, n)
    base = score_graphs(learned, truth)
    assert base.matched_undirected <= min(base.learned_edges, base.true_edges)
    assert base.matched_oriented <= min(base.learned_oriented, base.true_oriented)
    # drop a correct edge: recall never rises
    shared = sorted(learned.skeleton() & truth.skeleton())
    if shared:
        fewer = learned.copy()
        fewer.remove_edge(*shared[0])
        assert score_graphs(fewer, truth).undirected_recall <= base.undirected_recall
    # add a spurious edge: precision never rises
    missing = [(i, j) for i in range(n) for j in range(i + 1, n)
               if not learned.is_adjacent(i, j) and not truth.is_adjacent(i, j)]
    if missing:
        more = learned.copy()
        more.add_edge(*missing[0])
        after = score_graphs(more, truth).undirected_precision
        assert base.undirected_precision is None or after <= base.undirected_precision


def test_truth_pattern_modes():
    dag = PartialDAG.from_edges(3, directed=[(0, 1), (1, 2)])
    assert truth_pattern(dag).undirected_edges() == {(0, 1), (1, 2)}
    assert truth_pattern(dag, raw=True) == dag
    assert truth_pattern(dag, PriorKnowledge({0: 0, 1: 1})).directed_edges() == {(0, 1), (1, 2)}


def test_sweep_single_cell_equals_plain_score():
    from causeway.citest import correlation_matrix
    from causeway.pc import PcConfig, pc
    from causeway.synth import sample

    bn = random_gaussian_bn(random_dag(10, 2.0, seed=1), seed=1)
    truth = truth_pattern(bn)
    res = sweep(bn, truth, replicates=1, n=2000, alphas=(0.05,), soes=(0.0,))
    direct = score_graphs(pc(correlation_matrix(sample(bn, 2000, 0)), PcConfig(alpha=0.05)).graph, truth)
    assert res.cells[0].reports == [direct]


def test_sweep_cell_is_mean_of_defined_replicates():
    bn = random_gaussian_bn(random_dag(10, 2.0, seed=2), seed=2)
    res = sweep(bn, truth_pattern(bn), replicates=4, n=1000, alphas=(0.01, 0.1), soes=(0.0, 0.05))
    for c in res.cells:
        for m in METRICS:
            vals = [r.metric(m) for r in c.reports if r.metric(m) is not None]
            mean, sd, k = c.summary(m)
            assert k == len(vals)
            if vals:
                assert mean == pytest.approx(sum(vals) / len(vals))
    lines = res.to_tsv().splitlines()
    assert lines[0] == "alpha\tsoe\tmetric\tmean\tstddev\treplicates_defined"
    assert len(lines) == 1 + 4 * len(METRICS)


def test_sweep_cell_all_undefined():
    c = SweepCell(0.05, 0.0)
    truth = PartialDAG(2)
    c.reports.append(score_graphs(PartialDAG(2), truth))
    mean, sd, k = c.summary("directed_precision")
    assert math.isnan(mean) and k == 0


def test_sweep_seed_validation():
    bn = random_gaussian_bn(random_dag(4, 1.0, seed=0), seed=0)
    with pytest.raises(ValidationError):
        sweep(bn, truth_pattern(bn), replicates=2, seeds=[1])
