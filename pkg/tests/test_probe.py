import logging
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from seedquery.cascade import influence_exact
from seedquery.errors import ParameterError
from seedquery.graph import Graph, gen_erdos_renyi, gen_random_tiny, gen_star
from seedquery.oracles import GraphOracle
from seedquery.probe import (ProbeParams, Sketch, T_formula, initial_count, param_rho, param_T,
                             param_tau, probe, rho_formula)
from seedquery.rng import make_rng
from seedquery.seed import sketch_coverage_value


# -- parameter formulas (values recomputed by hand with natural logs) -------

def test_rho_value():
    assert param_rho(1000, 5, 0.5, 1.0) == pytest.approx(0.176160, abs=1e-6)
    assert initial_count(1000, param_rho(1000, 5, 0.5, 1.0)) == 177


def test_rho_clamps_to_one():
    assert rho_formula(10, 5, 0.1, 2.0) > 1
    assert param_rho(10, 5, 0.1, 2.0) == 1.0


def test_rho_small_delta_limit():
    n = 500
    assert rho_formula(n, 1, 1.0, 1e-12) == pytest.approx(3 * math.log(2) / (2 * n), rel=1e-9)


def test_T_value_and_scaling():
    assert T_formula(1000, 5, 0.5, 1.0) == pytest.approx(842.1009, abs=1e-3)
    assert param_T(1000, 5, 0.5, 1.0) == 843
    assert T_formula(1000, 5, 0.25, 1.0) / T_formula(1000, 5, 0.5, 1.0) == pytest.approx(4.0, rel=1e-12)


def test_tau_values():
    assert param_tau(1000, 5, 0.5) == 278
    assert param_tau(1000, 1000, 0.5) == 2
    assert param_tau(1000, 1, 0.01) == 1000     # capped at n


def test_tau_degenerate_epsilon_warns(caplog):
    with caplog.at_level(logging.WARNING):
        assert param_tau(100, 2, 1.0) == 1
    assert "tau" in caplog.text


@pytest.mark.parametrize("args", [(1, 1, 0.5, 1.0), (10, 0, 0.5, 1.0), (10, 1, 0.0, 1.0),
                                  (10, 1, 1.5, 1.0), (10, 1, 0.5, 0.0)])
def test_formula_preconditions(args):
    with pytest.raises(ParameterError):
        param_rho(*args)
    with pytest.raises(ParameterError):
        param_T(*args)


def test_probe_params_validation():
    with pytest.raises(ParameterError):
        ProbeParams(0.0, 1, 1)
    with pytest.raises(ParameterError):
        ProbeParams(0.5, 1, 0)
    p = ProbeParams.from_guarantee(1000, 5, 0.5, 1.0)
    assert (p.T, p.tau, p.k) == (843, 278, 5)


# -- probing ----------------------------------------------------------------

def test_p0_gives_singletons():
    g = gen_erdos_renyi(30, 0.3, 1, p=0.0)
    sk = probe(GraphOracle(g), ProbeParams(0.5, 3, 30), 1)
    for c in sk.copies:
        assert all(len(grp) == 1 for grp in c.groups())
        assert c.values.tolist() == [1] * 15


def test_full_probe_of_connected_graph():
    g = Graph(6, [(i, i + 1) for i in range(5)], p=1.0)
    sk = probe(GraphOracle(g), ProbeParams(1.0, 1, 6), 2)
    (c,) = sk.copies
    assert [grp.tolist() for grp in c.groups()] == [list(range(6))]
    assert c.values.tolist() == [6]
    assert sketch_coverage_value(sk, [3]) == 6


def test_tau_one_on_star_overshoots_one_batch():
    g = gen_star(50, p=1.0)
    for seed in range(10):
        sk = probe(GraphOracle(g), ProbeParams(0.2, 2, 1), seed, keep_log=True)
        init = set(sk.initial_nodes.tolist())
        for c in sk.copies:
            probed = [v for v, _ in c.log]
            if 0 in init:
                # the centre's own batch is the one allowed overshoot
                assert max(len(grp) for grp in c.groups()) == 50
            else:
                # leaves each bring in the centre, which is never probed itself
                assert 0 not in probed
                assert [grp.tolist() for grp in c.groups()] == [sorted(init | {0})]


def _replay_stop_rule(copy, tau):
    """Rebuild components from the probe log; check nobody was probed while its component exceeded tau."""
    parent = {}

    def find(x):
        parent.setdefault(x, x)
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for v, reports in copy.log:
        r = find(v)
        comp = sum(1 for x in parent if find(x) == r) if v in parent else 1
        assert comp <= tau, f"node {v} probed while its component had {comp} > {tau} nodes"
        for w, kept in reports:
            if kept:
                a, b = find(v), find(w)
                if a != b:
                    parent[a] = b


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000), st.integers(1, 6))
def test_no_probe_after_component_exceeds_tau(seed, tau):
    rng = make_rng(seed)
    g = gen_erdos_renyi(25, 0.2, seed, p=0.6)
    sk = probe(GraphOracle(g), ProbeParams(0.3, 3, tau), rng, keep_log=True)
    for c in sk.copies:
        _replay_stop_rule(c, tau)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 10_000))
def test_sketch_invariants(seed):
    rng = make_rng(seed)
    g = gen_random_tiny(rng, max_n=12, max_m=20, p=0.6)
    o = GraphOracle(g)
    sk = probe(o, ProbeParams(float(rng.uniform(0.1, 1.0)), 4, int(rng.integers(1, 13))), rng)
    init = set(sk.initial_nodes.tolist())
    kept = discarded = 0
    for c in sk.copies:
        members = c.members.tolist()
        assert len(members) == len(set(members))                 # groups are disjoint
        assert init <= set(members)
        assert int(c.values.sum()) == len(init)
        for grp, val in zip(c.groups(), c.values):
            assert val == len(init & set(grp.tolist())) >= 1
        kept += c.kept_edges
        discarded += c.discarded_edges
    assert kept == o.ledger.kept_edges and discarded == o.ledger.discarded_edges


def test_components_match_kept_edges():
    g = gen_erdos_renyi(40, 0.15, 4, p=0.5)
    sk = probe(GraphOracle(g), ProbeParams(0.25, 5, 40), 9)
    for c in sk.copies:
        label = {}
        for gi, grp in enumerate(c.groups()):
            for x in grp.tolist():
                label[x] = gi
        for u, v in c.edges.tolist():
            assert label[u] == label[v]
            assert g.edge_set() >= {(min(u, v), max(u, v))}


def test_directed_groups_are_ancestor_sets():
    # 3 -> 2 -> 1 -> 0 and 4 -> 0, everything live
    g = Graph(5, [(3, 2), (2, 1), (1, 0), (4, 0)], directed=True, p=1.0)
    sk = probe(GraphOracle(g), ProbeParams(1.0, 1, 5), 0)
    got = sorted(map(lambda a: a.tolist(), sk.copies[0].groups()))
    assert got == sorted([[0, 1, 2, 3, 4], [1, 2, 3], [2, 3], [3], [4]])
    assert sk.copies[0].values.tolist() == [1] * 5
    assert sketch_coverage_value(sk, [3]) == 4       # 3 reaches 0, 1, 2 and itself
    assert sk.copies[0].discarded_edges == 0


def test_same_initial_nodes_across_copies_and_resampled_across_calls():
    g = gen_erdos_renyi(200, 0.02, 1, p=0.3)
    a = probe(GraphOracle(g), ProbeParams(0.1, 3, 200), 1)
    b = probe(GraphOracle(g), ProbeParams(0.1, 3, 200), 2)
    assert len(a.initial_nodes) == 20
    assert not np.array_equal(a.initial_nodes, b.initial_nodes)
    for c in a.copies:
        assert set(a.initial_nodes.tolist()) <= set(c.members.tolist())


def test_probe_deterministic():
    g = gen_erdos_renyi(80, 0.05, 1, p=0.4)
    a = probe(GraphOracle(g), ProbeParams(0.3, 5, 20), 17)
    b = probe(GraphOracle(g), ProbeParams(0.3, 5, 20), 17)
    assert a.dumps() == b.dumps()


def test_budget_exhaustion_freezes_later_copies():
    g = gen_erdos_renyi(60, 0.2, 3, p=0.5)
    o = GraphOracle(g, edge_budget=25)
    sk = probe(o, ProbeParams(0.5, 10, 60), 1)
    assert o.ledger.edge_reveals <= 25
    assert sk.T == 10
    last = sk.copies[-1]
    assert all(len(grp) == 1 for grp in last.groups())


def test_sketch_serialization_roundtrip():
    g = gen_erdos_renyi(50, 0.1, 2, p=0.4)
    sk = probe(GraphOracle(g), ProbeParams(0.2, 4, 10, 0.5, 1.0, 3), 5)
    back = Sketch.loads(sk.dumps())
    assert back.dumps() == sk.dumps()
    assert back.params == sk.params
    for s in ([0], [1, 2, 3], list(range(50))):
        assert sketch_coverage_value(back, s) == sketch_coverage_value(sk, s)
    with pytest.raises(ParameterError):
        Sketch.from_dict({**sk.to_dict(), "version": 99})


def test_estimator_unbiased_over_initial_draws():
    # for tau = n and a single copy, averaging over draws of the initial nodes recovers the influence
    g = gen_random_tiny(13, max_n=9, max_m=12, p=0.5)
    S = [0, 1]
    truth = influence_exact(g, S)
    rng = make_rng(5)
    vals = np.array([sketch_coverage_value(probe(GraphOracle(g), ProbeParams(0.34, 1, g.n), rng), S)
                     for _ in range(4000)])
    assert abs(vals.mean() - truth) <= 4 * vals.std(ddof=1) / math.sqrt(len(vals))


def test_many_copies_converge_to_influence():
    g = gen_random_tiny(31, max_n=10, max_m=16, min_n=10, p=0.5)
    rng = make_rng(6)
    for S in ([0], [2, 7]):
        sk = probe(GraphOracle(g), ProbeParams(1.0, 20_000, g.n), rng)
        assert abs(sketch_coverage_value(sk, S) - influence_exact(g, S)) <= 0.05 * g.n
