import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.stats import chisquare

from seedquery.baselines import STRATEGIES, greedy_full, one_hop, random_seeds, top_degree
from seedquery.cascade import ExactInfluence
from seedquery.errors import ExhaustionError, ParameterError
from seedquery.graph import Graph, gen_erdos_renyi, gen_random_tiny, gen_star
from seedquery.oracles import GraphOracle
from seedquery.rng import make_rng


def test_greedy_two_triangles():
    g = Graph(7, [(0, 1), (1, 2), (0, 2), (3, 4), (4, 5), (3, 5)], p=1.0)
    res = greedy_full(g, 2, evaluate=ExactInfluence(g))
    assert res.seeds == [0, 3]
    assert res.estimate == pytest.approx(6)


def test_greedy_star_and_zero_p():
    g = gen_star(10, p=1.0)
    assert greedy_full(g, 1, evaluate=ExactInfluence(g)).seeds == [0]
    z = gen_star(8, p=0.0)
    assert greedy_full(z, 2, evaluate=ExactInfluence(z)).seeds == [0, 1]


def test_greedy_monte_carlo_star():
    g = gen_star(40, p=0.5)
    res = greedy_full(g, 1, n_sims=200, rng=3)
    assert res.seeds == [0]


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 100_000), st.integers(1, 3))
def test_greedy_guarantee_against_brute_force(seed, k):
    rng = np.random.default_rng(seed)
    g = gen_random_tiny(rng, max_n=10, max_m=16, p=float(rng.choice([0.2, 0.5, 0.9])))
    k = min(k, g.n)
    f = ExactInfluence(g)
    res = greedy_full(g, k, evaluate=f)
    opt = max(f(list(S)) for S in itertools.combinations(range(g.n), k))
    assert f(res.seeds) >= (1 - 1 / math.e) * opt - 1e-9
    assert res.estimate == pytest.approx(f(res.seeds))


def test_random_seeds_basic():
    assert sorted(random_seeds(6, 6, 0).seeds) == list(range(6))
    assert random_seeds(1, 1, 0).seeds == [0]
    with pytest.raises(ParameterError):
        random_seeds(3, 4, 0)


def test_random_seeds_uniform():
    rng = make_rng(5)
    n, draws = 10, 100_000
    counts = np.bincount([random_seeds(n, 1, rng).seeds[0] for _ in range(draws)], minlength=n)
    assert chisquare(counts).pvalue > 1e-3


def test_one_hop_star():
    o = GraphOracle(gen_star(50))
    rng = make_rng(2)
    runs = 4000
    hits = sum(one_hop(o, 1, rng).seeds == [0] for _ in range(runs))
    q = 49 / 50
    assert abs(hits / runs - q) <= 4 * math.sqrt(q * (1 - q) / runs)
    assert o.ledger.edge_reveals == 0 and o.ledger.nominations == runs


def test_one_hop_isolated_falls_back():
    o = GraphOracle(Graph(5))
    res = one_hop(o, 3, 1)
    assert len(set(res.seeds)) == 3


def test_one_hop_complete_graph_uniform():
    g = Graph(6, list(itertools.combinations(range(6), 2)))
    o = GraphOracle(g)
    rng = make_rng(9)
    counts = np.bincount([one_hop(o, 1, rng).seeds[0] for _ in range(30_000)], minlength=6)
    assert chisquare(counts).pvalue > 1e-3


def test_one_hop_exhaustion():
    # every draw nominates node 0, so a second distinct seed never appears
    class Stuck(GraphOracle):
        def nominate(self, v, rng):
            self.ledger.charge(nominations=1)
            return 0
    with pytest.raises(ExhaustionError):
        one_hop(Stuck(Graph(3, [(0, 1), (0, 2)])), 2, 0)


def test_top_degree():
    assert top_degree(gen_star(10), 1).seeds == [0]
    ring = Graph(6, [(i, (i + 1) % 6) for i in range(6)])
    assert top_degree(ring, 2).seeds == [0, 1]
    g = gen_erdos_renyi(50, 0.1, 1)
    deg = g.degrees()
    seeds = top_degree(g, 5).seeds
    assert sorted(deg[seeds].tolist(), reverse=True) == sorted(deg.tolist(), reverse=True)[:5]


def test_full_graph_strategies_leave_ledger_alone():
    for name, s in STRATEGIES.items():
        assert not (s.requires_full_graph and s.uses_oracle), name
