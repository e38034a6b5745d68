"""Comparison strategies: full-information greedy and cheap heuristics."""

import heapq
from dataclasses import dataclass, field

import numpy as np

from .cascade import influence_mc
from .errors import ExhaustionError, ParameterError
from .rng import make_rng, seed_token, spawn
from .seed import SeedResult


def _check_k(n, k):
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in 1..{n}")


def greedy_full(graph, k, n_sims=500, rng=None, evaluate=None):
    """Lazy greedy on expected spread with the whole graph in hand.

    ``evaluate(seeds) -> float`` defaults to a Monte Carlo estimate with
    ``n_sims`` runs on a fresh substream per call. Stale upper bounds are
    refreshed before a node is accepted; ties go to the lowest id.
    """
    n = graph.n
    _check_k(n, k)
    token = seed_token(rng)
    rng = make_rng(rng)
    if evaluate is None:
        def evaluate(seeds):
            return influence_mc(graph, seeds, n_sims, spawn(rng, 1)[0]).mean

    heap = [(-round(evaluate([v]), 12), v, 0) for v in range(n)]
    heapq.heapify(heap)
    chosen = []
    value = 0.0
    evals = n
    for it in range(k):
        while True:
            neg, v, stamp = heapq.heappop(heap)
            if stamp == it:
                chosen.append(v)
                value += -neg
                break
            gain = round(evaluate(chosen + [v]) - value, 12)  # float noise must not break id ties
            evals += 1
            heapq.heappush(heap, (-gain, v, it))
    return SeedResult(seeds=chosen, estimate=value, rng_seed=token, algorithm="greedy",
                      diagnostics={"evaluations": evals})


def random_seeds(n, k, rng=None):
    """``k`` distinct nodes uniformly at random; costs nothing."""
    _check_k(n, k)
    token = seed_token(rng)
    rng = make_rng(rng)
    seeds = rng.choice(n, size=k, replace=False).tolist()
    return SeedResult(seeds=seeds, rng_seed=token, algorithm="random")


def one_hop(oracle, k, rng=None):
    """Seed random neighbours of random nodes until ``k`` are distinct."""
    n = oracle.n
    _check_k(n, k)
    token = seed_token(rng)
    rng = make_rng(rng)
    seeds, seen = [], set()
    for _ in range(n * k):
        w = oracle.nominate(int(rng.integers(n)), rng)
        if w not in seen:
            seen.add(w)
            seeds.append(w)
            if len(seeds) == k:
                return SeedResult(seeds=seeds, rng_seed=token, query_cost=oracle.ledger.snapshot(),
                                  algorithm="one-hop")
    raise ExhaustionError(f"only {len(seeds)} distinct nominees after {n * k} draws")


def top_degree(graph, k, direction="all"):
    """The ``k`` highest-degree nodes, lowest id first among equals.

    ``direction`` picks ``"out"``, ``"in"`` or ``"all"`` degree on directed graphs.
    """
    _check_k(graph.n, k)
    deg = {"out": graph.out_degrees, "in": graph.in_degrees, "all": graph.degrees}[direction]()
    order = np.lexsort((np.arange(graph.n), -np.asarray(deg)))
    return SeedResult(seeds=order[:k].tolist(), algorithm="degree")


@dataclass(frozen=True)
class Strategy:
    name: str
    requires_full_graph: bool
    uses_oracle: bool
    params: dict = field(default_factory=dict)


STRATEGIES = {
    "probe-seed": Strategy("probe-seed", False, True, {"rho": None, "T": None, "tau": None, "eps_prime": None}),
    "spread-seed": Strategy("spread-seed", False, True, {"rounds_rho": None}),
    "lt-spread-seed": Strategy("lt-spread-seed", False, True, {"rounds_rho": None}),
    "greedy": Strategy("greedy", True, False, {"n_sims": 500}),
    "random": Strategy("random", False, False),
    "one-hop": Strategy("one-hop", False, True),
    "degree": Strategy("degree", True, False),
}
