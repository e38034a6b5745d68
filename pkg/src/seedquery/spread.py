"""Seeding from observed cascades only (no edges ever seen).

Each of ``k`` rounds seeds ``rho`` random nodes one at a time, looks at who
adopted, discards cascades that touched an already chosen seed and picks the
node that showed up in the most remaining cascades. The linear-threshold
variant does the same with reversed cascades.
"""

import math
from dataclasses import dataclass

import numpy as np

from .errors import ModelError, ParameterError
from .rng import make_rng, seed_token
from .seed import SeedResult


def rho_spread_formula(n, k, epsilon):
    """Unrounded queries per round, 81 k ln(6nk/e) / e^3."""
    if n < 2:
        raise ParameterError("n must be at least 2")
    if k < 1:
        raise ParameterError("k must be at least 1")
    if not 0.0 < epsilon <= 1.0:
        raise ParameterError("epsilon must lie in (0, 1]")
    return 81.0 * k * math.log(6.0 * n * k / epsilon) / epsilon ** 3


def param_rho_spread(n, k, epsilon):
    return int(math.ceil(rho_spread_formula(n, k, epsilon) - 1e-9))


@dataclass
class SpreadRound:
    index: int
    initial_nodes: np.ndarray
    adopter_sets: list          # frozensets; nulled cascades are empty
    counts: np.ndarray          # appearances per node over kept cascades

    @property
    def nulled(self):
        return sum(1 for a in self.adopter_sets if not a)


def spread_round(query, n, chosen, rho, rng, index=0):
    """One sampling round. ``query(u, rng)`` returns a trace with ``adopters``."""
    chosen = set(chosen)
    initial = rng.integers(0, n, size=rho)
    sets = []
    counts = np.zeros(n, dtype=np.int64)
    for u in initial.tolist():
        a = query(u, rng).adopters
        if chosen and not chosen.isdisjoint(a):
            a = frozenset()
        else:
            counts[list(a)] += 1
        sets.append(a)
    return SpreadRound(index, initial, sets, counts)


def _pick(counts, taken, rng):
    c = np.where(taken, -1, counts)
    best = int(np.argmax(c))
    if c[best] <= 0:
        best = int(rng.choice(np.flatnonzero(~taken)))
    return best


def _top(counts, taken, size=5):
    c = np.where(taken, -1, counts)
    order = np.lexsort((np.arange(len(c)), -c))[:size]
    return [(int(v), int(c[v])) for v in order if c[v] > 0]


def _run(query, oracle, n, k, rho, rng, name, verbose):
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in 1..{n}")
    if rho < 1:
        raise ParameterError("rho must be at least 1")
    token = seed_token(rng)
    rng = make_rng(rng)
    taken = np.zeros(n, dtype=bool)
    chosen = []
    rounds = []
    for i in range(k):
        rd = spread_round(query, n, chosen, int(rho), rng, index=i)
        v = _pick(rd.counts, taken, rng)
        if verbose:
            rounds.append({"round": i, "top": _top(rd.counts, taken), "nulled": rd.nulled, "chosen": v})
        chosen.append(v)
        taken[v] = True
    diag = {"rho": int(rho)}
    if verbose:
        diag["rounds"] = rounds
    return SeedResult(seeds=chosen, rng_seed=token, query_cost=oracle.ledger.snapshot(),
                      algorithm=name, diagnostics=diag)


def spread_seed(oracle, n, k, rho, rng, verbose=False):
    """Choose ``k`` seeds from ``k * rho`` spread queries."""
    return _run(oracle.spread_query, oracle, n, k, rho, rng, "spread-seed", verbose)


def lt_spread_seed(oracle, n, k, rho, rng, verbose=False):
    """Linear-threshold variant driven by reversed cascades."""
    if oracle.model != "LT":
        raise ModelError("lt_spread_seed needs an oracle over a WeightedLTGraph")

    def query(u, r):
        return oracle.reverse_cascade_query(u, r, model="LT")

    return _run(query, oracle, n, k, rho, rng, "lt-spread-seed", verbose)
