"""Seed selection on a sketch by randomized greedy coverage."""

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .errors import ParameterError
from .rng import make_rng, seed_token

DEFAULT_EPSILON = 0.5


@dataclass
class SeedResult:
    """Chosen seeds plus what it cost to find them.

    ``sketch_value`` is only set by sketch-based selection; other strategies
    may put their own estimate in ``estimate``.
    """

    seeds: list
    sketch_value: float = None
    estimate: float = None
    rng_seed: int = None
    query_cost: dict = field(default_factory=dict)
    algorithm: str = ""
    diagnostics: dict = field(default_factory=dict)

    def to_dict(self):
        d = asdict(self)
        d["seeds"] = [int(s) for s in self.seeds]
        return d

    def to_json(self, **kw):
        return json.dumps(self.to_dict(), **kw)


def sketch_coverage_value(sketch, seeds):
    """Estimated influence of ``seeds``: covered initial nodes / (rho T).

    A group counts once however many seeds it contains.
    """
    seeds = np.unique(np.asarray(list(seeds), dtype=np.int64))
    if not len(seeds) or not sketch.T:
        return 0.0
    _, group, ptr, value = sketch.memberships()
    hit = np.concatenate([group[ptr[s]:ptr[s + 1]] for s in seeds.tolist()])
    return float(value[np.unique(hit)].sum()) / (sketch.rho * sketch.T)


def candidate_count(n, k, eps_prime):
    """Size of the random candidate pool, ceil((n/k) ln(1/eps'))."""
    return int(math.ceil((n / k) * math.log(1.0 / eps_prime) - 1e-9))


def seed_from_sketch(sketch, k, eps_prime=None, rng=None, exhaustive=False):
    """Pick ``k`` seeds greedily from a random candidate pool each round.

    Every round draws ``min(candidate_count, remaining)`` candidates without
    replacement, scores each by the summed current value of its groups,
    takes the best (lowest id on ties) and zeroes the groups it covers.
    ``exhaustive=True`` scores every remaining node (plain greedy).
    ``eps_prime`` defaults to epsilon/7 with epsilon taken from the sketch's
    parameters, or 0.5 if it has none.
    """
    n = sketch.n
    if not 1 <= k <= n:
        raise ParameterError(f"k must lie in 1..{n}")
    if eps_prime is None:
        eps = sketch.params.epsilon if sketch.params and sketch.params.epsilon else DEFAULT_EPSILON
        eps_prime = eps / 7.0
    if not 0.0 < eps_prime < 1.0:
        raise ParameterError("eps_prime must lie in (0, 1)")
    token = seed_token(rng)
    rng = make_rng(rng)
    node, group, ptr, value0 = sketch.memberships()
    current = value0.astype(np.float64)
    pool = n if exhaustive else candidate_count(n, k, eps_prime)

    chosen = []
    taken = np.zeros(n, dtype=bool)
    for _ in range(k):
        remaining = np.flatnonzero(~taken)
        if pool >= len(remaining):
            cand = remaining
        else:
            cand = np.sort(rng.choice(remaining, size=pool, replace=False))
        scores = np.bincount(node, weights=current[group], minlength=n)
        best = int(cand[np.argmax(scores[cand])])
        chosen.append(best)
        taken[best] = True
        current[group[ptr[best]:ptr[best + 1]]] = 0.0

    return SeedResult(
        seeds=chosen,
        sketch_value=sketch_coverage_value(sketch, chosen),
        rng_seed=token,
        query_cost=dict(sketch.ledger),
        algorithm="probe-seed",
        diagnostics={"eps_prime": eps_prime, "pool": min(pool, n), "T": sketch.T,
                     "initial_nodes": len(sketch.initial_nodes)},
    )
