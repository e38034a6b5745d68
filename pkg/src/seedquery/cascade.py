"""Diffusion simulation and influence evaluation.

Independent cascade (IC) runs are breadth-first with lazily flipped edges:
each new adopter tosses one coin per outgoing edge at the moment it adopts.
In an undirected graph the reverse direction of an edge is only ever used
when the far end was already an adopter, so each edge effectively gets one
coin per run.

``influence_exact`` enumerates all ``2**m`` live-edge realizations and is the
ground truth used by the test-suite on tiny graphs.
"""

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, ModelError, ParameterError
from .graph import WeightedLTGraph
from .rng import make_rng

EXACT_MAX_EDGES = 20
_BATCH_MAX_EDGES = 64
_CHUNK = 1 << 15


@dataclass(frozen=True)
class CascadeTrace:
    adopters: frozenset
    seed_set: frozenset
    order: tuple = ()
    realized_edges: tuple = None

    def __len__(self):
        return len(self.adopters)


@dataclass(frozen=True)
class InfluenceEstimate:
    mean: float
    stderr: float
    n_sims: int

    def ci(self, z=1.96):
        return self.mean - z * self.stderr, self.mean + z * self.stderr


def _seed_list(graph, seeds):
    out = sorted({int(s) for s in seeds})
    if out and (out[0] < 0 or out[-1] >= graph.n):
        raise ParameterError("seed outside the node range")
    return out


def simulate_ic(graph, seeds, rng, record_edges=False):
    """One independent-cascade run from ``seeds``; returns the adopter trace."""
    seeds = _seed_list(graph, seeds)
    if not seeds:
        return CascadeTrace(frozenset(), frozenset(), (), () if record_edges else None)
    rng = make_rng(rng)
    ptr, nbr, eid = graph.out_ptr, graph.out_nbr, graph.out_eid
    slot = graph.slot_probs("out")
    p = graph.p
    active = set(seeds)
    order = list(seeds)
    realized = [] if record_edges else None
    queue = deque(seeds)
    if slot is None and p == 0.0:
        queue.clear()
    while queue:
        u = queue.popleft()
        a, b = ptr[u], ptr[u + 1]
        if a == b:
            continue
        coins = rng.random(b - a)
        hits = np.flatnonzero(coins < (p if slot is None else slot[a:b]))
        if not hits.size:
            continue
        targets = nbr[a:b][hits].tolist()
        for j, v in enumerate(targets):
            if v not in active:
                active.add(v)
                order.append(v)
                queue.append(v)
                if record_edges:
                    realized.append(int(eid[a + hits[j]]))
    return CascadeTrace(frozenset(active), frozenset(seeds), tuple(order),
                        tuple(realized) if record_edges else None)


def _propagate(graph, live, state):
    """Close ``state`` (shape ``(B, ..., n)``) under the live edges ``live`` (``(B, m)``)."""
    src, dst = graph.src.tolist(), graph.dst.tolist()
    extra = (1,) * (state.ndim - 2)
    cols = [live[:, e].reshape(live.shape[:1] + extra) for e in range(graph.m)]
    changed = True
    while changed:
        changed = False
        for e in range(graph.m):
            u, v = src[e], dst[e]
            new = state[..., u] & cols[e] & ~state[..., v]
            if new.any():
                state[..., v] |= new
                changed = True
            if not graph.directed:
                new = state[..., v] & cols[e] & ~state[..., u]
                if new.any():
                    state[..., u] |= new
                    changed = True
    return state


def _batch_spreads(graph, seeds, n_sims, rng):
    probs = graph.edge_probs()
    out = np.empty(n_sims)
    done = 0
    while done < n_sims:
        b = min(_CHUNK, n_sims - done)
        live = rng.random((b, graph.m)) < probs
        state = np.zeros((b, graph.n), dtype=bool)
        state[:, seeds] = True
        _propagate(graph, live, state)
        out[done:done + b] = state.sum(axis=1)
        done += b
    return out


def spread_samples(graph, seeds, n_sims, rng, method="auto"):
    """Spread sizes of ``n_sims`` independent IC runs.

    ``method`` is ``"bfs"`` (repeated :func:`simulate_ic`), ``"batch"``
    (vectorised live-edge sampling, good for graphs with a handful of edges)
    or ``"auto"``.
    """
    if n_sims < 1:
        raise ParameterError("n_sims must be at least 1")
    rng = make_rng(rng)
    seeds = _seed_list(graph, seeds)
    if not seeds:
        return np.zeros(n_sims)
    if method == "auto":
        method = "batch" if graph.m <= _BATCH_MAX_EDGES else "bfs"
    if method == "batch":
        return _batch_spreads(graph, seeds, n_sims, rng)
    if method != "bfs":
        raise ParameterError(f"unknown method {method!r}")
    return np.array([len(simulate_ic(graph, seeds, rng).adopters) for _ in range(n_sims)], dtype=float)


def influence_mc(graph, seeds, n_sims, rng, method="auto"):
    """Monte Carlo estimate of the expected number of adopters."""
    x = spread_samples(graph, seeds, n_sims, rng, method)
    stderr = float(x.std(ddof=1) / np.sqrt(n_sims)) if n_sims > 1 else 0.0
    return InfluenceEstimate(float(x.mean()), stderr, int(n_sims))


class ExactInfluence:
    """Influence by enumerating every live-edge realization (``m <= 20``).

    For small enough graphs the full reachability closure of each realization
    is cached, after which each query is a cheap reduction.
    """

    closure_budget = 1 << 25

    def __init__(self, graph, max_edges=EXACT_MAX_EDGES):
        if graph.m > max_edges:
            raise CapacityError(f"exact enumeration needs m <= {max_edges}, got {graph.m}")
        self.graph = graph
        m = graph.m
        idx = np.arange(1 << m, dtype=np.int64)
        self.live = ((idx[:, None] >> np.arange(m)) & 1).astype(bool)
        w = np.ones(len(idx))
        for e in range(m):
            q = graph.edge_prob(e)
            w *= np.where(self.live[:, e], q, 1.0 - q)
        self.weights = w
        self._closure = None
        if (1 << m) * graph.n * graph.n <= self.closure_budget:
            state = np.broadcast_to(np.eye(graph.n, dtype=bool), (1 << m, graph.n, graph.n)).copy()
            self._closure = _propagate(graph, self.live, state)

    def adoption_probs(self, seeds):
        """Per-node adoption probability given ``seeds``."""
        seeds = _seed_list(self.graph, seeds)
        if not seeds:
            return np.zeros(self.graph.n)
        if self._closure is not None:
            reached = self._closure[:, seeds, :].any(axis=1)
        else:
            reached = np.zeros((len(self.weights), self.graph.n), dtype=bool)
            reached[:, seeds] = True
            _propagate(self.graph, self.live, reached)
        return self.weights @ reached

    def __call__(self, seeds):
        return float(self.adoption_probs(seeds).sum())


def influence_exact(graph, seeds, max_edges=EXACT_MAX_EDGES):
    """Exact expected spread of ``seeds`` (brute force over ``2**m`` realizations)."""
    return ExactInfluence(graph, max_edges)(seeds)


# ---------------------------------------------------------------------------
# linear threshold
# ---------------------------------------------------------------------------

def _check_lt(graph):
    if not isinstance(graph, WeightedLTGraph):
        raise ModelError("linear-threshold simulation needs a WeightedLTGraph")


def draw_triggering(ltg, rng, size=None):
    """Draw each node's triggering in-neighbour (``-1`` for the empty set).

    With ``size`` given, returns ``size`` independent draws stacked as rows.
    """
    g = ltg.graph
    cum = np.cumsum(ltg.in_w)
    base = np.where(g.in_ptr[:-1] > 0, cum[np.maximum(g.in_ptr[:-1] - 1, 0)], 0.0) if len(cum) else np.zeros(g.n)
    u = rng.random(g.n if size is None else (size, g.n))
    if not len(cum):
        return np.full(u.shape, -1, dtype=np.int64)
    slot = np.searchsorted(cum, base + u, side="right")
    ok = slot < g.in_ptr[1:]
    return np.where(ok, g.in_nbr[np.minimum(slot, len(cum) - 1)], -1)


def simulate_lt(graph, seeds, rng, mode="thresholds"):
    """One linear-threshold run.

    ``mode="thresholds"`` draws a uniform threshold per node and activates a
    node once the weight of its adopting in-neighbours reaches it.
    ``mode="triggering"`` draws each node's triggering set (one in-neighbour
    ``u`` with probability ``b_uv``, otherwise empty) and returns the nodes
    reachable from the seeds through triggering arcs.
    """
    _check_lt(graph)
    g = graph.graph
    seeds = _seed_list(g, seeds)
    if not seeds:
        return CascadeTrace(frozenset(), frozenset())
    rng = make_rng(rng)
    active = set(seeds)
    order = list(seeds)
    queue = deque(seeds)
    if mode == "thresholds":
        theta = rng.random(g.n)
        acc = np.zeros(g.n)
        out_w = graph.weights[g.out_eid]
        while queue:
            u = queue.popleft()
            a, b = g.out_ptr[u], g.out_ptr[u + 1]
            for v, w in zip(g.out_nbr[a:b].tolist(), out_w[a:b].tolist()):
                if v in active:
                    continue
                acc[v] += w
                if acc[v] >= theta[v]:
                    active.add(v)
                    order.append(v)
                    queue.append(v)
    elif mode == "triggering":
        trig = draw_triggering(graph, rng)
        children = {}
        for v in np.flatnonzero(trig >= 0).tolist():
            children.setdefault(int(trig[v]), []).append(v)
        while queue:
            u = queue.popleft()
            for v in children.get(u, ()):
                if v not in active:
                    active.add(v)
                    order.append(v)
                    queue.append(v)
    else:
        raise ParameterError(f"unknown LT mode {mode!r}")
    return CascadeTrace(frozenset(active), frozenset(seeds), tuple(order))


def lt_adoption_freq(graph, seeds, n_runs, rng, mode="thresholds"):
    """Empirical per-node adoption frequency over ``n_runs`` vectorised LT runs."""
    _check_lt(graph)
    g = graph.graph
    seeds = _seed_list(g, seeds)
    rng = make_rng(rng)
    total = np.zeros(g.n)
    if not seeds:
        return total
    w = graph.weight_matrix()
    done = 0
    while done < n_runs:
        b = min(_CHUNK, n_runs - done)
        active = np.zeros((b, g.n), dtype=bool)
        active[:, seeds] = True
        if mode == "thresholds":
            theta = rng.random((b, g.n))
            while True:
                nxt = active | (active.astype(float) @ w >= theta)
                if (nxt == active).all():
                    break
                active = nxt
        elif mode == "triggering":
            trig = draw_triggering(graph, rng, size=b)
            has = trig >= 0
            src = np.where(has, trig, 0)
            while True:
                nxt = active | (np.take_along_axis(active, src, axis=1) & has)
                if (nxt == active).all():
                    break
                active = nxt
        else:
            raise ParameterError(f"unknown LT mode {mode!r}")
        total += active.sum(axis=0)
        done += b
    return total / n_runs
