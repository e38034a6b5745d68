"""Metered access to a hidden graph.

Algorithms never see the :class:`~seedquery.graph.Graph` itself; they talk to
a :class:`GraphOracle`, which answers edge probes, spread queries, reversed
cascades and neighbour nominations and charges each one to a
:class:`QueryLedger`.

Cost of an edge probe is the number of edges the probed node reports. An
undirected edge gets its one chance of entering the sketch when the first of
its endpoints is probed; if the second endpoint later reports it again, the
report still costs a query but is flagged ``kept=False`` (discarded).
Adjacency positions whose coin fails cost nothing.
"""

import threading
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .cascade import CascadeTrace, simulate_ic
from .errors import BudgetExhausted, ModelError, ParameterError, SessionError
from .graph import Graph, WeightedLTGraph
from .rng import make_rng


@dataclass
class QueryLedger:
    """Monotone query counters."""

    kept_edges: int = 0
    discarded_edges: int = 0
    spread_queries: int = 0
    reverse_queries: int = 0
    reverse_edges: int = 0
    nominations: int = 0
    _lock: threading.Lock = field(default_factory=threading.Lock, repr=False, compare=False)

    @property
    def edge_reveals(self):
        return self.kept_edges + self.discarded_edges

    def charge(self, **counts):
        with self._lock:
            for name, value in counts.items():
                if value < 0:
                    raise ValueError("ledger counters only increase")
                setattr(self, name, getattr(self, name) + int(value))

    def merge(self, other):
        self.charge(**{k: v for k, v in other.snapshot().items() if k != "edge_reveals"})
        return self

    def snapshot(self):
        return {
            "edge_reveals": self.edge_reveals,
            "kept_edges": self.kept_edges,
            "discarded_edges": self.discarded_edges,
            "spread_queries": self.spread_queries,
            "reverse_queries": self.reverse_queries,
            "reverse_edges": self.reverse_edges,
            "nominations": self.nominations,
        }


@dataclass(frozen=True)
class RevealedEdge:
    node: int      # the probed node
    other: int     # the neighbour it named
    edge: int      # edge id in the hidden graph
    kept: bool


@dataclass
class ProbeSession:
    """Probing state of one sketch copy: who has been probed so far."""

    copy_index: int = 0
    probed: set = field(default_factory=set)
    kept_edges: int = 0
    discarded_edges: int = 0
    log: list = None

    @property
    def edge_reveals(self):
        return self.kept_edges + self.discarded_edges


class GraphOracle:
    """Query interface over a hidden graph.

    Parameters
    ----------
    graph : Graph or WeightedLTGraph
    ledger : QueryLedger, optional
        Shared ledger; a fresh one is created when omitted.
    reveal_prob : float, optional
        Probability with which probed nodes name each neighbour. Defaults to
        the cascade probability of each edge. Setting it to something else is
        experimental: no guarantee is attached.
    edge_budget : int, optional
        Hard cap on edge reveals; probes beyond it raise ``BudgetExhausted``.
    """

    def __init__(self, graph, ledger=None, reveal_prob=None, edge_budget=None):
        if isinstance(graph, WeightedLTGraph):
            self._lt, self._graph = graph, graph.graph
        elif isinstance(graph, Graph):
            self._lt, self._graph = None, graph
        else:
            raise ParameterError("oracle needs a Graph or WeightedLTGraph")
        if reveal_prob is not None and not 0.0 <= reveal_prob <= 1.0:
            raise ParameterError("reveal_prob must lie in [0, 1]")
        self.ledger = ledger if ledger is not None else QueryLedger()
        self.reveal_prob = reveal_prob
        self.edge_budget = edge_budget
        g = self._graph
        self._in_ptr = g.in_ptr.tolist()
        self._slot = None if reveal_prob is not None else g.slot_probs("in")
        self._thr = reveal_prob if reveal_prob is not None else g.p

    @property
    def n(self):
        return self._graph.n

    @property
    def directed(self):
        return self._graph.directed

    @property
    def model(self):
        return "LT" if self._lt is not None else "IC"

    def new_session(self, copy_index=0, keep_log=False):
        return ProbeSession(copy_index=copy_index, log=[] if keep_log else None)

    # -- edge queries --------------------------------------------------------

    def edge_probe(self, session, v, rng):
        """Ask node ``v`` to name its neighbours (in-neighbours if directed).

        Each adjacency position is reported independently with its edge's
        probability. Returns the reported edges in neighbour-id order.
        """
        v = int(v)
        if v in session.probed:
            raise SessionError(f"node {v} already probed in copy {session.copy_index}")
        if self.edge_budget is not None and self.ledger.edge_reveals >= self.edge_budget:
            raise BudgetExhausted(f"edge budget {self.edge_budget} spent")
        session.probed.add(v)
        g = self._graph
        a, b = self._in_ptr[v], self._in_ptr[v + 1]
        hits = ()
        if a < b:
            thr = self._thr if self._slot is None else self._slot[a:b]
            hits = (rng.random(b - a) < thr).nonzero()[0]
        if not len(hits):
            if session.log is not None:
                session.log.append((v, []))
            return []
        if self.edge_budget is not None:
            hits = hits[: self.edge_budget - self.ledger.edge_reveals]
        out = []
        kept = discarded = 0
        for w, e in zip(g.in_nbr[a:b][hits].tolist(), g.in_eid[a:b][hits].tolist()):
            keep = g.directed or w not in session.probed
            out.append(RevealedEdge(v, w, e, keep))
            if keep:
                kept += 1
            else:
                discarded += 1
        session.kept_edges += kept
        session.discarded_edges += discarded
        if session.log is not None:
            session.log.append((v, [(e.other, e.kept) for e in out]))
        self.ledger.charge(kept_edges=kept, discarded_edges=discarded)
        return out

    def nominate(self, v, rng):
        """Node ``v`` names one uniformly random neighbour (itself if isolated)."""
        g = self._graph
        self.ledger.charge(nominations=1)
        nbrs, _ = g.out_neighbors(v) if not g.directed else g.in_neighbors(v)
        if len(nbrs) == 0:
            return int(v)
        return int(nbrs[int(rng.integers(len(nbrs)))])

    # -- spread queries ------------------------------------------------------

    def spread_query(self, u, rng):
        """Seed ``u`` alone and report who adopted (edges stay hidden)."""
        u = int(u)
        if not 0 <= u < self.n:
            raise ParameterError(f"node {u} outside 0..{self.n - 1}")
        if self._lt is not None:
            raise ModelError("spread queries are defined for the IC model")
        trace = simulate_ic(self._graph, [u], rng)
        self.ledger.charge(spread_queries=1)
        return CascadeTrace(trace.adopters, trace.seed_set, trace.order)

    def reverse_cascade_query(self, u, rng, model=None):
        """Run a cascade backwards from ``u``: the set of nodes that would influence it.

        Directed IC: backward BFS, each incoming arc revealed with its
        probability. LT: follow the chain of triggering in-neighbours until an
        empty triggering set or a revisit.
        """
        u = int(u)
        model = model or self.model
        rng = make_rng(rng)
        if model == "LT":
            if self._lt is None:
                raise ModelError("LT reverse cascade needs a WeightedLTGraph")
            trace, cost = _lt_reverse(self._lt, u, rng)
        elif model in ("IC", "directed-IC"):
            if self._lt is not None:
                raise ModelError("graph carries LT weights; use model='LT'")
            trace, cost = _ic_reverse(self._graph, u, rng)
        else:
            raise ParameterError(f"unknown model {model!r}")
        self.ledger.charge(reverse_queries=1, reverse_edges=cost)
        return trace


def _lt_reverse(ltg, u, rng):
    g = ltg.graph
    path = [u]
    seen = {u}
    x = u
    cost = 0
    while True:
        a, b = g.in_ptr[x], g.in_ptr[x + 1]
        if a == b:
            break
        w = ltg.in_w[a:b]
        r = rng.random()
        cum = np.cumsum(w)
        i = int(np.searchsorted(cum, r, side="right"))
        if i >= b - a:
            break
        y = int(g.in_nbr[a + i])
        cost += 1
        if y in seen:
            break
        seen.add(y)
        path.append(y)
        x = y
    return CascadeTrace(frozenset(path), frozenset([u]), tuple(path)), cost


def _ic_reverse(g, u, rng):
    seen = {u}
    order = [u]
    queue = deque([u])
    slot = g.slot_probs("in")
    cost = 0
    while queue:
        x = queue.popleft()
        a, b = g.in_ptr[x], g.in_ptr[x + 1]
        if a == b:
            continue
        hits = np.flatnonzero(rng.random(b - a) < (g.p if slot is None else slot[a:b]))
        cost += len(hits)
        for y in g.in_nbr[a:b][hits].tolist():
            if y not in seen:
                seen.add(y)
                order.append(y)
                queue.append(y)
    return CascadeTrace(frozenset(seen), frozenset([u]), tuple(order)), cost

