"""Sketch construction by limited probing.

A sketch is ``T`` independently probed copies of the graph that all start
from one fixed random set of initial nodes. Each copy is reduced to groups of
nodes carrying a value:

* undirected graphs: groups are the connected components of the copy and a
  group's value is the number of initial nodes inside it;
* directed graphs: one group per initial node ``s`` holding every node with a
  kept path to ``s``, value 1. Covering a group then means reaching ``s``.

Either way, the value of a seed set is the total value of the groups it
touches, which is a coverage function.

All logarithms in the parameter formulas are natural logarithms.
"""

import json
import logging
import math
from collections import deque
from dataclasses import asdict, dataclass

import numpy as np

from .errors import BudgetExhausted, ParameterError
from .rng import make_rng, spawn

log = logging.getLogger(__name__)

SKETCH_FORMAT = "seedquery-sketch"
SKETCH_VERSION = 1


# ---------------------------------------------------------------------------
# parameter formulas
# ---------------------------------------------------------------------------

def _check(n, k, epsilon, delta=None):
    if n < 2:
        raise ParameterError("n must be at least 2")
    if k < 1:
        raise ParameterError("k must be at least 1")
    if not 0.0 < epsilon <= 1.0:
        raise ParameterError("epsilon must lie in (0, 1]")
    if delta is not None and not delta > 0.0:
        raise ParameterError("delta must be positive")


def rho_formula(n, k, epsilon, delta):
    """Unclamped sampling fraction (2+e)(k d ln n + ln 2) / (2 e^2 n)."""
    _check(n, k, epsilon, delta)
    return (2.0 + epsilon) * (k * delta * math.log(n) + math.log(2.0)) / (2.0 * epsilon ** 2 * n)


def T_formula(n, k, epsilon, delta):
    """Unrounded copy count 3 (d + ln 2)(k + 1) ln n / e^2."""
    _check(n, k, epsilon, delta)
    return 3.0 * (delta + math.log(2.0)) * (k + 1) * math.log(n) / epsilon ** 2


def tau_formula(n, k, epsilon):
    """Unrounded component cap n ln(1/e) / (e k)."""
    if n < 2:
        raise ParameterError("n must be at least 2")
    if k < 1:
        raise ParameterError("k must be at least 1")
    if not epsilon > 0.0:
        raise ParameterError("epsilon must be positive")
    return n * math.log(1.0 / epsilon) / (epsilon * k)


def _ceil(x):
    # guard against 177.00000000000003 style round-off
    return int(math.ceil(x - 1e-9))


def param_rho(n, k, epsilon, delta):
    """Fraction of nodes to sample as initial nodes, clamped to (0, 1]."""
    return min(1.0, rho_formula(n, k, epsilon, delta))


def initial_count(n, rho):
    """Number of initial nodes implied by ``rho``: ceil(n rho), at least 1."""
    if not 0.0 < rho <= 1.0:
        raise ParameterError("rho must lie in (0, 1]")
    return max(1, min(n, _ceil(n * rho)))


def param_T(n, k, epsilon, delta):
    return _ceil(T_formula(n, k, epsilon, delta))


def param_tau(n, k, epsilon):
    """Component-size cap, rounded up and capped at ``n``; at least 1."""
    raw = tau_formula(n, k, epsilon)
    if raw <= 0.0:
        log.warning("tau formula gives %.3g for epsilon=%g; using 1", raw, epsilon)
        return 1
    return min(n, _ceil(raw))


@dataclass(frozen=True)
class ProbeParams:
    rho: float
    T: int
    tau: int
    epsilon: float = None
    delta: float = None
    k: int = None

    def __post_init__(self):
        if not 0.0 < self.rho <= 1.0:
            raise ParameterError("rho must lie in (0, 1]")
        if int(self.T) != self.T or self.T < 0:
            raise ParameterError("T must be a non-negative integer")
        if int(self.tau) != self.tau or self.tau < 1:
            raise ParameterError("tau must be a positive integer")

    @classmethod
    def from_guarantee(cls, n, k, epsilon, delta):
        """Parameters that carry the approximation guarantee for (n, k, epsilon, delta)."""
        return cls(param_rho(n, k, epsilon, delta), param_T(n, k, epsilon, delta),
                   param_tau(n, k, epsilon), epsilon, delta, k)


# ---------------------------------------------------------------------------
# sketch
# ---------------------------------------------------------------------------

@dataclass
class SketchCopy:
    index: int
    members: np.ndarray      # node ids, concatenated group by group
    group_ptr: np.ndarray    # group g owns members[group_ptr[g]:group_ptr[g+1]]
    values: np.ndarray       # initial-node count of each group
    edges: np.ndarray        # kept edges, shape (e, 2)
    kept_edges: int = 0
    discarded_edges: int = 0
    probed: int = 0
    log: list = None         # (node, [(other, kept), ...]) per probe, if requested

    @property
    def n_groups(self):
        return len(self.values)

    def groups(self):
        return [self.members[a:b] for a, b in zip(self.group_ptr[:-1], self.group_ptr[1:])]

    def nodes(self):
        return np.unique(self.members)

    @classmethod
    def from_groups(cls, index, groups, values, edges=(), **counts):
        sizes = [len(g) for g in groups]
        ptr = np.zeros(len(groups) + 1, dtype=np.int64)
        ptr[1:] = np.cumsum(sizes)
        members = np.concatenate([np.asarray(g, dtype=np.int64) for g in groups]) if groups else np.zeros(0, np.int64)
        return cls(index, members, ptr, np.asarray(values, dtype=np.int64),
                   np.asarray(edges, dtype=np.int64).reshape(-1, 2), **counts)


class Sketch:
    """Initial nodes plus ``T`` probed copies reduced to valued groups."""

    def __init__(self, n, initial_nodes, copies, directed=False, params=None, ledger=None):
        self.n = int(n)
        self.initial_nodes = np.sort(np.asarray(initial_nodes, dtype=np.int64))
        self.copies = list(copies)
        self.directed = directed
        self.params = params
        self.ledger = ledger or {}
        self._index = None

    @property
    def T(self):
        return len(self.copies)

    @property
    def rho(self):
        """Effective sampling fraction |initial nodes| / n."""
        return len(self.initial_nodes) / self.n

    def memberships(self):
        """Flattened ``(node, group)`` pairs across copies and the initial group values.

        Pairs are sorted by node; ``node_ptr`` indexes each node's slice.
        """
        if self._index is None:
            nodes, groups, values = [], [], []
            offset = 0
            for c in self.copies:
                sizes = np.diff(c.group_ptr)
                nodes.append(c.members)
                groups.append(np.repeat(np.arange(offset, offset + c.n_groups), sizes))
                values.append(c.values)
                offset += c.n_groups
            node = np.concatenate(nodes) if nodes else np.zeros(0, np.int64)
            group = np.concatenate(groups) if groups else np.zeros(0, np.int64)
            order = np.argsort(node, kind="stable")
            node, group = node[order], group[order]
            ptr = np.searchsorted(node, np.arange(self.n + 1))
            value = np.concatenate(values) if values else np.zeros(0, np.int64)
            self._index = (node, group, ptr, value)
        return self._index

    def groups_of(self, v):
        node, group, ptr, _ = self.memberships()
        return group[ptr[v]:ptr[v + 1]]

    def revealed_nodes(self):
        """Distinct nodes appearing in any copy."""
        if not self.copies:
            return len(self.initial_nodes)
        return len(np.unique(np.concatenate([c.members for c in self.copies] + [self.initial_nodes])))

    def revealed_edges(self):
        """Distinct edges kept in any copy."""
        es = [c.edges for c in self.copies if len(c.edges)]
        if not es:
            return 0
        e = np.concatenate(es)
        if not self.directed:
            e = np.sort(e, axis=1)
        return len(np.unique(e, axis=0))

    # -- serialization -------------------------------------------------------

    def to_dict(self):
        return {
            "format": SKETCH_FORMAT,
            "version": SKETCH_VERSION,
            "n": self.n,
            "directed": self.directed,
            "initial_nodes": self.initial_nodes.tolist(),
            "params": asdict(self.params) if self.params else None,
            "ledger": self.ledger,
            "copies": [
                {
                    "index": c.index,
                    "groups": [g.tolist() for g in c.groups()],
                    "values": c.values.tolist(),
                    "edges": c.edges.tolist(),
                    "kept_edges": c.kept_edges,
                    "discarded_edges": c.discarded_edges,
                    "probed": c.probed,
                }
                for c in self.copies
            ],
        }

    def dumps(self):
        return json.dumps(self.to_dict(), separators=(",", ":"))

    @classmethod
    def from_dict(cls, d):
        if d.get("format") != SKETCH_FORMAT:
            raise ParameterError("not a sketch file")
        if d.get("version") != SKETCH_VERSION:
            raise ParameterError(f"unsupported sketch version {d.get('version')}")
        copies = [SketchCopy.from_groups(c["index"], c["groups"], c["values"], c["edges"],
                                         kept_edges=c["kept_edges"], discarded_edges=c["discarded_edges"],
                                         probed=c["probed"])
                  for c in d["copies"]]
        params = ProbeParams(**d["params"]) if d.get("params") else None
        return cls(d["n"], d["initial_nodes"], copies, d["directed"], params, d.get("ledger"))

    @classmethod
    def loads(cls, text):
        return cls.from_dict(json.loads(text))


# ---------------------------------------------------------------------------
# probing
# ---------------------------------------------------------------------------

def _probe_undirected(oracle, session, initial, tau, rng):
    parent = {s: s for s in initial}
    size = dict.fromkeys(initial, 1)
    edges = []

    def find(x):
        root = x
        while parent[root] != root:
            root = parent[root]
        while parent[x] != root:
            parent[x], x = root, parent[x]
        return root

    probed = session.probed
    exhausted = False
    for s in initial:
        if s in probed or size[find(s)] > tau:
            continue
        queue = deque([s])
        while queue:
            v = queue.popleft()
            if v in probed or size[find(v)] > tau:
                continue
            try:
                revealed = oracle.edge_probe(session, v, rng)
            except BudgetExhausted:
                exhausted = True
                break
            for e in revealed:
                if not e.kept:
                    continue
                w = e.other
                if w not in parent:
                    parent[w] = w
                    size[w] = 1
                edges.append((v, w))
                a, b = find(v), find(w)
                if a != b:
                    if size[a] < size[b]:
                        a, b = b, a
                    parent[b] = a
                    size[a] += size[b]
                if w not in probed:
                    queue.append(w)
        if exhausted:
            break

    init = set(initial)
    comps = {}
    for x in parent:
        comps.setdefault(find(x), []).append(x)
    groups = [sorted(g) for g in comps.values()]
    groups.sort(key=lambda g: g[0])
    values = [sum(1 for x in g if x in init) for g in groups]
    return groups, values, edges, exhausted


def _probe_directed(oracle, session, initial, tau, rng):
    in_kept = {}
    edges = []
    probed = session.probed
    exhausted = False
    for s in initial:
        seen = {s}
        queue = deque([s])
        while queue and not exhausted:
            if len(seen) > tau:
                break
            x = queue.popleft()
            if x not in probed:
                try:
                    revealed = oracle.edge_probe(session, x, rng)
                except BudgetExhausted:
                    exhausted = True
                    break
                lst = in_kept.setdefault(x, [])
                for e in revealed:
                    lst.append(e.other)
                    edges.append((e.other, x))
            for y in in_kept.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        if exhausted:
            break

    groups = []
    for s in initial:
        seen = {s}
        queue = deque([s])
        while queue:
            x = queue.popleft()
            for y in in_kept.get(x, ()):
                if y not in seen:
                    seen.add(y)
                    queue.append(y)
        groups.append(sorted(seen))
    return groups, [1] * len(groups), edges, exhausted


def probe(oracle, params, rng, keep_log=False):
    """Build a :class:`Sketch` through ``oracle`` with limited probing.

    The initial nodes are drawn once (without replacement) and shared by all
    ``T`` copies. In every copy each initial node, in increasing id order,
    starts a breadth-first probe; a node is only probed while its component
    holds at most ``tau`` nodes, so a component overshoots ``tau`` by at most
    one reveal batch. If the oracle's edge budget runs out, probing stops
    everywhere and the remaining copies keep only the initial nodes.
    ``keep_log`` stores each copy's probe sequence on ``SketchCopy.log``.
    """
    rng = make_rng(rng)
    n = oracle.n
    count = initial_count(n, params.rho)
    initial = np.sort(rng.choice(n, size=count, replace=False)).tolist()
    build = _probe_directed if oracle.directed else _probe_undirected
    copies = []
    exhausted = False
    for i, sub in enumerate(spawn(rng, params.T)):
        session = oracle.new_session(copy_index=i, keep_log=keep_log)
        if exhausted:
            groups = [[s] for s in initial]
            values, edges = [1] * len(initial), []
        else:
            groups, values, edges, exhausted = build(oracle, session, initial, params.tau, sub)
        copies.append(SketchCopy.from_groups(i, groups, values, edges,
                                             kept_edges=session.kept_edges,
                                             discarded_edges=session.discarded_edges,
                                             probed=len(session.probed), log=session.log))
    return Sketch(n, initial, copies, oracle.directed, params, oracle.ledger.snapshot())
