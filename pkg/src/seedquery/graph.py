"""Graph storage, edge-list I/O and the generators used in experiments.

Nodes are dense integer ids ``0..n-1``. Edges carry an activation
probability; a graph built with one cascade probability keeps it as a single
scalar and only materializes a per-edge array when the values differ.
"""

import io
import logging
import math

import numpy as np

from .errors import ModelError, ParameterError, ParseError, RangeError
from .rng import make_rng

log = logging.getLogger(__name__)

_INT = np.int64


def _csr(n, heads, tails, eids):
    """Adjacency in CSR form, neighbours sorted by id within each row."""
    order = np.lexsort((tails, heads))
    heads, tails, eids = heads[order], tails[order], eids[order]
    ptr = np.zeros(n + 1, dtype=_INT)
    np.add.at(ptr, heads + 1, 1)
    np.cumsum(ptr, out=ptr)
    for a in (ptr, tails, eids):
        a.setflags(write=False)
    return ptr, tails, eids


class Graph:
    """Immutable node/edge store with optional direction.

    Parameters
    ----------
    n : int
        Number of nodes.
    edges : iterable
        ``(u, v)`` or ``(u, v, prob)`` tuples. For undirected graphs ``(u, v)``
        and ``(v, u)`` are the same edge and the first occurrence wins.
    directed : bool
    p : float
        Activation probability for edges given without an explicit one.
    """

    def __init__(self, n, edges=(), directed=False, p=1.0):
        n = int(n)
        if n < 0:
            raise ParameterError("node count must be non-negative")
        if not 0.0 <= p <= 1.0:
            raise RangeError(f"edge probability {p} outside [0, 1]")
        self.n = n
        self.directed = bool(directed)

        seen = set()
        src, dst, prob = [], [], []
        for e in edges:
            u, v = int(e[0]), int(e[1])
            w = float(e[2]) if len(e) > 2 else p
            if not (0 <= u < n and 0 <= v < n):
                raise ParameterError(f"edge ({u}, {v}) references a node outside 0..{n - 1}")
            if u == v:
                raise ParameterError(f"self-loop on node {u}")
            if not 0.0 <= w <= 1.0:
                raise RangeError(f"edge ({u}, {v}) probability {w} outside [0, 1]")
            key = (u, v) if self.directed else (min(u, v), max(u, v))
            if key in seen:
                continue
            seen.add(key)
            src.append(u)
            dst.append(v)
            prob.append(w)

        self.src = np.asarray(src, dtype=_INT)
        self.dst = np.asarray(dst, dtype=_INT)
        probs = np.asarray(prob, dtype=float)
        if probs.size and np.all(probs == probs[0]):
            self.p, self.probs = float(probs[0]), None
        elif probs.size:
            self.p, self.probs = None, probs
            self.probs.setflags(write=False)
        else:
            self.p, self.probs = float(p), None
        self.src.setflags(write=False)
        self.dst.setflags(write=False)

        eid = np.arange(self.m, dtype=_INT)
        if self.directed:
            self.out_ptr, self.out_nbr, self.out_eid = _csr(n, self.src, self.dst, eid)
            self.in_ptr, self.in_nbr, self.in_eid = _csr(n, self.dst, self.src, eid)
        else:
            heads = np.concatenate([self.src, self.dst])
            tails = np.concatenate([self.dst, self.src])
            self.out_ptr, self.out_nbr, self.out_eid = _csr(n, heads, tails, np.concatenate([eid, eid]))
            self.in_ptr, self.in_nbr, self.in_eid = self.out_ptr, self.out_nbr, self.out_eid
        self._slot_prob = {}

    @property
    def m(self):
        return len(self.src)

    @property
    def uniform(self):
        return self.probs is None

    def __repr__(self):
        kind = "directed" if self.directed else "undirected"
        prob = f"p={self.p}" if self.uniform else "heterogeneous p"
        return f"Graph(n={self.n}, m={self.m}, {kind}, {prob})"

    def edge_prob(self, e):
        return self.p if self.probs is None else float(self.probs[e])

    def edge_probs(self):
        """Per-edge probabilities as an array (materialized on demand)."""
        if self.probs is None:
            return np.full(self.m, self.p)
        return self.probs

    @property
    def edges(self):
        return [(int(u), int(v), self.edge_prob(e))
                for e, (u, v) in enumerate(zip(self.src, self.dst))]

    def edge_set(self):
        if self.directed:
            return {(int(u), int(v)) for u, v in zip(self.src, self.dst)}
        return {(int(min(u, v)), int(max(u, v))) for u, v in zip(self.src, self.dst)}

    def out_neighbors(self, u):
        """Nodes ``u`` can influence, with the matching edge ids."""
        a, b = self.out_ptr[u], self.out_ptr[u + 1]
        return self.out_nbr[a:b], self.out_eid[a:b]

    def in_neighbors(self, v):
        """Nodes that can influence ``v``, with the matching edge ids."""
        a, b = self.in_ptr[v], self.in_ptr[v + 1]
        return self.in_nbr[a:b], self.in_eid[a:b]

    neighbors = out_neighbors

    def slot_probs(self, direction="out"):
        """Activation probability aligned with the ``out_nbr``/``in_nbr`` arrays, or None if uniform."""
        if self.probs is None:
            return None
        if direction not in self._slot_prob:
            eids = self.out_eid if direction == "out" else self.in_eid
            arr = self.probs[eids]
            arr.setflags(write=False)
            self._slot_prob[direction] = arr
        return self._slot_prob[direction]

    def out_degrees(self):
        return np.diff(self.out_ptr)

    def in_degrees(self):
        return np.diff(self.in_ptr)

    def degrees(self):
        if self.directed:
            return self.out_degrees() + self.in_degrees()
        return self.out_degrees()

    def degree(self, u):
        return int(self.degrees()[u])

    def with_prob(self, p):
        """Same topology with a uniform activation probability ``p``."""
        return Graph(self.n, zip(self.src.tolist(), self.dst.tolist()), self.directed, p)

    def with_edge_probs(self, probs):
        probs = np.asarray(probs, dtype=float)
        if probs.shape != (self.m,):
            raise ParameterError("need one probability per edge")
        return Graph(self.n, zip(self.src.tolist(), self.dst.tolist(), probs.tolist()), self.directed)

    def to_directed(self):
        """Each undirected edge becomes two opposite arcs with the same probability."""
        if self.directed:
            return self
        pr = self.edge_probs().tolist()
        arcs = [(u, v, w) for u, v, w in zip(self.src.tolist(), self.dst.tolist(), pr)]
        arcs += [(v, u, w) for u, v, w in zip(self.src.tolist(), self.dst.tolist(), pr)]
        return Graph(self.n, arcs, directed=True)

    def check(self):
        """Assert the adjacency index agrees with the edge arrays."""
        pairs = set()
        for u in range(self.n):
            nbrs, eids = self.out_neighbors(u)
            for v, e in zip(nbrs.tolist(), eids.tolist()):
                s, d = int(self.src[e]), int(self.dst[e])
                assert (s, d) == (u, v) or (not self.directed and (d, s) == (u, v))
                pairs.add((u, v))
        expected = self.m if self.directed else 2 * self.m
        assert len(pairs) == expected
        return True


class WeightedLTGraph:
    """Directed graph with linear-threshold weights ``b_uv`` on each arc.

    Incoming weights of every node must sum to at most one.
    """

    def __init__(self, graph, weights, tol=1e-9):
        if not graph.directed:
            graph = graph.to_directed()
            weights = np.concatenate([weights, weights]) if len(weights) * 2 == graph.m else weights
        weights = np.asarray(weights, dtype=float)
        if weights.shape != (graph.m,):
            raise ModelError("need one weight per arc")
        if np.any(weights < 0):
            raise ModelError("linear-threshold weights must be non-negative")
        totals = np.bincount(graph.dst, weights=weights, minlength=graph.n)
        if np.any(totals > 1.0 + tol):
            bad = int(np.argmax(totals))
            raise ModelError(f"incoming weight of node {bad} sums to {totals[bad]:.6g} > 1")
        self.graph = graph
        self.weights = weights
        self.weights.setflags(write=False)
        self.in_weight_total = totals
        self.in_w = weights[graph.in_eid]

    @property
    def n(self):
        return self.graph.n

    @property
    def directed(self):
        return True

    def in_weights(self, v):
        a, b = self.graph.in_ptr[v], self.graph.in_ptr[v + 1]
        return self.graph.in_nbr[a:b], self.in_w[a:b]

    def weight_matrix(self):
        w = np.zeros((self.n, self.n))
        w[self.graph.src, self.graph.dst] = self.weights
        return w

    @classmethod
    def random(cls, graph, rng, slack=1.0):
        """Random weights with each node's incoming total drawn uniform in [0, slack]."""
        rng = make_rng(rng)
        g = graph.to_directed()
        raw = rng.random(g.m)
        sums = np.bincount(g.dst, weights=raw, minlength=g.n)
        scale = rng.random(g.n) * slack
        w = np.where(sums[g.dst] > 0, raw / np.where(sums[g.dst] > 0, sums[g.dst], 1.0), 0.0)
        return cls(g, w * scale[g.dst])


# ---------------------------------------------------------------------------
# edge-list text format
# ---------------------------------------------------------------------------

def _read_lines(text):
    if isinstance(text, str):
        return io.StringIO(text)
    return text


def _parse(text):
    header = {}
    rows = []
    for lineno, raw in enumerate(_read_lines(text), start=1):
        line = raw.strip()
        if line.startswith("#"):
            parts = line[1:].split()
            if len(parts) == 2 and parts[0] == "nodes" and parts[1].isdigit():
                header["nodes"] = int(parts[1])
            elif len(parts) == 2 and parts[0] == "p":
                try:
                    header["p"] = float(parts[1])
                except ValueError:
                    raise ParseError(lineno, f"bad header probability {parts[1]!r}") from None
            elif parts == ["directed"]:
                header["directed"] = True
            continue
        line = line.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        if len(parts) not in (2, 3):
            raise ParseError(lineno, f"expected 'u v' or 'u v prob', got {line!r}")
        try:
            u, v = int(parts[0]), int(parts[1])
        except ValueError:
            raise ParseError(lineno, f"node ids must be integers, got {line!r}") from None
        if u < 0 or v < 0:
            raise ParseError(lineno, "node ids must be non-negative")
        if len(parts) == 3:
            try:
                w = float(parts[2])
            except ValueError:
                raise ParseError(lineno, f"bad probability {parts[2]!r}") from None
            if not 0.0 <= w <= 1.0 or math.isnan(w):
                raise RangeError(f"line {lineno}: probability {w} outside [0, 1]")
            rows.append((u, v, w))
        else:
            rows.append((u, v))
    return header, rows


def _drop_loops(rows):
    kept = [r for r in rows if r[0] != r[1]]
    if len(kept) != len(rows):
        log.warning("dropped %d self-loop line(s)", len(rows) - len(kept))
    return kept


def load_edge_list(text, directed=None, p=None):
    """Parse the whitespace edge-list format into a Graph.

    ``text`` is a string or an open text stream. Lines are ``u v`` or
    ``u v prob``; ``#`` starts a comment. The optional header comments
    ``# nodes N``, ``# p P`` and ``# directed`` written by :func:`serialize`
    are honoured. Without a node header, ``n`` is the largest id plus one.
    ``p`` (default: the header value, else 1) applies to edges without a
    probability column.
    """
    header, rows = _parse(text)
    rows = _drop_loops(rows)
    n = max((max(r[0], r[1]) for r in rows), default=-1) + 1
    if "nodes" in header:
        if header["nodes"] < n:
            raise ParseError(0, f"header declares {header['nodes']} nodes but ids reach {n - 1}")
        n = header["nodes"]
    if directed is None:
        directed = header.get("directed", False)
    if p is None:
        p = header.get("p", 1.0)
    return Graph(n, rows, directed=directed, p=p)


def load_edge_list_remapped(text, directed=False, p=1.0):
    """Like :func:`load_edge_list` but relabels sparse ids densely.

    Returns ``(graph, ids)`` where ``ids[i]`` is the original id of node ``i``;
    original ids are assigned in increasing order.
    """
    _, rows = _parse(text)
    rows = _drop_loops(rows)
    ids = sorted({r[0] for r in rows} | {r[1] for r in rows})
    index = {x: i for i, x in enumerate(ids)}
    remapped = [(index[r[0]], index[r[1]], *r[2:]) for r in rows]
    return Graph(len(ids), remapped, directed=directed, p=p), ids


def load_edge_file(path, directed=None, p=None):
    with open(path) as fh:
        return load_edge_list(fh, directed=directed, p=p)


def serialize(graph, with_probs=None):
    """Write ``graph`` in the edge-list format (round-trips through load_edge_list).

    The probability column is written when edges are heterogeneous, or when
    ``with_probs`` is true.
    """
    if with_probs is None:
        with_probs = not graph.uniform
    out = [f"# nodes {graph.n}"]
    if graph.uniform and not with_probs:
        out.append(f"# p {graph.p!r}")
    if graph.directed:
        out.append("# directed")
    for u, v, w in graph.edges:
        out.append(f"{u} {v} {w!r}" if with_probs else f"{u} {v}")
    return "\n".join(out) + "\n"


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

def gen_erdos_renyi(n, edge_prob, rng_seed=None, p=1.0):
    """G(n, q): each unordered pair is an edge independently with ``edge_prob``."""
    if n < 1:
        raise ParameterError("n must be at least 1")
    if not 0.0 <= edge_prob <= 1.0:
        raise ParameterError("edge_prob must lie in [0, 1]")
    rng = make_rng(rng_seed)
    iu, ju = np.triu_indices(n, k=1)
    mask = rng.random(len(iu)) < edge_prob
    return Graph(n, zip(iu[mask].tolist(), ju[mask].tolist()), p=p)


def gen_preferential_attachment(n, m_attach, rng_seed=None, p=1.0, relabel=True):
    """Barabasi-Albert style growth: each new node links to ``m_attach`` degree-biased targets.

    With ``relabel`` the node ids are randomly permuted at the end, so that
    id order (used for tie-breaking everywhere) says nothing about age or degree.
    """
    if m_attach < 1 or n <= m_attach:
        raise ParameterError("need 1 <= m_attach < n")
    rng = make_rng(rng_seed)
    edges = []
    targets = list(range(m_attach))
    repeated = []
    for new in range(m_attach, n):
        edges.extend((new, t) for t in targets)
        repeated.extend(targets)
        repeated.extend([new] * m_attach)
        chosen = set()
        while len(chosen) < m_attach:
            chosen.add(repeated[int(rng.integers(len(repeated)))])
        targets = sorted(chosen)
    if relabel:
        perm = rng.permutation(n).tolist()
        edges = [(perm[u], perm[v]) for u, v in edges]
    return Graph(n, edges, p=p)


def _integral(x, name):
    r = round(x)
    if r < 1 or not math.isclose(x, r, rel_tol=0, abs_tol=1e-9):
        raise ParameterError(f"{name} = {x:g} must be a positive integer")
    return int(r)


def clique_circle_shape(n, mu):
    """(number of cliques, clique size, number of linked cliques) or ParameterError."""
    if not 0.0 < mu <= 1.0:
        raise ParameterError("mu must lie in (0, 1]")
    linked = _integral(3.0 / mu, "3/mu")
    cliques = _integral(9.0 / mu ** 2, "9/mu^2")
    size = _integral(mu ** 2 * n / 9.0, "mu^2 n/9")
    if size < 2:
        raise ParameterError("cliques need at least two nodes")
    return cliques, size, linked


def gen_clique_circle(n, mu, rng_seed=None, p=1.0):
    """Hard instance for edge queries: many cliques, a few rewired into a ring.

    Builds ``9/mu^2`` disjoint cliques of ``mu^2 n/9`` nodes (node ids are
    contiguous per clique), picks ``3/mu`` of them uniformly, removes one random
    edge ``(v_i, u_i)`` from each and adds ``(u_i, v_{i+1})`` cyclically, which
    links the picked cliques while keeping every degree unchanged.

    Returns ``(graph, info)`` with ``info`` holding ``linked`` (clique indices in
    ring order), ``clique_size``, ``n_cliques`` and ``removed``/``added`` edges.
    """
    n_cliques, size, n_linked = clique_circle_shape(n, mu)
    rng = make_rng(rng_seed)
    linked = sorted(rng.choice(n_cliques, size=n_linked, replace=False).tolist())
    order = rng.permutation(linked).tolist()

    removed = []
    for c in order:
        a, b = sorted(rng.choice(size, size=2, replace=False).tolist())
        if rng.random() < 0.5:
            a, b = b, a
        removed.append((c * size + a, c * size + b))  # (v_i, u_i)
    added = [(removed[i][1], removed[(i + 1) % n_linked][0]) for i in range(n_linked)]

    drop = {(min(e), max(e)) for e in removed}
    edges = []
    for c in range(n_cliques):
        base = c * size
        for i in range(size):
            for j in range(i + 1, size):
                if (base + i, base + j) not in drop:
                    edges.append((base + i, base + j))
    edges.extend(added)
    info = {"linked": order, "clique_size": size, "n_cliques": n_cliques,
            "removed": removed, "added": added}
    return Graph(n_cliques * size, edges, p=p), info


def clique_members(info, clique):
    size = info["clique_size"]
    return list(range(clique * size, (clique + 1) * size))


def gen_clique_plus_isolated(n, clique_size, rng_seed=None, p=1.0):
    """One clique on ``clique_size`` uniformly chosen ids; every other node isolated."""
    if not 0 <= clique_size <= n:
        raise ParameterError("clique_size must lie in [0, n]")
    rng = make_rng(rng_seed)
    members = np.sort(rng.choice(n, size=clique_size, replace=False)).tolist()
    edges = [(members[i], members[j]) for i in range(clique_size) for j in range(i + 1, clique_size)]
    return Graph(n, edges, p=p)


def gen_star(n, directed_out=False, p=1.0):
    """Star with centre 0; with ``directed_out`` every arc points away from the centre."""
    if n < 2:
        raise ParameterError("a star needs at least two nodes")
    return Graph(n, [(0, leaf) for leaf in range(1, n)], directed=directed_out, p=p)


def gen_random_tiny(rng, max_n=10, max_m=16, min_n=2, p=0.5, directed=False):
    """Small random graph for exhaustive checks: n in [min_n, max_n], at most max_m edges."""
    rng = make_rng(rng)
    n = int(rng.integers(min_n, max_n + 1))
    pairs = [(i, j) for i in range(n) for j in range(n) if i != j and (directed or i < j)]
    m = int(rng.integers(0, min(max_m, len(pairs)) + 1))
    pick = rng.choice(len(pairs), size=m, replace=False)
    return Graph(n, [pairs[i] for i in sorted(pick.tolist())], directed=directed, p=p)
