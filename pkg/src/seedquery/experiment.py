"""Experiment runner: sweeps over query budgets, profit and bound calculators.

One row is produced per (sweep point, repetition). Each row's randomness
comes from ``derive(seed, point, rep)``, so rows are reproducible on their
own and the output does not depend on execution order.
"""

import configparser
import csv
import io
import json
import math
import time
from dataclasses import asdict, dataclass, field, fields

import numpy as np

from . import graph as gmod
from .baselines import greedy_full, one_hop, random_seeds, top_degree
from .cascade import influence_mc, simulate_lt
from .errors import ParameterError
from .graph import WeightedLTGraph
from .oracles import GraphOracle
from .probe import ProbeParams, initial_count, param_rho, param_T, param_tau, probe
from .rng import derive, spawn
from .seed import seed_from_sketch
from .spread import lt_spread_seed, spread_seed

SCHEMA_VERSION = 1

ROW_FIELDS = [
    "schema_version", "algorithm", "sweep_param", "sweep_value", "rep", "k",
    "seeds", "spread_mean", "spread_stderr", "edge_reveals", "kept_edges",
    "discarded_edges", "spread_queries", "reverse_queries", "reverse_edges",
    "nominations", "queries", "revealed_nodes", "revealed_edges", "profit",
]

ALGORITHMS = ("probe-seed", "spread-seed", "lt-spread-seed", "greedy", "random", "one-hop", "degree")


@dataclass(frozen=True)
class ProfitParams:
    c_s: float = 10.0   # cost per seed
    c_q: float = 1.0    # cost per query
    r: float = 0.1      # revenue per adopter

    def __post_init__(self):
        if min(self.c_s, self.c_q, self.r) < 0:
            raise ParameterError("profit parameters must be non-negative")


def profit(spread, k, queries, params=ProfitParams()):
    """r * spread - c_s * k - c_q * queries."""
    if min(spread, k, queries) < 0:
        raise ParameterError("profit inputs must be non-negative")
    return params.r * spread - params.c_s * k - params.c_q * queries


def theorem2_bound(n, k, epsilon, delta, p, rho=None, T=None, tau=None):
    """Predicted edge-query bound of limited probing.

    E = p tau (tau - 1) / 2 bounds the expected edges inside one component,
    C = n rho T (E + sqrt(delta (tau ln n + ln T) E)), and the bound is
    2C + (2 + sqrt 2) T n sqrt(delta + ln T). ``rho``, ``T`` and ``tau``
    default to the guarantee formulas as materialized by :func:`probe`
    (rho = ceil(n rho)/n, T and tau rounded up).
    """
    if not 0.0 <= p <= 1.0:
        raise ParameterError("p must lie in [0, 1]")
    if rho is None:
        rho = initial_count(n, param_rho(n, k, epsilon, delta)) / n
    if T is None:
        T = param_T(n, k, epsilon, delta)
    if tau is None:
        tau = param_tau(n, k, epsilon)
    if T < 1:
        raise ParameterError("T must be at least 1")
    E = p * tau * (tau - 1) / 2.0
    C = n * rho * T * (E + math.sqrt(delta * (tau * math.log(n) + math.log(T)) * E))
    bound = 2.0 * C + (2.0 + math.sqrt(2.0)) * T * n * math.sqrt(delta + math.log(T))
    return {"E": E, "C": C, "bound": bound, "rho": rho, "T": T, "tau": tau}


# ---------------------------------------------------------------------------
# configuration
# ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    algorithm: str = "probe-seed"
    graph: str = None               # edge-list path; overrides the generator
    generator: str = "pa"           # er | pa | star | clique-circle | clique-isolated
    gen_params: dict = field(default_factory=lambda: {"n": 2000, "m_attach": 2})
    graph_seed: int = 0
    p: float = 0.01
    model: str = "IC"               # IC | LT
    k: int = 5
    epsilon: float = 0.5
    delta: float = 1.0
    rho: float = None               # initial-node fraction; None -> formula
    T: int = None
    tau: int = None
    eps_prime: float = None
    rounds_rho: int = None          # spread queries per round
    sweep_param: str = None         # T | budget | rounds_rho | rho | tau | k
    sweep_values: list = field(default_factory=list)
    reps: int = 50
    eval_sims: int = 500
    seed: int = 0
    edge_budget: int = None
    profit: ProfitParams = field(default_factory=ProfitParams)

    def __post_init__(self):
        if self.algorithm not in ALGORITHMS:
            raise ParameterError(f"unknown algorithm {self.algorithm!r}")
        if self.reps < 1:
            raise ParameterError("reps must be at least 1")
        if self.eval_sims < 1:
            raise ParameterError("eval_sims must be at least 1")
        if self.model not in ("IC", "LT"):
            raise ParameterError("model must be IC or LT")

    def points(self):
        if not self.sweep_param:
            return [(None, None)]
        return [(self.sweep_param, v) for v in self.sweep_values]

    def at(self, name, value):
        """Copy with one swept parameter set (``budget`` maps to rounds_rho)."""
        if name is None:
            return self
        d = {f.name: getattr(self, f.name) for f in fields(self)}
        if name == "budget":
            d["rounds_rho"] = int(value) // self.k
        elif name in d:
            d[name] = value
        else:
            raise ParameterError(f"cannot sweep {name!r}")
        return ExperimentConfig(**d)


_INT = {"graph_seed", "k", "T", "tau", "rounds_rho", "reps", "eval_sims", "seed", "edge_budget"}
_FLOAT = {"p", "epsilon", "delta", "rho", "eps_prime"}


def _num(text):
    try:
        return int(text)
    except ValueError:
        return float(text)


def load_config(text):
    """Parse an INI config with sections [experiment], [graph], [sweep] and [profit]."""
    cp = configparser.ConfigParser()
    cp.read_string(text)
    d = {}
    for key, val in (cp["experiment"].items() if cp.has_section("experiment") else []):
        if key in _INT:
            d[key] = int(val)
        elif key in _FLOAT:
            d[key] = float(val)
        elif key in ("algorithm", "model"):
            d[key] = val
        else:
            raise ParameterError(f"unknown experiment key {key!r}")
    if cp.has_section("graph"):
        g = dict(cp["graph"])
        if "path" in g:
            d["graph"] = g.pop("path")
        if "generator" in g:
            d["generator"] = g.pop("generator")
        if "seed" in g:
            d["graph_seed"] = int(g.pop("seed"))
        if "p" in g:
            d["p"] = float(g.pop("p"))
        d["gen_params"] = {key: _num(v) for key, v in g.items()}
    if cp.has_section("sweep"):
        d["sweep_param"] = cp["sweep"]["param"]
        d["sweep_values"] = [_num(v) for v in cp["sweep"]["values"].replace(",", " ").split()]
    if cp.has_section("profit"):
        d["profit"] = ProfitParams(**{key: float(v) for key, v in cp["profit"].items()})
    return ExperimentConfig(**d)


# ---------------------------------------------------------------------------
# running
# ---------------------------------------------------------------------------

GENERATORS = {
    "er": lambda prm, seed, p: gmod.gen_erdos_renyi(int(prm["n"]), float(prm["edge_prob"]), seed, p),
    "pa": lambda prm, seed, p: gmod.gen_preferential_attachment(int(prm["n"]), int(prm.get("m_attach", 2)), seed, p),
    "star": lambda prm, seed, p: gmod.gen_star(int(prm["n"]), bool(prm.get("directed_out", 0)), p),
    "clique-circle": lambda prm, seed, p: gmod.gen_clique_circle(int(prm["n"]), float(prm["mu"]), seed, p)[0],
    "clique-isolated": lambda prm, seed, p: gmod.gen_clique_plus_isolated(int(prm["n"]), int(prm["clique_size"]), seed, p),
}


def build_graph(config):
    if config.graph:
        g = gmod.load_edge_file(config.graph, p=config.p)
    else:
        if config.generator not in GENERATORS:
            raise ParameterError(f"unknown generator {config.generator!r}")
        g = GENERATORS[config.generator](config.gen_params, config.graph_seed, config.p)
    if config.model == "LT":
        return WeightedLTGraph.random(g, derive(config.graph_seed, 1))
    return g


def _probe_params(cfg, n):
    rho = cfg.rho if cfg.rho is not None else param_rho(n, cfg.k, cfg.epsilon, cfg.delta)
    T = cfg.T if cfg.T is not None else param_T(n, cfg.k, cfg.epsilon, cfg.delta)
    tau = cfg.tau if cfg.tau is not None else param_tau(n, cfg.k, cfg.epsilon)
    return ProbeParams(rho, int(T), int(tau), cfg.epsilon, cfg.delta, cfg.k)


def run_once(cfg, g, rng):
    """Run ``cfg.algorithm`` once on ``g``; returns (SeedResult, oracle or None, extras)."""
    base = g.graph if isinstance(g, WeightedLTGraph) else g
    n, k = base.n, cfg.k
    oracle = GraphOracle(g, edge_budget=cfg.edge_budget)
    extra = {"revealed_nodes": 0, "revealed_edges": 0}
    alg = cfg.algorithm
    if alg == "probe-seed":
        params = _probe_params(cfg, n)
        if params.T == 0:
            return random_seeds(n, k, rng), oracle, extra
        sketch = probe(oracle, params, rng)
        res = seed_from_sketch(sketch, k, cfg.eps_prime, rng)
        extra = {"revealed_nodes": sketch.revealed_nodes(), "revealed_edges": sketch.revealed_edges()}
        return res, oracle, extra
    if alg in ("spread-seed", "lt-spread-seed"):
        rho = cfg.rounds_rho
        if rho is None:
            raise ParameterError("spread seeding needs rounds_rho (or a budget sweep)")
        if rho == 0:
            return random_seeds(n, k, rng), oracle, extra
        fn = spread_seed if alg == "spread-seed" else lt_spread_seed
        return fn(oracle, n, k, rho, rng), oracle, extra
    if alg == "greedy":
        return greedy_full(base, k, cfg.eval_sims, rng), None, extra
    if alg == "random":
        return random_seeds(n, k, rng), None, extra
    if alg == "one-hop":
        return one_hop(oracle, k, rng), oracle, extra
    return top_degree(base, k), None, extra


def evaluate(g, seeds, n_sims, rng):
    """Monte Carlo (mean, stderr) of the spread of ``seeds`` under the graph's own model."""
    if isinstance(g, WeightedLTGraph):
        x = np.array([len(simulate_lt(g, seeds, rng)) for _ in range(n_sims)], dtype=float)
        se = float(x.std(ddof=1) / math.sqrt(n_sims)) if n_sims > 1 else 0.0
        return float(x.mean()), se
    est = influence_mc(g, seeds, n_sims, rng)
    return est.mean, est.stderr


def run_experiment(config, graph=None, timing=False, progress=None):
    """Run every (sweep point, repetition) of ``config``; returns a list of row dicts."""
    g = graph if graph is not None else build_graph(config)
    rows = []
    for pi, (name, value) in enumerate(config.points()):
        cfg = config.at(name, value)
        for rep in range(config.reps):
            alg_rng, eval_rng = spawn(derive(config.seed, pi, rep), 2)
            t0 = time.perf_counter()
            res, oracle, extra = run_once(cfg, g, alg_rng)
            elapsed = time.perf_counter() - t0
            mean, se = evaluate(g, res.seeds, config.eval_sims, eval_rng)
            led = oracle.ledger.snapshot() if oracle else {
                "edge_reveals": 0, "kept_edges": 0, "discarded_edges": 0, "spread_queries": 0,
                "reverse_queries": 0, "reverse_edges": 0, "nominations": 0}
            queries = led["edge_reveals"] + led["spread_queries"] + led["reverse_queries"] + led["nominations"]
            row = {
                "schema_version": SCHEMA_VERSION, "algorithm": config.algorithm,
                "sweep_param": name or "", "sweep_value": "" if value is None else value,
                "rep": rep, "k": cfg.k, "seeds": " ".join(map(str, res.seeds)),
                "spread_mean": mean, "spread_stderr": se, **led, "queries": queries, **extra,
                "profit": profit(mean, cfg.k, queries, config.profit),
            }
            if timing:
                row["wall_time"] = elapsed
            rows.append(row)
            if progress:
                progress(row)
    return rows


def summarize(rows):
    """Per sweep point: mean spread with a 1.96-standard-error CI across reps, mean costs."""
    groups = {}
    for r in rows:
        groups.setdefault((r["sweep_param"], r["sweep_value"]), []).append(r)
    out = []
    for (name, value), rs in groups.items():
        s = np.array([r["spread_mean"] for r in rs])
        se = float(s.std(ddof=1) / math.sqrt(len(s))) if len(s) > 1 else 0.0
        out.append({
            "sweep_param": name, "sweep_value": value, "reps": len(rs),
            "spread_mean": float(s.mean()), "spread_se": se,
            "ci_low": float(s.mean()) - 1.96 * se, "ci_high": float(s.mean()) + 1.96 * se,
            "queries_mean": float(np.mean([r["queries"] for r in rs])),
            "edge_reveals_mean": float(np.mean([r["edge_reveals"] for r in rs])),
            "spread_queries_mean": float(np.mean([r["spread_queries"] for r in rs])),
            "profit_mean": float(np.mean([r["profit"] for r in rs])),
        })
    return out


def rows_to_csv(rows):
    cols = ROW_FIELDS + (["wall_time"] if rows and "wall_time" in rows[0] else [])
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
    w.writeheader()
    for r in rows:
        w.writerow({c: repr(r[c]) if isinstance(r[c], float) else r[c] for c in cols})
    return buf.getvalue()


def rows_to_json(rows, config=None):
    cfg = None
    if config is not None:
        cfg = asdict(config)
    return json.dumps({"schema_version": SCHEMA_VERSION, "config": cfg,
                       "summary": summarize(rows), "rows": rows}, indent=1)
