"""Command-line entry point: ``seedquery <command> [options]``."""

import argparse
import json
import logging
import sys
import time

from . import graph as gmod
from .baselines import greedy_full, one_hop, random_seeds, top_degree
from .cascade import influence_mc
from .errors import SeedQueryError
from .experiment import (ExperimentConfig, evaluate, load_config, rows_to_csv, rows_to_json,
                         run_experiment, theorem2_bound)
from .graph import WeightedLTGraph
from .oracles import GraphOracle
from .probe import ProbeParams, Sketch, param_rho, param_T, param_tau, probe
from .rng import derive, make_rng
from .seed import seed_from_sketch
from .spread import lt_spread_seed, param_rho_spread, spread_seed


def _emit(args, payload, rows=None):
    """Write ``payload`` (a dict) as JSON, or ``rows`` as CSV when --format csv."""
    if args.format == "csv" and rows is not None:
        text = rows_to_csv(rows) if rows and "schema_version" in rows[0] else _flat_csv(rows)
    else:
        text = json.dumps(payload, indent=1) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _flat_csv(rows):
    import csv
    import io
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _load_graph(args):
    if not args.graph:
        raise SeedQueryError("--graph is required")
    g = gmod.load_edge_file(args.graph, directed=True if args.directed else None, p=args.p)
    if getattr(args, "lt", False):
        return WeightedLTGraph.random(g, derive(args.seed, 1))
    return g


def _result_out(args, res, g, rng, started):
    payload = res.to_dict()
    if args.eval_sims:
        payload["spread_mean"], payload["spread_stderr"] = evaluate(g, res.seeds, args.eval_sims, rng)
    if args.timing:
        payload["wall_time"] = time.perf_counter() - started
    row = {"algorithm": res.algorithm, "seeds": " ".join(map(str, res.seeds)),
           "sketch_value": res.sketch_value, **res.query_cost,
           **{key: payload[key] for key in ("spread_mean", "spread_stderr", "wall_time") if key in payload}}
    _emit(args, payload, [row])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args):
    kind = args.kind
    if kind == "er":
        g = gmod.gen_erdos_renyi(args.n, args.edge_prob, args.seed, args.p)
    elif kind == "pa":
        g = gmod.gen_preferential_attachment(args.n, args.m_attach, args.seed, args.p)
    elif kind == "star":
        g = gmod.gen_star(args.n, args.directed, args.p)
    elif kind == "clique-circle":
        g, info = gmod.gen_clique_circle(args.n, args.mu, args.seed, args.p)
        sys.stderr.write(f"linked cliques: {info['linked']}\n")
    else:
        g = gmod.gen_clique_plus_isolated(args.n, args.clique_size, args.seed, args.p)
    text = gmod.serialize(g)
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def cmd_probe_seed(args):
    started = time.perf_counter()
    rng = make_rng(args.seed)
    if args.sketch:
        with open(args.sketch) as fh:
            sketch = Sketch.loads(fh.read())
        g = _load_graph(args) if args.graph else None
    else:
        g = _load_graph(args)
        n = g.n
        params = ProbeParams(
            args.rho if args.rho is not None else param_rho(n, args.k, args.epsilon, args.delta),
            args.T if args.T is not None else param_T(n, args.k, args.epsilon, args.delta),
            args.tau if args.tau is not None else param_tau(n, args.k, args.epsilon),
            args.epsilon, args.delta, args.k)
        sketch = probe(GraphOracle(g), params, rng)
        if args.save_sketch:
            with open(args.save_sketch, "w") as fh:
                fh.write(sketch.dumps())
    res = seed_from_sketch(sketch, args.k, args.eps_prime, rng)
    res.rng_seed = args.seed
    if g is None:
        args.eval_sims = 0
    _result_out(args, res, g, rng, started)


def cmd_spread_seed(args, lt=False):
    started = time.perf_counter()
    args.lt = lt
    g = _load_graph(args)
    rng = make_rng(args.seed)
    rho = args.rounds_rho or param_rho_spread(g.n, args.k, args.epsilon)
    fn = lt_spread_seed if lt else spread_seed
    res = fn(GraphOracle(g), g.n, args.k, rho, rng, verbose=args.verbose)
    res.rng_seed = args.seed
    _result_out(args, res, g, rng, started)


def cmd_baseline(args):
    started = time.perf_counter()
    g = _load_graph(args)
    rng = make_rng(args.seed)
    if args.command == "greedy":
        res = greedy_full(g, args.k, args.greedy_sims, rng)
    elif args.command == "random":
        res = random_seeds(g.n, args.k, rng)
    elif args.command == "one-hop":
        res = one_hop(GraphOracle(g), args.k, rng)
    else:
        res = top_degree(g, args.k)
    res.rng_seed = args.seed
    _result_out(args, res, g, rng, started)


def cmd_eval(args):
    g = _load_graph(args)
    if args.seeds_file:
        with open(args.seeds_file) as fh:
            seeds = [int(x) for x in fh.read().split()]
    else:
        seeds = [int(x) for x in args.seeds.replace(",", " ").split()]
    est = influence_mc(g, seeds, args.eval_sims or 500, make_rng(args.seed))
    payload = {"seeds": seeds, "spread_mean": est.mean, "spread_stderr": est.stderr, "n_sims": est.n_sims}
    _emit(args, payload, [{**payload, "seeds": " ".join(map(str, seeds))}])


def cmd_bound(args):
    n, k, eps, delta = args.n, args.k, args.epsilon, args.delta
    out = theorem2_bound(n, k, eps, delta, args.p)
    out.update({"n": n, "k": k, "epsilon": eps, "delta": delta, "p": args.p,
                "rho_formula": param_rho(n, k, eps, delta),
                "initial_nodes": round(out["rho"] * n),
                "rho_spread": param_rho_spread(n, k, eps) if eps <= 1 else None})
    _emit(args, out, [out])


def cmd_sweep(args):
    if args.config:
        with open(args.config) as fh:
            cfg = load_config(fh.read())
    else:
        cfg = ExperimentConfig()
    overrides = {
        "algorithm": args.algorithm, "graph": args.graph, "p": args.p if args.p_given else None,
        "k": args.k_given and args.k, "epsilon": args.epsilon_given and args.epsilon,
        "delta": args.delta_given and args.delta, "eps_prime": args.eps_prime,
        "rho": args.rho, "T": args.T, "tau": args.tau, "rounds_rho": args.rounds_rho,
        "reps": args.reps, "eval_sims": args.eval_sims, "seed": args.seed_given and args.seed,
    }
    for key, val in overrides.items():
        if val is not None and val is not False:
            setattr(cfg, key, val)
    if args.sweep:
        name, _, values = args.sweep.partition("=")
        cfg.sweep_param = name
        cfg.sweep_values = [float(v) if "." in v else int(v) for v in values.split(",")]
    cfg.__post_init__()
    progress = (lambda r: sys.stderr.write(f"{r['sweep_param']}={r['sweep_value']} rep {r['rep']}: "
                                           f"{r['spread_mean']:.2f}\n")) if args.verbose else None
    rows = run_experiment(cfg, timing=args.timing, progress=progress)
    text = rows_to_csv(rows) if args.format == "csv" else rows_to_json(rows, cfg) + "\n"
    if args.out and args.out != "-":
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

class _Track(argparse.Action):
    """Store the value and remember that the user gave it explicitly."""

    def __call__(self, parser, ns, values, option_string=None):
        setattr(ns, self.dest, values)
        setattr(ns, self.dest + "_given", True)


def _common(p, graph=True):
    if graph:
        p.add_argument("--graph", help="edge-list file (u v [prob] per line)")
        p.add_argument("--directed", action="store_true", help="read the edge list as directed")
    p.add_argument("--p", type=float, action=_Track,
                   help="cascade probability for edges without one (default: the file's '# p' header, else 1)")
    p.add_argument("--k", type=int, default=5, action=_Track, help="number of seeds (default 5)")
    p.add_argument("--seed", type=int, default=0, action=_Track, help="RNG seed (default 0)")
    p.add_argument("--out", help="output file (default stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="json", help="output format (default json)")
    p.add_argument("--eval-sims", type=int, default=500, help="cascades used to score the result (default 500, 0 = skip)")
    p.add_argument("--timing", action="store_true", help="record wall-clock time (breaks byte-identical reruns)")
    p.add_argument("-v", "--verbose", action="store_true")
    p.set_defaults(p_given=False, k_given=False, seed_given=False, epsilon_given=False, delta_given=False)


def _probe_flags(p):
    p.add_argument("--epsilon", type=float, default=0.5, action=_Track, help="accuracy parameter (default 0.5)")
    p.add_argument("--delta", type=float, default=1.0, action=_Track, help="confidence parameter (default 1)")
    p.add_argument("--rho", type=float, help="fraction of initial nodes (default from epsilon, delta)")
    p.add_argument("--T", type=int, help="number of probed copies (default from epsilon, delta)")
    p.add_argument("--tau", type=int, help="component-size cap (default from epsilon)")
    p.add_argument("--eps-prime", type=float, help="candidate-pool accuracy (default epsilon/7)")


def build_parser():
    ap = argparse.ArgumentParser(prog="seedquery", description=__doc__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a graph and write it as an edge list")
    p.add_argument("kind", choices=("er", "pa", "star", "clique-circle", "clique-isolated"))
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--edge-prob", type=float, default=0.01, help="pair probability for er")
    p.add_argument("--m-attach", type=int, default=2, help="links per new node for pa")
    p.add_argument("--mu", type=float, default=0.3, help="clique-circle parameter")
    p.add_argument("--clique-size", type=int, default=100)
    _common(p, graph=False)
    p.add_argument("--directed", action="store_true", help="orient star edges away from the centre")
    p.set_defaults(func=cmd_gen, p=1.0)

    p = sub.add_parser("probe-seed", help="probe a sketch and seed from it")
    _common(p)
    _probe_flags(p)
    p.add_argument("--sketch", help="seed from a saved sketch instead of probing")
    p.add_argument("--save-sketch", help="write the probed sketch as JSON")
    p.set_defaults(func=cmd_probe_seed)

    for name, lt in (("spread-seed", False), ("lt-spread-seed", True)):
        p = sub.add_parser(name, help=("LT reversed-cascade" if lt else "spread-query") + " seeding")
        _common(p)
        p.add_argument("--epsilon", type=float, default=0.5, help="sets the default rounds-rho")
        p.add_argument("--rounds-rho", type=int, help="queries per round (default from epsilon)")
        p.set_defaults(func=lambda a, lt=lt: cmd_spread_seed(a, lt))

    for name in ("greedy", "random", "one-hop", "degree"):
        p = sub.add_parser(name, help=f"{name} baseline")
        _common(p)
        if name == "greedy":
            p.add_argument("--greedy-sims", type=int, default=200, help="cascades per marginal estimate")
        p.set_defaults(func=cmd_baseline)

    p = sub.add_parser("eval", help="estimate the spread of a seed set")
    _common(p)
    p.add_argument("--seeds", default="", help="comma or space separated ids")
    p.add_argument("--seeds-file", help="file with whitespace separated ids")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("bound", help="parameter formulas and the edge-query bound")
    _common(p, graph=False)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--epsilon", type=float, default=0.5)
    p.add_argument("--delta", type=float, default=1.0)
    p.set_defaults(func=cmd_bound)

    p = sub.add_parser("sweep", help="run an experiment grid and write CSV/JSON rows")
    _common(p)
    _probe_flags(p)
    p.add_argument("--config", help="INI file with [experiment] [graph] [sweep] [profit] sections")
    p.add_argument("--algorithm", help="probe-seed, spread-seed, lt-spread-seed, greedy, random, one-hop, degree")
    p.add_argument("--rounds-rho", type=int)
    p.add_argument("--reps", type=int, help="repetitions per sweep point (default 50)")
    p.add_argument("--sweep", help="NAME=v1,v2,... where NAME is T, budget, rounds_rho, rho, tau or k")
    p.set_defaults(func=cmd_sweep, format="csv", eval_sims=None)
    return ap


def main(argv=None):
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        args.func(args)
    except (SeedQueryError, OSError) as exc:
        sys.stderr.write(f"seedquery: error: {exc}\n")
        return 2
    return 0


if __name__ == "__main__":
    sys.exit(main())
