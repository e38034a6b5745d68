"""Influence maximization when the network is only visible through costly queries."""

from .baselines import greedy_full, one_hop, random_seeds, top_degree
from .cascade import (CascadeTrace, ExactInfluence, InfluenceEstimate, influence_exact, influence_mc,
                      lt_adoption_freq, simulate_ic, simulate_lt, spread_samples)
from .errors import (BudgetExhausted, CapacityError, ExhaustionError, ModelError, ParameterError,
                     ParseError, RangeError, SeedQueryError, SessionError)
from .experiment import ExperimentConfig, ProfitParams, profit, run_experiment, theorem2_bound
from .graph import (Graph, WeightedLTGraph, gen_clique_circle, gen_clique_plus_isolated, gen_erdos_renyi,
                    gen_preferential_attachment, gen_star, load_edge_list, load_edge_list_remapped,
                    serialize)
from .oracles import GraphOracle, ProbeSession, QueryLedger
from .probe import ProbeParams, Sketch, param_rho, param_T, param_tau, probe
from .rng import make_rng
from .seed import SeedResult, seed_from_sketch, sketch_coverage_value
from .spread import lt_spread_seed, param_rho_spread, spread_seed

__version__ = "0.1.0"
