"""Evolving, resource-bounded agents that learn hidden quantum processes."""

from .agent import Agent, History, delta, future_cone, ret, reward
from .channels import (
    QuantumChannel,
    choi_from_channel,
    depolarizing_channel,
    maximally_entangled_state,
    registry_channel,
)
from .costexpr import parse as parse_cost_expr
from .costexpr import seed_expr, serialize as serialize_cost_expr
from .environment import (
    PatternEnv,
    QuantumAction,
    QuantumEnvConfig,
    QuantumProcessEnv,
    toy_pattern_env,
)
from .gene import Gene, mutate, seed_gene
from .hypervisor import Hypervisor, RunConfig, run_population
from .least import (
    ExecutionTrace,
    LeastBounds,
    LeastEstimate,
    estimate_least,
    eval_cost,
    within_bounds,
)
from .paulis import PauliString
from .states import DensityMatrix, apply_unitary, expectation, measure_projective, tensor
from .strategy import HypothesisDriver, QPTStrategy, select_strategy
from .tomography import eapt, predict, point_prediction, qst, sqpt

__version__ = "0.1.0"

__all__ = [
    "Agent",
    "DensityMatrix",
    "ExecutionTrace",
    "Gene",
    "History",
    "HypothesisDriver",
    "Hypervisor",
    "LeastBounds",
    "LeastEstimate",
    "PatternEnv",
    "PauliString",
    "QPTStrategy",
    "QuantumAction",
    "QuantumChannel",
    "QuantumEnvConfig",
    "QuantumProcessEnv",
    "RunConfig",
    "apply_unitary",
    "choi_from_channel",
    "delta",
    "depolarizing_channel",
    "eapt",
    "estimate_least",
    "eval_cost",
    "expectation",
    "future_cone",
    "maximally_entangled_state",
    "measure_projective",
    "mutate",
    "parse_cost_expr",
    "point_prediction",
    "predict",
    "qst",
    "registry_channel",
    "ret",
    "reward",
    "run_population",
    "seed_expr",
    "seed_gene",
    "select_strategy",
    "serialize_cost_expr",
    "sqpt",
    "tensor",
    "toy_pattern_env",
    "within_bounds",
]
