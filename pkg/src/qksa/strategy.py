"""Process-reconstruction strategies: the agent's hypothesis space.

A strategy descriptor names a reconstruction method and a per-setting
shot budget. Its settings double as environment actions, so each agent
interaction feeds the setting it served; once every setting has
collected a full batch of fresh outcomes the model is rebuilt from the
accumulated counts and the instrumented execution trace is refreshed.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

from .channels import QuantumChannel, depolarizing_channel
from .environment import EntangledAction, QuantumAction
from .gene import Gene
from .least import ExecutionTrace, LeastEstimate, eval_cost, least_from_counts, within_bounds
from .tomography import (
    eapt_budget,
    eapt_from_counts,
    point_prediction,
    sqpt_budget,
    sqpt_from_counts,
)

METHODS = ("sqpt", "eapt")


class StrategyError(ValueError):
    pass


@dataclass(frozen=True)
class QPTStrategy:
    """Reconstruction method plus per-setting shot budget."""

    method: str
    shots_per_setting: int = 1

    def __post_init__(self):
        if self.method not in METHODS:
            raise StrategyError(f"unknown method {self.method!r}")
        if self.shots_per_setting < 1:
            raise StrategyError("shots_per_setting must be >= 1")

    def serialize(self) -> str:
        return f"{self.method}:shots={self.shots_per_setting}"

    @classmethod
    def parse(cls, text: str) -> "QPTStrategy":
        try:
            method, shots = text.split(":shots=")
            return cls(method, int(shots))
        except ValueError as exc:
            raise StrategyError(f"malformed strategy {text!r}") from exc

    @property
    def requires_entangled(self) -> bool:
        return self.method == "eapt"

    def budget(self, n: int):
        if self.method == "sqpt":
            return sqpt_budget(n, self.shots_per_setting)
        return eapt_budget(n, self.shots_per_setting)

    def actions(self, n: int) -> list:
        """The environment actions serving this strategy's settings."""
        if self.method == "sqpt":
            return [QuantumAction(p, b) for p, b in self.budget(n).settings]
        return [EntangledAction(b) for b in self.budget(n).settings]

    def planned_counts(self, n: int) -> tuple[int, int, int]:
        """Analytic (measurements, mat_ops, peak_cells) for one full pass."""
        settings = self.budget(n).settings_count
        measurements = settings * self.shots_per_setting
        width = n if self.method == "sqpt" else 2 * n
        d2 = (2 ** width) ** 2
        mat_ops = settings * (2 ** width) + 4 ** width
        peak_cells = settings * 2 ** width + d2 + (4 ** n) ** 2
        return measurements, mat_ops, peak_cells

    def planned_estimate(self, n: int, a_est: float = 0.0) -> LeastEstimate:
        """Pre-execution resource estimate used when no trace exists yet."""
        measurements, mat_ops, peak_cells = self.planned_counts(n)
        return least_from_counts(self, measurements, mat_ops, peak_cells, a_est)


def default_pool(entangled: bool) -> tuple[QPTStrategy, ...]:
    method = "eapt" if entangled else "sqpt"
    return tuple(QPTStrategy(method, shots) for shots in (1, 4, 16))


def select_strategy(pool, gene: Gene, n_qubits: int) -> QPTStrategy | None:
    """Cheapest admissible strategy under the gene's bounds and cost tree.

    Candidates are priced on their planned resource counts with zero
    prediction deviation (no evidence yet). Returns None when nothing in
    the pool is admissible.
    """
    best = None
    best_cost = None
    for strategy in pool:
        est = strategy.planned_estimate(n_qubits)
        if not within_bounds(est, gene.bounds):
            continue
        cost = eval_cost(gene.cost, est, gene.weights)
        if cost <= 0:
            continue
        if best_cost is None or cost < best_cost:
            best, best_cost = strategy, cost
    return best


class HypothesisDriver:
    """Active hypothesis: a strategy, its accumulated data, and the model.

    The model starts fully depolarizing (a uniform predictor) and is
    replaced by the strategy's reconstruction whenever every setting has
    a fresh batch of ``shots_per_setting`` outcomes.
    """

    def __init__(self, strategy: QPTStrategy, n_qubits: int,
                 model: QuantumChannel | None = None):
        self.strategy = strategy
        self.n_qubits = n_qubits
        self.model = model if model is not None else depolarizing_channel(n_qubits)
        self._keys = [self._key(a) for a in strategy.actions(n_qubits)]
        self._fresh: dict = {k: [] for k in self._keys}
        self._prediction_cache: dict = {}
        self.rebuilds = 0
        m, ops, cells = strategy.planned_counts(n_qubits)
        self.trace = ExecutionTrace(measurements=m, mat_ops=ops, peak_cells=cells)

    @staticmethod
    def _key(action):
        if isinstance(action, QuantumAction):
            return (action.prep_index, action.meas_basis.letters)
        return action.meas_basis.letters

    def point_prediction(self, action) -> str:
        key = self._key(action)
        if key not in self._prediction_cache:
            self._prediction_cache[key] = point_prediction(self.model, action)
        return self._prediction_cache[key]

    def record(self, action, outcome: str) -> None:
        key = self._key(action)
        if key in self._fresh:
            self._fresh[key].append(outcome)

    def ready_to_rebuild(self) -> bool:
        shots = self.strategy.shots_per_setting
        return all(len(v) >= shots for v in self._fresh.values())

    def maybe_rebuild(self) -> bool:
        """Reconstruct from the freshest batch per setting when complete."""
        if not self.ready_to_rebuild():
            return False
        shots = self.strategy.shots_per_setting
        trace = ExecutionTrace()
        counts = {
            key: dict(Counter(outcomes[-shots:]))
            for key, outcomes in self._fresh.items()
        }
        trace.measured(shots * len(counts))
        if self.strategy.method == "sqpt":
            self.model = sqpt_from_counts(counts, self.n_qubits, recorder=trace)
        else:
            self.model = eapt_from_counts(counts, self.n_qubits, recorder=trace)
        self._fresh = {k: [] for k in self._keys}
        self._prediction_cache = {}
        self.trace = trace
        self.rebuilds += 1
        return True
