"""Heritable agent configuration: bounds, weights, cost tree, thresholds.

Genes serialize to canonical JSON (sorted keys, compact separators, repr
floats) with the cost tree as an s-expression string, so that
serialize -> parse -> serialize is byte-identical.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from . import costexpr
from .costexpr import Node, mutate_expr, seed_expr
from .least import LeastBounds


class GeneError(ValueError):
    pass


@dataclass(frozen=True)
class Gene:
    bounds: LeastBounds
    weights: tuple[float, float, float, float, float]
    cost: Node
    mutation_rate: float
    discount: float
    death_threshold: float
    replication_threshold: float
    past_horizon: int
    future_horizon: int
    lifespan: int
    memory_budget: int
    # Descriptive automaton sizes carried for bookkeeping only; hypotheses
    # here are strategy descriptors, so these never enter any computation.
    alphabet_size: int = 2
    state_size: int = 0

    def __post_init__(self):
        if len(self.weights) != 5:
            raise GeneError("weights must have 5 entries")
        try:
            costexpr.validate(self.cost)
        except costexpr.CostExprError as exc:
            raise GeneError(f"invalid cost expression: {exc}") from exc
        if not 0.0 <= self.mutation_rate <= 1.0:
            raise GeneError("mutation_rate must lie in [0, 1]")
        if not self.death_threshold < self.replication_threshold <= 0.0:
            raise GeneError("thresholds must satisfy death < replication <= 0")
        if self.future_horizon < 1:
            raise GeneError("future_horizon must be >= 1")
        if self.past_horizon < 1:
            raise GeneError("past_horizon must be >= 1")
        if self.past_horizon > self.memory_budget:
            raise GeneError("past_horizon must not exceed memory_budget")
        if self.discount < 0:
            raise GeneError("discount must be >= 0")
        if self.discount * (self.past_horizon - 1) > 1.0:
            raise GeneError("discount * (past_horizon - 1) must be <= 1")
        if self.lifespan < 1:
            raise GeneError("lifespan must be >= 1")
        object.__setattr__(self, "weights", tuple(float(w) for w in self.weights))

    # -- serialization

    def to_dict(self) -> dict:
        return {
            "bounds": {
                "l_max": self.bounds.l_max,
                "e_max": self.bounds.e_max,
                "a_max": self.bounds.a_max,
                "s_max": self.bounds.s_max,
                "t_max": self.bounds.t_max,
            },
            "weights": list(self.weights),
            "cost": costexpr.serialize(self.cost),
            "mutation_rate": self.mutation_rate,
            "discount": self.discount,
            "death_threshold": self.death_threshold,
            "replication_threshold": self.replication_threshold,
            "past_horizon": self.past_horizon,
            "future_horizon": self.future_horizon,
            "lifespan": self.lifespan,
            "memory_budget": self.memory_budget,
            "alphabet_size": self.alphabet_size,
            "state_size": self.state_size,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    @classmethod
    def from_dict(cls, data: dict) -> "Gene":
        try:
            bounds = LeastBounds(**data["bounds"])
            return cls(
                bounds=bounds,
                weights=tuple(data["weights"]),
                cost=costexpr.parse(data["cost"]),
                mutation_rate=data["mutation_rate"],
                discount=data["discount"],
                death_threshold=data["death_threshold"],
                replication_threshold=data["replication_threshold"],
                past_horizon=data["past_horizon"],
                future_horizon=data["future_horizon"],
                lifespan=data["lifespan"],
                memory_budget=data["memory_budget"],
                alphabet_size=data.get("alphabet_size", 2),
                state_size=data.get("state_size", 0),
            )
        except KeyError as exc:
            raise GeneError(f"missing gene field {exc.args[0]!r}") from exc
        except (TypeError, costexpr.CostExprError) as exc:
            raise GeneError(str(exc)) from exc

    @classmethod
    def from_json(cls, text: str) -> "Gene":
        try:
            data = json.loads(text)
        except json.JSONDecodeError as exc:
            raise GeneError(f"gene is not valid JSON: {exc}") from exc
        return cls.from_dict(data)


def seed_gene(**overrides) -> Gene:
    """Default starting gene: unit weights and the plain-sum cost tree."""
    params = dict(
        bounds=LeastBounds(l_max=256.0, e_max=1e7, a_max=2.0, s_max=1e6, t_max=1e6),
        weights=(1.0, 1.0, 1.0, 1.0, 1.0),
        cost=seed_expr(),
        mutation_rate=0.1,
        discount=0.05,
        death_threshold=-8.0,
        replication_threshold=-0.5,
        past_horizon=8,
        future_horizon=1,
        lifespan=1000,
        memory_budget=64,
    )
    params.update(overrides)
    return Gene(**params)


def mutate(gene: Gene, rng: np.random.Generator) -> Gene:
    """Offspring gene: point-mutated cost tree and jittered weights.

    Bounds, thresholds, and horizons are inherited unchanged.
    """
    cost = mutate_expr(gene.cost, gene.mutation_rate, rng)
    weights = tuple(
        w * float(rng.uniform(0.9, 1.1))
        if gene.mutation_rate > 0 and rng.random() < gene.mutation_rate
        else w
        for w in gene.weights
    )
    return replace(gene, cost=cost, weights=weights)
