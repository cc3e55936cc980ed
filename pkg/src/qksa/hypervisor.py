"""Population orchestration: spawning, scheduling, budgets, and lineage.

Agents are scheduled cooperatively, one cycle per alive agent per global
step, in spawn order. Every agent owns a private environment clone and a
private random stream, both derived deterministically from the master
seed and the agent id, so a run is a pure function of its config.

Replication is genome-as-data: a spawn event carries the parent's
mutated, serialized gene and the child is built fresh from it. Spawns
that would break the population cap or the global memory budget are
rejected and logged (the offspring genome is still recorded for audit).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .agent import ALIVE, DEAD, Agent, CycleRecord, ReplicateEvent
from .environment import (
    EnvError,
    QuantumEnvConfig,
    QuantumProcessEnv,
    parse_env_config,
)
from .gene import Gene, GeneError, seed_gene
from .strategy import HypothesisDriver, QPTStrategy, default_pool, select_strategy


class HypervisorError(ValueError):
    pass


@dataclass(frozen=True)
class RunConfig:
    gene: Gene
    env_config: QuantumEnvConfig
    population_cap: int = 8
    step_budget: int = 100
    memory_budget: int = 1024
    master_seed: int = 0
    strategy_pool: tuple[QPTStrategy, ...] | None = None

    def __post_init__(self):
        if self.population_cap < 1:
            raise HypervisorError("population_cap must be >= 1")
        if self.step_budget < 0:
            raise HypervisorError("step_budget must be >= 0")
        if self.memory_budget <= 0:
            raise HypervisorError("memory_budget must be positive")

    def pool(self) -> tuple[QPTStrategy, ...]:
        if self.strategy_pool is not None:
            return self.strategy_pool
        return default_pool(self.env_config.entangled_mode)

    def to_dict(self) -> dict:
        d = {
            "gene": self.gene.to_dict(),
            "environment": self.env_config.to_dict(),
            "population_cap": self.population_cap,
            "step_budget": self.step_budget,
            "memory_budget": self.memory_budget,
            "master_seed": self.master_seed,
        }
        if self.strategy_pool is not None:
            d["strategy_pool"] = [s.serialize() for s in self.strategy_pool]
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "RunConfig":
        try:
            pool = data.get("strategy_pool")
            return cls(
                gene=Gene.from_dict(data["gene"]),
                env_config=parse_env_config(data["environment"]),
                population_cap=int(data.get("population_cap", 8)),
                step_budget=int(data.get("step_budget", 100)),
                memory_budget=int(data.get("memory_budget", 1024)),
                master_seed=int(data.get("master_seed", 0)),
                strategy_pool=tuple(QPTStrategy.parse(s) for s in pool) if pool else None,
            )
        except KeyError as exc:
            raise HypervisorError(f"missing run config field {exc.args[0]!r}") from exc


def load_run_config(path: str | Path) -> RunConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise HypervisorError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise HypervisorError(f"config is not valid JSON: {exc}")
    try:
        return RunConfig.from_dict(data)
    except (GeneError, EnvError) as exc:
        raise HypervisorError(str(exc)) from exc


@dataclass
class LineageRecord:
    agent_id: int
    parent_id: int | None
    birth_step: int
    gene: Gene
    death_step: int | None = None
    final_return: float | None = None

    def to_json(self) -> str:
        return json.dumps(
            {
                "agent_id": self.agent_id,
                "parent_id": self.parent_id,
                "birth_step": self.birth_step,
                "death_step": self.death_step,
                "final_return": self.final_return,
                "gene": self.gene.to_dict(),
            },
            sort_keys=True,
            separators=(",", ":"),
        )


@dataclass
class RunResult:
    lineage: list[LineageRecord]
    records: list[CycleRecord]
    summary: list[dict]
    rejections: list[dict] = field(default_factory=list)

    def lineage_text(self) -> str:
        return "".join(rec.to_json() + "\n" for rec in self.lineage)

    def sorted_records(self) -> list[CycleRecord]:
        return sorted(self.records, key=lambda r: (r.agent_id, r.t))


class Hypervisor:
    """Round-robin scheduler over a population of replicating agents."""

    def __init__(self, config: RunConfig):
        self.config = config
        self.agents: dict[int, Agent] = {}
        self.lineage: dict[int, LineageRecord] = {}
        self.rejections: list[dict] = []
        self._next_id = 0

    # -- budget accounting

    def alive_agents(self) -> list[Agent]:
        return [a for a in self.agents.values() if a.status == ALIVE]

    def memory_in_use(self) -> int:
        return sum(a.gene.memory_budget for a in self.alive_agents())

    # -- spawning

    def _derived_rng(self, agent_id: int, stream: int) -> np.random.Generator:
        seq = np.random.SeedSequence([self.config.master_seed, agent_id, stream])
        return np.random.default_rng(seq)

    def _make_env(self, agent_id: int):
        seq = np.random.SeedSequence([self.config.master_seed, agent_id, 0])
        env_seed = int(seq.generate_state(1)[0])
        base = QuantumProcessEnv(self.config.env_config)
        return base.clone(seed=env_seed)

    def spawn(self, gene: Gene, parent_id: int | None = None,
              birth_step: int = 0) -> int | None:
        """Create one agent; returns its id, or None when rejected."""
        if len(self.alive_agents()) >= self.config.population_cap:
            self._reject(gene, parent_id, birth_step, "population cap reached")
            return None
        if self.memory_in_use() + gene.memory_budget > self.config.memory_budget:
            self._reject(gene, parent_id, birth_step, "memory budget exceeded")
            return None
        agent_id = self._next_id
        self._next_id += 1
        env = self._make_env(agent_id)
        strategy = select_strategy(self.config.pool(), gene, env.n_qubits)
        if strategy is None:
            strategy = self.config.pool()[0]
        driver = HypothesisDriver(strategy, env.n_qubits)
        agent = Agent(agent_id, gene, env, driver, self._derived_rng(agent_id, 1))
        self.agents[agent_id] = agent
        self.lineage[agent_id] = LineageRecord(agent_id, parent_id, birth_step, gene)
        return agent_id

    def _reject(self, gene: Gene, parent_id, birth_step: int, reason: str) -> None:
        self.rejections.append(
            {
                "parent_id": parent_id,
                "step": birth_step,
                "reason": reason,
                "gene": gene.to_dict(),
            }
        )

    def _retire(self, agent: Agent, step: int) -> None:
        rec = self.lineage[agent.agent_id]
        rec.death_step = step
        rec.final_return = agent.R_t

    # -- the run loop

    def run(self) -> RunResult:
        records: list[CycleRecord] = []
        summary: list[dict] = []
        self.spawn(self.config.gene, parent_id=None, birth_step=0)
        for step in range(self.config.step_budget):
            roster = self.alive_agents()
            if not roster:
                break
            step_costs = []
            for agent in roster:
                if agent.history.t >= agent.gene.lifespan:
                    agent.status = DEAD
                    self._retire(agent, step)
                    continue
                record, events = agent.run_cycle()
                records.append(record)
                if record.c_est_star != float("inf"):
                    step_costs.append(record.c_est_star)
                if agent.status != ALIVE:
                    self._retire(agent, step)
                    continue
                for ev in events:
                    if isinstance(ev, ReplicateEvent):
                        self.spawn(ev.child_gene, parent_id=agent.agent_id,
                                   birth_step=step)
            alive = self.alive_agents()
            summary.append(
                {
                    "step": step,
                    "alive": len(alive),
                    "best_return": max((a.R_t for a in alive), default=float("nan")),
                    "mean_cost": (
                        sum(step_costs) / len(step_costs) if step_costs else float("nan")
                    ),
                }
            )
        for agent in self.alive_agents():
            rec = self.lineage[agent.agent_id]
            rec.final_return = agent.R_t
        lineage = [self.lineage[i] for i in sorted(self.lineage)]
        return RunResult(lineage, records, summary, self.rejections)


def run_population(config: RunConfig) -> RunResult:
    return Hypervisor(config).run()


def default_run_config(**overrides) -> RunConfig:
    params = dict(
        gene=seed_gene(),
        env_config=QuantumEnvConfig(1, {"gate": "I"}),
        population_cap=8,
        step_budget=100,
        memory_budget=1024,
        master_seed=0,
    )
    params.update(overrides)
    return RunConfig(**params)

