"""The decision loop: lookahead, self-assigned reward, and life events.

Each cycle follows a fixed order: death check on the running return,
bounded lookahead over future action/percept sequences to pick an action,
act, score the percept against the model's point prediction (the reward
is the negated Hamming distance, so rewards are never positive), update
the linearly-discounted return over the trailing window, and finally
check the replication band.

The lookahead enumerates every action sequence of the future horizon and
every percept completion; a leaf is admissible when its cost is positive
(and within bounds, which the leaf costing folds in by returning None).
The minimal-cost admissible leaf wins; ties keep the first leaf in
enumeration order, i.e. the lowest action index. When no leaf is
admissible the agent is starved and falls back to round-robin.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .gene import Gene, mutate
from .least import LeastEstimate, eval_cost, hamming, within_bounds
from .strategy import HypothesisDriver

ALIVE, DEAD = "alive", "dead"
EVENT_NONE, EVENT_REPLICATE, EVENT_DIE, EVENT_STARVED = (
    "none", "replicate", "die", "starved",
)


class AgentError(RuntimeError):
    pass


def delta(e: str, p: str) -> int:
    """Hamming distance between two equal-length percept bitstrings."""
    return hamming(e, p)


def reward(e_t: str, rho_t: str) -> float:
    """Self-assigned reward: negated prediction error, always <= 0."""
    return -float(delta(e_t, rho_t))


def ret(rewards, t_p: int, gamma: float) -> float:
    """Linearly discounted return over the trailing window.

    R_t = sum_{i=0}^{min(t_p, len)-1} rewards[-i-1] * (1 - gamma*i);
    short histories sum over the entries that exist.
    """
    r = 0.0
    for i in range(min(t_p, len(rewards))):
        r += rewards[-i - 1] * (1.0 - gamma * i)
    return r


def future_cone(n_actions: int, percepts, t_f: int, leaf_cost):
    """Exhaustive lookahead over action/percept sequences of length t_f.

    ``leaf_cost(a_seq, e_seq)`` prices one completed leaf and may return
    None for an out-of-bounds leaf. Returns (first_action_index, cost) of
    the best admissible leaf, or None when starved.
    """
    if t_f < 1:
        raise AgentError("future horizon must be >= 1")
    best: tuple[int, float] | None = None

    def descend(level: int, a_seq: tuple, e_seq: tuple):
        nonlocal best
        if level == t_f:
            cost = leaf_cost(a_seq, e_seq)
            if cost is None or not cost > 0:
                return
            if best is None or cost < best[1]:
                best = (a_seq[0], cost)
            return
        for a in range(n_actions):
            for rho in percepts:
                descend(level + 1, a_seq + (a,), e_seq + (rho,))

    descend(0, (), ())
    return best


@dataclass
class History:
    """Append-only parallel records of one agent's cycles."""

    actions: list = field(default_factory=list)
    predictions: list[str] = field(default_factory=list)
    percepts: list[str] = field(default_factory=list)
    rewards: list[float] = field(default_factory=list)

    @property
    def t(self) -> int:
        return len(self.rewards)

    def record(self, action, prediction: str, percept: str, r: float) -> None:
        self.actions.append(action)
        self.predictions.append(prediction)
        self.percepts.append(percept)
        self.rewards.append(r)


@dataclass
class CycleRecord:
    agent_id: int
    t: int
    action: str
    prediction: str
    percept: str
    reward: float
    ret: float
    c_est_star: float
    event: str

    def as_row(self) -> list[str]:
        return [
            str(self.agent_id), str(self.t), self.action, self.prediction,
            self.percept, f"{self.reward:.17g}", f"{self.ret:.17g}",
            f"{self.c_est_star:.17g}" if math.isfinite(self.c_est_star) else "inf",
            self.event,
        ]


@dataclass
class ReplicateEvent:
    child_gene: Gene


class Agent:
    """One learner bound to a private environment clone."""

    def __init__(self, agent_id: int, gene: Gene, env, driver: HypothesisDriver,
                 rng: np.random.Generator):
        self.agent_id = agent_id
        self.gene = gene
        self.env = env
        self.driver = driver
        self.rng = rng
        self.history = History()
        self.status = ALIVE
        self.R_t = gene.replication_threshold  # pseudo-boot value, pre-first-cycle
        self.records: list[CycleRecord] = []

    # -- lookahead plumbing

    def _window_deviation(self) -> tuple[float, int]:
        """Summed Hamming distance and count over the trailing window."""
        t_p = self.gene.past_horizon
        preds = self.history.predictions[-t_p:]
        seen = self.history.percepts[-t_p:]
        return float(sum(delta(e, p) for p, e in zip(preds, seen))), len(preds)

    def _leaf_cost_fn(self):
        gene = self.gene
        actions = self.env.action_space
        base = self.driver.trace
        l_e_s_t = LeastEstimate(
            l_est=float(len(self.driver.strategy.serialize())),
            e_est=float(base.measurements + base.mat_ops),
            a_est=0.0,
            s_est=float(base.peak_cells),
            t_est=float(base.measurements),
        )
        past_dev, past_n = self._window_deviation()
        predictions = {}

        def leaf_cost(a_seq, e_seq):
            future_dev = 0.0
            for a_idx, e_hyp in zip(a_seq, e_seq):
                if a_idx not in predictions:
                    predictions[a_idx] = self.driver.point_prediction(actions[a_idx])
                future_dev += delta(e_hyp, predictions[a_idx])
            est = l_e_s_t.with_deviation(
                (past_dev + future_dev) / (past_n + len(a_seq))
            )
            if not within_bounds(est, gene.bounds):
                return None
            return eval_cost(gene.cost, est, gene.weights)

        return leaf_cost

    def choose_action(self) -> tuple[int, float, bool]:
        """(action index, leaf cost, starved flag) for this cycle."""
        result = future_cone(
            len(self.env.action_space),
            self.env.percept_space,
            self.gene.future_horizon,
            self._leaf_cost_fn(),
        )
        if result is None:
            return self.history.t % len(self.env.action_space), math.inf, True
        return result[0], result[1], False

    # -- the cycle

    def run_cycle(self) -> tuple[CycleRecord, list]:
        """One full cycle; returns the log record and any spawn events."""
        if self.status != ALIVE:
            raise AgentError(f"agent {self.agent_id} is not alive")
        gene = self.gene
        t = self.history.t

        if self.R_t < gene.death_threshold:
            self.status = DEAD
            rec = CycleRecord(self.agent_id, t, "", "", "", 0.0, self.R_t,
                              math.inf, EVENT_DIE)
            self.records.append(rec)
            return rec, []

        a_idx, c_star, starved = self.choose_action()
        action = self.env.action_space[a_idx]
        prediction = self.driver.point_prediction(action)
        percept = self.env.step(action)
        r = reward(percept, prediction)
        self.history.record(action, prediction, percept, r)
        self.R_t = ret(self.history.rewards, gene.past_horizon, gene.discount)

        events = []
        event = EVENT_STARVED if starved else EVENT_NONE
        if gene.death_threshold <= self.R_t < gene.replication_threshold:
            events.append(ReplicateEvent(mutate(gene, self.rng)))
            event = EVENT_REPLICATE

        self.driver.record(action, percept)
        self.driver.maybe_rebuild()

        encode = getattr(action, "encode", None)
        rec = CycleRecord(
            self.agent_id, t, encode() if encode else str(action), prediction,
            percept, r, self.R_t, c_star, event,
        )
        self.records.append(rec)
        return rec, events
