"""Resource accounting for candidate hypotheses.

A hypothesis is priced on five axes: serialized length, elementary-
operation count (energy proxy), prediction deviation, peak working-set
cells (space), and executed step count (time). An ``ExecutionTrace``
collects the raw counters while a hypothesis runs; ``estimate_least``
turns a trace into the five-tuple, and ``eval_cost`` feeds it through a
gene's cost expression.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

from .costexpr import Node, evaluate


class LeastError(ValueError):
    pass


@dataclass(frozen=True)
class LeastEstimate:
    l_est: float
    e_est: float
    a_est: float
    s_est: float
    t_est: float

    def __post_init__(self):
        for name in ("l_est", "e_est", "a_est", "s_est", "t_est"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v >= 0):
                raise LeastError(f"{name} must be finite and >= 0, got {v}")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.l_est, self.e_est, self.a_est, self.s_est, self.t_est)

    def with_deviation(self, a_est: float) -> "LeastEstimate":
        return replace(self, a_est=a_est)


@dataclass(frozen=True)
class LeastBounds:
    l_max: float
    e_max: float
    a_max: float
    s_max: float
    t_max: float

    def __post_init__(self):
        for name in ("l_max", "e_max", "a_max", "s_max", "t_max"):
            if getattr(self, name) <= 0:
                raise LeastError(f"{name} must be strictly positive")

    def as_tuple(self) -> tuple[float, float, float, float, float]:
        return (self.l_max, self.e_max, self.a_max, self.s_max, self.t_max)


@dataclass
class ExecutionTrace:
    """Primitive counters plus the (prediction, percept) pairs of a window."""

    measurements: int = 0
    mat_ops: int = 0
    peak_cells: int = 0
    pairs: list[tuple[str, str]] = field(default_factory=list)
    _live_cells: int = 0

    def measured(self, k: int = 1) -> None:
        self.measurements += k

    def mat_op(self, k: int = 1) -> None:
        self.mat_ops += k

    def alloc(self, cells: int) -> None:
        self._live_cells += cells
        self.peak_cells = max(self.peak_cells, self._live_cells)

    def free(self, cells: int) -> None:
        self._live_cells = max(0, self._live_cells - cells)

    def record_pair(self, prediction: str, percept: str) -> None:
        self.pairs.append((prediction, percept))


def hamming(a: str, b: str) -> int:
    if len(a) != len(b):
        raise LeastError(f"length mismatch: {a!r} vs {b!r}")
    return sum(1 for x, y in zip(a, b) if x != y)


def least_from_counts(hypothesis, measurements: int, mat_ops: int,
                      peak_cells: int, a_est: float) -> LeastEstimate:
    """Assemble the five-tuple; time counts measurement primitives."""
    return LeastEstimate(
        l_est=float(len(hypothesis.serialize())),
        e_est=float(measurements + mat_ops),
        a_est=float(a_est),
        s_est=float(peak_cells),
        t_est=float(measurements),
    )


def estimate_least(hypothesis, trace: ExecutionTrace) -> LeastEstimate:
    """Five resource estimates for a hypothesis given its execution trace."""
    if not trace.pairs:
        raise LeastError("empty trace: no prediction/percept pairs")
    mean_dev = sum(hamming(p, e) for p, e in trace.pairs) / len(trace.pairs)
    return least_from_counts(
        hypothesis, trace.measurements, trace.mat_ops, trace.peak_cells, mean_dev
    )


def within_bounds(est: LeastEstimate, bounds: LeastBounds) -> bool:
    """True iff every estimate is <= its bound (closed inequality)."""
    return all(v <= b for v, b in zip(est.as_tuple(), bounds.as_tuple()))


def eval_cost(expr: Node, est: LeastEstimate, weights) -> float:
    """Evaluate a cost tree on the estimates and per-metric weights."""
    w = tuple(weights)
    if len(w) != 5:
        raise LeastError("expected 5 weights")
    env = {
        "l": est.l_est, "e": est.e_est, "a": est.a_est,
        "s": est.s_est, "t": est.t_est,
        "w_l": w[0], "w_e": w[1], "w_a": w[2], "w_s": w[3], "w_t": w[4],
    }
    return evaluate(expr, env)
