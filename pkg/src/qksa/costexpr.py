"""Evolvable cost expressions over the five resource estimates.

Grammar (s-expressions)::

    expr    := leaf | "(" op expr... ")"
    op      := add | sub | mul | div        (binary)
             | log | exp                    (unary)
    leaf    := l | e | a | s | t            (resource estimates)
             | w_l | w_e | w_a | w_s | w_t  (gene weights)
             | <float literal>

Guard rules, applied during evaluation so that any well-formed tree maps
non-negative inputs to a finite real:

* division by ``|x| < 1e-9`` yields the sentinel ``1e9``,
* ``log`` of a non-positive value evaluates ``log(1e-9)``,
* ``exp`` clamps its argument at 50,
* any non-finite node value collapses to ``+-1e9``.

Tree depth is capped at 12 (a leaf has depth 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

BINARY_OPS = ("add", "sub", "mul", "div")
UNARY_OPS = ("log", "exp")
METRIC_SYMBOLS = ("l", "e", "a", "s", "t")
WEIGHT_SYMBOLS = ("w_l", "w_e", "w_a", "w_s", "w_t")

SENTINEL = 1e9
DIV_EPS = 1e-9
LOG_FLOOR = 1e-9
EXP_CLAMP = 50.0
MAX_DEPTH = 12


class CostExprError(ValueError):
    pass


@dataclass(frozen=True)
class Const:
    value: float


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Op:
    name: str
    args: tuple


Node = Const | Sym | Op


def depth(node: Node) -> int:
    if isinstance(node, Op):
        return 1 + max(depth(a) for a in node.args)
    return 1


def validate(node: Node) -> None:
    """Check arity, symbols, depth, and finite evaluation on all-ones input."""
    _walk_validate(node)
    if depth(node) > MAX_DEPTH:
        raise CostExprError(f"tree depth exceeds {MAX_DEPTH}")
    ones = {sym: 1.0 for sym in METRIC_SYMBOLS + WEIGHT_SYMBOLS}
    if not math.isfinite(evaluate(node, ones)):
        raise CostExprError("tree does not evaluate finitely on all-ones input")


def _walk_validate(node: Node) -> None:
    if isinstance(node, Const):
        if not math.isfinite(node.value):
            raise CostExprError("non-finite constant")
    elif isinstance(node, Sym):
        if node.name not in METRIC_SYMBOLS + WEIGHT_SYMBOLS:
            raise CostExprError(f"unknown symbol {node.name!r}")
    elif isinstance(node, Op):
        if node.name in BINARY_OPS:
            arity = 2
        elif node.name in UNARY_OPS:
            arity = 1
        else:
            raise CostExprError(f"unknown operator {node.name!r}")
        if len(node.args) != arity:
            raise CostExprError(f"operator {node.name} expects {arity} arguments")
        for a in node.args:
            _walk_validate(a)
    else:
        raise CostExprError(f"not an expression node: {node!r}")


def _guard(v: float) -> float:
    if math.isnan(v):
        return SENTINEL
    if math.isinf(v):
        return SENTINEL if v > 0 else -SENTINEL
    return v


def evaluate(node: Node, env: dict[str, float]) -> float:
    """Evaluate with guard rules; total on any well-formed tree."""
    if isinstance(node, Const):
        return _guard(node.value)
    if isinstance(node, Sym):
        try:
            return _guard(env[node.name])
        except KeyError:
            raise CostExprError(f"unbound symbol {node.name!r}")
    if node.name == "log":
        x = evaluate(node.args[0], env)
        return _guard(math.log(x if x > 0 else LOG_FLOOR))
    if node.name == "exp":
        x = evaluate(node.args[0], env)
        return _guard(math.exp(min(x, EXP_CLAMP)))
    x = evaluate(node.args[0], env)
    y = evaluate(node.args[1], env)
    if node.name == "add":
        return _guard(x + y)
    if node.name == "sub":
        return _guard(x - y)
    if node.name == "mul":
        return _guard(x * y)
    if abs(y) < DIV_EPS:
        return SENTINEL
    return _guard(x / y)


def serialize(node: Node) -> str:
    if isinstance(node, Const):
        return repr(node.value)
    if isinstance(node, Sym):
        return node.name
    return "(" + " ".join([node.name] + [serialize(a) for a in node.args]) + ")"


def parse(text: str) -> Node:
    tokens = text.replace("(", " ( ").replace(")", " ) ").split()
    if not tokens:
        raise CostExprError("empty expression")
    node, rest = _parse_tokens(tokens)
    if rest:
        raise CostExprError(f"trailing tokens: {' '.join(rest)}")
    validate(node)
    return node


def _parse_tokens(tokens: list[str]) -> tuple[Node, list[str]]:
    if not tokens:
        raise CostExprError("unexpected end of expression")
    tok, rest = tokens[0], tokens[1:]
    if tok == "(":
        if not rest:
            raise CostExprError("unterminated ( ...")
        op, rest = rest[0], rest[1:]
        args = []
        while rest and rest[0] != ")":
            arg, rest = _parse_tokens(rest)
            args.append(arg)
        if not rest:
            raise CostExprError("unterminated ( ...")
        return Op(op, tuple(args)), rest[1:]
    if tok == ")":
        raise CostExprError("unexpected )")
    if tok in METRIC_SYMBOLS + WEIGHT_SYMBOLS:
        return Sym(tok), rest
    try:
        return Const(float(tok)), rest
    except ValueError:
        raise CostExprError(f"unknown token {tok!r}")


def seed_expr() -> Node:
    """The starting cost: plain weighted sum of the five estimates."""
    terms = [Op("mul", (Sym(w), Sym(m))) for w, m in zip(WEIGHT_SYMBOLS, METRIC_SYMBOLS)]
    expr = terms[0]
    for term in terms[1:]:
        expr = Op("add", (expr, term))
    return expr


def random_expr(rng: np.random.Generator, max_depth: int = 6) -> Node:
    """Grow-method random tree; always well-formed and guard-finite."""
    if max_depth <= 1 or rng.random() < 0.35:
        roll = rng.random()
        if roll < 0.45:
            return Sym(METRIC_SYMBOLS[rng.integers(5)])
        if roll < 0.7:
            return Sym(WEIGHT_SYMBOLS[rng.integers(5)])
        return Const(float(np.round(rng.uniform(-2.0, 2.0), 6)))
    ops = BINARY_OPS + UNARY_OPS
    name = ops[rng.integers(len(ops))]
    arity = 2 if name in BINARY_OPS else 1
    return Op(name, tuple(random_expr(rng, max_depth - 1) for _ in range(arity)))


def _rewrite(node: Node, rng: np.random.Generator) -> Node:
    """One point rewrite preserving arity and leaf class."""
    if isinstance(node, Op):
        pool = BINARY_OPS if node.name in BINARY_OPS else UNARY_OPS
        choices = [o for o in pool if o != node.name]
        return Op(choices[rng.integers(len(choices))], node.args)
    if isinstance(node, Sym):
        pool = METRIC_SYMBOLS if node.name in METRIC_SYMBOLS else WEIGHT_SYMBOLS
        choices = [s for s in pool if s != node.name]
        return Sym(choices[rng.integers(len(choices))])
    return Const(node.value * float(rng.uniform(0.9, 1.1)))


def mutate_expr(node: Node, m_c: float, rng: np.random.Generator,
                max_attempts: int = 100) -> Node:
    """Rewrite each node independently with probability ``m_c``.

    Invalid results are re-drawn up to ``max_attempts`` times, after which
    the parent tree is kept unchanged.
    """
    for _ in range(max_attempts):
        candidate = _mutate_walk(node, m_c, rng)
        try:
            validate(candidate)
            return candidate
        except CostExprError:
            continue
    return node


def _mutate_walk(node: Node, m_c: float, rng: np.random.Generator) -> Node:
    if isinstance(node, Op):
        args = tuple(_mutate_walk(a, m_c, rng) for a in node.args)
        node = Op(node.name, args)
    if m_c > 0 and rng.random() < m_c:
        return _rewrite(node, rng)
    return node
