"""Turn-based environments with finite action/percept spaces.

The flagship environment hides a CPTP channel. Each action prepares one of
the 6^n Pauli eigenstate products, pushes it through the channel, and
measures every qubit in a chosen Pauli basis; the percept is the raw
outcome bitstring. In entangled mode the input is fixed to half of the
maximally entangled state on 2n qubits and the action is just the 2n-qubit
measurement basis.

Config file schema (JSON):

    {
      "n_qubits": 1,
      "channel": {"gate": "H"}            // or {"kraus": [matrix, ...]}
      "entangled_mode": false,
      "seed": 7
    }

where a complex matrix is a nested list of [re, im] pairs.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np

from .channels import ChannelError, QuantumChannel, choi_from_channel, registry_channel
from .paulis import EIGENSTATES, PauliString, full_weight_bases
from .states import DensityMatrix, measure_projective, outcome_probabilities

MAX_QUBITS = 3

# Per-qubit preparation order; prep_index is mixed-radix base 6 over qubits,
# leftmost qubit most significant.
PREP_ORDER = ("Z+", "Z-", "X+", "X-", "Y+", "Y-")
_PREP_MATS = [EIGENSTATES[label[0]][0 if label[1] == "+" else 1] for label in PREP_ORDER]


class EnvError(ValueError):
    pass


@dataclass(frozen=True)
class QuantumAction:
    """Prepare the indexed eigenstate product, measure in the given basis."""

    prep_index: int
    meas_basis: PauliString

    def encode(self) -> str:
        return f"p{self.prep_index}:{self.meas_basis.letters}"


@dataclass(frozen=True)
class EntangledAction:
    """Measure the post-channel half-of-Omega state in a 2n-qubit basis."""

    meas_basis: PauliString

    def encode(self) -> str:
        return f"bell:{self.meas_basis.letters}"


def prep_state(prep_index: int, n: int) -> DensityMatrix:
    """Eigenstate product for a mixed-radix base-6 preparation index."""
    if not 0 <= prep_index < 6 ** n:
        raise EnvError(f"prep_index {prep_index} out of range for n={n}")
    digits = []
    rem = prep_index
    for _ in range(n):
        rem, digit = divmod(rem, 6)
        digits.append(digit)
    digits.reverse()
    mat = np.array([[1.0 + 0.0j]])
    for d in digits:
        mat = np.kron(mat, _PREP_MATS[d])
    return DensityMatrix(n, mat)


def standard_actions(n: int) -> list[QuantumAction]:
    """All 6^n x 3^n (preparation, measurement-basis) pairs, stable order."""
    return [
        QuantumAction(p, b)
        for p, b in itertools.product(range(6 ** n), full_weight_bases(n))
    ]


def entangled_actions(n: int) -> list[EntangledAction]:
    return [EntangledAction(b) for b in full_weight_bases(2 * n)]


def all_bitstrings(width: int) -> list[str]:
    return [format(i, f"0{width}b") for i in range(2 ** width)]


@dataclass(frozen=True)
class QuantumEnvConfig:
    n_qubits: int
    channel_spec: dict
    entangled_mode: bool = False
    seed: int = 0

    def __post_init__(self):
        if not 1 <= self.n_qubits <= MAX_QUBITS:
            raise EnvError(f"n_qubits must be in 1..{MAX_QUBITS}")
        self.resolve_channel()  # fail fast on bad specs

    def resolve_channel(self) -> QuantumChannel:
        return resolve_channel_spec(self.channel_spec, self.n_qubits)

    def to_dict(self) -> dict:
        return {
            "n_qubits": self.n_qubits,
            "channel": self.channel_spec,
            "entangled_mode": self.entangled_mode,
            "seed": self.seed,
        }


def matrix_to_pairs(m: np.ndarray) -> list:
    return [[[float(x.real), float(x.imag)] for x in row] for row in np.asarray(m)]


def pairs_to_matrix(rows: list) -> np.ndarray:
    try:
        return np.array(
            [[complex(cell[0], cell[1]) for cell in row] for row in rows], dtype=complex
        )
    except (TypeError, IndexError) as exc:
        raise EnvError("matrix entries must be [re, im] pairs") from exc


def resolve_channel_spec(spec: dict, n_qubits: int) -> QuantumChannel:
    if not isinstance(spec, dict) or len(spec) != 1:
        raise EnvError("channel spec must have exactly one of 'gate'/'kraus'")
    try:
        if "gate" in spec:
            channel = registry_channel(spec["gate"])
        elif "kraus" in spec:
            channel = QuantumChannel.from_kraus(
                [pairs_to_matrix(m) for m in spec["kraus"]]
            )
        else:
            raise EnvError("channel spec must have exactly one of 'gate'/'kraus'")
    except ChannelError as exc:
        raise EnvError(f"invalid channel spec: {exc}") from exc
    if channel.n_qubits != n_qubits:
        raise EnvError(
            f"channel acts on {channel.n_qubits} qubits, config says {n_qubits}"
        )
    return channel


def parse_env_config(data: dict) -> QuantumEnvConfig:
    try:
        return QuantumEnvConfig(
            n_qubits=int(data["n_qubits"]),
            channel_spec=data["channel"],
            entangled_mode=bool(data.get("entangled_mode", False)),
            seed=int(data.get("seed", 0)),
        )
    except KeyError as exc:
        raise EnvError(f"missing config field {exc.args[0]!r}") from exc


def load_env_config(path: str | Path) -> QuantumEnvConfig:
    try:
        data = json.loads(Path(path).read_text())
    except FileNotFoundError:
        raise EnvError(f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise EnvError(f"config is not valid JSON: {exc}")
    return parse_env_config(data)


class QuantumProcessEnv:
    """Hidden-channel environment answering prepare-evolve-measure actions."""

    def __init__(self, config: QuantumEnvConfig):
        self.config = config
        self.n_qubits = config.n_qubits
        self.channel = config.resolve_channel()
        self.entangled_mode = config.entangled_mode
        if config.entangled_mode:
            self.action_space = entangled_actions(config.n_qubits)
            self.percept_space = all_bitstrings(2 * config.n_qubits)
        else:
            self.action_space = standard_actions(config.n_qubits)
            self.percept_space = all_bitstrings(config.n_qubits)
        self._rng = np.random.default_rng(config.seed)
        self._choi_cache: DensityMatrix | None = None
        self.log: list[tuple[int, str, str]] = []
        self._step_index = 0

    # -- helpers

    def _post_channel_state(self, action) -> DensityMatrix:
        if isinstance(action, EntangledAction):
            if not self.entangled_mode:
                raise EnvError("entangled_mode not enabled")
            if self._choi_cache is None:
                self._choi_cache = choi_from_channel(self.channel)
            return self._choi_cache
        if not isinstance(action, QuantumAction):
            raise EnvError(f"invalid action {action!r}")
        if self.entangled_mode:
            raise EnvError("entangled environment takes EntangledAction")
        if action.meas_basis.n_qubits != self.n_qubits or "I" in action.meas_basis.letters:
            raise EnvError("measurement basis must cover every qubit")
        return self.channel.apply(prep_state(action.prep_index, self.n_qubits))

    # -- interface

    def step(self, action, rng: np.random.Generator | None = None) -> str:
        """One interaction: act, then return the outcome bitstring percept."""
        state = self._post_channel_state(action)
        outcome, _ = measure_projective(state, action.meas_basis, rng or self._rng)
        self.log.append((self._step_index, action.encode(), outcome))
        self._step_index += 1
        return outcome

    def step_entangled(self, meas_basis: PauliString,
                       rng: np.random.Generator | None = None) -> str:
        return self.step(EntangledAction(meas_basis), rng)

    def sample_counts(self, action, shots: int,
                      rng: np.random.Generator | None = None) -> dict[str, int]:
        """Outcome counts for repeated identical interactions (batched)."""
        if shots < 1:
            raise EnvError("shots must be >= 1")
        probs = self.exact_distribution(action)
        outcomes = sorted(probs)
        p = np.array([probs[o] for o in outcomes])
        counts = (rng or self._rng).multinomial(shots, p / p.sum())
        return {o: int(c) for o, c in zip(outcomes, counts) if c}

    def exact_distribution(self, action) -> dict[str, float]:
        """Analytic Born-rule outcome distribution for an action."""
        state = self._post_channel_state(action)
        probs = outcome_probabilities(state, action.meas_basis)
        width = action.meas_basis.n_qubits
        return {format(i, f"0{width}b"): float(p) for i, p in enumerate(probs)}

    def swap_channel(self, channel: QuantumChannel) -> None:
        """Replace the hidden channel mid-run (test hook for death triggers)."""
        if channel.n_qubits != self.n_qubits:
            raise EnvError("replacement channel has wrong qubit count")
        self.channel = channel
        self._choi_cache = None

    def clone(self, seed: int | None = None) -> "QuantumProcessEnv":
        cfg = self.config if seed is None else replace(self.config, seed=seed)
        return QuantumProcessEnv(cfg)


class PatternEnv:
    """Deterministic single-action environment cycling a fixed bit pattern."""

    def __init__(self, pattern: str):
        if not pattern or set(pattern) - {"0", "1"}:
            raise EnvError("pattern must be a non-empty bitstring")
        self.pattern = pattern
        self.action_space = ["noop"]
        self.percept_space = ["0", "1"]
        self.log: list[tuple[int, str, str]] = []
        self._step_index = 0

    def step(self, action, rng=None) -> str:
        if action != "noop":
            raise EnvError(f"invalid action {action!r}")
        outcome = self.pattern[self._step_index % len(self.pattern)]
        self.log.append((self._step_index, "noop", outcome))
        self._step_index += 1
        return outcome

    def clone(self, seed: int | None = None) -> "PatternEnv":
        return PatternEnv(self.pattern)


def toy_pattern_env(pattern: str) -> PatternEnv:
    return PatternEnv(pattern)
