"""Pauli operators, tensor-product Pauli strings, and their eigenstates.

Convention used everywhere in this package: the leftmost letter of a
Pauli string acts on the most significant bit of computational-basis
indices (so ``Z`` on ``"ZI"`` acts on the first bit of ``"10"``).
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .linalg import kron_all

PAULI_1Q = {
    "I": np.eye(2, dtype=complex),
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}

# One-qubit eigenstate density matrices, indexed [letter][outcome bit],
# bit 0 = +1 eigenvalue, bit 1 = -1 eigenvalue.
EIGENSTATES = {
    "Z": (
        np.array([[1, 0], [0, 0]], dtype=complex),
        np.array([[0, 0], [0, 1]], dtype=complex),
    ),
    "X": (
        0.5 * np.array([[1, 1], [1, 1]], dtype=complex),
        0.5 * np.array([[1, -1], [-1, 1]], dtype=complex),
    ),
    "Y": (
        0.5 * np.array([[1, -1j], [1j, 1]], dtype=complex),
        0.5 * np.array([[1, 1j], [-1j, 1]], dtype=complex),
    ),
}

# Single-qubit basis change sending the letter's eigenbasis to the Z basis,
# i.e. rows are the bra vectors of the +1 / -1 eigenstates.
_SQRT2 = 1.0 / np.sqrt(2.0)
MEAS_ROTATIONS = {
    "Z": np.eye(2, dtype=complex),
    "X": _SQRT2 * np.array([[1, 1], [1, -1]], dtype=complex),
    "Y": _SQRT2 * np.array([[1, -1j], [1, 1j]], dtype=complex),
}


class PauliError(ValueError):
    pass


@dataclass(frozen=True)
class PauliString:
    """Tensor product of one-qubit Paulis, e.g. ``PauliString("XZ")``."""

    letters: str

    def __post_init__(self):
        if not self.letters:
            raise PauliError("empty Pauli string")
        bad = set(self.letters) - set("IXYZ")
        if bad:
            raise PauliError(f"invalid Pauli letters: {sorted(bad)}")

    @property
    def n_qubits(self) -> int:
        return len(self.letters)

    @property
    def weight(self) -> int:
        """Number of non-identity letters."""
        return sum(1 for c in self.letters if c != "I")

    @property
    def is_full_weight(self) -> bool:
        return "I" not in self.letters

    def matrix(self) -> np.ndarray:
        return _pauli_matrix(self.letters)

    def __str__(self) -> str:
        return self.letters


@lru_cache(maxsize=None)
def _pauli_matrix(letters: str) -> np.ndarray:
    m = kron_all(PAULI_1Q[c] for c in letters)
    m.setflags(write=False)
    return m


def all_pauli_strings(n: int) -> list[PauliString]:
    """All 4^n Pauli strings in IXYZ product order, leftmost letter major."""
    return [PauliString("".join(p)) for p in itertools.product("IXYZ", repeat=n)]


def full_weight_bases(n: int) -> list[PauliString]:
    """The 3^n identity-free measurement bases, per-qubit order Z, X, Y.

    The per-qubit order matches the preparation convention (Z first), so
    the first enumerated action of an environment is the computational-
    basis one.
    """
    return [PauliString("".join(p)) for p in itertools.product("ZXY", repeat=n)]


def pauli_index(p: PauliString) -> int:
    """Index of the string in the ``all_pauli_strings`` enumeration."""
    return int("".join(str("IXYZ".index(c)) for c in p.letters), 4)
