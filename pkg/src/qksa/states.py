"""Density matrices on up to a few qubits, measurements, and unitary action.

States are validated at construction (Hermitian, unit trace, PSD), so any
``DensityMatrix`` in the system is a legal quantum state by construction.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .linalg import dagger, hermitize, is_unitary, kron_all, min_eigenvalue
from .paulis import EIGENSTATES, MEAS_ROTATIONS, PauliString

HERM_ATOL = 1e-10
TRACE_ATOL = 1e-10
MIN_EIG = -1e-8
PROB_ATOL = 1e-10


class StateError(ValueError):
    pass


@dataclass(frozen=True)
class DensityMatrix:
    """Hermitian, trace-1, PSD complex matrix of dimension 2^n."""

    n_qubits: int
    matrix: np.ndarray

    def __post_init__(self):
        arr = np.array(self.matrix, dtype=complex)
        dim = 2 ** self.n_qubits
        if arr.shape != (dim, dim):
            raise StateError(f"expected {dim}x{dim} matrix, got {arr.shape}")
        validate_density(arr)
        arr.setflags(write=False)
        object.__setattr__(self, "matrix", arr)

    @property
    def dim(self) -> int:
        return 2 ** self.n_qubits

    @classmethod
    def from_statevector(cls, psi: np.ndarray) -> "DensityMatrix":
        psi = np.asarray(psi, dtype=complex).reshape(-1)
        n = int(np.log2(len(psi)))
        if 2 ** n != len(psi):
            raise StateError("statevector length must be a power of 2")
        return cls(n, np.outer(psi, psi.conj()))

    @classmethod
    def computational(cls, bits: str) -> "DensityMatrix":
        """|bits><bits| with the leftmost bit most significant."""
        dim = 2 ** len(bits)
        psi = np.zeros(dim, dtype=complex)
        psi[int(bits, 2)] = 1.0
        return cls(len(bits), np.outer(psi, psi.conj()))

    @classmethod
    def maximally_mixed(cls, n: int) -> "DensityMatrix":
        dim = 2 ** n
        return cls(n, np.eye(dim, dtype=complex) / dim)


def validate_density(arr: np.ndarray, herm_atol: float = HERM_ATOL,
                     trace_atol: float = TRACE_ATOL, min_eig: float = MIN_EIG) -> None:
    """Raise StateError unless arr is Hermitian, unit-trace and PSD."""
    if float(np.max(np.abs(arr - dagger(arr)))) > herm_atol:
        raise StateError("matrix is not Hermitian")
    if abs(arr.trace() - 1.0) > trace_atol:
        raise StateError(f"trace is {arr.trace():.12g}, expected 1")
    lo = min_eigenvalue(arr)
    if lo < min_eig:
        raise StateError(f"minimum eigenvalue {lo:.3e} below {min_eig:.0e}")


def tensor(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Kronecker product with ``a``'s index as the major index."""
    return np.kron(np.asarray(a, dtype=complex), np.asarray(b, dtype=complex))


def tensor_states(a: DensityMatrix, b: DensityMatrix) -> DensityMatrix:
    return DensityMatrix(a.n_qubits + b.n_qubits, tensor(a.matrix, b.matrix))


def apply_unitary(rho: DensityMatrix, u: np.ndarray) -> DensityMatrix:
    """rho -> U rho U+ for a unitary U of matching dimension."""
    u = np.asarray(u, dtype=complex)
    if u.shape != (rho.dim, rho.dim):
        raise StateError(f"unitary shape {u.shape} does not match state dim {rho.dim}")
    if not is_unitary(u):
        raise StateError("operator is not unitary")
    return DensityMatrix(rho.n_qubits, hermitize(u @ rho.matrix @ dagger(u)))


def expectation(rho: DensityMatrix, obs: PauliString) -> float:
    """tr[M rho] for a Pauli observable; the imaginary residue must vanish."""
    if obs.n_qubits != rho.n_qubits:
        raise StateError("observable qubit count does not match state")
    val = complex(np.trace(obs.matrix() @ rho.matrix))
    if abs(val.imag) > PROB_ATOL:
        raise StateError(f"expectation has imaginary residue {val.imag:.3e}")
    return float(val.real)


def basis_rotation(basis: PauliString) -> np.ndarray:
    """Unitary mapping each qubit's measurement eigenbasis to the Z basis."""
    return kron_all(MEAS_ROTATIONS[c] for c in basis.letters)


def outcome_probabilities(rho: DensityMatrix, basis: PauliString) -> np.ndarray:
    """Born-rule outcome distribution, indexed by the outcome bitstring value.

    Bit 0 means the +1 eigenstate of that qubit's basis letter.
    """
    if "I" in basis.letters:
        raise StateError("measurement basis must not contain I")
    if basis.n_qubits != rho.n_qubits:
        raise StateError("basis qubit count does not match state")
    u = basis_rotation(basis)
    probs = np.real(np.diag(u @ rho.matrix @ dagger(u))).copy()
    if probs.min() < -PROB_ATOL or abs(probs.sum() - 1.0) > PROB_ATOL:
        raise StateError("outcome distribution is not normalized")
    return np.clip(probs, 0.0, None)


def eigenstate_product(basis: PauliString, bits: str) -> DensityMatrix:
    """Product state of per-qubit eigenstates selected by the outcome bits."""
    mats = [EIGENSTATES[c][int(b)] for c, b in zip(basis.letters, bits)]
    return DensityMatrix(basis.n_qubits, kron_all(mats))


def measure_projective(rho: DensityMatrix, basis: PauliString,
                       rng: np.random.Generator) -> tuple[str, DensityMatrix]:
    """Sample a full projective measurement; return (outcome, collapsed state).

    Every qubit is measured, so the collapse lands on a rank-1 product of
    eigenstates and the renormalized projection equals that product state.
    """
    probs = outcome_probabilities(rho, basis)
    idx = int(np.searchsorted(np.cumsum(probs), rng.random(), side="right"))
    idx = min(idx, len(probs) - 1)
    if probs[idx] <= 0.0:
        raise StateError("zero-probability branch selected")  # defensive
    outcome = format(idx, f"0{basis.n_qubits}b")
    return outcome, eigenstate_product(basis, outcome)
