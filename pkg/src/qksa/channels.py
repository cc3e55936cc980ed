"""CPTP channels in Kraus, Pauli-basis chi, and Choi representations.

The Choi matrix is stored *normalized* (trace 1), i.e. as the density
matrix obtained by sending one half of the maximally entangled state
through the channel. Conversions to the trace-preservation condition
rescale by 2^n internally.

All conversions route through the flattening identity
``vec(B) = (B (x) I)|Omega~>`` with row-major ``vec``, which makes the
unnormalized Choi matrix ``C = V chi V+`` for ``V[:, m] = vec(P_m)`` and
``C = sum_k vec(A_k) vec(A_k)+`` for Kraus operators ``A_k``.
"""

from __future__ import annotations

import re
from dataclasses import dataclass

import numpy as np

from .linalg import (
    dagger,
    hermitize,
    is_hermitian,
    is_unitary,
    kron_all,
    mat_equal,
    min_eigenvalue,
    partial_trace_first,
)
from .paulis import PauliString, all_pauli_strings
from .states import DensityMatrix

KRAUS_ATOL = 1e-8
CHOI_ATOL = 1e-8


class ChannelError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Raw-array conversions


def _pauli_vec_basis(n: int) -> np.ndarray:
    d = 2 ** n
    return np.stack([p.matrix().reshape(d * d) for p in all_pauli_strings(n)], axis=1)


def kraus_to_choi(kraus: list[np.ndarray], n: int) -> np.ndarray:
    """Normalized (trace-1) Choi matrix of an operator-sum channel."""
    d = 2 ** n
    c = np.zeros((d * d, d * d), dtype=complex)
    for a in kraus:
        v = np.asarray(a, dtype=complex).reshape(d * d)
        c += np.outer(v, v.conj())
    return hermitize(c) / d


def choi_to_kraus(choi: np.ndarray, n: int, tol: float = 1e-12) -> list[np.ndarray]:
    """Kraus operators from a normalized Choi matrix (eigendecomposition)."""
    d = 2 ** n
    vals, vecs = np.linalg.eigh(hermitize(choi) * d)
    ops = []
    for lam, v in zip(vals[::-1], vecs.T[::-1]):
        if lam > tol:
            ops.append(np.sqrt(lam) * v.reshape(d, d))
    return ops


def chi_to_choi(chi: np.ndarray, n: int) -> np.ndarray:
    """Normalized Choi matrix from a Pauli-basis process matrix."""
    chi = np.asarray(chi, dtype=complex)
    if not is_hermitian(chi):
        raise ChannelError("chi matrix must be Hermitian")
    v = _pauli_vec_basis(n)
    d = 2 ** n
    return hermitize(v @ chi @ dagger(v)) / d


def choi_to_chi(choi: np.ndarray, n: int) -> np.ndarray:
    """Pauli-basis process matrix from a normalized Choi matrix."""
    v = _pauli_vec_basis(n)
    d = 2 ** n
    return hermitize(dagger(v) @ (choi * d) @ v) / (d * d)


def apply_choi(choi: np.ndarray, rho: np.ndarray, n: int) -> np.ndarray:
    """E(rho)[a,b] = sum_ij rho[i,j] * C[(a,i),(b,j)] with C = d * choi."""
    d = 2 ** n
    c4 = (choi * d).reshape(d, d, d, d)
    return np.einsum("ij,aibj->ab", rho, c4)


def choi_is_trace_preserving(choi: np.ndarray, n: int, atol: float = CHOI_ATOL) -> bool:
    d = 2 ** n
    return mat_equal(partial_trace_first(choi * d, d, d), np.eye(d), atol)


def project_to_cptp(choi: np.ndarray, n: int, atol: float = 1e-10,
                    max_iter: int = 2000) -> np.ndarray:
    """Alternating projections onto the PSD cone and the TP affine subspace.

    Both sets are convex and intersect (the CPTP set), so the iteration
    converges; estimator noise is small in practice and a handful of
    rounds suffice.
    """
    d = 2 ** n
    c = hermitize(np.asarray(choi, dtype=complex)) * d
    eye = np.eye(d)
    for _ in range(max_iter):
        defect = partial_trace_first(c, d, d) - eye
        c = c - np.kron(eye / d, defect)
        vals, vecs = np.linalg.eigh(hermitize(c))
        if vals[0] >= -atol and float(np.max(np.abs(defect))) <= atol:
            break
        c = (vecs * np.clip(vals, 0.0, None)) @ dagger(vecs)
    c = hermitize(c)
    return c / c.trace().real


# ---------------------------------------------------------------------------
# Channel wrapper

KRAUS, CHI, CHOI = "kraus", "chi", "choi"


@dataclass(frozen=True, eq=False)
class QuantumChannel:
    """A CPTP map in one of three interchangeable representations."""

    n_qubits: int
    representation: str
    kraus_ops: tuple[np.ndarray, ...] | None = None
    chi_matrix: np.ndarray | None = None
    choi_state: DensityMatrix | None = None
    check_tp: bool = True

    def __post_init__(self):
        if self.representation not in (KRAUS, CHI, CHOI):
            raise ChannelError(f"unknown representation {self.representation!r}")
        self._validate()

    # -- constructors

    @classmethod
    def from_kraus(cls, ops, n: int | None = None) -> "QuantumChannel":
        ops = tuple(np.array(a, dtype=complex) for a in ops)
        if not ops:
            raise ChannelError("empty Kraus list")
        dim = ops[0].shape[0]
        n = int(np.log2(dim)) if n is None else n
        if 2 ** n != dim:
            raise ChannelError("Kraus operator dimension must be a power of 2")
        for a in ops:
            a.setflags(write=False)
        return cls(n, KRAUS, kraus_ops=ops)

    @classmethod
    def from_unitary(cls, u: np.ndarray) -> "QuantumChannel":
        u = np.asarray(u, dtype=complex)
        if not is_unitary(u):
            raise ChannelError("matrix is not unitary")
        return cls.from_kraus([u])

    @classmethod
    def from_chi(cls, chi: np.ndarray, n: int) -> "QuantumChannel":
        chi = np.array(chi, dtype=complex)
        if chi.shape != (4 ** n, 4 ** n):
            raise ChannelError(f"chi must be {4**n}x{4**n}")
        chi.setflags(write=False)
        return cls(n, CHI, chi_matrix=chi)

    @classmethod
    def from_choi(cls, choi: DensityMatrix, check_tp: bool = True) -> "QuantumChannel":
        if choi.n_qubits % 2:
            raise ChannelError("Choi state must live on 2n qubits")
        return cls(choi.n_qubits // 2, CHOI, choi_state=choi, check_tp=check_tp)

    # -- validation

    def _validate(self):
        d = 2 ** self.n_qubits
        if self.representation == KRAUS:
            acc = np.zeros((d, d), dtype=complex)
            for a in self.kraus_ops:
                if a.shape != (d, d):
                    raise ChannelError("Kraus operator has wrong dimension")
                acc += dagger(a) @ a
            if not mat_equal(acc, np.eye(d), KRAUS_ATOL):
                raise ChannelError("Kraus operators do not satisfy completeness")
        else:
            choi = self.choi()
            if min_eigenvalue(choi) < -CHOI_ATOL:
                raise ChannelError("Choi matrix is not PSD")
            if abs(choi.trace() - 1.0) > CHOI_ATOL:
                raise ChannelError("Choi matrix is not trace-normalized")
            if self.check_tp and not choi_is_trace_preserving(choi, self.n_qubits):
                raise ChannelError("channel is not trace-preserving")

    # -- representation access

    def kraus(self) -> list[np.ndarray]:
        if self.representation == KRAUS:
            return list(self.kraus_ops)
        return choi_to_kraus(self.choi(), self.n_qubits)

    def chi(self) -> np.ndarray:
        if self.representation == CHI:
            return np.array(self.chi_matrix)
        return choi_to_chi(self.choi(), self.n_qubits)

    def choi(self) -> np.ndarray:
        if self.representation == CHOI:
            return np.array(self.choi_state.matrix)
        if self.representation == CHI:
            return chi_to_choi(self.chi_matrix, self.n_qubits)
        return kraus_to_choi(list(self.kraus_ops), self.n_qubits)

    def choi_density(self) -> DensityMatrix:
        if self.representation == CHOI:
            return self.choi_state
        return DensityMatrix(2 * self.n_qubits, self.choi())

    def apply(self, rho: DensityMatrix) -> DensityMatrix:
        if rho.n_qubits != self.n_qubits:
            raise ChannelError("state qubit count does not match channel")
        if self.representation == KRAUS:
            out = np.zeros((rho.dim, rho.dim), dtype=complex)
            for a in self.kraus_ops:
                out += a @ rho.matrix @ dagger(a)
        elif self.representation == CHI:
            paulis = [p.matrix() for p in all_pauli_strings(self.n_qubits)]
            out = np.zeros((rho.dim, rho.dim), dtype=complex)
            for m, pm in enumerate(paulis):
                for k, pk in enumerate(paulis):
                    coeff = self.chi_matrix[m, k]
                    if abs(coeff) > 1e-16:
                        out += coeff * (pm @ rho.matrix @ dagger(pk))
        else:
            out = apply_choi(self.choi_state.matrix, rho.matrix, self.n_qubits)
        return DensityMatrix(rho.n_qubits, hermitize(out))


def apply_channel(rho: DensityMatrix, channel: QuantumChannel) -> DensityMatrix:
    return channel.apply(rho)


def maximally_entangled_state(n: int) -> DensityMatrix:
    """|Omega><Omega| on 2n qubits, Omega = 2^{-n/2} sum_i |i>|i>."""
    d = 2 ** n
    psi = np.eye(d, dtype=complex).reshape(d * d) / np.sqrt(d)
    return DensityMatrix.from_statevector(psi)


def choi_from_channel(channel: QuantumChannel) -> DensityMatrix:
    """The channel acting on half of |Omega>, as a 2n-qubit density matrix."""
    return channel.choi_density()


def depolarizing_channel(n: int, p: float = 1.0) -> QuantumChannel:
    """Mixes the input with the maximally mixed state at rate p."""
    if not 0.0 <= p <= 1.0:
        raise ChannelError("depolarizing strength must lie in [0, 1]")
    d = 2 ** n
    ops = [np.sqrt(1.0 - p + p / (d * d)) * np.eye(d, dtype=complex)]
    for pauli in all_pauli_strings(n)[1:]:
        ops.append(np.sqrt(p) / d * pauli.matrix())
    return QuantumChannel.from_kraus(ops, n)


# ---------------------------------------------------------------------------
# Named gate registry

_H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2.0)
_S = np.diag([1.0, 1.0j]).astype(complex)
_T = np.diag([1.0, np.exp(1j * np.pi / 4)]).astype(complex)
_CNOT = np.array(
    [[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex
)
_SWAP = np.array(
    [[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex
)


def _rx(theta: float) -> np.ndarray:
    c, s = np.cos(theta / 2), np.sin(theta / 2)
    return np.array([[c, -1j * s], [-1j * s, c]], dtype=complex)


def _rz(theta: float) -> np.ndarray:
    return np.diag([np.exp(-1j * theta / 2), np.exp(1j * theta / 2)]).astype(complex)


GATE_REGISTRY = {
    "I": (lambda: np.eye(2, dtype=complex), 1, False),
    "X": (lambda: PauliString("X").matrix(), 1, False),
    "Y": (lambda: PauliString("Y").matrix(), 1, False),
    "Z": (lambda: PauliString("Z").matrix(), 1, False),
    "H": (lambda: _H, 1, False),
    "S": (lambda: _S, 1, False),
    "T": (lambda: _T, 1, False),
    "CNOT": (lambda: _CNOT, 2, False),
    "SWAP": (lambda: _SWAP, 2, False),
    "RX": (_rx, 1, True),
    "RZ": (_rz, 1, True),
}

_GATE_SPEC = re.compile(r"^([A-Z]+)(?:\(([^)]*)\))?$")


def gate_unitary(spec: str) -> tuple[np.ndarray, int]:
    """Resolve a registry spec like ``"H"`` or ``"RX(0.5)"`` to (matrix, n)."""
    m = _GATE_SPEC.match(spec.strip())
    if not m:
        raise ChannelError(f"malformed gate spec {spec!r}")
    name, arg = m.group(1), m.group(2)
    if name not in GATE_REGISTRY:
        raise ChannelError(f"unknown gate {name!r}")
    builder, n, takes_angle = GATE_REGISTRY[name]
    if takes_angle:
        if arg is None:
            raise ChannelError(f"gate {name} requires an angle argument")
        try:
            theta = float(arg)
        except ValueError as exc:
            raise ChannelError(f"bad angle {arg!r} for gate {name}") from exc
        return builder(theta), n
    if arg is not None:
        raise ChannelError(f"gate {name} takes no argument")
    return builder(), n


def registry_channel(spec: str) -> QuantumChannel:
    u, _ = gate_unitary(spec)
    return QuantumChannel.from_unitary(u)
