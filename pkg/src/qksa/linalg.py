"""Dense complex linear-algebra helpers shared across the package.

Everything here works on plain ``numpy`` complex arrays; higher-level
wrappers (density matrices, channels) live in their own modules.
"""

from __future__ import annotations

import numpy as np

# Default absolute tolerance for matrix comparisons.
ATOL = 1e-10


def dagger(m: np.ndarray) -> np.ndarray:
    return m.conj().T


def mat_equal(a: np.ndarray, b: np.ndarray, atol: float = ATOL) -> bool:
    """Entrywise equality within an absolute tolerance."""
    a = np.asarray(a)
    b = np.asarray(b)
    if a.shape != b.shape:
        return False
    return float(np.max(np.abs(a - b))) <= atol if a.size else True


def is_hermitian(m: np.ndarray, atol: float = ATOL) -> bool:
    return mat_equal(m, dagger(m), atol)


def is_unitary(m: np.ndarray, atol: float = ATOL) -> bool:
    return mat_equal(dagger(m) @ m, np.eye(m.shape[0]), atol)


def hermitize(m: np.ndarray) -> np.ndarray:
    """Symmetrize away sub-tolerance rounding asymmetry."""
    return 0.5 * (m + dagger(m))


def kron_all(mats) -> np.ndarray:
    """Kronecker product of a sequence, left factor most significant."""
    out = np.array([[1.0 + 0.0j]])
    for m in mats:
        out = np.kron(out, m)
    return out


def min_eigenvalue(m: np.ndarray) -> float:
    return float(np.linalg.eigvalsh(m)[0])


def project_psd(m: np.ndarray) -> np.ndarray:
    """Nearest PSD matrix in Frobenius norm: clip negative eigenvalues at 0."""
    vals, vecs = np.linalg.eigh(hermitize(m))
    clipped = np.clip(vals, 0.0, None)
    return (vecs * clipped) @ dagger(vecs)


def trace_distance(a: np.ndarray, b: np.ndarray) -> float:
    """(1/2)``Tr|a-b|`` for Hermitian a, b."""
    return 0.5 * float(np.sum(np.abs(np.linalg.eigvalsh(hermitize(a - b)))))


def partial_trace_first(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out the first (most significant) tensor factor of a d1*d2 matrix."""
    r = m.reshape(d1, d2, d1, d2)
    return np.einsum("ijik->jk", r)


def partial_trace_second(m: np.ndarray, d1: int, d2: int) -> np.ndarray:
    """Trace out the second (least significant) tensor factor."""
    r = m.reshape(d1, d2, d1, d2)
    return np.einsum("ijkj->ik", r)


def haar_unitary(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Haar-random unitary via QR of a complex Ginibre matrix."""
    z = (rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))) / np.sqrt(2.0)
    q, r = np.linalg.qr(z)
    d = np.diag(r)
    return q * (d / np.abs(d))
