"""Core state algebra: tensor products, unitaries, expectations, collapse."""

import itertools

import numpy as np
import pytest

from qksa.linalg import haar_unitary, mat_equal
from qksa.paulis import EIGENSTATES, PAULI_1Q, PauliString, all_pauli_strings
from qksa.states import (
    DensityMatrix,
    StateError,
    apply_unitary,
    expectation,
    measure_projective,
    outcome_probabilities,
    tensor,
    validate_density,
)

H = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)


def test_tensor_identity():
    assert mat_equal(tensor(np.eye(2), np.eye(2)), np.eye(4))


def test_tensor_z_with_identity_is_diag():
    assert mat_equal(tensor(PAULI_1Q["Z"], np.eye(2)), np.diag([1, 1, -1, -1]))


def test_tensor_basis_ordering():
    ket0 = np.array([[1], [0]], dtype=complex)
    ket1 = np.array([[0], [1]], dtype=complex)
    out = tensor(ket0, ket1)
    assert out.shape == (4, 1)
    assert mat_equal(out, np.array([[0], [1], [0], [0]]))


def test_apply_unitary_bit_flip():
    rho = DensityMatrix.computational("0")
    flipped = apply_unitary(rho, PAULI_1Q["X"])
    assert mat_equal(flipped.matrix, DensityMatrix.computational("1").matrix)


def test_apply_unitary_maximally_mixed_invariant(rng):
    rho = DensityMatrix.maximally_mixed(1)
    for _ in range(5):
        u = haar_unitary(2, rng)
        assert mat_equal(apply_unitary(rho, u).matrix, rho.matrix)


def test_apply_unitary_hadamard_gives_plus():
    plus = apply_unitary(DensityMatrix.computational("0"), H)
    assert mat_equal(plus.matrix, np.full((2, 2), 0.5))


def test_apply_unitary_rejects_non_unitary():
    with pytest.raises(StateError):
        apply_unitary(DensityMatrix.computational("0"), np.array([[1, 0], [0, 2.0]]))


def test_apply_unitary_rejects_dim_mismatch():
    with pytest.raises(StateError):
        apply_unitary(DensityMatrix.computational("00"), PAULI_1Q["X"])


def test_unitary_invertibility(rng):
    for _ in range(20):
        u = haar_unitary(4, rng)
        rho = DensityMatrix.computational("01")
        back = apply_unitary(apply_unitary(rho, u), u.conj().T)
        assert mat_equal(back.matrix, rho.matrix, atol=1e-10)


def test_expectation_z_eigenstate():
    assert expectation(DensityMatrix.computational("0"), PauliString("Z")) == pytest.approx(1.0)


def test_expectation_orthogonal_basis():
    assert expectation(DensityMatrix.computational("0"), PauliString("X")) == pytest.approx(0.0, abs=1e-12)


def test_expectation_maximally_mixed_traceless():
    rho = DensityMatrix.maximally_mixed(2)
    for p in all_pauli_strings(2)[1:]:
        assert expectation(rho, p) == pytest.approx(0.0, abs=1e-12)


def test_pauli_orthogonality_n2():
    for n in (1, 2):
        dim = 2 ** n
        for a, b in itertools.product(all_pauli_strings(n), repeat=2):
            tr = np.trace(a.matrix() @ b.matrix())
            expected = dim if a.letters == b.letters else 0.0
            assert tr == pytest.approx(expected, abs=1e-12)


def test_measure_plus_state_born_rule(rng):
    plus = apply_unitary(DensityMatrix.computational("0"), H)
    probs = outcome_probabilities(plus, PauliString("Z"))
    assert probs == pytest.approx([0.5, 0.5])
    counts = {"0": 0, "1": 0}
    for _ in range(2000):
        outcome, _ = measure_projective(plus, PauliString("Z"), rng)
        counts[outcome] += 1
    assert abs(counts["0"] / 2000 - 0.5) < 0.05


def test_measure_eigenstate_is_deterministic(rng):
    rho = DensityMatrix.computational("0")
    outcome, collapsed = measure_projective(rho, PauliString("Z"), rng)
    assert outcome == "0"
    assert mat_equal(collapsed.matrix, rho.matrix)


def test_measure_bell_like_product_in_xx(rng):
    # (H (x) H)|00> measured in XX must always give "00": oracle computed
    # from explicitly constructed eigen-projectors on the 4x4 matrix.
    rho = apply_unitary(DensityMatrix.computational("00"), np.kron(H, H))
    for bits in ("00", "01", "10", "11"):
        proj = np.kron(
            EIGENSTATES["X"][int(bits[0])], EIGENSTATES["X"][int(bits[1])]
        )
        p = float(np.real(np.trace(proj @ rho.matrix)))
        assert p == pytest.approx(1.0 if bits == "00" else 0.0, abs=1e-12)
    for _ in range(20):
        outcome, _ = measure_projective(rho, PauliString("XX"), rng)
        assert outcome == "00"


def test_measure_rejects_identity_in_basis(rng):
    rho = DensityMatrix.maximally_mixed(2)
    with pytest.raises(StateError):
        measure_projective(rho, PauliString("IZ"), rng)


def test_born_normalization_random_states(rng):
    for _ in range(20):
        u = haar_unitary(4, rng)
        rho = apply_unitary(DensityMatrix.computational("00"), u)
        for basis in ("XX", "YZ", "ZZ"):
            probs = outcome_probabilities(rho, PauliString(basis))
            assert float(probs.sum()) == pytest.approx(1.0, abs=1e-10)


def test_density_validator_rejects_bad_matrices():
    with pytest.raises(StateError):
        DensityMatrix(1, np.array([[1.0, 0.5], [0.2, 0.0]]))  # not Hermitian
    with pytest.raises(StateError):
        DensityMatrix(1, np.diag([0.7, 0.7]))  # trace 1.4
    with pytest.raises(StateError):
        DensityMatrix(1, np.diag([1.5, -0.5]))  # negative eigenvalue
    validate_density(np.diag([0.5, 0.5]).astype(complex))


def test_density_matrix_is_immutable():
    rho = DensityMatrix.computational("0")
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0.3
