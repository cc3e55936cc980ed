"""Reconstruction procedures: budgets, exact-mode fidelity, shot noise."""

import numpy as np
import pytest

from qksa.channels import choi_from_channel, depolarizing_channel, registry_channel
from qksa.environment import EntangledAction, QuantumAction, QuantumEnvConfig, QuantumProcessEnv
from qksa.least import ExecutionTrace
from qksa.linalg import mat_equal, trace_distance
from qksa.paulis import PauliString
from qksa.tomography import (
    TomographyError,
    choi_trace_distance,
    eapt,
    eapt_budget,
    estimate_expectation,
    expectations_from_counts,
    point_prediction,
    predict,
    qst,
    qst_budget,
    qst_from_env,
    sqpt,
    sqpt_budget,
)

SINGLE_QUBIT_GATES = ("I", "X", "Y", "Z", "H", "S", "T", "RX(0.6)", "RZ(1.1)")


def make_env(gate="I", n=1, entangled=False, seed=7):
    return QuantumProcessEnv(
        QuantumEnvConfig(n, {"gate": gate}, entangled_mode=entangled, seed=seed)
    )


# -- budgets -----------------------------------------------------------------

def test_budget_counts_match_method_definitions():
    assert qst_budget(1).settings_count == 3
    assert qst_budget(2).settings_count == 9
    assert sqpt_budget(1).settings_count == 18
    assert sqpt_budget(2).settings_count == 18 ** 2
    assert eapt_budget(1).settings_count == 9
    assert eapt_budget(2).settings_count == 81
    # EAPT settings live on 2n qubits.
    assert all(b.n_qubits == 2 for b in eapt_budget(1).settings)


# -- expectation estimation --------------------------------------------------

def test_estimate_expectation_exact_identity():
    env = make_env("I")
    assert estimate_expectation(env, 0, PauliString("Z"), None) == pytest.approx(1.0)


def test_estimate_expectation_symmetric_sampling(rng):
    env = make_env("I", seed=1)
    est = estimate_expectation(env, 0, PauliString("X"), 10_000, rng)
    assert abs(est) < 0.03


def test_estimate_expectation_h_plus_state():
    # H|0> = |+>, and tr[X |+><+|] = 1.
    env = make_env("H")
    assert estimate_expectation(env, 0, PauliString("X"), None) == pytest.approx(1.0)


def test_marginal_parities_from_counts():
    counts = {"00": 50, "11": 50}
    ests = expectations_from_counts(PauliString("ZZ"), counts)
    assert ests["ZZ"] == pytest.approx(1.0)
    assert ests["ZI"] == pytest.approx(0.0)
    assert ests["IZ"] == pytest.approx(0.0)


# -- state reconstruction ----------------------------------------------------

def test_qst_plugs_expectations_into_pauli_sum():
    rho = qst({"X": 0.0, "Y": 0.0, "Z": 1.0}, 1)
    assert mat_equal(rho.matrix, np.diag([1.0, 0.0]))
    rho = qst({"X": 0.0, "Y": 0.0, "Z": 0.0}, 1)
    assert mat_equal(rho.matrix, np.eye(2) / 2)
    rho = qst({"X": 1.0, "Y": 0.0, "Z": 0.0}, 1)
    assert mat_equal(rho.matrix, np.full((2, 2), 0.5))


def test_qst_rejects_missing_terms():
    with pytest.raises(TomographyError):
        qst({"X": 0.0, "Y": 0.0}, 1)


def test_qst_projects_noisy_estimates_to_psd():
    rho = qst({"X": 0.9, "Y": 0.0, "Z": 0.9}, 1)  # Bloch norm > 1
    assert np.linalg.eigvalsh(rho.matrix)[0] >= -1e-8
    assert np.trace(rho.matrix).real == pytest.approx(1.0)


def test_qst_from_env_exact_recovers_plus():
    env = make_env("H")
    rho = qst_from_env(env, None)
    assert mat_equal(rho.matrix, np.full((2, 2), 0.5), atol=1e-8)


def test_qst_instrumented_measurement_count(rng):
    # 3 settings x s shots must count exactly 3*s measurement primitives.
    for shots in (5, 20):
        trace = ExecutionTrace()
        qst_from_env(make_env("H", seed=2), shots, rng, recorder=trace)
        assert trace.measurements == 3 * shots


# -- process reconstruction --------------------------------------------------

def test_sqpt_exact_identity_chi():
    chan = sqpt(make_env("I"), None)
    assert mat_equal(chan.chi(), np.diag([1.0, 0, 0, 0]), atol=1e-8)


def test_sqpt_exact_x_chi():
    chan = sqpt(make_env("X"), None)
    assert mat_equal(chan.chi(), np.diag([0, 1.0, 0, 0]), atol=1e-8)


def test_sqpt_exact_h_matches_direct_choi():
    chan = sqpt(make_env("H"), None)
    truth = choi_from_channel(registry_channel("H"))
    assert mat_equal(chan.choi(), truth.matrix, atol=1e-8)


def test_sqpt_rejects_entangled_env():
    with pytest.raises(TomographyError):
        sqpt(make_env("I", entangled=True), None)


def test_eapt_exact_identity_is_omega():
    chan = eapt(make_env("I", entangled=True), None)
    truth = choi_from_channel(registry_channel("I"))
    assert mat_equal(chan.choi(), truth.matrix, atol=1e-8)


def test_eapt_exact_x_matches_direct_arithmetic():
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    xi = np.kron(x, np.eye(2))
    omega = np.eye(2, dtype=complex).reshape(4) / np.sqrt(2)
    expected = xi @ np.outer(omega, omega.conj()) @ xi.conj().T
    chan = eapt(make_env("X", entangled=True), None)
    assert mat_equal(chan.choi(), expected, atol=1e-8)


def test_eapt_requires_entangled_env():
    with pytest.raises(TomographyError):
        eapt(make_env("I"), None)


@pytest.mark.parametrize("gate", SINGLE_QUBIT_GATES)
def test_exact_mode_round_trip_both_methods(gate):
    truth = registry_channel(gate)
    via_sqpt = sqpt(make_env(gate), None)
    via_eapt = eapt(make_env(gate, entangled=True), None)
    assert choi_trace_distance(via_sqpt, truth) <= 1e-6
    assert choi_trace_distance(via_eapt, truth) <= 1e-6
    assert choi_trace_distance(via_sqpt, via_eapt) <= 1e-6


def test_sqpt_exact_two_qubit_cnot():
    truth = registry_channel("CNOT")
    chan = sqpt(make_env("CNOT", n=2), None)
    assert choi_trace_distance(chan, truth) <= 1e-6


def test_shot_noise_decreases_with_budget():
    gate = "H"
    truth = registry_channel(gate)
    medians = []
    for shots in (100, 1000, 10_000):
        dists = []
        for seed in range(20):
            env = make_env(gate, seed=100 + seed)
            rng = np.random.default_rng(seed)
            dists.append(choi_trace_distance(sqpt(env, shots, rng), truth))
        medians.append(float(np.median(dists)))
    assert medians[0] > medians[1] > medians[2]
    assert medians[2] <= 0.05


# -- prediction ----------------------------------------------------------------

def test_predict_identity_channel():
    dist = predict(registry_channel("I"), QuantumAction(0, PauliString("Z")))
    assert dist == pytest.approx({"0": 1.0, "1": 0.0})


def test_predict_h_channel_uniform():
    dist = predict(registry_channel("H"), QuantumAction(0, PauliString("Z")))
    assert dist["0"] == pytest.approx(0.5)
    assert dist["1"] == pytest.approx(0.5)


def test_predict_depolarizing_uniform_everywhere():
    chan = depolarizing_channel(1)
    for prep in range(6):
        for basis in ("X", "Y", "Z"):
            dist = predict(chan, QuantumAction(prep, PauliString(basis)))
            assert dist["0"] == pytest.approx(0.5)
            assert dist["1"] == pytest.approx(0.5)


def test_predict_sums_to_one_and_point_prediction_ties_lex():
    action = QuantumAction(0, PauliString("Z"))
    dist = predict(registry_channel("H"), action)
    assert sum(dist.values()) == pytest.approx(1.0, abs=1e-10)
    assert point_prediction(registry_channel("H"), action) == "0"  # tie -> lex min


def test_predict_entangled_action():
    dist = predict(registry_channel("I"), EntangledAction(PauliString("ZZ")))
    assert dist["00"] == pytest.approx(0.5)
    assert dist["11"] == pytest.approx(0.5)


def test_predict_matches_empirical_frequencies():
    # Reconstruct, then check predictions against fresh environment samples.
    env = make_env("H", seed=21)
    model = sqpt(env, 2000, np.random.default_rng(3))
    action = QuantumAction(2, PauliString("Z"))
    dist = predict(model, action)
    fresh = make_env("H", seed=77)
    shots = 10_000
    counts = fresh.sample_counts(action, shots)
    for outcome, p in dist.items():
        sigma = np.sqrt(max(p * (1 - p), 1e-12) / shots)
        freq = counts.get(outcome, 0) / shots
        assert abs(freq - p) <= max(3 * sigma, 0.02)


def test_reconstructed_channels_pass_cptp_validation():
    rng = np.random.default_rng(5)
    chan = sqpt(make_env("H", seed=31), 200, rng)
    choi = chan.choi()
    assert np.linalg.eigvalsh(choi)[0] >= -1e-8
    assert abs(np.trace(choi).real - 1.0) <= 1e-8
    scaled = choi * 2
    from qksa.linalg import partial_trace_first
    assert mat_equal(partial_trace_first(scaled, 2, 2), np.eye(2), atol=1e-8)
