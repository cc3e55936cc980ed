"""Hidden-channel environment behavior and the toy pattern environment."""

import json

import numpy as np
import pytest

from qksa.environment import (
    EnvError,
    EntangledAction,
    QuantumAction,
    QuantumEnvConfig,
    QuantumProcessEnv,
    load_env_config,
    matrix_to_pairs,
    parse_env_config,
    prep_state,
    standard_actions,
    toy_pattern_env,
)
from qksa.linalg import mat_equal
from qksa.paulis import EIGENSTATES, PauliString
from qksa.channels import registry_channel


def make_env(gate="I", n=1, entangled=False, seed=7):
    return QuantumProcessEnv(
        QuantumEnvConfig(n, {"gate": gate}, entangled_mode=entangled, seed=seed)
    )


def test_prep_state_order():
    # Per-qubit order Z+, Z-, X+, X-, Y+, Y-; leftmost qubit most significant.
    assert mat_equal(prep_state(0, 1).matrix, EIGENSTATES["Z"][0])
    assert mat_equal(prep_state(3, 1).matrix, EIGENSTATES["X"][1])
    assert mat_equal(prep_state(5, 1).matrix, EIGENSTATES["Y"][1])
    two = prep_state(1 * 6 + 2, 2)  # Z- on qubit 0, X+ on qubit 1
    assert mat_equal(two.matrix, np.kron(EIGENSTATES["Z"][1], EIGENSTATES["X"][0]))
    with pytest.raises(EnvError):
        prep_state(6, 1)


def test_action_space_sizes():
    assert len(standard_actions(1)) == 18
    assert len(standard_actions(2)) == 36 * 9
    assert len(make_env(entangled=True).action_space) == 9


def test_identity_env_deterministic_percept():
    env = make_env("I")
    action = QuantumAction(0, PauliString("Z"))
    assert all(env.step(action) == "0" for _ in range(50))


def test_x_env_flips():
    env = make_env("X")
    action = QuantumAction(0, PauliString("Z"))
    assert all(env.step(action) == "1" for _ in range(50))


def test_h_env_half_frequencies():
    env = make_env("H", seed=3)
    action = QuantumAction(0, PauliString("Z"))
    counts = sum(env.step(action) == "1" for _ in range(10_000))
    assert abs(counts / 10_000 - 0.5) < 0.02


def test_empirical_matches_analytic_all_registry_gates():
    # 3-sigma binomial agreement between sampled frequencies and tr[P E(rho)].
    shots = 100_000
    for gate in ("I", "X", "Y", "Z", "H", "S", "T", "RX(0.9)", "RZ(0.4)"):
        env = make_env(gate, seed=11)
        action = QuantumAction(2, PauliString("Z"))  # X+ input
        probs = env.exact_distribution(action)
        counts = env.sample_counts(action, shots)
        for outcome, p in probs.items():
            sigma = np.sqrt(max(p * (1 - p), 1e-12) / shots)
            freq = counts.get(outcome, 0) / shots
            assert abs(freq - p) <= max(3 * sigma, 1e-9), (gate, outcome)


def test_determinism_fixed_seed():
    actions = [QuantumAction(p, PauliString(b)) for p, b in
               [(0, "Z"), (2, "X"), (4, "Y"), (1, "Z")]] * 5
    a = make_env("H", seed=42)
    b = make_env("H", seed=42)
    assert [a.step(x) for x in actions] == [b.step(x) for x in actions]


def test_entangled_identity_zz_correlations():
    env = make_env("I", entangled=True, seed=5)
    seen = {env.step(EntangledAction(PauliString("ZZ"))) for _ in range(200)}
    assert seen <= {"00", "11"}
    dist = env.exact_distribution(EntangledAction(PauliString("ZZ")))
    assert dist["00"] == pytest.approx(0.5)
    assert dist["11"] == pytest.approx(0.5)


def test_entangled_identity_xx_correlations():
    # Oracle: rotate Omega into the X basis by direct arithmetic.
    h = np.array([[1, 1], [1, -1]], dtype=complex) / np.sqrt(2)
    omega = np.eye(2, dtype=complex).reshape(4) / np.sqrt(2)
    rotated = np.kron(h, h) @ omega
    probs = np.abs(rotated) ** 2
    assert probs == pytest.approx([0.5, 0, 0, 0.5], abs=1e-12)
    env = make_env("I", entangled=True, seed=5)
    dist = env.exact_distribution(EntangledAction(PauliString("XX")))
    assert [dist[b] for b in ("00", "01", "10", "11")] == pytest.approx(
        [0.5, 0, 0, 0.5], abs=1e-10
    )


def test_entangled_x_on_half_anticorrelates():
    # Oracle: (X (x) I)|Omega> = (|10> + |01>)/sqrt(2).
    x = np.array([[0, 1], [1, 0]], dtype=complex)
    omega = np.eye(2, dtype=complex).reshape(4) / np.sqrt(2)
    flipped = np.kron(x, np.eye(2)) @ omega
    assert np.abs(flipped) ** 2 == pytest.approx([0, 0.5, 0.5, 0], abs=1e-12)
    env = make_env("X", entangled=True, seed=5)
    seen = {env.step_entangled(PauliString("ZZ")) for _ in range(200)}
    assert seen <= {"01", "10"}


def test_entangled_requires_mode():
    env = make_env("I", entangled=False)
    with pytest.raises(EnvError):
        env.step(EntangledAction(PauliString("ZZ")))
    env2 = make_env("I", entangled=True)
    with pytest.raises(EnvError):
        env2.step(QuantumAction(0, PauliString("Z")))


def test_invalid_actions_rejected():
    env = make_env("I")
    with pytest.raises(EnvError):
        env.step(QuantumAction(0, PauliString("IZ")))
    with pytest.raises(EnvError):
        env.step("bogus")


def test_percept_log_records_steps():
    env = make_env("I")
    env.step(QuantumAction(0, PauliString("Z")))
    env.step(QuantumAction(1, PauliString("Z")))
    assert env.log == [(0, "p0:Z", "0"), (1, "p1:Z", "1")]


def test_clone_resets_state():
    env = make_env("H", seed=9)
    action = QuantumAction(0, PauliString("Z"))
    first = [env.step(action) for _ in range(20)]
    clone = env.clone()
    assert [clone.step(action) for _ in range(20)] == first


def test_swap_channel_hook():
    env = make_env("I")
    action = QuantumAction(0, PauliString("Z"))
    assert env.step(action) == "0"
    env.swap_channel(registry_channel("X"))
    assert env.step(action) == "1"


def test_toy_pattern_env():
    env = toy_pattern_env("01")
    assert [env.step("noop") for _ in range(3)] == ["0", "1", "0"]
    assert all(toy_pattern_env("1").step("noop") == "1" for _ in range(4))
    env3 = toy_pattern_env("0011")
    assert [env3.step("noop") for _ in range(5)] == ["0", "0", "1", "1", "0"]
    with pytest.raises(EnvError):
        toy_pattern_env("")
    with pytest.raises(EnvError):
        toy_pattern_env("012")


def test_config_round_trip(tmp_path):
    cfg = QuantumEnvConfig(1, {"gate": "H"}, entangled_mode=False, seed=13)
    path = tmp_path / "env.json"
    path.write_text(json.dumps(cfg.to_dict()))
    loaded = load_env_config(path)
    assert loaded == cfg


def test_config_kraus_channel():
    kraus = [matrix_to_pairs(np.array([[0, 1], [1, 0]], dtype=complex))]
    cfg = parse_env_config({"n_qubits": 1, "channel": {"kraus": kraus}, "seed": 0})
    env = QuantumProcessEnv(cfg)
    assert env.step(QuantumAction(0, PauliString("Z"))) == "1"


def test_config_rejects_bad_specs():
    with pytest.raises(EnvError):
        parse_env_config({"n_qubits": 1, "channel": {"gate": "NOPE"}})
    with pytest.raises(EnvError):
        parse_env_config({"n_qubits": 2, "channel": {"gate": "H"}})  # wrong arity
    with pytest.raises(EnvError):
        parse_env_config({"n_qubits": 4, "channel": {"gate": "H"}})  # too large
    with pytest.raises(EnvError):
        parse_env_config({"channel": {"gate": "H"}})  # missing n_qubits
    with pytest.raises(EnvError):
        load_env_config("/nonexistent/env.json")
