"""State and process reconstruction from measurement statistics.

Three procedures are provided, with their textbook setting budgets:

* state reconstruction from the 3^n identity-free Pauli bases,
* process reconstruction from the 6^n eigenstate inputs x 3^n output
  bases (18^n settings), solved for the Pauli-basis process matrix by
  least squares,
* entanglement-assisted process reconstruction: state reconstruction of
  the post-channel half-of-Omega state over 3^(2n) = 9^n bases, whose
  result *is* the normalized Choi matrix.

Mixed-weight Pauli expectations (e.g. ZI) are never measured separately:
they are marginal parities of the identity-free settings, averaged over
every compatible setting.

``shots=None`` selects exact mode: expectations are computed from the
environment's analytic outcome distribution instead of sampled counts.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field

import numpy as np

from .channels import QuantumChannel, chi_to_choi, project_to_cptp
from .environment import EntangledAction, QuantumAction, prep_state
from .linalg import hermitize, min_eigenvalue, trace_distance
from .paulis import PauliString, all_pauli_strings, full_weight_bases
from .states import MIN_EIG, DensityMatrix, outcome_probabilities


class TomographyError(ValueError):
    pass


# ---------------------------------------------------------------------------
# Budgets


@dataclass(frozen=True)
class ReconstructionBudget:
    method: str
    settings: tuple
    shots_per_setting: int | None

    @property
    def settings_count(self) -> int:
        return len(self.settings)


def qst_budget(n: int, shots: int | None = None) -> ReconstructionBudget:
    return ReconstructionBudget("qst", tuple(full_weight_bases(n)), shots)


def sqpt_budget(n: int, shots: int | None = None) -> ReconstructionBudget:
    settings = tuple(
        (p, b) for p, b in itertools.product(range(6 ** n), full_weight_bases(n))
    )
    return ReconstructionBudget("sqpt", settings, shots)


def eapt_budget(n: int, shots: int | None = None) -> ReconstructionBudget:
    return ReconstructionBudget("eapt", tuple(full_weight_bases(2 * n)), shots)


# ---------------------------------------------------------------------------
# Expectation estimation


@dataclass
class ExpectationTable:
    """Finite-shot estimates keyed by (prep_index, observable letters)."""

    entries: dict = field(default_factory=dict)

    def add(self, prep_index: int | None, letters: str, estimate: float, shots: int):
        if shots < 1:
            raise TomographyError("shots_used must be >= 1")
        if not -1.0 - 1e-12 <= estimate <= 1.0 + 1e-12:
            raise TomographyError(f"estimate {estimate} outside [-1, 1]")
        self.entries[(prep_index, letters)] = (float(estimate), int(shots))

    def estimate(self, prep_index: int | None, letters: str) -> float:
        return self.entries[(prep_index, letters)][0]


def parity(bits: str, support: tuple[int, ...]) -> int:
    """(-1)^(number of 1 bits on the supported qubit positions)."""
    ones = sum(1 for i in support if bits[i] == "1")
    return -1 if ones % 2 else 1


def _sub_paulis(setting: PauliString) -> list[tuple[str, tuple[int, ...]]]:
    """Non-identity Pauli strings obtainable from one identity-free setting."""
    n = setting.n_qubits
    out = []
    for mask in range(1, 2 ** n):
        support = tuple(i for i in range(n) if mask & (1 << (n - 1 - i)))
        letters = "".join(
            setting.letters[i] if i in support else "I" for i in range(n)
        )
        out.append((letters, support))
    return out


def expectations_from_counts(setting: PauliString,
                             counts: dict[str, float]) -> dict[str, float]:
    """Marginal parity estimates for every sub-Pauli of one setting.

    ``counts`` may hold integer shot counts or exact probabilities.
    """
    total = float(sum(counts.values()))
    if total <= 0:
        raise TomographyError("empty counts for setting " + setting.letters)
    out = {}
    for letters, support in _sub_paulis(setting):
        acc = sum(w * parity(bits, support) for bits, w in counts.items())
        out[letters] = acc / total
    return out


def pool_setting_estimates(per_setting: dict[str, dict[str, float]],
                           n: int) -> dict[str, float]:
    """Average each Pauli's estimate over all compatible settings."""
    sums: dict[str, list[float]] = {}
    for ests in per_setting.values():
        for letters, val in ests.items():
            sums.setdefault(letters, []).append(val)
    pooled = {letters: float(np.mean(vals)) for letters, vals in sums.items()}
    missing = [
        p.letters for p in all_pauli_strings(n)[1:] if p.letters not in pooled
    ]
    if missing:
        raise TomographyError(f"missing Pauli terms: {missing}")
    return pooled


def estimate_expectation(env, prep_index: int, basis: PauliString,
                         shots: int | None,
                         rng: np.random.Generator | None = None) -> float:
    """Mean +-1 parity of the basis observable after the given preparation."""
    action = QuantumAction(prep_index, basis)
    support = tuple(range(basis.n_qubits))
    if shots is None:
        dist = env.exact_distribution(action)
        return float(sum(p * parity(b, support) for b, p in dist.items()))
    counts = env.sample_counts(action, shots, rng)
    return float(
        sum(c * parity(b, support) for b, c in counts.items()) / shots
    )


def _gather_state_counts(env, shots, rng, make_action, n: int, recorder=None):
    """Counts (or exact probabilities) per identity-free setting."""
    per_setting = {}
    for basis in full_weight_bases(n):
        action = make_action(basis)
        if shots is None:
            per_setting[basis.letters] = env.exact_distribution(action)
            if recorder is not None:
                recorder.measured(1)
        else:
            per_setting[basis.letters] = env.sample_counts(action, shots, rng)
            if recorder is not None:
                recorder.measured(shots)
    if recorder is not None:
        recorder.alloc(len(per_setting) * 2 ** n)
    return per_setting


# ---------------------------------------------------------------------------
# State reconstruction


def qst(expectations: dict[str, float], n: int) -> DensityMatrix:
    """rho = 2^-n * sum_P E_P P over all 4^n Paulis, identity term fixed at 1.

    If finite-shot noise pushes the result below the PSD tolerance it is
    projected back by eigenvalue clipping followed by trace renormalization.
    """
    d = 2 ** n
    rho = np.eye(d, dtype=complex)
    for p in all_pauli_strings(n)[1:]:
        if p.letters not in expectations:
            raise TomographyError(f"missing Pauli term {p.letters}")
        rho = rho + expectations[p.letters] * p.matrix()
    rho = hermitize(rho) / d
    if min_eigenvalue(rho) < MIN_EIG:
        vals, vecs = np.linalg.eigh(rho)
        vals = np.clip(vals, 0.0, None)
        rho = (vecs * vals) @ vecs.conj().T / vals.sum()
    return DensityMatrix(n, rho)


def qst_from_env(env, shots: int | None, rng: np.random.Generator | None = None,
                 prep_index: int = 0, recorder=None) -> DensityMatrix:
    """Reconstruct the post-channel state for one preparation."""
    n = env.n_qubits
    per_setting = _gather_state_counts(
        env, shots, rng, lambda b: QuantumAction(prep_index, b), n, recorder
    )
    return qst_from_setting_counts(per_setting, n, recorder)


def qst_from_setting_counts(per_setting: dict[str, dict[str, float]], n: int,
                            recorder=None) -> DensityMatrix:
    ests = {}
    for letters, counts in per_setting.items():
        ests[letters] = expectations_from_counts(PauliString(letters), counts)
        if recorder is not None:
            recorder.mat_op(len(ests[letters]))
    pooled = pool_setting_estimates(ests, n)
    if recorder is not None:
        recorder.alloc(len(pooled))
        recorder.mat_op(4 ** n)
        recorder.alloc(4 ** n)
    rho = qst(pooled, n)
    if recorder is not None:
        recorder.free(len(per_setting) * 2 ** n + len(pooled))
    return rho


# ---------------------------------------------------------------------------
# Process reconstruction


def _chi_design(n: int):
    """Real least-squares design tensor for the process-matrix solve.

    For Hermitian chi the measured value tr[M_q E(rho_p)] is linear in the
    real parametrization (diagonal, then Re/Im of each upper off-diagonal
    pair) with coefficients built from T[p,q,m,k] = tr[M_q P_m rho_p P_k].
    """
    d2 = 4 ** n
    paulis = np.stack([p.matrix() for p in all_pauli_strings(n)])
    preps = np.stack([prep_state(p, n).matrix for p in range(6 ** n)])
    # T[p, q, m, k] = tr[ M_q P_m rho_p P_k ]
    t = np.einsum("qij,mjk,pkl,nli->pqmn", paulis, paulis, preps, paulis,
                  optimize=True)
    rows = []
    for m in range(d2):
        rows.append(np.real(t[:, :, m, m]).reshape(-1))
    for m in range(d2):
        for k in range(m + 1, d2):
            rows.append(2.0 * np.real(t[:, :, m, k]).reshape(-1))
    for m in range(d2):
        for k in range(m + 1, d2):
            rows.append(-2.0 * np.imag(t[:, :, m, k]).reshape(-1))
    return np.stack(rows, axis=1)


def _chi_from_params(x: np.ndarray, d2: int) -> np.ndarray:
    chi = np.zeros((d2, d2), dtype=complex)
    idx = 0
    for m in range(d2):
        chi[m, m] = x[idx]
        idx += 1
    off = d2 * (d2 - 1) // 2
    pairs = [(m, k) for m in range(d2) for k in range(m + 1, d2)]
    for j, (m, k) in enumerate(pairs):
        chi[m, k] += x[idx + j]
        chi[k, m] += x[idx + j]
    for j, (m, k) in enumerate(pairs):
        chi[m, k] += 1j * x[idx + off + j]
        chi[k, m] += -1j * x[idx + off + j]
    return chi


def solve_chi(prep_expectations: dict[int, dict[str, float]], n: int,
              recorder=None) -> np.ndarray:
    """Least-squares process matrix from per-preparation Pauli expectations."""
    d2 = 4 ** n
    y = np.empty(6 ** n * d2)
    i = 0
    for p in range(6 ** n):
        ests = prep_expectations[p]
        for q in all_pauli_strings(n):
            y[i] = 1.0 if q.weight == 0 else ests[q.letters]
            i += 1
    a = _chi_design(n)
    if recorder is not None:
        recorder.alloc(a.size + y.size)
        recorder.mat_op(a.shape[0] * a.shape[1])
    x, _, rank, _ = np.linalg.lstsq(a, y, rcond=None)
    if rank < a.shape[1]:
        raise TomographyError("rank-deficient process system")  # defensive
    chi = _chi_from_params(x, d2)
    if recorder is not None:
        recorder.free(a.size + y.size)
    return chi


def sqpt_from_counts(counts_by_setting: dict[tuple[int, str], dict[str, float]],
                     n: int, recorder=None) -> QuantumChannel:
    """Process reconstruction from per-(preparation, setting) outcome counts."""
    per_prep: dict[int, dict[str, dict[str, float]]] = {}
    for (p, letters), counts in counts_by_setting.items():
        per_prep.setdefault(p, {})[letters] = counts
    if sorted(per_prep) != list(range(6 ** n)):
        raise TomographyError("counts must cover all 6^n preparations")
    prep_expectations = {}
    for p, per_setting in per_prep.items():
        ests = {
            letters: expectations_from_counts(PauliString(letters), counts)
            for letters, counts in per_setting.items()
        }
        prep_expectations[p] = pool_setting_estimates(ests, n)
        if recorder is not None:
            recorder.mat_op(len(prep_expectations[p]))
    chi = solve_chi(prep_expectations, n, recorder)
    return _channel_from_raw_choi(chi_to_choi(chi, n), n, recorder)


def _channel_from_raw_choi(choi: np.ndarray, n: int, recorder=None) -> QuantumChannel:
    projected = project_to_cptp(choi, n)
    if recorder is not None:
        recorder.alloc(projected.size)
        recorder.mat_op(projected.shape[0] ** 3)
    return QuantumChannel.from_choi(DensityMatrix(2 * n, projected))


def sqpt(env, shots: int | None, rng: np.random.Generator | None = None,
         recorder=None) -> QuantumChannel:
    """Standard process reconstruction driven against an environment."""
    if getattr(env, "entangled_mode", False):
        raise TomographyError("sqpt needs a standard (non-entangled) environment")
    n = env.n_qubits
    counts_by_setting = {}
    for p, basis in sqpt_budget(n).settings:
        action = QuantumAction(p, basis)
        if shots is None:
            counts_by_setting[(p, basis.letters)] = env.exact_distribution(action)
            if recorder is not None:
                recorder.measured(1)
        else:
            counts_by_setting[(p, basis.letters)] = env.sample_counts(action, shots, rng)
            if recorder is not None:
                recorder.measured(shots)
    if recorder is not None:
        recorder.alloc(len(counts_by_setting) * 2 ** n)
    channel = sqpt_from_counts(counts_by_setting, n, recorder)
    if recorder is not None:
        recorder.free(len(counts_by_setting) * 2 ** n)
    return channel


def eapt_from_counts(counts_by_setting: dict[str, dict[str, float]], n: int,
                     recorder=None) -> QuantumChannel:
    """Choi-state reconstruction from 2n-qubit setting counts."""
    choi_dm = qst_from_setting_counts(counts_by_setting, 2 * n, recorder)
    return _channel_from_raw_choi(choi_dm.matrix, n, recorder)


def eapt(env, shots: int | None, rng: np.random.Generator | None = None,
         recorder=None) -> QuantumChannel:
    """Entanglement-assisted process reconstruction against an environment."""
    if not getattr(env, "entangled_mode", False):
        raise TomographyError("eapt needs an entangled-mode environment")
    n = env.n_qubits
    per_setting = _gather_state_counts(
        env, shots, rng, EntangledAction, 2 * n, recorder
    )
    return eapt_from_counts(per_setting, n, recorder)


# ---------------------------------------------------------------------------
# Prediction


def predict(model: QuantumChannel, action) -> dict[str, float]:
    """Exact outcome distribution of an action under the model channel."""
    if isinstance(action, EntangledAction):
        state = model.choi_density()
    else:
        state = model.apply(prep_state(action.prep_index, model.n_qubits))
    probs = outcome_probabilities(state, action.meas_basis)
    width = action.meas_basis.n_qubits
    return {format(i, f"0{width}b"): float(p) for i, p in enumerate(probs)}


def point_prediction(model: QuantumChannel, action) -> str:
    """Argmax outcome; ties resolve to the lexicographically smallest string."""
    dist = predict(model, action)
    best = max(sorted(dist), key=lambda b: dist[b])
    return best


# ---------------------------------------------------------------------------
# Reporting


@dataclass
class ReconstructionReport:
    method: str
    n_qubits: int
    settings_count: int
    shots_per_setting: int | None
    choi: DensityMatrix
    trace_distance_to_truth: float | None = None

    def to_json_text(self) -> str:
        from .environment import matrix_to_pairs

        payload = {
            "method": self.method,
            "n_qubits": self.n_qubits,
            "settings_count": self.settings_count,
            "shots_per_setting": self.shots_per_setting,
            "choi": matrix_to_pairs(self.choi.matrix),
            "trace_distance_to_truth": self.trace_distance_to_truth,
        }
        return json.dumps(payload, indent=2, sort_keys=True)


def choi_trace_distance(a: QuantumChannel, b: QuantumChannel) -> float:
    return trace_distance(a.choi(), b.choi())
