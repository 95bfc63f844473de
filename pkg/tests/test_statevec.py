import numpy as np
import pytest

from hybridsim import statevec as sv


def plus_state():
    amps = np.full(2, 1 / np.sqrt(2), dtype=np.complex128)
    return sv.QuantumState(1, amps)


def test_fidelity_of_zero_and_plus_is_inverse_sqrt2():
    # By hand: |<0|+>| = 1/sqrt(2).
    f = sv.fidelity(sv.zero_state(1), plus_state())
    assert abs(f - 2 ** -0.5) < 1e-12


def test_layers_preserve_norm_on_random_states():
    rng = np.random.default_rng(7)
    for _ in range(1000):
        state = sv.random_state(8, rng)
        state = sv.apply_layer(state, sv.random_layer(8, rng))
        norm = np.vdot(state.amps, state.amps).real
        assert abs(norm - 1.0) < 1e-9


def test_gate_application_matches_kronecker_product():
    # Independent route: build the full 2^n matrix with kron and compare.
    rng = np.random.default_rng(3)
    n = 5
    for _ in range(20):
        state = sv.random_state(n, rng)
        u2 = sv.random_unitary(2, rng)
        q = int(rng.integers(n))
        got = sv.apply_layer(state, sv.GateLayer([sv.Gate(u2, (q,))]))
        mats = [u2 if k == q else np.eye(2) for k in range(n)]
        full = mats[-1]
        for m in reversed(mats[:-1]):
            full = np.kron(full, m)
        assert np.allclose(full @ state.amps, got.amps, atol=1e-12)


def test_two_qubit_gate_matches_kronecker_product_on_adjacent_pair():
    rng = np.random.default_rng(4)
    n = 4
    u4 = sv.random_unitary(4, rng)
    state = sv.random_state(n, rng)
    got = sv.apply_layer(state, sv.GateLayer([sv.Gate(u4, (0, 1))]))
    # Local index convention: targets[0] is the low bit, so (0, 1) acting on
    # the two lowest qubits is exactly kron(I, ..., u4).
    full = np.kron(np.kron(np.eye(2), np.eye(2)), u4)
    assert np.allclose(full @ state.amps, got.amps, atol=1e-12)


def test_cnot_truth_table():
    cx = sv.cnot_gate()
    for c in (0, 1):
        for t in (0, 1):
            src = c + 2 * t
            dst = c + 2 * (t ^ c)
            assert cx[dst, src] == 1.0


def test_hadamard_layer_builds_uniform_superposition():
    state = sv.apply_layer(sv.zero_state(3), sv.hadamard_layer(range(3)))
    assert np.allclose(state.amps, np.full(8, 8 ** -0.5), atol=1e-12)


def test_measure_statistics_on_plus_state():
    rng = np.random.default_rng(11)
    counts = 0
    trials = 10_000
    for _ in range(trials):
        outcome, _ = sv.measure(plus_state(), [0], rng)
        counts += outcome
    sigma = (trials * 0.25) ** 0.5
    assert abs(counts - trials / 2) <= 3 * sigma


def test_measure_collapses_and_renormalizes():
    rng = np.random.default_rng(2)
    state = sv.apply_layer(sv.zero_state(2), sv.GateLayer([sv.Gate(sv.H_GATE, (0,))]))
    state = sv.apply_layer(state, sv.GateLayer([sv.Gate(sv.cnot_gate(), (0, 1))]))
    outcome, post = sv.measure(state, [0], rng)
    # Bell pair: the unmeasured qubit must agree with the outcome.
    expected = np.zeros(4, dtype=np.complex128)
    expected[outcome * 3] = 1.0
    assert np.allclose(post.amps, expected, atol=1e-12)


def test_project_on_impossible_outcome_raises():
    with pytest.raises(ValueError, match="impossible outcome"):
        sv.project(sv.zero_state(2), [0], 1)


def test_register_map_packing_and_overlap_rejection():
    regs = sv.make_register_map([("Q", 3), ("R", 2)])
    assert regs["Q"].offset == 0 and regs["R"].offset == 3
    idx = 0b10110
    assert regs["Q"].extract(idx) == 0b110
    assert regs["R"].extract(idx) == 0b10
    bad = {"A": sv.Register(0, 3), "B": sv.Register(2, 2)}
    amps = np.zeros(1 << 4, dtype=np.complex128)
    amps[0] = 1.0
    with pytest.raises(ValueError, match="overlap"):
        sv.QuantumState(4, amps, bad)


def test_layer_rejects_gates_sharing_a_qubit():
    with pytest.raises(ValueError, match="reuses"):
        sv.GateLayer([sv.Gate(sv.H_GATE, (1,)), sv.Gate(sv.X_GATE, (1,))])


def test_norm_validation_rejects_unnormalized_vectors():
    with pytest.raises(ValueError, match="norm"):
        sv.QuantumState(1, np.array([1.0, 1.0], dtype=np.complex128))


# -- distances ---------------------------------------------------------------


def dm_fidelity(rho, sigma):
    # Independent oracle: eigen square roots, straight from the definition.
    def sqrtm(m):
        vals, vecs = np.linalg.eigh(m)
        return (vecs * np.sqrt(np.clip(vals, 0, None))) @ vecs.conj().T

    inner = sqrtm(sqrtm(rho) @ sigma @ sqrtm(rho))
    return float(np.trace(inner).real)


def test_pure_state_distances_match_density_matrix_route():
    rng = np.random.default_rng(5)
    for _ in range(25):
        a = sv.random_state(3, rng)
        b = sv.random_state(3, rng)
        ra, rb = sv.density_matrix(a), sv.density_matrix(b)
        # 1e-7: sqrt of near-zero eigenvalues amplifies reference noise to ~1e-8.
        f_ref = dm_fidelity(ra, rb)
        assert abs(sv.fidelity(a, b) - f_ref) < 1e-7
        td_ref = 0.5 * np.abs(np.linalg.eigvalsh(ra - rb)).sum()
        assert abs(sv.trace_distance(a, b) - td_ref) < 1e-8
        assert abs(sv.bures(a, b) ** 2 - (2 - 2 * sv.fidelity(a, b))) < 1e-9


def test_fidelity_bounds_and_symmetry():
    rng = np.random.default_rng(6)
    for _ in range(20):
        a = sv.random_state(2, rng)
        b = sv.random_state(2, rng)
        f = sv.fidelity(a, b)
        assert 0.0 <= f <= 1.0
        assert abs(f - sv.fidelity(b, a)) < 1e-12
    assert abs(sv.fidelity(a, a) - 1.0) < 1e-12


def test_mixed_state_fidelity_against_hand_value():
    # F(I/2, |0><0|) = sqrt(1/2).
    mixed = sv.Ensemble([(0.5, sv.zero_state(1)), (0.5, sv.basis_state(1, 1))])
    f = sv.fidelity(mixed, sv.zero_state(1))
    assert abs(f - 2 ** -0.5) < 1e-9


def test_ensemble_weight_validation():
    with pytest.raises(ValueError, match="sum"):
        sv.Ensemble([(0.6, sv.zero_state(1)), (0.6, sv.basis_state(1, 1))])


def test_bures_bounds_probability_gaps():
    # For any basis-diagonal projector, |tr(P a) - tr(P b)| <= bures(a, b).
    rng = np.random.default_rng(9)
    for _ in range(50):
        a = sv.random_state(4, rng)
        b = sv.random_state(4, rng)
        pick = rng.random(16) < 0.5
        pa = float(a.probabilities()[pick].sum())
        pb = float(b.probabilities()[pick].sum())
        assert abs(pa - pb) <= sv.bures(a, b) + 1e-9


def test_density_matrix_qubit_cap():
    amps = np.zeros(1 << 11, dtype=np.complex128)
    amps[0] = 1.0
    with pytest.raises(ValueError, match="capped"):
        sv.density_matrix(sv.QuantumState(11, amps))
