import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.linalg import expm
from scipy.stats import unitary_group

from eigenkit.pauli import PauliString, PauliSum
from eigenkit.statevector import (
    DeadStateError,
    Gate,
    StateVector,
    adjoint_circuit,
    apply_gate,
    apply_matrix,
    circuit_unitary,
    expectation,
    inner_product,
    make_rng,
    measure_qubit,
    project_qubit,
    run_circuit,
)

from conftest import kron_label

SQRT_HALF = 1 / math.sqrt(2)


def dense_gate(matrix: np.ndarray, targets, controls, n: int) -> np.ndarray:
    """Full-register matrix built entry by entry from bit manipulation."""
    dim = 1 << n
    out = np.zeros((dim, dim), dtype=complex)
    k = len(targets)
    for col in range(dim):
        if any(not (col >> c) & 1 for c in controls):
            out[col, col] = 1
            continue
        local_in = sum(((col >> t) & 1) << i for i, t in enumerate(targets))
        base = col
        for t in targets:
            base &= ~(1 << t)
        for local_out in range(1 << k):
            row = base
            for i, t in enumerate(targets):
                row |= ((local_out >> i) & 1) << t
            out[row, col] += matrix[local_out, local_in]
    return out


@st.composite
def gates_on(draw, n: int):
    k = draw(st.integers(1, min(2, n)))
    qubits = draw(st.permutations(range(n)))
    targets = tuple(qubits[:k])
    n_controls = draw(st.integers(0, min(2, n - k)))
    controls = tuple(qubits[k : k + n_controls])
    seed = draw(st.integers(0, 2**31 - 1))
    u = unitary_group.rvs(1 << k, random_state=seed)
    return Gate.unitary(u, targets).controlled_by(*controls)


def random_state(n: int, rng) -> StateVector:
    return StateVector.random(n, rng)


class TestStateVector:
    def test_rejects_unnormalized(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 1.0])

    def test_rejects_non_power_of_two(self):
        with pytest.raises(ValueError):
            StateVector([1.0, 0.0, 0.0])

    def test_bitstring_is_highest_qubit_leftmost(self):
        s = StateVector.from_bitstring("10")
        assert s.amplitudes[2] == 1

    def test_product_puts_first_factor_on_low_qubits(self):
        s = StateVector.product(StateVector.basis(1, 1), StateVector.basis(2, 0))
        assert s.amplitudes[1] == 1

    def test_amplitudes_are_read_only(self):
        s = StateVector.zero(2)
        with pytest.raises(ValueError):
            s.amplitudes[0] = 0

    def test_inner_products(self, rng):
        a = random_state(3, rng)
        assert inner_product(a, a) == pytest.approx(1.0, abs=1e-12)
        assert inner_product(StateVector.basis(1, 0), StateVector.basis(1, 1)) == 0

    def test_inner_product_decomposition(self, rng):
        a, b = random_state(3, rng), random_state(3, rng)
        overlap = np.vdot(b.amplitudes, a.amplitudes)
        perp = a.amplitudes - overlap * b.amplitudes
        b_perp = StateVector(perp / np.linalg.norm(perp))
        # a lies in span{b, b_perp}, so the two squared overlaps sum to one
        assert abs(inner_product(b, a)) ** 2 + abs(inner_product(b_perp, a)) ** 2 == pytest.approx(1.0, abs=1e-10)
        np.testing.assert_allclose(inner_product(b, a), overlap, atol=1e-12)


class TestGates:
    def test_hadamard_on_zero(self):
        s = apply_gate(StateVector.zero(1), Gate.h(0))
        np.testing.assert_allclose(s.amplitudes, [SQRT_HALF, SQRT_HALF], atol=1e-15)

    def test_hadamard_twice_is_identity(self, rng):
        s = random_state(3, rng)
        out = run_circuit(s, [Gate.h(1), Gate.h(1)])
        np.testing.assert_allclose(out.amplitudes, s.amplitudes, atol=1e-12)

    def test_control_in_zero_leaves_state(self, rng):
        u = unitary_group.rvs(4, random_state=3)
        for basis in range(8):
            if basis >> 2 & 1:
                continue
            s = StateVector.basis(3, basis)
            out = apply_gate(s, Gate.unitary(u, (0, 1)).controlled_by(2))
            np.testing.assert_array_equal(out.amplitudes, s.amplitudes)

    def test_cnot_truth_table(self):
        for c in (0, 1):
            for t in (0, 1):
                s = StateVector.basis(2, c | (t << 1))
                out = apply_gate(s, Gate.cnot(0, 1))
                assert out.amplitudes[c | ((t ^ c) << 1)] == 1

    def test_rejects_non_unitary(self):
        with pytest.raises(ValueError):
            Gate.unitary(np.array([[1, 1], [0, 1]]), (0,))

    def test_rejects_overlapping_qubits(self):
        with pytest.raises(ValueError):
            Gate.x(0).controlled_by(0)

    def test_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            apply_gate(StateVector.zero(2), Gate.x(2))

    def test_rotation_equals_dense_exponential(self):
        for label in ("XYZ", "IZY", "YYI"):
            p = PauliString.from_label(label)
            g = Gate.rotation(p, 0.731)
            np.testing.assert_allclose(
                circuit_unitary([g], 3), expm(-0.5j * 0.731 * kron_label(label)), atol=1e-12
            )

    def test_adjoint_circuit_inverts(self, rng):
        gates = [Gate.h(0), Gate.phase(0.3, 1).controlled_by(0),
                 Gate.rotation(PauliString.from_label("XY"), 1.1, (1, 2)), Gate.swap(0, 2)]
        u = circuit_unitary(gates, 3)
        v = circuit_unitary(adjoint_circuit(gates), 3)
        np.testing.assert_allclose(v @ u, np.eye(8), atol=1e-12)

    @given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), gates_on(n))))
    def test_gate_matches_dense_oracle(self, case):
        n, gate = case
        expected = dense_gate(gate.target_matrix(), gate.targets, gate.controls, n)
        np.testing.assert_allclose(circuit_unitary([gate], n), expected, atol=1e-10)

    @given(st.integers(2, 5).flatmap(lambda n: st.tuples(st.just(n), gates_on(n))), st.integers(0, 2**31 - 1))
    def test_norm_preserved(self, case, seed):
        n, gate = case
        s = StateVector.random(n, np.random.default_rng(seed))
        assert apply_gate(s, gate).norm() == pytest.approx(1.0, abs=1e-10)

    @given(st.integers(2, 4).flatmap(lambda n: st.tuples(st.just(n), gates_on(n))), st.integers(0, 2**31 - 1))
    def test_linearity(self, case, seed):
        n, gate = case
        r = np.random.default_rng(seed)
        v1 = r.normal(size=1 << n) + 1j * r.normal(size=1 << n)
        v2 = r.normal(size=1 << n) + 1j * r.normal(size=1 << n)
        a, b = 0.3 - 1.2j, 2.1
        m = gate.target_matrix()
        lhs = apply_matrix(a * v1 + b * v2, m, gate.targets, gate.controls, n)
        rhs = a * apply_matrix(v1, m, gate.targets, gate.controls, n) + b * apply_matrix(
            v2, m, gate.targets, gate.controls, n
        )
        np.testing.assert_allclose(lhs, rhs, atol=1e-10)

    def test_six_qubit_circuit_matches_dense(self, rng):
        n = 6
        gates = [Gate.h(5), Gate.cnot(5, 0), Gate.rotation(PauliString.from_label("ZX"), 0.4, (2, 4)),
                 Gate.unitary(unitary_group.rvs(4, random_state=7), (3, 1)).controlled_by(0)]
        expected = np.eye(1 << n, dtype=complex)
        for g in gates:
            expected = dense_gate(g.target_matrix(), g.targets, g.controls, n) @ expected
        np.testing.assert_allclose(circuit_unitary(gates, n), expected, atol=1e-10)


class TestMeasurement:
    def test_measure_definite_outcome(self):
        rec, post = measure_qubit(StateVector.zero(1), 0, make_rng(1))
        assert rec.outcome == 0
        assert rec.probability == 1.0
        np.testing.assert_array_equal(post.amplitudes, [1, 0])

    def test_plus_state_frequency_within_three_sigma(self):
        plus = apply_gate(StateVector.zero(1), Gate.h(0))
        trials = 10_000
        zeros = sum(measure_qubit(plus, 0, make_rng(99, 0, i))[0].outcome == 0 for i in range(trials))
        sigma = math.sqrt(trials * 0.25)
        assert abs(zeros - trials / 2) <= 3 * sigma

    def test_post_measurement_state_normalized(self, rng):
        s = random_state(3, rng)
        _, post = measure_qubit(s, 1, make_rng(5))
        assert post.norm() == pytest.approx(1.0, abs=1e-10)

    def test_dead_branch_raises(self):
        with pytest.raises(DeadStateError):
            project_qubit(StateVector.zero(1), 0, 1)


class TestExpectation:
    def test_simple_values(self):
        assert expectation(StateVector.zero(1), PauliSum.from_labels({"Z": 1.0})) == 1.0
        plus = apply_gate(StateVector.zero(1), Gate.h(0))
        assert expectation(plus, PauliSum.from_labels({"X": 1.0})) == pytest.approx(1.0)

    def test_matches_dense_oracle(self, rng):
        s = random_state(3, rng)
        h = PauliSum.from_labels({"XYZ": 0.3, "ZIZ": -1.2, "IYI": 0.7, "XXX": 0.25})
        v = s.amplitudes
        assert expectation(s, h) == pytest.approx(np.vdot(v, h.to_matrix() @ v).real, abs=1e-10)

    def test_dimension_mismatch(self):
        with pytest.raises(ValueError):
            expectation(StateVector.zero(2), PauliSum.from_labels({"Z": 1.0}))


class TestRng:
    def test_streams_are_reproducible_and_distinct(self):
        a = make_rng(7, 1, 3).random(4)
        np.testing.assert_array_equal(a, make_rng(7, 1, 3).random(4))
        assert not np.allclose(a, make_rng(7, 1, 4).random(4))
        assert not np.allclose(a, make_rng(7, 2, 3).random(4))
        assert not np.allclose(a, make_rng(8, 1, 3).random(4))
