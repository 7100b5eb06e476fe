import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from eigenkit.adiabatic import Schedule, adiabatic_evolve
from eigenkit.hamiltonian import Graph, all_graphs, build_ising, maxcut_value, transverse_field
from eigenkit.pauli import PauliString, PauliSum
from eigenkit.statevector import Gate, StateVector, expectation
from eigenkit.variational import (
    Ansatz,
    OptimizerConfig,
    QAOASchedule,
    ansatz_state,
    continuous_maxcut_cost,
    continuous_maxcut_grid_minimum,
    cost,
    maxcut_product_ansatz,
    minimize,
    parameter_shift_gradient,
    qaoa_ansatz,
    qaoa_schedule,
    qaoa_state,
)

Z = PauliSum.from_labels({"Z": 1.0})
Y_ANSATZ = Ansatz.from_generators(StateVector.zero(1), ["Y"])


def central_difference(ansatz, theta, h, eps=1e-5):
    theta = np.asarray(theta, dtype=float)
    out = np.empty(theta.size)
    for j in range(theta.size):
        e = np.zeros_like(theta)
        e[j] = eps
        out[j] = (cost(ansatz, theta + e, h) - cost(ansatz, theta - e, h)) / (2 * eps)
    return out


def entangling_ansatz() -> Ansatz:
    layers = (
        ((Gate.cnot(0, 1),), PauliString.from_label("IXI")),
        ((Gate.h(2),), PauliString.from_label("YZI")),
        ((), PauliString.from_label("ZXY")),
    )
    return Ansatz(StateVector.zero(3), layers)


H3 = PauliSum.from_labels({"ZZI": 0.7, "XIX": -0.4, "IYY": 0.3, "ZII": 0.2})


class TestAnsatz:
    def test_single_qubit_closed_form(self):
        for theta in (0.0, 0.4, math.pi / 3, 2.5):
            assert cost(Y_ANSATZ, [theta], Z) == pytest.approx(math.cos(theta), abs=1e-12)

    def test_rotation_then_fixed_gates(self):
        ansatz = Ansatz(StateVector.zero(1), (((Gate.x(0),), PauliString.from_label("Y")),))
        # X after exp(-i pi/2 Y / 2)|0> = X|+> = |+>; the opposite order would give |->
        out = ansatz_state(ansatz, [math.pi / 2])
        np.testing.assert_allclose(out.amplitudes, [1 / math.sqrt(2), 1 / math.sqrt(2)], atol=1e-12)

    def test_rejects_wrong_parameter_count(self):
        with pytest.raises(ValueError):
            cost(Y_ANSATZ, [0.1, 0.2], Z)

    def test_rejects_gate_outside_register(self):
        with pytest.raises(ValueError):
            Ansatz(StateVector.zero(1), (((Gate.x(1),), PauliString.from_label("Y")),))


class TestParameterShift:
    def test_value_at_pi_over_three(self):
        grad = parameter_shift_gradient(Y_ANSATZ, [math.pi / 3], Z)
        assert grad[0] == pytest.approx(-math.sqrt(3) / 2, abs=1e-12)

    @given(st.floats(0.05, 3.0), st.lists(st.floats(-math.pi, math.pi), min_size=3, max_size=3))
    def test_any_shift_matches_finite_difference(self, alpha, theta):
        ansatz = entangling_ansatz()
        np.testing.assert_allclose(
            parameter_shift_gradient(ansatz, theta, H3, alpha), central_difference(ansatz, theta, H3), atol=1e-7
        )

    def test_rejects_degenerate_shift(self):
        with pytest.raises(ValueError):
            parameter_shift_gradient(Y_ANSATZ, [0.1], Z, alpha=math.pi)


class TestMinimize:
    def test_reaches_single_qubit_minimum(self):
        result = minimize(Y_ANSATZ, Z, [math.pi / 3], OptimizerConfig(step_size=0.5, max_iterations=500))
        assert result.converged
        assert result.energy == pytest.approx(-1.0, abs=1e-10)
        assert result.theta[0] == pytest.approx(math.pi, abs=1e-5)

    def test_trace_records_every_iteration(self):
        result = minimize(Y_ANSATZ, Z, [0.3], OptimizerConfig(step_size=0.1, max_iterations=5))
        assert not result.converged
        assert [r.iteration for r in result.trace] == list(range(6))
        assert math.isnan(result.trace[-1].gradient_norm)
        assert result.energy == min(r.energy for r in result.trace)

    def test_energy_never_below_ground_state(self):
        result = minimize(entangling_ansatz(), H3, [0.1, 0.2, 0.3], OptimizerConfig(max_iterations=50))
        assert result.energy >= np.linalg.eigvalsh(H3.to_matrix())[0] - 1e-12

    def test_rejects_bad_config(self):
        with pytest.raises(ValueError):
            OptimizerConfig(step_size=0)


class TestQAOA:
    def test_schedule_angles(self):
        s = qaoa_schedule(4)
        np.testing.assert_allclose(s.betas, [1, 0.75, 0.5, 0.25])
        np.testing.assert_allclose(s.gammas, [0, 0.25, 0.5, 0.75])
        assert s.ds == 0.25

    def test_rejects_mismatched_angles(self):
        with pytest.raises(ValueError):
            QAOASchedule([0.1, 0.2], [0.3], 0.5)

    @pytest.mark.parametrize("n_layers", [1, 3, 6])
    def test_multi_angle_ansatz_reproduces_state(self, n_layers):
        g = Graph.from_edges(3, [(0, 1), (1, 2)])
        h0, h1 = transverse_field(3), build_ising(g)
        plus = StateVector.uniform(3)
        sched = qaoa_schedule(n_layers)
        ansatz, theta = qaoa_ansatz(h0, h1, sched, plus)
        assert ansatz_state(ansatz, theta).equal_up_to_phase(qaoa_state(h0, h1, sched, plus))

    def test_approaches_adiabatic_state(self, gapped_pair):
        h0, h1 = gapped_pair
        plus = StateVector.uniform(2)
        adiabatic = adiabatic_evolve(Schedule(h0, h1, 1.0, n_steps=4000), plus)
        target = expectation(adiabatic, h1)
        diffs = [abs(expectation(qaoa_state(h0, h1, qaoa_schedule(n), plus), h1) - target) for n in (4, 8, 16, 32, 64)]
        assert all(b < a for a, b in zip(diffs, diffs[1:]))

    def test_non_commuting_terms_rejected(self):
        h = PauliSum.from_labels({"X": 1.0, "Z": 1.0})
        with pytest.raises(ValueError):
            qaoa_ansatz(h, h, qaoa_schedule(1), StateVector.zero(1))


class TestContinuousMaxCut:
    @given(st.integers(0, 2**31 - 1))
    def test_equals_product_state_energy(self, seed):
        r = np.random.default_rng(seed)
        d = 4
        edges = [(i, j) for i in range(d) for j in range(i + 1, d) if r.random() < 0.5]
        g = Graph.from_edges(d, edges)
        phi = r.uniform(0, 2 * math.pi, size=d)
        assert continuous_maxcut_cost(g, phi) == pytest.approx(cost(maxcut_product_ansatz(d), phi, build_ising(g)), abs=1e-12)

    def test_rejects_out_of_range_angles(self):
        with pytest.raises(ValueError):
            continuous_maxcut_cost(Graph.from_edges(2, [(0, 1)]), [0.0, 2 * math.pi])

    @pytest.mark.parametrize("d", [1, 2, 3])
    def test_grid_minimum_equals_minus_maxcut(self, d):
        for g in all_graphs(d):
            assert continuous_maxcut_grid_minimum(g) == pytest.approx(-maxcut_value(g), abs=1e-12)

    def test_grid_too_large(self):
        with pytest.raises(ValueError):
            continuous_maxcut_grid_minimum(Graph.from_edges(5, [(0, 1)]))
