"""Pauli-generator ansatz states, parameter-shift gradients, descent and QAOA.

A layer applies U_j(theta_j) = exp(-i theta_j H_j / 2) followed by a fixed gate
sequence V_j.  Because every generator H_j is a Pauli string, H_j^2 = I and

    U_j(theta) = cos(theta/2) I - i sin(theta/2) H_j,

which makes the cost C(theta) = <theta|h|theta> a sinusoid of each theta_j and
the shifted difference [C(theta + a e_j) - C(theta - a e_j)] / (2 sin a) its
exact derivative for every a with sin a != 0.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from eigenkit.hamiltonian import Graph
from eigenkit.pauli import PauliString, PauliSum
from eigenkit.statevector import Gate, StateVector, expectation, run_circuit
from eigenkit.trotter import evolution_operator

__all__ = [
    "Ansatz",
    "OptimizationError",
    "OptimizerConfig",
    "OptimizeResult",
    "QAOASchedule",
    "TraceRow",
    "ansatz_state",
    "continuous_maxcut_cost",
    "continuous_maxcut_grid_minimum",
    "cost",
    "maxcut_product_ansatz",
    "minimize",
    "parameter_shift_gradient",
    "qaoa_ansatz",
    "qaoa_schedule",
    "qaoa_state",
]

MIN_ABS_SIN_ALPHA = 1e-6


class OptimizationError(ArithmeticError):
    """Raised when the cost becomes non-finite during optimization."""


@dataclass(frozen=True)
class Ansatz:
    """|theta> = V_L U_L(theta_L) ... V_1 U_1(theta_1) |initial_state>.

    ``layers`` holds ``(fixed_gates, generator)`` pairs; each generator is a
    PauliString on the full register.
    """

    initial_state: StateVector
    layers: tuple[tuple[tuple[Gate, ...], PauliString], ...]

    def __post_init__(self):
        n = self.initial_state.n_qubits
        layers = []
        for k, layer in enumerate(self.layers):
            gates, generator = layer
            if not isinstance(generator, PauliString):
                raise TypeError(
                    f"layer {k}: generator must be a PauliString (involutory), got {type(generator).__name__}"
                )
            if generator.n_qubits != n:
                raise ValueError(f"layer {k}: generator acts on {generator.n_qubits} qubits, state has {n}")
            gates = tuple(gates)
            for g in gates:
                if not isinstance(g, Gate):
                    raise TypeError(f"layer {k}: fixed unitaries must be Gate objects")
                if max(g.qubits) >= n:
                    raise ValueError(f"layer {k}: gate {g.kind} touches qubit {max(g.qubits)} outside the register")
            layers.append((gates, generator))
        object.__setattr__(self, "layers", tuple(layers))

    @classmethod
    def from_generators(cls, initial_state: StateVector, generators: Sequence[PauliString | str]) -> Ansatz:
        """Ansatz with no fixed gates; string labels are parsed as Pauli strings."""
        gens = [PauliString.from_label(g) if isinstance(g, str) else g for g in generators]
        return cls(initial_state, tuple(((), g) for g in gens))

    @property
    def n_parameters(self) -> int:
        return len(self.layers)

    @property
    def n_qubits(self) -> int:
        return self.initial_state.n_qubits

    def circuit(self, theta: Sequence[float]) -> list[Gate]:
        theta = _check_theta(self, theta)
        gates: list[Gate] = []
        for (fixed, generator), t in zip(self.layers, theta):
            gates.append(Gate.rotation(generator, t))
            gates.extend(fixed)
        return gates


def _check_theta(ansatz: Ansatz, theta) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (ansatz.n_parameters,):
        raise ValueError(f"expected {ansatz.n_parameters} parameters, got shape {theta.shape}")
    if not np.all(np.isfinite(theta)):
        raise ValueError("parameters must be finite")
    return theta


def ansatz_state(ansatz: Ansatz, theta: Sequence[float]) -> StateVector:
    return run_circuit(ansatz.initial_state, ansatz.circuit(theta))


def cost(ansatz: Ansatz, theta: Sequence[float], h: PauliSum) -> float:
    """C(theta) = <theta|h|theta>."""
    return expectation(ansatz_state(ansatz, theta), h)


def parameter_shift_gradient(
    ansatz: Ansatz, theta: Sequence[float], h: PauliSum, alpha: float = math.pi / 2
) -> np.ndarray:
    """Exact gradient of :func:`cost` from two shifted evaluations per parameter."""
    s = math.sin(alpha)
    if abs(s) <= MIN_ABS_SIN_ALPHA:
        raise ValueError(f"shift alpha={alpha} has |sin(alpha)| <= {MIN_ABS_SIN_ALPHA}")
    theta = _check_theta(ansatz, theta)
    h = h.require_hermitian("cost observable")
    grad = np.empty(theta.size)
    for j in range(theta.size):
        shift = np.zeros_like(theta)
        shift[j] = alpha
        grad[j] = (cost(ansatz, theta + shift, h) - cost(ansatz, theta - shift, h)) / (2 * s)
    return grad


@dataclass(frozen=True)
class OptimizerConfig:
    step_size: float = 0.1
    max_iterations: int = 1000
    tolerance: float = 1e-6
    alpha: float = math.pi / 2

    def __post_init__(self):
        if not (math.isfinite(self.step_size) and self.step_size > 0):
            raise ValueError("step_size must be positive and finite")
        if self.max_iterations < 0:
            raise ValueError("max_iterations must be nonnegative")
        if not self.tolerance >= 0:
            raise ValueError("tolerance must be nonnegative")
        if abs(math.sin(self.alpha)) <= MIN_ABS_SIN_ALPHA:
            raise ValueError(f"alpha={self.alpha} has |sin(alpha)| <= {MIN_ABS_SIN_ALPHA}")


@dataclass(frozen=True)
class TraceRow:
    iteration: int
    energy: float
    gradient_norm: float


@dataclass(frozen=True)
class OptimizeResult:
    theta: np.ndarray = field(repr=False)
    energy: float
    trace: tuple[TraceRow, ...] = field(repr=False)
    converged: bool


def minimize(
    ansatz: Ansatz, h: PauliSum, theta0: Sequence[float], config: OptimizerConfig = OptimizerConfig()
) -> OptimizeResult:
    """Fixed-step gradient descent; returns the lowest-energy point visited.

    Stops once the gradient norm drops below ``config.tolerance`` or after
    ``config.max_iterations`` parameter updates.
    """
    theta = _check_theta(ansatz, theta0).copy()
    best_theta, best_energy = theta.copy(), math.inf
    trace: list[TraceRow] = []
    converged = False
    for it in range(config.max_iterations + 1):
        energy = cost(ansatz, theta, h)
        if not math.isfinite(energy):
            raise OptimizationError(f"non-finite cost at iteration {it}")
        if energy < best_energy:
            best_theta, best_energy = theta.copy(), energy
        if it == config.max_iterations:
            trace.append(TraceRow(it, energy, math.nan))
            break
        grad = parameter_shift_gradient(ansatz, theta, h, config.alpha)
        gnorm = float(np.linalg.norm(grad))
        trace.append(TraceRow(it, energy, gnorm))
        if gnorm < config.tolerance:
            converged = True
            break
        theta = theta - config.step_size * grad
    best_theta.flags.writeable = False
    return OptimizeResult(best_theta, best_energy, tuple(trace), converged)


# -- QAOA -------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QAOASchedule:
    """Layer angles; layer j applies exp(-i gamma_j H1 ds) exp(-i beta_j H0 ds)."""

    betas: np.ndarray
    gammas: np.ndarray
    ds: float

    def __post_init__(self):
        b = np.array(self.betas, dtype=float)
        g = np.array(self.gammas, dtype=float)
        if b.ndim != 1 or b.shape != g.shape or b.size == 0:
            raise ValueError("betas and gammas must be equal-length nonempty 1-D arrays")
        if not (math.isfinite(self.ds) and self.ds > 0):
            raise ValueError("ds must be positive")
        b.flags.writeable = False
        g.flags.writeable = False
        object.__setattr__(self, "betas", b)
        object.__setattr__(self, "gammas", g)

    @property
    def n_layers(self) -> int:
        return self.betas.size


def qaoa_schedule(n_layers: int) -> QAOASchedule:
    """Linear-ramp angles beta_j = 1 - j ds, gamma_j = j ds, ds = 1/n_layers."""
    if n_layers < 1:
        raise ValueError("QAOA needs at least one layer")
    ds = 1.0 / n_layers
    j = np.arange(n_layers)
    return QAOASchedule(1.0 - j * ds, j * ds, ds)


def qaoa_state(h0: PauliSum, h1: PauliSum, schedule: QAOASchedule, initial: StateVector) -> StateVector:
    n = initial.n_qubits
    if h0.n_qubits != n or h1.n_qubits != n:
        raise ValueError(f"Hamiltonians on {h0.n_qubits}/{h1.n_qubits} qubits, state on {n}")
    vec = initial.amplitudes
    for beta, gamma in zip(schedule.betas, schedule.gammas):
        vec = evolution_operator(h0, beta * schedule.ds) @ vec
        vec = evolution_operator(h1, gamma * schedule.ds) @ vec
    return StateVector(vec, normalize=True)


def _rotation_terms(h: PauliSum, name: str) -> list[tuple[float, PauliString]]:
    h = h.require_hermitian(name)
    if not h.mutually_commuting():
        raise ValueError(f"{name} terms must commute pairwise to split into single-string rotations")
    return [(c.real, p) for c, p in h.terms if not p.is_identity]


def qaoa_ansatz(
    h0: PauliSum, h1: PauliSum, schedule: QAOASchedule, initial: StateVector
) -> tuple[Ansatz, np.ndarray]:
    """One rotation per non-identity term, seeded from ``schedule``.

    exp(-i beta c P ds) is the rotation with angle 2 beta c ds, so the returned
    parameters reproduce :func:`qaoa_state` up to a global phase while letting
    every term's angle vary independently.  Requires each Hamiltonian's terms
    to commute.
    """
    terms0 = _rotation_terms(h0, "h0")
    terms1 = _rotation_terms(h1, "h1")
    generators, theta = [], []
    for beta, gamma in zip(schedule.betas, schedule.gammas):
        for coeffs, scale in ((terms0, beta), (terms1, gamma)):
            for c, p in coeffs:
                generators.append(p)
                theta.append(2.0 * scale * c * schedule.ds)
    return Ansatz.from_generators(initial, generators), np.array(theta)


# -- continuous MaxCut --------------------------------------------------------


def continuous_maxcut_cost(graph: Graph, phi: Sequence[float]) -> float:
    """(1/4) sum_{i,j} A_ij (cos phi_i cos phi_j - 1) for angles in [0, 2 pi)."""
    phi = np.asarray(phi, dtype=float)
    if phi.shape != (graph.d,):
        raise ValueError(f"expected {graph.d} angles, got shape {phi.shape}")
    if np.any((phi < 0) | (phi >= 2 * math.pi)) or not np.all(np.isfinite(phi)):
        raise ValueError("angles must lie in [0, 2 pi)")
    c = np.cos(phi)
    a = graph.adjacency
    return float(0.25 * (c @ a @ c - a.sum()))


def maxcut_product_ansatz(d: int) -> Ansatz:
    """prod_k exp(-i phi_k Y_k / 2) |0...0>, whose Ising energy is the continuous cost."""
    return Ansatz.from_generators(
        StateVector.zero(d), [PauliString.from_ops(d, {k: "Y"}) for k in range(d)]
    )


def continuous_maxcut_grid_minimum(graph: Graph, points_per_axis: int = 32) -> float:
    """Minimum of the continuous cost over the grid phi_k = 2 pi m / points_per_axis."""
    d = graph.d
    if points_per_axis ** d > 2**24:
        raise ValueError("grid too large")
    c = np.cos(2 * math.pi * np.arange(points_per_axis) / points_per_axis)
    axes = np.meshgrid(*([c] * d), indexing="ij", sparse=True)
    total = np.zeros((1,) * d)
    for i, j in graph.edges:
        total = total + 0.5 * (axes[i] * axes[j] - 1.0)
    return float(np.min(total))
