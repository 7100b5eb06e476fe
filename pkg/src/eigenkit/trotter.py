"""Product-formula approximations of exp(-i H dt) for H = H_A + H_B."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from eigenkit.pauli import PauliSum, check_dense_limit
from eigenkit.statevector import StateVector

__all__ = [
    "ProductFormula",
    "SplitHamiltonian",
    "bch_truncated",
    "evolution_operator",
    "evolve",
    "exact_evolution",
    "step_unitary",
    "trotter_step",
]


def evolution_operator(h: PauliSum | np.ndarray, t: float) -> np.ndarray:
    """Dense exp(-i h t) for Hermitian ``h``.

    A single Pauli string c*P uses cos(c t) I - i sin(c t) P; anything else is
    diagonalized, which keeps the result unitary to machine precision.
    """
    if isinstance(h, PauliSum):
        h = h.require_hermitian("Hamiltonian")
        check_dense_limit(h.n_qubits, "evolution operator")
        dim = 1 << h.n_qubits
        if len(h) == 0:
            return np.eye(dim, dtype=complex)
        if len(h) == 1:
            (c, p), = h.terms
            c = c.real
            return math.cos(c * t) * np.eye(dim) - 1j * math.sin(c * t) * p.to_matrix()
        h = h.to_matrix()
    w, v = np.linalg.eigh(h)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


@dataclass(frozen=True)
class SplitHamiltonian:
    part_a: PauliSum
    part_b: PauliSum

    def __post_init__(self):
        if self.part_a.n_qubits != self.part_b.n_qubits:
            raise ValueError("split parts act on different qubit counts")
        self.part_a.require_hermitian("part_a")
        self.part_b.require_hermitian("part_b")

    @property
    def n_qubits(self) -> int:
        return self.part_a.n_qubits

    @property
    def total(self) -> PauliSum:
        return self.part_a + self.part_b


@dataclass(frozen=True)
class ProductFormula:
    """Trotter-Suzuki formula.

    Order 1: ``"AB"`` is exp(-iA dt) exp(-iB dt) (B acts first), ``"BA"`` the
    reverse.  Order 2: ``"B"`` is exp(-iB dt/2) exp(-iA dt) exp(-iB dt/2) and
    ``"A"`` swaps the roles.
    """

    order: int = 1
    variant: str | None = None

    def __post_init__(self):
        if self.order not in (1, 2):
            raise ValueError(f"only orders 1 and 2 are supported, got {self.order}")
        allowed = ("AB", "BA") if self.order == 1 else ("B", "A")
        variant = allowed[0] if self.variant is None else self.variant
        if variant not in allowed:
            raise ValueError(f"order {self.order} variant must be one of {allowed}")
        object.__setattr__(self, "variant", variant)


def step_unitary(split: SplitHamiltonian, dt: float, formula: ProductFormula = ProductFormula()) -> np.ndarray:
    """Dense matrix of one product-formula step."""
    if not math.isfinite(dt):
        raise ValueError("dt must be finite")
    a, b = split.part_a, split.part_b
    if formula.order == 1:
        ua, ub = evolution_operator(a, dt), evolution_operator(b, dt)
        return ua @ ub if formula.variant == "AB" else ub @ ua
    outer, inner = (b, a) if formula.variant == "B" else (a, b)
    half = evolution_operator(outer, dt / 2)
    return half @ evolution_operator(inner, dt) @ half


def trotter_step(
    split: SplitHamiltonian, dt: float, formula: ProductFormula, state: StateVector
) -> StateVector:
    return state.evolve(step_unitary(split, dt, formula))


def evolve(
    split: SplitHamiltonian,
    total_time: float,
    n_steps: int,
    formula: ProductFormula,
    state: StateVector,
) -> StateVector:
    """``n_steps`` repeated steps with dt = total_time / n_steps."""
    if n_steps < 1:
        raise ValueError("n_steps must be at least 1")
    if state.n_qubits != split.n_qubits:
        raise ValueError("state and Hamiltonian qubit counts differ")
    u = step_unitary(split, total_time / n_steps, formula)
    vec = state.amplitudes
    for _ in range(n_steps):
        vec = u @ vec
    return StateVector(vec, normalize=True)


def exact_evolution(h: PauliSum, total_time: float, state: StateVector) -> StateVector:
    return state.evolve(evolution_operator(h, total_time))


def _comm(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    return a @ b - b @ a


def bch_truncated(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """A + B + [A,B]/2 + [A,[A,B]]/12 - [B,[A,B]]/12."""
    a = np.asarray(a, dtype=complex)
    b = np.asarray(b, dtype=complex)
    if a.shape != b.shape or a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise ValueError(f"need equal square matrices, got {a.shape} and {b.shape}")
    if a.shape[0] > 64:
        raise ValueError("bch_truncated is limited to 64x64 matrices")
    ab = _comm(a, b)
    return a + b + ab / 2 + _comm(a, ab) / 12 - _comm(b, ab) / 12
