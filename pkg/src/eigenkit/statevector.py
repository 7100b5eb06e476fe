"""Dense statevector simulation.

Amplitude index ``i`` encodes the computational basis state in which qubit ``q``
holds bit ``q`` of ``i`` (little-endian).  A k-qubit gate matrix acting on
``targets`` uses the same convention locally: ``targets[0]`` is the least
significant bit of the matrix row/column index.

Kets written in text with the highest qubit leftmost, e.g. ``|q1 q0>``, map to
amplitude index ``2*q1 + q0``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from eigenkit.pauli import PauliString, PauliSum, check_dense_limit

__all__ = [
    "DeadStateError",
    "Gate",
    "MeasurementRecord",
    "StateVector",
    "apply_gate",
    "apply_matrix",
    "adjoint_circuit",
    "circuit_unitary",
    "expectation",
    "inner_product",
    "make_rng",
    "measure_qubit",
    "outcome_probability",
    "project_qubit",
    "run_circuit",
]

NORM_TOL = 1e-10
UNITARY_TOL = 1e-10
DEAD_PROBABILITY = 1e-14


class DeadStateError(RuntimeError):
    """Raised when every measurement outcome has negligible probability."""


def make_rng(seed: int, stream: int = 0, substream: int = 0) -> np.random.Generator:
    """Counter-based generator for ``(seed, stream, substream)``.

    The Philox key is derived from ``(seed, stream)``; ``substream`` is placed in
    the third counter word, so distinct substreams never overlap for fewer than
    2^64 draws each.  Results are independent of creation order.
    """
    key = np.random.SeedSequence([int(seed) & (2**64 - 1), int(stream)]).generate_state(
        2, np.uint64
    )
    counter = np.array([0, 0, int(substream), 0], dtype=np.uint64)
    return np.random.Generator(np.random.Philox(key=key, counter=counter))


class StateVector:
    """Normalized n-qubit state.  Immutable: operations return new states."""

    __slots__ = ("_amps", "_n")

    def __init__(self, amplitudes: Iterable[complex], normalize: bool = False):
        amps = np.array(amplitudes, dtype=complex).reshape(-1)
        dim = amps.size
        n = dim.bit_length() - 1
        if dim < 1 or (1 << n) != dim:
            raise ValueError(f"amplitude count {dim} is not a power of two")
        norm = float(np.linalg.norm(amps))
        if normalize:
            if norm < math.sqrt(DEAD_PROBABILITY):
                raise ValueError("cannot normalize a zero vector")
            amps = amps / norm
        elif abs(norm - 1.0) > NORM_TOL:
            raise ValueError(f"state norm {norm!r} differs from 1 by more than {NORM_TOL}")
        amps.flags.writeable = False
        self._amps = amps
        self._n = n

    @classmethod
    def zero(cls, n_qubits: int) -> StateVector:
        return cls.basis(n_qubits, 0)

    @classmethod
    def basis(cls, n_qubits: int, index: int) -> StateVector:
        dim = 1 << n_qubits
        if not 0 <= index < dim:
            raise ValueError(f"basis index {index} out of range for {n_qubits} qubits")
        amps = np.zeros(dim, dtype=complex)
        amps[index] = 1.0
        return cls(amps)

    @classmethod
    def from_bitstring(cls, bits: str) -> StateVector:
        """``"01"`` is qubit 1 in |0> and qubit 0 in |1> (highest qubit leftmost)."""
        if not bits or set(bits) - {"0", "1"}:
            raise ValueError(f"invalid bitstring {bits!r}")
        return cls.basis(len(bits), int(bits, 2))

    @classmethod
    def uniform(cls, n_qubits: int) -> StateVector:
        dim = 1 << n_qubits
        return cls(np.full(dim, 1 / math.sqrt(dim), dtype=complex))

    @classmethod
    def random(cls, n_qubits: int, rng: np.random.Generator) -> StateVector:
        dim = 1 << n_qubits
        return cls(rng.normal(size=dim) + 1j * rng.normal(size=dim), normalize=True)

    @classmethod
    def product(cls, *states: StateVector) -> StateVector:
        """Tensor product; the first argument occupies the lowest qubits."""
        amps = np.ones(1, dtype=complex)
        for s in states:
            amps = np.kron(s.amplitudes, amps)
        return cls(amps)

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def amplitudes(self) -> np.ndarray:
        return self._amps

    @property
    def dim(self) -> int:
        return self._amps.size

    def probabilities(self) -> np.ndarray:
        return np.abs(self._amps) ** 2

    def norm(self) -> float:
        return float(np.linalg.norm(self._amps))

    def apply(self, gate: Gate) -> StateVector:
        return apply_gate(self, gate)

    def evolve(self, unitary: np.ndarray) -> StateVector:
        """Multiply by a full-register unitary matrix."""
        unitary = np.asarray(unitary)
        if unitary.shape != (self.dim, self.dim):
            raise ValueError(f"matrix shape {unitary.shape} does not match dimension {self.dim}")
        return StateVector(unitary @ self._amps, normalize=True)

    def fidelity(self, other: StateVector) -> float:
        """|<self|other>|^2."""
        return abs(inner_product(self, other)) ** 2

    def equal_up_to_phase(self, other: StateVector, atol: float = 1e-10) -> bool:
        return abs(abs(inner_product(self, other)) - 1.0) <= atol

    def __repr__(self) -> str:
        return f"StateVector(n_qubits={self._n})"


def _unitary_defect(m: np.ndarray) -> float:
    return float(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0]))))


_H = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
_FIXED = {
    "H": _H,
    "X": np.array([[0, 1], [1, 0]], dtype=complex),
    "Y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "Z": np.array([[1, 0], [0, -1]], dtype=complex),
}
_SWAP = np.array([[1, 0, 0, 0], [0, 0, 1, 0], [0, 1, 0, 0], [0, 0, 0, 1]], dtype=complex)


@dataclass(frozen=True)
class Gate:
    """A gate on ``targets``, optionally conditioned on all ``controls`` being |1>.

    ``kind`` is one of ``"H"``, ``"X"``, ``"Y"``, ``"Z"``, ``"PHASE"``
    (``diag(1, e^{i angle})``), ``"ROT"`` (``exp(-i angle/2 * generator)`` with a
    Pauli-string generator, letter k on ``targets[k]``) or ``"UNITARY"`` (an
    explicit matrix).
    """

    kind: str
    targets: tuple[int, ...]
    controls: tuple[int, ...] = ()
    angle: float | None = None
    generator: PauliString | None = None
    matrix: np.ndarray | None = field(default=None, compare=False, repr=False)

    def __post_init__(self):
        object.__setattr__(self, "targets", tuple(int(q) for q in self.targets))
        object.__setattr__(self, "controls", tuple(int(q) for q in self.controls))
        if not self.targets:
            raise ValueError("gate needs at least one target")
        qubits = self.targets + self.controls
        if len(set(qubits)) != len(qubits):
            raise ValueError(f"targets {self.targets} and controls {self.controls} must be distinct")
        if min(qubits) < 0:
            raise ValueError("qubit indices must be nonnegative")
        k = len(self.targets)
        if self.kind in _FIXED:
            if k != 1:
                raise ValueError(f"{self.kind} acts on one qubit")
        elif self.kind == "PHASE":
            if k != 1 or self.angle is None or not math.isfinite(self.angle):
                raise ValueError("PHASE needs one target and a finite angle")
        elif self.kind == "ROT":
            if not isinstance(self.generator, PauliString):
                raise TypeError("ROT generator must be a PauliString")
            if self.generator.n_qubits != k:
                raise ValueError("ROT generator length must equal the number of targets")
            if self.angle is None or not math.isfinite(self.angle):
                raise ValueError("ROT needs a finite angle")
        elif self.kind == "UNITARY":
            m = np.array(self.matrix, dtype=complex)
            if m.shape != (1 << k, 1 << k):
                raise ValueError(f"matrix shape {m.shape} does not fit {k} target qubits")
            defect = _unitary_defect(m)
            if defect > UNITARY_TOL:
                raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {defect:.3g})")
            m.flags.writeable = False
            object.__setattr__(self, "matrix", m)
        else:
            raise ValueError(f"unknown gate kind {self.kind!r}")

    # constructors

    @classmethod
    def h(cls, q: int) -> Gate:
        return cls("H", (q,))

    @classmethod
    def x(cls, q: int) -> Gate:
        return cls("X", (q,))

    @classmethod
    def y(cls, q: int) -> Gate:
        return cls("Y", (q,))

    @classmethod
    def z(cls, q: int) -> Gate:
        return cls("Z", (q,))

    @classmethod
    def phase(cls, angle: float, q: int) -> Gate:
        return cls("PHASE", (q,), angle=float(angle))

    @classmethod
    def rotation(cls, generator: PauliString, angle: float, targets: Sequence[int] | None = None) -> Gate:
        if targets is None:
            targets = range(generator.n_qubits)
        return cls("ROT", tuple(targets), angle=float(angle), generator=generator)

    @classmethod
    def unitary(cls, matrix: np.ndarray, targets: Sequence[int]) -> Gate:
        return cls("UNITARY", tuple(targets), matrix=matrix)

    @classmethod
    def swap(cls, a: int, b: int) -> Gate:
        return cls.unitary(_SWAP, (a, b))

    @classmethod
    def cnot(cls, control: int, target: int) -> Gate:
        return cls.x(target).controlled_by(control)

    def controlled_by(self, *controls: int) -> Gate:
        return Gate(self.kind, self.targets, self.controls + tuple(controls),
                    self.angle, self.generator, self.matrix)

    @property
    def qubits(self) -> tuple[int, ...]:
        return self.targets + self.controls

    def target_matrix(self) -> np.ndarray:
        """Matrix on the target qubits alone (controls not included)."""
        if self.kind in _FIXED:
            return _FIXED[self.kind]
        if self.kind == "PHASE":
            return np.diag([1.0, np.exp(1j * self.angle)])
        if self.kind == "ROT":
            k = len(self.targets)
            return (math.cos(self.angle / 2) * np.eye(1 << k)
                    - 1j * math.sin(self.angle / 2) * self.generator.to_matrix())
        return self.matrix

    def adjoint(self) -> Gate:
        if self.kind in _FIXED:
            return self
        if self.kind in ("PHASE", "ROT"):
            return Gate(self.kind, self.targets, self.controls, -self.angle, self.generator)
        return Gate("UNITARY", self.targets, self.controls, matrix=self.matrix.conj().T)


@dataclass(frozen=True)
class MeasurementRecord:
    qubit: int
    outcome: int
    probability: float


def _check_qubits(gate: Gate, n: int) -> None:
    bad = [q for q in gate.qubits if q >= n]
    if bad:
        raise ValueError(f"qubit index {bad[0]} out of range for {n} qubits")


def apply_matrix(
    vec: np.ndarray,
    matrix: np.ndarray,
    targets: Sequence[int],
    controls: Sequence[int] = (),
    n_qubits: int | None = None,
) -> np.ndarray:
    """Apply ``matrix`` on ``targets`` of a raw amplitude array (no normalization).

    Works on a reshaped ``(2,)*n`` view: the control qubits are sliced to their
    |1> value and the target axes are contracted with the gate tensor.  The input
    is not modified.
    """
    vec = np.asarray(vec, dtype=complex)
    n = vec.size.bit_length() - 1 if n_qubits is None else n_qubits
    k = len(targets)
    out = vec.copy().reshape((2,) * n)
    # numpy axis of qubit q is n-1-q (C order puts the most significant bit first)
    index: list = [slice(None)] * n
    for c in controls:
        index[n - 1 - c] = 1
    index = tuple(index)
    block = out[index]
    # remaining axes after integer-indexing the controls, in original order
    kept = [ax for ax in range(n) if not isinstance(index[ax], int)]
    local_axis = {ax: i for i, ax in enumerate(kept)}
    # gate tensor axes: outputs for targets[k-1..0], then inputs for targets[k-1..0]
    tensor = np.asarray(matrix, dtype=complex).reshape((2,) * (2 * k))
    in_axes = [local_axis[n - 1 - targets[k - 1 - j]] for j in range(k)]
    moved = np.tensordot(tensor, block, axes=(list(range(k, 2 * k)), in_axes))
    out[index] = np.moveaxis(moved, list(range(k)), in_axes)
    return out.reshape(-1)


def _apply_rotation_full(vec: np.ndarray, gate: Gate, n: int) -> np.ndarray:
    pauli = gate.generator.embed(n, gate.targets)
    src, phase = pauli.action()
    return math.cos(gate.angle / 2) * vec - 1j * math.sin(gate.angle / 2) * phase * vec[src]


def apply_gate(state: StateVector, gate: Gate) -> StateVector:
    """Return ``U|state>`` for the full-register embedding of ``gate``."""
    n = state.n_qubits
    _check_qubits(gate, n)
    if gate.kind == "ROT" and not gate.controls:
        out = _apply_rotation_full(state.amplitudes, gate, n)
    else:
        out = apply_matrix(state.amplitudes, gate.target_matrix(), gate.targets, gate.controls, n)
    return StateVector(out)


def run_circuit(state: StateVector, gates: Iterable[Gate]) -> StateVector:
    """Apply gates in order (the first gate acts first)."""
    vec = state.amplitudes
    n = state.n_qubits
    for gate in gates:
        _check_qubits(gate, n)
        if gate.kind == "ROT" and not gate.controls:
            vec = _apply_rotation_full(vec, gate, n)
        else:
            vec = apply_matrix(vec, gate.target_matrix(), gate.targets, gate.controls, n)
    return StateVector(vec)


def adjoint_circuit(gates: Sequence[Gate]) -> list[Gate]:
    return [g.adjoint() for g in reversed(gates)]


def circuit_unitary(gates: Sequence[Gate], n_qubits: int) -> np.ndarray:
    """Dense matrix of a gate sequence, built column by column."""
    check_dense_limit(n_qubits, "circuit unitary")
    dim = 1 << n_qubits
    cols = np.eye(dim, dtype=complex)
    for gate in gates:
        _check_qubits(gate, n_qubits)
        m = gate.target_matrix()
        for j in range(dim):
            cols[:, j] = apply_matrix(cols[:, j], m, gate.targets, gate.controls, n_qubits)
    return cols


def outcome_probability(state: StateVector, qubit: int, outcome: int = 0) -> float:
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    bits = (np.arange(state.dim) >> qubit) & 1
    return float(np.sum(state.probabilities()[bits == outcome]))


def project_qubit(state: StateVector, qubit: int, outcome: int) -> tuple[float, StateVector]:
    """Born probability of ``outcome`` and the renormalized post-measurement state."""
    if outcome not in (0, 1):
        raise ValueError("outcome must be 0 or 1")
    if not 0 <= qubit < state.n_qubits:
        raise ValueError(f"qubit {qubit} out of range for {state.n_qubits} qubits")
    bits = (np.arange(state.dim) >> qubit) & 1
    amps = np.where(bits == outcome, state.amplitudes, 0)
    p = float(np.vdot(amps, amps).real)
    if p < DEAD_PROBABILITY:
        raise DeadStateError(f"outcome {outcome} on qubit {qubit} has probability {p:.3g}")
    return p, StateVector(amps / math.sqrt(p), normalize=True)


def measure_qubit(
    state: StateVector, qubit: int, rng: np.random.Generator
) -> tuple[MeasurementRecord, StateVector]:
    """Sample a computational-basis measurement of one qubit."""
    p0 = outcome_probability(state, qubit, 0)
    p1 = max(0.0, 1.0 - p0)
    if p0 < DEAD_PROBABILITY and p1 < DEAD_PROBABILITY:
        raise DeadStateError(f"both outcomes on qubit {qubit} are numerically zero")
    outcome = 0 if rng.random() < p0 else 1
    p, post = project_qubit(state, qubit, outcome)
    return MeasurementRecord(qubit, outcome, p), post


def expectation(state: StateVector, observable: PauliSum) -> float:
    """<state|O|state> for a Hermitian Pauli sum."""
    if observable.n_qubits != state.n_qubits:
        raise ValueError(
            f"observable on {observable.n_qubits} qubits, state on {state.n_qubits}"
        )
    observable = observable.require_hermitian("observable")
    value = np.vdot(state.amplitudes, observable.apply(state.amplitudes))
    return float(value.real)


def inner_product(a: StateVector, b: StateVector) -> complex:
    """<a|b>."""
    if a.n_qubits != b.n_qubits:
        raise ValueError(f"states on {a.n_qubits} and {b.n_qubits} qubits")
    return complex(np.vdot(a.amplitudes, b.amplitudes))
