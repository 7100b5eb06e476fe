"""Hamiltonian builders and the exact (dense) spectral oracle."""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from eigenkit.pauli import PauliString, PauliSum, check_dense_limit
from eigenkit.statevector import StateVector

__all__ = [
    "Graph",
    "Spectrum",
    "build_ising",
    "exact_spectrum",
    "maxcut_value",
    "operator_norm",
    "to_dense",
    "transverse_field",
]


@dataclass(frozen=True, eq=False)
class Graph:
    """Simple unweighted graph given by a symmetric 0/1 adjacency matrix."""

    adjacency: np.ndarray

    def __post_init__(self):
        a = np.array(self.adjacency)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError(f"adjacency must be square, got shape {a.shape}")
        if not np.all((a == 0) | (a == 1)):
            raise ValueError("adjacency entries must be 0 or 1")
        if not np.array_equal(a, a.T):
            raise ValueError("adjacency must be symmetric")
        if np.any(np.diag(a) != 0):
            raise ValueError("adjacency must have a zero diagonal (no self loops)")
        a = a.astype(np.int64)
        a.flags.writeable = False
        object.__setattr__(self, "adjacency", a)

    @classmethod
    def from_edges(cls, d: int, edges: Iterable[Sequence[int]]) -> Graph:
        a = np.zeros((d, d), dtype=np.int64)
        for edge in edges:
            if len(edge) != 2:
                raise ValueError(f"edge {edge!r} must have two endpoints")
            i, j = (int(v) for v in edge)
            if not (0 <= i < d and 0 <= j < d):
                raise ValueError(f"edge {edge!r} out of range for {d} vertices")
            if i == j:
                raise ValueError(f"self loop {edge!r} not allowed")
            a[i, j] = a[j, i] = 1
        return cls(a)

    @property
    def d(self) -> int:
        return self.adjacency.shape[0]

    @property
    def edges(self) -> list[tuple[int, int]]:
        i, j = np.nonzero(np.triu(self.adjacency))
        return list(zip(i.tolist(), j.tolist()))

    def __eq__(self, other):
        return isinstance(other, Graph) and np.array_equal(self.adjacency, other.adjacency)

    def __hash__(self):
        return hash(self.adjacency.tobytes())


def build_ising(graph: Graph) -> PauliSum:
    """(1/4) sum_{i,j} A_ij (Z_i Z_j - I); its ground energy is minus the MaxCut value."""
    d = graph.d
    terms = []
    for i, j in graph.edges:
        # ordered pairs (i, j) and (j, i) each contribute 1/4
        terms.append((0.5, PauliString.from_ops(d, {i: "Z", j: "Z"})))
        terms.append((-0.5, PauliString.identity(d)))
    return PauliSum(d, terms)


def transverse_field(n_qubits: int, strength: float = 1.0) -> PauliSum:
    """-strength * sum_k X_k, whose ground state is the uniform superposition."""
    return PauliSum(
        n_qubits, [(-strength, PauliString.from_ops(n_qubits, {k: "X"})) for k in range(n_qubits)]
    )


def maxcut_value(graph: Graph) -> int:
    """Exhaustive MaxCut: largest number of edges crossing any vertex bipartition."""
    d = graph.d
    if d > 20:
        raise ValueError("exhaustive MaxCut limited to 20 vertices")
    if d == 0:
        return 0
    i, j = np.nonzero(np.triu(graph.adjacency))
    subsets = np.arange(1 << d)
    cut = np.zeros(subsets.size, dtype=np.int64)
    for a, b in zip(i, j):
        cut += ((subsets >> a) & 1) != ((subsets >> b) & 1)
    return int(cut.max())


def to_dense(h: PauliSum) -> np.ndarray:
    return h.to_matrix()


@dataclass(frozen=True, eq=False)
class Spectrum:
    """Ascending eigenvalues with orthonormal eigenvectors as matrix columns."""

    eigenvalues: np.ndarray
    vectors: np.ndarray

    def __len__(self) -> int:
        return self.eigenvalues.size

    def state(self, k: int) -> StateVector:
        return StateVector(self.vectors[:, k], normalize=True)

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    def degenerate_block(self, k: int, tol: float = 1e-8) -> np.ndarray:
        """Indices whose eigenvalues lie within ``tol`` of eigenvalue ``k``."""
        return np.flatnonzero(np.abs(self.eigenvalues - self.eigenvalues[k]) <= tol)

    def projector_weight(self, state: StateVector, energy: float, tol: float = 1e-8) -> float:
        """Weight of ``state`` in the eigenspace of the eigenvalue nearest ``energy``."""
        k = int(np.argmin(np.abs(self.eigenvalues - energy)))
        cols = self.vectors[:, self.degenerate_block(k, tol)]
        return float(np.sum(np.abs(cols.conj().T @ state.amplitudes) ** 2))


def exact_spectrum(h: PauliSum) -> Spectrum:
    """Full eigendecomposition of the dense Hermitian matrix of ``h``."""
    h = h.require_hermitian("Hamiltonian")
    check_dense_limit(h.n_qubits, "exact spectrum")
    w, v = np.linalg.eigh(h.to_matrix())
    w.flags.writeable = False
    v.flags.writeable = False
    return Spectrum(w, v)


def operator_norm(h: PauliSum) -> float:
    """Spectral norm, max |eigenvalue| of the Hermitian operator."""
    h = h.require_hermitian("Hamiltonian")
    if len(h) == 0:
        return 0.0
    check_dense_limit(h.n_qubits, "operator norm")
    return float(np.max(np.abs(np.linalg.eigvalsh(h.to_matrix()))))


def all_graphs(d: int) -> Iterable[Graph]:
    """Every simple graph on ``d`` labelled vertices."""
    pairs = list(itertools.combinations(range(d), 2))
    for mask in range(1 << len(pairs)):
        yield Graph.from_edges(d, [p for k, p in enumerate(pairs) if (mask >> k) & 1])
