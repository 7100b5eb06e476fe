"""Fermionic ladder operators, the Jordan-Wigner encoding, Thouless and UCC states.

Modes are 0-indexed and mode ``j`` lives on qubit ``j``; |1> means occupied.
The encoding is

    a^dag_j = sigma^-_j Z_{j-1} ... Z_0,    a_j = sigma^+_j Z_{j-1} ... Z_0

with sigma^pm = (X pm iY)/2, so sigma^- = |1><0| raises the occupation.

Sign convention for basis states: ``fock_state(n, {p1 < p2 < ... < pk})`` equals
a^dag_{p1} a^dag_{p2} ... a^dag_{pk} |vac> (highest mode created first).  The
reference determinant a^dag_{N-1} ... a^dag_0 |vac> used by the Thouless
construction therefore carries the sign (-1)^{N(N-1)/2} relative to it.
"""

from __future__ import annotations

import numbers
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Mapping, Sequence

import numpy as np
import scipy.linalg

from eigenkit.pauli import PauliString, PauliSum, check_dense_limit
from eigenkit.statevector import StateVector
from eigenkit.trotter import evolution_operator

__all__ = [
    "CREATE",
    "ANNIHILATE",
    "FermionOperator",
    "OrbitalRotation",
    "UCCParameters",
    "fock_state",
    "jordan_wigner",
    "ladder_matrices",
    "number_operator",
    "reference_determinant",
    "slater_determinant",
    "thouless_generator",
    "thouless_prepare",
    "thouless_product",
    "ucc_apply",
    "ucc_generator",
]

CREATE = 1
ANNIHILATE = 0

Ladder = tuple[int, int]  # (mode, CREATE | ANNIHILATE)


def _normal_order(ops: list[Ladder], coeff: complex, out: dict) -> None:
    """Insertion-sort ``ops`` into normal order, accumulating terms into ``out``.

    Canonical order: creation operators left of annihilation operators, each
    group sorted by descending mode.  Moving a_p past a^dag_p spawns the
    contraction term from {a_p, a^dag_p} = 1.
    """
    ops = list(ops)
    for i in range(1, len(ops)):
        for j in range(i, 0, -1):
            (lm, la), (rm, ra) = ops[j - 1], ops[j]
            if la == ANNIHILATE and ra == CREATE:
                if lm == rm:
                    _normal_order(ops[: j - 1] + ops[j + 1 :], coeff, out)
                ops[j - 1], ops[j] = ops[j], ops[j - 1]
                coeff = -coeff
            elif la == ra:
                if lm == rm:
                    return
                if rm > lm:
                    ops[j - 1], ops[j] = ops[j], ops[j - 1]
                    coeff = -coeff
                else:
                    break
            else:
                break
    key = tuple(ops)
    out[key] = out.get(key, 0j) + coeff


class FermionOperator:
    """Sum of products of ladder operators with complex coefficients.

    A term is a tuple of ``(mode, kind)`` pairs read left to right, so
    ``((3, CREATE), (1, ANNIHILATE))`` is a^dag_3 a_1.  Products are stored as
    given; :meth:`normal_ordered` returns the canonical form.
    """

    __slots__ = ("n_modes", "_terms")

    def __init__(self, n_modes: int, terms: Mapping[tuple[Ladder, ...], complex] | Iterable = ()):
        self.n_modes = int(n_modes)
        items = terms.items() if isinstance(terms, Mapping) else terms
        merged: dict[tuple[Ladder, ...], complex] = {}
        for ops, coeff in items:
            ops = tuple((int(m), int(k)) for m, k in ops)
            for m, k in ops:
                if not 0 <= m < self.n_modes:
                    raise ValueError(f"mode index {m} out of range for {self.n_modes} modes")
                if k not in (CREATE, ANNIHILATE):
                    raise ValueError(f"ladder kind must be CREATE or ANNIHILATE, got {k}")
            merged[ops] = merged.get(ops, 0j) + complex(coeff)
        self._terms = {k: v for k, v in merged.items() if v != 0}

    @classmethod
    def create(cls, n_modes: int, mode: int, coeff: complex = 1.0) -> FermionOperator:
        return cls(n_modes, {((mode, CREATE),): coeff})

    @classmethod
    def annihilate(cls, n_modes: int, mode: int, coeff: complex = 1.0) -> FermionOperator:
        return cls(n_modes, {((mode, ANNIHILATE),): coeff})

    @classmethod
    def identity(cls, n_modes: int, coeff: complex = 1.0) -> FermionOperator:
        return cls(n_modes, {(): coeff})

    @property
    def terms(self) -> dict[tuple[Ladder, ...], complex]:
        return dict(self._terms)

    def __len__(self) -> int:
        return len(self._terms)

    def _check(self, other: FermionOperator) -> None:
        if other.n_modes != self.n_modes:
            raise ValueError(f"mode count mismatch: {self.n_modes} vs {other.n_modes}")

    def __add__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        self._check(other)
        return FermionOperator(self.n_modes, list(self._terms.items()) + list(other._terms.items()))

    def __neg__(self):
        return self * -1

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, scalar):
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        return FermionOperator(self.n_modes, {k: v * scalar for k, v in self._terms.items()})

    __rmul__ = __mul__

    def __matmul__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        self._check(other)
        return FermionOperator(
            self.n_modes,
            [(a + b, ca * cb) for a, ca in self._terms.items() for b, cb in other._terms.items()],
        )

    def dagger(self) -> FermionOperator:
        return FermionOperator(
            self.n_modes,
            {tuple((m, 1 - k) for m, k in reversed(ops)): c.conjugate() for ops, c in self._terms.items()},
        )

    def normal_ordered(self, tol: float = 0.0) -> FermionOperator:
        out: dict = {}
        for ops, c in self._terms.items():
            _normal_order(list(ops), c, out)
        return FermionOperator(self.n_modes, {k: v for k, v in out.items() if abs(v) > tol})

    def allclose(self, other: FermionOperator, atol: float = 1e-12) -> bool:
        diff = (self - other).normal_ordered()
        return all(abs(c) <= atol for c in diff._terms.values())

    def __eq__(self, other):
        if not isinstance(other, FermionOperator):
            return NotImplemented
        return self.n_modes == other.n_modes and self._terms == other._terms

    def __repr__(self) -> str:
        def word(ops):
            return " ".join(f"a{'^' if k else ''}{m}" for m, k in ops) or "1"

        body = " + ".join(f"({c:g}) {word(ops)}" for ops, c in self._terms.items())
        return f"FermionOperator({self.n_modes}, {body or '0'})"


# -- Jordan-Wigner ----------------------------------------------------------


@lru_cache(maxsize=256)
def _jw_ladder(n_modes: int, mode: int, kind: int) -> PauliSum:
    zs = {q: "Z" for q in range(mode)}
    x = PauliString.from_ops(n_modes, {**zs, mode: "X"})
    y = PauliString.from_ops(n_modes, {**zs, mode: "Y"})
    # creation -> (X - iY)/2, annihilation -> (X + iY)/2
    sign = -1 if kind == CREATE else 1
    return PauliSum(n_modes, [(0.5, x), (sign * 0.5j, y)])


def jordan_wigner(op: FermionOperator) -> PauliSum:
    """Qubit image of ``op``; coefficients may be complex."""
    n = op.n_modes
    total = PauliSum.zero(n)
    for ops, coeff in op.terms.items():
        term = PauliSum.identity(n, coeff)
        for mode, kind in ops:
            term = term @ _jw_ladder(n, mode, kind)
        total = total + term
    return total.canonicalize(1e-15)


@lru_cache(maxsize=16)
def _ladder_matrices(n_modes: int) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    check_dense_limit(n_modes, "ladder matrices")
    create = tuple(_jw_ladder(n_modes, j, CREATE).to_matrix() for j in range(n_modes))
    annihilate = tuple(m.conj().T for m in create)
    for m in create + annihilate:
        m.flags.writeable = False
    return create, annihilate


def ladder_matrices(n_modes: int) -> tuple[tuple[np.ndarray, ...], tuple[np.ndarray, ...]]:
    """Dense JW images ``(creators, annihilators)`` indexed by mode."""
    return _ladder_matrices(n_modes)


def number_operator(n_modes: int, mode: int | None = None) -> PauliSum:
    """(I - Z_j)/2 for one mode, or the total particle number when ``mode`` is None."""
    modes = range(n_modes) if mode is None else [mode]
    terms = []
    for j in modes:
        terms.append((0.5, PauliString.identity(n_modes)))
        terms.append((-0.5, PauliString.from_ops(n_modes, {j: "Z"})))
    return PauliSum(n_modes, terms)


def fock_state(n_modes: int, occupied: Iterable[int]) -> StateVector:
    """Computational basis state with |1> on every occupied mode."""
    occupied = list(occupied)
    if len(set(occupied)) != len(occupied):
        raise ValueError(f"duplicate modes in {occupied}")
    index = 0
    for p in occupied:
        if not 0 <= p < n_modes:
            raise ValueError(f"mode {p} out of range for {n_modes} modes")
        index |= 1 << p
    return StateVector.basis(n_modes, index)


def _vacuum(n_modes: int) -> np.ndarray:
    v = np.zeros(1 << n_modes, dtype=complex)
    v[0] = 1.0
    return v


# -- Thouless ---------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class OrbitalRotation:
    """Gauge-fixed orbital change b^dag_p = a^dag_p + sum_q a^dag_q u[q - N, p].

    Occupied modes are 0..N-1 and virtual modes N..n_modes-1; ``u`` has shape
    (n_modes - N, N).  Sums over virtual orbitals are truncated at n_modes.
    """

    n_occupied: int
    n_modes: int
    u: np.ndarray = field(repr=False)

    def __post_init__(self):
        u = np.array(self.u, dtype=complex)
        if self.n_occupied < 1 or self.n_occupied > self.n_modes:
            raise ValueError("need 1 <= n_occupied <= n_modes")
        shape = (self.n_modes - self.n_occupied, self.n_occupied)
        if u.shape != shape:
            raise ValueError(f"u must have shape {shape}, got {u.shape}")
        u.flags.writeable = False
        object.__setattr__(self, "u", u)

    @classmethod
    def random(cls, n_modes: int, n_occupied: int, rng: np.random.Generator, scale: float = 1.0) -> OrbitalRotation:
        shape = (n_modes - n_occupied, n_occupied)
        u = scale * (rng.normal(size=shape) + 1j * rng.normal(size=shape))
        return cls(n_occupied, n_modes, u)

    def orbital_coefficients(self) -> np.ndarray:
        """Columns are the new orbitals in the old basis: [I; u]."""
        return np.vstack([np.eye(self.n_occupied), self.u])


def reference_determinant(n_modes: int, n_occupied: int) -> np.ndarray:
    """a^dag_{N-1} ... a^dag_0 |vac> as an amplitude array."""
    create, _ = ladder_matrices(n_modes)
    vec = _vacuum(n_modes)
    for p in range(n_occupied):
        vec = create[p] @ vec
    return vec


def slater_determinant(orbitals: np.ndarray) -> np.ndarray:
    """b^dag_{N-1} ... b^dag_0 |vac> with b^dag_p = sum_r orbitals[r, p] a^dag_r.

    The result is not normalized; its norm is sqrt(det(C^dag C)).
    """
    orbitals = np.asarray(orbitals, dtype=complex)
    n_modes, n_occ = orbitals.shape
    create, _ = ladder_matrices(n_modes)
    vec = _vacuum(n_modes)
    for p in range(n_occ):
        vec = sum(orbitals[r, p] * (create[r] @ vec) for r in range(n_modes))
    return vec


def thouless_generator(rot: OrbitalRotation) -> FermionOperator:
    """sum_{p < N <= q} u[q - N, p] a^dag_q a_p."""
    n, big_n = rot.n_modes, rot.n_occupied
    terms = {}
    for p in range(big_n):
        for q in range(big_n, n):
            terms[((q, CREATE), (p, ANNIHILATE))] = rot.u[q - big_n, p]
    return FermionOperator(n, terms)


def thouless_prepare(rot: OrbitalRotation) -> np.ndarray:
    """exp(thouless_generator) applied to the reference determinant.

    Returns the unnormalized amplitude array; it equals
    :func:`thouless_product` and has norm 1 only when ``u`` is zero.
    """
    check_dense_limit(rot.n_modes, "Thouless state")
    gen = jordan_wigner(thouless_generator(rot)).to_matrix()
    return scipy.linalg.expm(gen) @ reference_determinant(rot.n_modes, rot.n_occupied)


def thouless_product(rot: OrbitalRotation) -> np.ndarray:
    """Direct construction b^dag_{N-1} ... b^dag_0 |vac> from the orbitals [I; u]."""
    return slater_determinant(rot.orbital_coefficients())


# -- unitary coupled cluster -----------------------------------------------


@dataclass(frozen=True)
class UCCParameters:
    """Excitation amplitudes.

    ``singles`` maps ``(i, a)`` to theta^i_a and ``doubles`` maps
    ``(i, j, a, b)`` with i < j and a < b to theta^{ij}_{ab}; ``i, j`` are
    occupied and ``a, b`` virtual modes.
    """

    singles: Mapping[tuple[int, int], float] = field(default_factory=dict)
    doubles: Mapping[tuple[int, int, int, int], float] = field(default_factory=dict)
    m_max: int = 2

    def __post_init__(self):
        if self.m_max not in (1, 2):
            raise ValueError("UCC truncation m_max must be 1 or 2")
        if self.doubles and self.m_max < 2:
            raise ValueError("doubles amplitudes given with m_max=1")
        singles = {(int(i), int(a)): float(t) for (i, a), t in dict(self.singles).items()}
        doubles = {}
        for key, t in dict(self.doubles).items():
            i, j, a, b = (int(v) for v in key)
            if not (i < j and a < b):
                raise ValueError(f"doubles key {key} must satisfy i < j and a < b")
            doubles[(i, j, a, b)] = float(t)
        object.__setattr__(self, "singles", singles)
        object.__setattr__(self, "doubles", doubles)
        if self.occupied_modes & self.virtual_modes:
            raise ValueError(
                f"modes {sorted(self.occupied_modes & self.virtual_modes)} appear as both occupied and virtual"
            )

    @property
    def occupied_modes(self) -> set[int]:
        return {i for i, _ in self.singles} | {m for i, j, _, _ in self.doubles for m in (i, j)}

    @property
    def virtual_modes(self) -> set[int]:
        return {a for _, a in self.singles} | {m for _, _, a, b in self.doubles for m in (a, b)}


def ucc_generator(params: UCCParameters, n_modes: int, occupied: Iterable[int]) -> FermionOperator:
    """T - T^dag with T1 = sum theta^i_a a^dag_a a_i and
    T2 = (1/4) sum_{i<j, a<b} theta^{ij}_{ab} a^dag_a a^dag_b a_j a_i."""
    occupied = set(occupied)
    for m in params.occupied_modes:
        if m not in occupied:
            raise ValueError(f"excitation source {m} is not an occupied mode")
    for m in params.virtual_modes:
        if m in occupied:
            raise ValueError(f"excitation target {m} is an occupied mode")
    for m in params.occupied_modes | params.virtual_modes | occupied:
        if not 0 <= m < n_modes:
            raise ValueError(f"mode {m} out of range for {n_modes} modes")
    terms = {}
    for (i, a), t in params.singles.items():
        terms[((a, CREATE), (i, ANNIHILATE))] = t
    for (i, j, a, b), t in params.doubles.items():
        terms[((a, CREATE), (b, CREATE), (j, ANNIHILATE), (i, ANNIHILATE))] = t / 4
    t_op = FermionOperator(n_modes, terms)
    return (t_op - t_op.dagger()).normal_ordered(1e-15)


def _basis_occupation(state: StateVector) -> set[int] | None:
    k = int(np.argmax(np.abs(state.amplitudes)))
    if abs(abs(state.amplitudes[k]) - 1.0) > 1e-10:
        return None
    return {q for q in range(state.n_qubits) if (k >> q) & 1}


def ucc_apply(params: UCCParameters, reference: StateVector, occupied: Iterable[int] | None = None) -> StateVector:
    """exp(T - T^dag) |reference> by dense exponentiation of the JW image.

    ``occupied`` defaults to the occupation pattern of ``reference`` when that
    is a computational basis state.
    """
    n = reference.n_qubits
    check_dense_limit(n, "UCC state")
    if occupied is None:
        occupied = _basis_occupation(reference)
        if occupied is None:
            raise ValueError("reference is not a basis state; pass the occupied modes explicitly")
    gen = jordan_wigner(ucc_generator(params, n, occupied))
    # exp(G) = exp(-i K) with K = iG Hermitian, which keeps the result unitary
    k = (1j * gen).require_hermitian("i (T - T^dag)")
    return reference.evolve(evolution_operator(k, 1.0))
