"""Pauli strings and weighted sums of Pauli strings.

A Pauli string on ``n`` qubits is stored in symplectic form as two bit masks
``(x, z)``: bit ``q`` of ``x`` (``z``) is set when the letter on qubit ``q`` has
an X (Z) component, so ``Y`` sets both.  The operator is

    P(x, z) = i^{|x & z|} X^x Z^z

which makes every letter Hermitian and ``P**2 == I``.

Qubit ``q`` is bit ``q`` of an amplitude index (little-endian).  Text labels
are written with the highest qubit leftmost, so ``PauliString.from_label("XZ")``
is Z on qubit 0 and X on qubit 1.
"""

from __future__ import annotations

import math
import numbers
import os
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Iterator, Mapping

import numpy as np

__all__ = [
    "DEFAULT_DENSE_LIMIT",
    "DenseLimitError",
    "NonHermitianError",
    "PauliString",
    "PauliSum",
    "dense_limit",
    "check_dense_limit",
]

DEFAULT_DENSE_LIMIT = 12
HERMITIAN_TOL = 1e-12
_LETTERS = "IXYZ"
_LETTER_OF_BITS = {(0, 0): "I", (1, 0): "X", (1, 1): "Y", (0, 1): "Z"}
_PHASES = np.array([1, 1j, -1, -1j], dtype=complex)


class DenseLimitError(ValueError):
    """Raised when a dense 2^n x 2^n construction exceeds the qubit cap."""


class NonHermitianError(ValueError):
    """Raised when a Hermitian operator is required but coefficients are complex."""


def dense_limit() -> int:
    """Qubit cap for dense matrices; ``EIGENKIT_DENSE_LIMIT`` overrides the default."""
    raw = os.environ.get("EIGENKIT_DENSE_LIMIT")
    if raw is None:
        return DEFAULT_DENSE_LIMIT
    try:
        value = int(raw)
    except ValueError as exc:
        raise ValueError(f"EIGENKIT_DENSE_LIMIT must be an integer, got {raw!r}") from exc
    if value < 1:
        raise ValueError(f"EIGENKIT_DENSE_LIMIT must be positive, got {value}")
    return value


def check_dense_limit(n_qubits: int, what: str = "dense matrix") -> None:
    limit = dense_limit()
    if n_qubits > limit:
        raise DenseLimitError(
            f"{what} on {n_qubits} qubits exceeds the dense limit of {limit} "
            "(set EIGENKIT_DENSE_LIMIT to raise it)"
        )


@lru_cache(maxsize=32)
def _indices(n_qubits: int) -> np.ndarray:
    idx = np.arange(1 << n_qubits, dtype=np.int64)
    idx.flags.writeable = False
    return idx


def _popcount(v: int) -> int:
    return bin(v).count("1")


@dataclass(frozen=True)
class PauliString:
    """A tensor product of single-qubit Pauli letters."""

    n_qubits: int
    x: int = 0
    z: int = 0

    def __post_init__(self):
        if self.n_qubits < 0:
            raise ValueError("n_qubits must be nonnegative")
        full = (1 << self.n_qubits) - 1
        if self.x & ~full or self.z & ~full:
            raise ValueError(f"Pauli masks exceed {self.n_qubits} qubits")

    @classmethod
    def from_label(cls, label: str) -> PauliString:
        """Parse a label such as ``"XIZ"``; the leftmost letter is the highest qubit."""
        n = len(label)
        if n == 0:
            raise ValueError("empty Pauli label")
        x = z = 0
        for pos, letter in enumerate(label.upper()):
            if letter not in _LETTERS:
                raise ValueError(f"unknown Pauli letter {letter!r} in {label!r}")
            q = n - 1 - pos
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
        return cls(n, x, z)

    @classmethod
    def from_ops(cls, n_qubits: int, ops: Mapping[int, str]) -> PauliString:
        """Build from a ``{qubit: letter}`` map, e.g. ``{0: "Z", 3: "X"}``."""
        x = z = 0
        for q, letter in ops.items():
            if not 0 <= q < n_qubits:
                raise ValueError(f"qubit {q} out of range for {n_qubits} qubits")
            letter = letter.upper()
            if letter not in _LETTERS:
                raise ValueError(f"unknown Pauli letter {letter!r}")
            if letter in "XY":
                x |= 1 << q
            if letter in "ZY":
                z |= 1 << q
        return cls(n_qubits, x, z)

    @classmethod
    def identity(cls, n_qubits: int) -> PauliString:
        return cls(n_qubits, 0, 0)

    def letter(self, qubit: int) -> str:
        bx = (self.x >> qubit) & 1
        bz = (self.z >> qubit) & 1
        return _LETTER_OF_BITS[bx, bz]

    @property
    def label(self) -> str:
        return "".join(self.letter(q) for q in reversed(range(self.n_qubits)))

    @property
    def support(self) -> tuple[int, ...]:
        mask = self.x | self.z
        return tuple(q for q in range(self.n_qubits) if (mask >> q) & 1)

    @property
    def is_identity(self) -> bool:
        return self.x == 0 and self.z == 0

    def __str__(self) -> str:
        return self.label

    def __repr__(self) -> str:
        return f"PauliString({self.label!r})"

    def multiply(self, other: PauliString) -> tuple[complex, PauliString]:
        """Return ``(phase, R)`` with ``self @ other == phase * R``."""
        if other.n_qubits != self.n_qubits:
            raise ValueError("Pauli strings act on different qubit counts")
        x = self.x ^ other.x
        z = self.z ^ other.z
        # X^a Z^b X^c Z^d = (-1)^{|b&c|} X^{a^c} Z^{b^d}
        power = (
            _popcount(self.x & self.z)
            + _popcount(other.x & other.z)
            - _popcount(x & z)
            + 2 * _popcount(self.z & other.x)
        )
        return complex(_PHASES[power % 4]), PauliString(self.n_qubits, x, z)

    def commutes_with(self, other: PauliString) -> bool:
        return (_popcount(self.x & other.z) + _popcount(self.z & other.x)) % 2 == 0

    def embed(self, n_qubits: int, qubits: Iterable[int]) -> PauliString:
        """Place letter ``k`` of this string on ``qubits[k]`` of a larger register."""
        qubits = tuple(qubits)
        if len(qubits) != self.n_qubits:
            raise ValueError("need one target qubit per letter")
        ops = {qubits[k]: self.letter(k) for k in range(self.n_qubits)}
        return PauliString.from_ops(n_qubits, ops)

    def action(self, n_qubits: int | None = None) -> tuple[np.ndarray, np.ndarray]:
        """Return ``(source, phase)`` such that ``(P psi)[c] = phase[c] * psi[source[c]]``."""
        n = self.n_qubits if n_qubits is None else n_qubits
        idx = _indices(n)
        src = idx ^ self.x
        sign = 1 - 2 * (np.bitwise_count(src & self.z) & 1).astype(np.int8)
        phase = _PHASES[_popcount(self.x & self.z) % 4] * sign
        return src, phase

    def apply(self, vec: np.ndarray) -> np.ndarray:
        src, phase = self.action()
        return phase * vec[src]

    def to_matrix(self) -> np.ndarray:
        check_dense_limit(self.n_qubits)
        dim = 1 << self.n_qubits
        src, phase = self.action()
        mat = np.zeros((dim, dim), dtype=complex)
        mat[_indices(self.n_qubits), src] = phase
        return mat


def _as_coeff(value) -> complex:
    if not isinstance(value, numbers.Number):
        raise TypeError(f"coefficient must be a number, got {type(value).__name__}")
    c = complex(value)
    if not (math.isfinite(c.real) and math.isfinite(c.imag)):
        raise ValueError(f"non-finite coefficient {value!r}")
    return c


class PauliSum:
    """A linear combination of Pauli strings on a fixed number of qubits.

    Terms are kept canonical: one coefficient per string, zero coefficients
    dropped.  Coefficients are stored as complex numbers; Hamiltonian contexts
    call :meth:`require_hermitian`, which rejects imaginary parts above 1e-12.
    Instances are immutable.
    """

    __slots__ = ("_n", "_terms")

    def __init__(self, n_qubits: int, terms: Iterable[tuple[complex, PauliString]] | Mapping = ()):
        if n_qubits < 0:
            raise ValueError("n_qubits must be nonnegative")
        merged: dict[PauliString, complex] = {}
        items = terms.items() if isinstance(terms, Mapping) else terms
        for a, b in items:
            # accept both (coeff, string) pairs and {string: coeff} mappings
            coeff, string = (b, a) if isinstance(a, PauliString) else (a, b)
            if isinstance(string, str):
                string = PauliString.from_label(string)
            if string.n_qubits != n_qubits:
                raise ValueError(
                    f"term {string.label!r} has {string.n_qubits} qubits, expected {n_qubits}"
                )
            merged[string] = merged.get(string, 0j) + _as_coeff(coeff)
        self._n = n_qubits
        self._terms = {p: c for p, c in merged.items() if c != 0}

    @classmethod
    def from_labels(cls, terms: Mapping[str, complex] | Iterable[tuple[complex, str]]) -> PauliSum:
        items = list(terms.items()) if isinstance(terms, Mapping) else [(l, c) for c, l in terms]
        if not items:
            raise ValueError("cannot infer qubit count from an empty term list")
        n = len(items[0][0])
        return cls(n, [(c, PauliString.from_label(l)) for l, c in items])

    @classmethod
    def zero(cls, n_qubits: int) -> PauliSum:
        return cls(n_qubits)

    @classmethod
    def identity(cls, n_qubits: int, coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, [(coeff, PauliString.identity(n_qubits))])

    @classmethod
    def single(cls, n_qubits: int, ops: Mapping[int, str], coeff: complex = 1.0) -> PauliSum:
        return cls(n_qubits, [(coeff, PauliString.from_ops(n_qubits, ops))])

    @property
    def n_qubits(self) -> int:
        return self._n

    @property
    def terms(self) -> list[tuple[complex, PauliString]]:
        """Terms sorted by (x, z) masks so iteration order is reproducible."""
        return [(self._terms[p], p) for p in sorted(self._terms, key=lambda p: (p.x, p.z))]

    def __iter__(self) -> Iterator[tuple[complex, PauliString]]:
        return iter(self.terms)

    def __len__(self) -> int:
        return len(self._terms)

    def coefficient(self, string: PauliString | str) -> complex:
        if isinstance(string, str):
            string = PauliString.from_label(string)
        return self._terms.get(string, 0j)

    def canonicalize(self, tol: float = 0.0) -> PauliSum:
        """Return a copy with terms of magnitude <= ``tol`` removed."""
        return PauliSum(self._n, [(c, p) for c, p in self.terms if abs(c) > tol])

    # arithmetic ----------------------------------------------------------

    def _check(self, other: PauliSum) -> None:
        if other.n_qubits != self._n:
            raise ValueError(f"qubit count mismatch: {self._n} vs {other.n_qubits}")

    def __add__(self, other):
        if isinstance(other, numbers.Number):
            other = PauliSum.identity(self._n, other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        return PauliSum(self._n, self.terms + other.terms)

    __radd__ = __add__

    def __neg__(self):
        return PauliSum(self._n, [(-c, p) for c, p in self.terms])

    def __sub__(self, other):
        if isinstance(other, numbers.Number):
            return self + (-other)
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, scalar):
        if not isinstance(scalar, numbers.Number):
            return NotImplemented
        s = _as_coeff(scalar)
        return PauliSum(self._n, [(s * c, p) for c, p in self.terms])

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return self * (1.0 / _as_coeff(scalar))

    def __matmul__(self, other: PauliSum) -> PauliSum:
        if not isinstance(other, PauliSum):
            return NotImplemented
        self._check(other)
        out = []
        for c1, p1 in self.terms:
            for c2, p2 in other.terms:
                phase, p = p1.multiply(p2)
                out.append((c1 * c2 * phase, p))
        return PauliSum(self._n, out)

    def dagger(self) -> PauliSum:
        return PauliSum(self._n, [(c.conjugate(), p) for c, p in self.terms])

    def commutator(self, other: PauliSum) -> PauliSum:
        return (self @ other - other @ self).canonicalize(1e-15)

    def allclose(self, other: PauliSum, atol: float = 1e-12) -> bool:
        if other.n_qubits != self._n:
            return False
        diff = self - other
        return all(abs(c) <= atol for c, _ in diff.terms)

    def __eq__(self, other):
        if not isinstance(other, PauliSum):
            return NotImplemented
        return self._n == other._n and self._terms == other._terms

    def __hash__(self):
        return hash((self._n, frozenset(self._terms.items())))

    # properties ----------------------------------------------------------

    @property
    def is_hermitian(self) -> bool:
        return all(abs(c.imag) <= HERMITIAN_TOL for c in self._terms.values())

    def require_hermitian(self, context: str = "operator") -> PauliSum:
        """Return the real-coefficient copy, or raise if any imaginary part exceeds 1e-12."""
        worst = max((abs(c.imag) for c in self._terms.values()), default=0.0)
        if worst > HERMITIAN_TOL:
            raise NonHermitianError(
                f"{context} must be Hermitian; largest imaginary coefficient is {worst:.3g}"
            )
        return PauliSum(self._n, [(c.real, p) for c, p in self.terms])

    def mutually_commuting(self) -> bool:
        strings = [p for _, p in self.terms]
        return all(a.commutes_with(b) for i, a in enumerate(strings) for b in strings[i + 1 :])

    def coefficient_norm(self) -> float:
        """Sum of |coefficients|, an upper bound on the operator norm."""
        return float(sum(abs(c) for c in self._terms.values()))

    # numerics ------------------------------------------------------------

    def apply(self, vec: np.ndarray) -> np.ndarray:
        """Matrix-free product with a length-2^n vector."""
        vec = np.asarray(vec)
        if vec.shape != (1 << self._n,):
            raise ValueError(f"vector of shape {vec.shape} does not match {self._n} qubits")
        out = np.zeros(vec.shape, dtype=complex)
        for c, p in self.terms:
            src, phase = p.action()
            out += c * phase * vec[src]
        return out

    def to_matrix(self) -> np.ndarray:
        """Dense 2^n x 2^n matrix, little-endian in the amplitude index."""
        check_dense_limit(self._n)
        dim = 1 << self._n
        mat = np.zeros((dim, dim), dtype=complex)
        rows = _indices(self._n)
        for c, p in self.terms:
            src, phase = p.action()
            mat[rows, src] += c * phase
        return mat

    def __repr__(self) -> str:
        if not self._terms:
            return f"PauliSum({self._n}, 0)"
        body = " + ".join(f"({_fmt(c)})*{p.label}" for c, p in self.terms)
        return f"PauliSum({self._n}, {body})"


def _fmt(c: complex) -> str:
    return f"{c.real:g}" if c.imag == 0 else f"{c:g}"
