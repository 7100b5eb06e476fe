"""Adiabatic state preparation along H(s) = g(s) H1 + (1 - g(s)) H0."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, NamedTuple, Sequence

import numpy as np

from eigenkit.pauli import PauliSum, check_dense_limit
from eigenkit.statevector import StateVector, inner_product
from eigenkit.trotter import evolution_operator

__all__ = [
    "BoundReport",
    "GapProfile",
    "GapSample",
    "RAMPS",
    "Schedule",
    "TrackingError",
    "UnmodeledBoundaryError",
    "adiabatic_evolve",
    "evolution_unitary",
    "fidelity_scan",
    "gap_profile",
    "interpolate",
    "jansen_bound",
    "translate_hamiltonian",
]


class TrackingError(RuntimeError):
    """The tracked eigenstate cannot be followed unambiguously along the path."""


class UnmodeledBoundaryError(ValueError):
    """The bound's boundary term is nonzero for this ramp and has no closed form."""


class Ramp(NamedTuple):
    g: Callable[[float], float]
    dg: Callable[[float], float]
    d2g: Callable[[float], float]


RAMPS: dict[str, Ramp] = {
    "linear": Ramp(lambda s: s, lambda s: 1.0, lambda s: 0.0),
    "smoothstep": Ramp(
        lambda s: 3 * s**2 - 2 * s**3,
        lambda s: 6 * s - 6 * s**2,
        lambda s: 6 - 12 * s,
    ),
}


@dataclass(frozen=True)
class Schedule:
    """Interpolation path from ``h0`` to ``h1`` run for ``total_time``.

    ``method`` selects how each midpoint factor exp(-i H(s) T ds) is built:
    ``"exact"`` diagonalizes H(s); ``"trotter2"`` uses the symmetric
    second-order split between the g(s) H1 and (1 - g(s)) H0 pieces.
    """

    h0: PauliSum
    h1: PauliSum
    total_time: float
    n_steps: int = 200
    ramp: str = "linear"
    method: str = "exact"

    def __post_init__(self):
        if self.h0.n_qubits != self.h1.n_qubits:
            raise ValueError("h0 and h1 act on different qubit counts")
        self.h0.require_hermitian("h0")
        self.h1.require_hermitian("h1")
        if self.ramp not in RAMPS:
            raise ValueError(f"ramp must be one of {sorted(RAMPS)}, got {self.ramp!r}")
        if self.method not in ("exact", "trotter2"):
            raise ValueError(f"method must be 'exact' or 'trotter2', got {self.method!r}")
        if not (math.isfinite(self.total_time) and self.total_time >= 0):
            raise ValueError("total_time must be finite and nonnegative")
        if self.n_steps < 1:
            raise ValueError("n_steps must be at least 1")

    @property
    def n_qubits(self) -> int:
        return self.h0.n_qubits

    def g(self, s: float) -> float:
        return RAMPS[self.ramp].g(s)


def _check_s(s: float) -> None:
    if not 0.0 <= s <= 1.0:
        raise ValueError(f"s must lie in [0, 1], got {s}")


def interpolate(schedule: Schedule, s: float) -> PauliSum:
    _check_s(s)
    g = schedule.g(s)
    return (g * schedule.h1 + (1 - g) * schedule.h0).canonicalize(1e-15)


def _dense_pair(schedule: Schedule) -> tuple[np.ndarray, np.ndarray]:
    check_dense_limit(schedule.n_qubits, "adiabatic evolution")
    return schedule.h0.to_matrix(), schedule.h1.to_matrix()


def _step_factors(schedule: Schedule):
    """Yield the midpoint factors in time order (first factor acts first)."""
    h0, h1 = _dense_pair(schedule)
    ds = 1.0 / schedule.n_steps
    dt = schedule.total_time * ds
    for j in range(schedule.n_steps):
        g = schedule.g((j + 0.5) * ds)
        if schedule.method == "exact":
            yield evolution_operator(g * h1 + (1 - g) * h0, dt)
        else:
            half = evolution_operator((1 - g) * h0, dt / 2)
            yield half @ evolution_operator(g * h1, dt) @ half


def adiabatic_evolve(schedule: Schedule, initial: StateVector) -> StateVector:
    """Apply the discretized time-ordered product, later times leftmost."""
    if initial.n_qubits != schedule.n_qubits:
        raise ValueError("initial state and schedule qubit counts differ")
    if schedule.total_time == 0:
        return initial
    vec = initial.amplitudes
    for u in _step_factors(schedule):
        vec = u @ vec
    return StateVector(vec, normalize=True)


def evolution_unitary(schedule: Schedule) -> np.ndarray:
    """Accumulated U(1) as a dense matrix."""
    h0, _ = _dense_pair(schedule)
    u_total = np.eye(h0.shape[0], dtype=complex)
    if schedule.total_time == 0:
        return u_total
    for u in _step_factors(schedule):
        u_total = u @ u_total
    return u_total


def translate_hamiltonian(schedule: Schedule) -> np.ndarray:
    """H'(1) = U(1)^dag H1 U(1): same eigenvalues as H1, eigenvectors near those of H0."""
    u = evolution_unitary(schedule)
    return u.conj().T @ schedule.h1.to_matrix() @ u


# -- spectral gap ---------------------------------------------------------


class GapSample(NamedTuple):
    s: float
    gap: float
    energy: float


@dataclass(frozen=True, eq=False)
class GapProfile:
    samples: list[GapSample]
    initial_state: StateVector = field(repr=False)
    final_state: StateVector = field(repr=False)

    @property
    def s(self) -> np.ndarray:
        return np.array([x.s for x in self.samples])

    @property
    def gaps(self) -> np.ndarray:
        return np.array([x.gap for x in self.samples])

    @property
    def energies(self) -> np.ndarray:
        return np.array([x.energy for x in self.samples])

    @property
    def min_gap(self) -> float:
        return float(self.gaps.min())


SECTOR_TOL = 1e-8
AMBIGUITY = 0.01


def _sector_basis(conserved: Sequence[np.ndarray], psi: np.ndarray) -> np.ndarray:
    """Orthonormal basis of the joint eigenspace of ``conserved`` containing ``psi``."""
    q = np.eye(psi.size, dtype=complex)
    for c in conserved:
        label = np.vdot(psi, c @ psi).real
        if np.linalg.norm(c @ psi - label * psi) > SECTOR_TOL:
            raise TrackingError("tracked state is not an eigenstate of a declared conserved observable")
        w, v = np.linalg.eigh(q.conj().T @ c @ q)
        keep = np.abs(w - label) <= SECTOR_TOL
        q = q @ v[:, keep]
    return q


def gap_profile(
    schedule: Schedule,
    tracked_index: int = 0,
    grid_points: int = 101,
    conserved: Sequence[PauliSum] = (),
) -> GapProfile:
    """Follow one instantaneous eigenstate along s and record its spectral gap.

    ``tracked_index`` picks an eigenvector of H(0) in ascending order.  At each
    later grid point the successor is the eigenvector of largest overlap with
    the previous one.  Competitors in other symmetry sectors are ignored when
    ``conserved`` lists observables commuting with H(s); the sector is the one
    containing the initial tracked state.

    Raises:
        TrackingError: the tracked level is degenerate at s=0, two successors
            have squared overlaps within 0.01 of each other, or the tracked
            level becomes exactly degenerate within its sector.
    """
    if grid_points < 2:
        raise ValueError("need at least two grid points")
    h0, h1 = _dense_pair(schedule)
    grid = np.linspace(0.0, 1.0, grid_points)

    w, v = np.linalg.eigh(h0)
    if not 0 <= tracked_index < w.size:
        raise ValueError(f"tracked_index {tracked_index} out of range")
    psi = v[:, tracked_index]
    dense_conserved = [c.require_hermitian("conserved observable").to_matrix() for c in conserved]
    for c in dense_conserved:
        if np.max(np.abs(c @ h0 - h0 @ c)) > SECTOR_TOL or np.max(np.abs(c @ h1 - h1 @ c)) > SECTOR_TOL:
            raise ValueError("declared conserved observable does not commute with H(s)")
    if not dense_conserved:
        others = np.delete(w, tracked_index)
        if others.size and np.min(np.abs(others - w[tracked_index])) <= SECTOR_TOL:
            raise TrackingError(f"eigenvalue {tracked_index} of h0 is degenerate")
    basis = _sector_basis(dense_conserved, psi)
    prev = basis.conj().T @ psi

    samples = []
    for s in grid:
        g = schedule.g(float(s))
        h = g * h1 + (1 - g) * h0
        ws, vs = np.linalg.eigh(basis.conj().T @ h @ basis)
        ov = np.abs(vs.conj().T @ prev) ** 2
        order = np.argsort(ov)[::-1]
        k = int(order[0])
        if ov.size > 1 and ov[order[0]] - ov[order[1]] <= AMBIGUITY:
            raise TrackingError(
                f"ambiguous successor at s={s:.4g}: overlaps {ov[order[0]]:.4f} and {ov[order[1]]:.4f}"
            )
        others = np.delete(ws, k)
        gap = float(np.min(np.abs(others - ws[k]))) if others.size else math.inf
        if gap <= SECTOR_TOL:
            raise TrackingError(f"tracked level is degenerate at s={s:.4g}")
        # fix the phase so successive vectors overlap positively
        vec = vs[:, k]
        vec = vec * np.exp(-1j * np.angle(np.vdot(prev, vec)))
        prev = vec
        samples.append(GapSample(float(s), gap, float(ws[k])))

    return GapProfile(
        samples,
        initial_state=StateVector(psi, normalize=True),
        final_state=StateVector(basis @ prev, normalize=True),
    )


# -- sufficiency bound ----------------------------------------------------


@dataclass(frozen=True)
class BoundReport:
    delta: float
    integral_value: float
    boundary_term: float
    required_T: float


def jansen_bound(schedule: Schedule, gap: GapProfile, delta: float) -> BoundReport:
    """Total time sufficient for |<psi(1)|psi_U(1)>| >= 1 - delta.

    T = (1/delta) * [ int_0^1 ( ||H''|| / gap^2 + 7 ||H'||^2 / gap^3 ) ds + B ]

    with H' = g'(s)(H1 - H0) and H'' = g''(s)(H1 - H0).  Only ramps whose slope
    vanishes at both ends are accepted, since then the boundary term B is zero.
    """
    if not 0 < delta < 1:
        raise ValueError(f"delta must lie in (0, 1), got {delta}")
    ramp = RAMPS[schedule.ramp]
    if abs(ramp.dg(0.0)) > 0 or abs(ramp.dg(1.0)) > 0:
        raise UnmodeledBoundaryError(
            f"ramp {schedule.ramp!r} has nonzero slope at an endpoint, so the boundary term "
            "is nonzero and unmodeled; use ramp='smoothstep'"
        )
    gaps = gap.gaps
    if np.any(gaps <= 0) or not np.all(np.isfinite(gaps)):
        raise ValueError("gap profile must be strictly positive and finite")
    s = gap.s
    diff = (schedule.h1 - schedule.h0).require_hermitian("h1 - h0")
    norm = float(np.max(np.abs(np.linalg.eigvalsh(diff.to_matrix())))) if len(diff) else 0.0
    d1 = np.abs([ramp.dg(x) for x in s]) * norm
    d2 = np.abs([ramp.d2g(x) for x in s]) * norm
    integrand = d2 / gaps**2 + 7 * d1**2 / gaps**3
    integral = float(np.trapezoid(integrand, s))
    boundary = 0.0
    return BoundReport(delta, integral, boundary, (integral + boundary) / delta)


def fidelity_scan(
    schedule: Schedule,
    initial: StateVector,
    target: StateVector,
    times: Sequence[float],
    steps_per_time: float | None = None,
) -> list[tuple[float, float, float]]:
    """Rows ``(T, fidelity, infidelity)`` with fidelity = |<target|psi_U(1)>|.

    When ``steps_per_time`` is given the step count scales with T, keeping the
    discretization error from growing with the total time.
    """
    rows = []
    for t in times:
        n = schedule.n_steps if steps_per_time is None else max(1, math.ceil(steps_per_time * t))
        sched = Schedule(schedule.h0, schedule.h1, float(t), n, schedule.ramp, schedule.method)
        fid = abs(inner_product(target, adiabatic_evolve(sched, initial)))
        rows.append((float(t), fid, 1.0 - fid))
    return rows
