"""Quantum Fourier transform, phase estimation (register and iterative) and rodeo filtering.

Phase convention: a unitary with U|psi> = exp(2 pi i theta)|psi> has eigenphase
theta in [0, 1).  For U = exp(-i H dt) an eigenvalue E maps to
theta = (-E dt / 2 pi) mod 1, so dt must keep the spectrum of interest inside
one period to avoid aliasing.

Register layout for phase estimation: the system occupies qubits 0..m-1 and
ancilla j sits on qubit m + j, so the measured ancilla integer k is the
little-endian value of the ancilla register and estimates theta ~ k / 2^n.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from functools import lru_cache
from typing import Sequence

import numpy as np
import scipy.signal

from eigenkit.hamiltonian import exact_spectrum
from eigenkit.pauli import PauliSum, check_dense_limit
from eigenkit.statevector import (
    DEAD_PROBABILITY,
    DeadStateError,
    Gate,
    StateVector,
    make_rng,
    measure_qubit,
    project_qubit,
    run_circuit,
    adjoint_circuit,
)
from eigenkit.trotter import evolution_operator

__all__ = [
    "IPEResult",
    "Peak",
    "PhaseUnitary",
    "QPEResult",
    "RodeoConfig",
    "RodeoCycle",
    "RodeoResult",
    "ScanResult",
    "ScanRow",
    "detect_peaks",
    "inverse_qft_circuit",
    "ipe",
    "qft_circuit",
    "qpe",
    "qpe_resolution",
    "rodeo_cycle",
    "rodeo_run",
    "rodeo_scan",
    "rodeo_success_probability",
]

EIGENSTATE_TOL = 1e-6
UNITARY_TOL = 1e-10


# -- QFT ----------------------------------------------------------------------


def qft_circuit(n: int) -> list[Gate]:
    """Gate sequence for |m> -> 2^{-n/2} sum_k exp(2 pi i k m / 2^n) |k>.

    Qubits are processed from n-1 down to 0: a Hadamard, then a phase
    2 pi / 2^{i-j+1} on qubit i controlled by each lower qubit j.  A final swap
    network reverses the qubit order.
    """
    if n < 1:
        raise ValueError("QFT needs at least one qubit")
    gates = []
    for i in range(n - 1, -1, -1):
        gates.append(Gate.h(i))
        for j in range(i - 1, -1, -1):
            gates.append(Gate.phase(2 * math.pi / 2 ** (i - j + 1), i).controlled_by(j))
    for r in range(n // 2):
        gates.append(Gate.swap(r, n - 1 - r))
    return gates


def inverse_qft_circuit(n: int) -> list[Gate]:
    return adjoint_circuit(qft_circuit(n))


def _shift(gates: Sequence[Gate], offset: int) -> list[Gate]:
    return [
        Gate(g.kind, tuple(q + offset for q in g.targets), tuple(q + offset for q in g.controls),
             g.angle, g.generator, g.matrix)
        for g in gates
    ]


# -- phase unitaries ---------------------------------------------------------


@dataclass(frozen=True, eq=False)
class PhaseUnitary:
    """Dense system unitary, optionally built as exp(-i H dt)."""

    matrix: np.ndarray = field(repr=False)
    hamiltonian: PauliSum | None = None
    dt: float | None = None

    def __post_init__(self):
        m = np.array(self.matrix, dtype=complex)
        if m.ndim != 2 or m.shape[0] != m.shape[1] or m.shape[0] & (m.shape[0] - 1) or m.shape[0] < 2:
            raise ValueError(f"unitary must be square with power-of-two size, got {m.shape}")
        defect = np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])))
        if defect > UNITARY_TOL:
            raise ValueError(f"matrix is not unitary (max |U^dag U - I| = {defect:.3g})")
        m.flags.writeable = False
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "_powers", {1: m})

    @classmethod
    def from_hamiltonian(cls, h: PauliSum, dt: float) -> PhaseUnitary:
        if not (math.isfinite(dt) and dt != 0):
            raise ValueError("dt must be finite and nonzero")
        return cls(evolution_operator(h, dt), h, float(dt))

    @classmethod
    def from_matrix(cls, matrix: np.ndarray) -> PhaseUnitary:
        return cls(matrix)

    @classmethod
    def from_phases(cls, thetas: Sequence[float], basis: np.ndarray | None = None) -> PhaseUnitary:
        """Unitary with eigenphases ``thetas`` on the columns of ``basis`` (default: computational)."""
        thetas = np.asarray(thetas, dtype=float)
        d = np.exp(2j * math.pi * thetas)
        if basis is None:
            return cls(np.diag(d))
        basis = np.asarray(basis, dtype=complex)
        return cls((basis * d) @ basis.conj().T)

    @property
    def n_qubits(self) -> int:
        return self.matrix.shape[0].bit_length() - 1

    def power(self, exponent: int) -> np.ndarray:
        """U^exponent for exponent a power of two, by repeated squaring (cached)."""
        if exponent < 1 or exponent & (exponent - 1):
            raise ValueError("exponent must be a positive power of two")
        powers = self._powers
        k = max(p for p in powers if p <= exponent)
        while k < exponent:
            powers[2 * k] = powers[k] @ powers[k]
            k *= 2
        return powers[exponent]

    def eigenphase(self, state: StateVector) -> float:
        """theta in [0, 1) from <psi|U|psi>; meaningful for eigenstates."""
        z = np.vdot(state.amplitudes, self.matrix @ state.amplitudes)
        return float(np.angle(z) / (2 * math.pi)) % 1.0

    def eigenstate_defect(self, state: StateVector) -> float:
        """||U psi - e^{i phi} psi|| with the best-fitting phase phi."""
        u_psi = self.matrix @ state.amplitudes
        z = np.vdot(state.amplitudes, u_psi)
        phase = z / abs(z) if abs(z) > 0 else 1.0
        return float(np.linalg.norm(u_psi - phase * state.amplitudes))

    def phase_of_energy(self, energy: float) -> float:
        self._require_hamiltonian()
        return (-energy * self.dt / (2 * math.pi)) % 1.0

    def energy_of_phase(self, theta: float) -> float:
        """Energy in [-pi/dt, pi/dt) whose eigenphase is ``theta``."""
        self._require_hamiltonian()
        wrapped = ((theta + 0.5) % 1.0) - 0.5
        return -2 * math.pi * wrapped / self.dt

    def _require_hamiltonian(self):
        if self.dt is None:
            raise ValueError("energy conversion needs a Hamiltonian-sourced unitary")


# -- QPE ------------------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class QPEResult:
    """Exact ancilla distribution and the joint state it came from."""

    probabilities: np.ndarray
    n_ancilla: int
    joint: np.ndarray = field(repr=False)

    @property
    def histogram(self) -> dict[int, float]:
        return {k: float(p) for k, p in enumerate(self.probabilities) if p > 0}

    @property
    def argmax(self) -> int:
        return int(np.argmax(self.probabilities))

    def collapsed(self, k: int) -> StateVector:
        """System state after the ancilla register reads ``k``."""
        block = self.joint[k]
        p = float(np.vdot(block, block).real)
        if p < DEAD_PROBABILITY:
            raise DeadStateError(f"ancilla outcome {k} has probability {p:.3g}")
        return StateVector(block / math.sqrt(p), normalize=True)

    def sample(self, rng: np.random.Generator) -> tuple[int, StateVector]:
        k = int(rng.choice(self.probabilities.size, p=self.probabilities))
        return k, self.collapsed(k)

    def sample_counts(self, rng: np.random.Generator, shots: int) -> np.ndarray:
        return rng.multinomial(shots, self.probabilities)


def qpe_circuit(u: PhaseUnitary, n_ancilla: int) -> list[Gate]:
    m = u.n_qubits
    system = tuple(range(m))
    gates = [Gate.h(m + j) for j in range(n_ancilla)]
    for j in range(n_ancilla):
        gates.append(Gate.unitary(u.power(2**j), system).controlled_by(m + j))
    gates.extend(_shift(inverse_qft_circuit(n_ancilla), m))
    return gates


def qpe(u: PhaseUnitary, system_state: StateVector, n_ancilla: int) -> QPEResult:
    """Hadamard layer, controlled U^{2^j} ladder and inverse QFT on the ancillas."""
    if n_ancilla < 1:
        raise ValueError("QPE needs at least one ancilla")
    m = u.n_qubits
    if system_state.n_qubits != m:
        raise ValueError(f"state on {system_state.n_qubits} qubits, unitary on {m}")
    check_dense_limit(m + n_ancilla, "QPE register")
    joint = StateVector.product(system_state, StateVector.zero(n_ancilla))
    out = run_circuit(joint, qpe_circuit(u, n_ancilla)).amplitudes.reshape(1 << n_ancilla, 1 << m)
    probs = np.sum(np.abs(out) ** 2, axis=1)
    probs = probs / probs.sum()
    probs.flags.writeable = False
    out.flags.writeable = False
    return QPEResult(probs, n_ancilla, out)


def qpe_resolution(result: QPEResult, theta: float) -> float:
    """Standard deviation of k / 2^n about ``theta``, using circular distance."""
    k = np.arange(result.probabilities.size) / result.probabilities.size
    dist = (k - theta + 0.5) % 1.0 - 0.5
    return float(math.sqrt(np.sum(result.probabilities * dist**2)))


# -- IPE --------------------------------------------------------------------


@dataclass(frozen=True)
class IPEResult:
    """Digits in reading order (k_0 first) and each round's P(ancilla = 0)."""

    digits: tuple[int, ...]
    p0: tuple[float, ...]

    @property
    def bitstring(self) -> str:
        """k_{n-1} ... k_0."""
        return "".join(str(b) for b in reversed(self.digits))

    @property
    def value(self) -> float:
        return int(self.bitstring, 2) / 2 ** len(self.digits)


def ipe(
    u: PhaseUnitary,
    eigenstate: StateVector,
    n_digits: int,
    rng: np.random.Generator,
    check_eigenstate: bool = True,
) -> IPEResult:
    """Read the binary digits of theta one at a time with a single ancilla.

    Round j applies controlled U^{2^{n-j-1}} and the correction phase
    -2 pi sum_{l<j} k_l 2^{l-j-1}, which leaves k_j / 2 on the ancilla.
    """
    if n_digits < 1:
        raise ValueError("need at least one digit")
    m = u.n_qubits
    if eigenstate.n_qubits != m:
        raise ValueError(f"state on {eigenstate.n_qubits} qubits, unitary on {m}")
    if check_eigenstate:
        defect = u.eigenstate_defect(eigenstate)
        if defect > EIGENSTATE_TOL:
            raise ValueError(
                f"input is not an eigenstate of U (||U psi - e^(i phi) psi|| = {defect:.3g})"
            )
    anc = m
    system = tuple(range(m))
    controlled = [
        Gate.unitary(u.power(2 ** (n_digits - j - 1)), system).controlled_by(anc) for j in range(n_digits)
    ]
    state = eigenstate
    digits: list[int] = []
    p0s: list[float] = []
    for j in range(n_digits):
        correction = -2 * math.pi * sum(k * 2.0 ** (l - j - 1) for l, k in enumerate(digits))
        gates = [
            Gate.h(anc),
            controlled[j],
            Gate.phase(correction, anc),
            Gate.h(anc),
        ]
        joint = run_circuit(StateVector.product(state, StateVector.zero(1)), gates)
        record, post = measure_qubit(joint, anc, rng)
        p0s.append(record.probability if record.outcome == 0 else 1.0 - record.probability)
        digits.append(record.outcome)
        state = StateVector(post.amplitudes.reshape(2, -1)[record.outcome], normalize=True)
    return IPEResult(tuple(digits), tuple(p0s))


# -- rodeo ----------------------------------------------------------------------


@dataclass(frozen=True)
class RodeoCycle:
    success: bool
    probability: float
    state: StateVector


def rodeo_cycle_circuit(u_t: np.ndarray, energy: float, t: float, n_system: int) -> list[Gate]:
    anc = n_system
    return [
        Gate.h(anc),
        Gate.unitary(u_t, tuple(range(n_system))).controlled_by(anc),
        Gate.phase(energy * t, anc),
        Gate.h(anc),
    ]


def rodeo_cycle(
    h: PauliSum,
    energy: float,
    t: float,
    state: StateVector,
    rng: np.random.Generator | None = None,
) -> RodeoCycle:
    """One cycle: ancilla H, controlled exp(-i H t), phase exp(i E t), H, measure.

    With ``rng`` the ancilla is sampled; without it the success branch is
    taken and ``probability`` is its Born weight cos^2((E_j - E) t / 2)
    averaged over the input's spectral weights.
    """
    n = state.n_qubits
    if h.n_qubits != n:
        raise ValueError(f"Hamiltonian on {h.n_qubits} qubits, state on {n}")
    check_dense_limit(n + 1, "rodeo register")
    joint = StateVector.product(state, StateVector.zero(1))
    joint = run_circuit(joint, rodeo_cycle_circuit(evolution_operator(h, t), energy, t, n))
    if rng is None:
        p, post = project_qubit(joint, n, 0)
        outcome = 0
    else:
        record, post = measure_qubit(joint, n, rng)
        outcome = record.outcome
        p = record.probability if outcome == 0 else 1.0 - record.probability
    system = StateVector(post.amplitudes.reshape(2, -1)[outcome], normalize=True)
    return RodeoCycle(outcome == 0, p, system)


def rodeo_success_probability(
    weights: Sequence[float], eigenvalues: Sequence[float], energy: float, sigma: float, n_cycles: int
) -> float:
    """Trial-averaged P_n(E) = sum_j |c_j|^2 [(1 + exp(-(E_j - E)^2 sigma^2 / 2)) / 2]^n."""
    w = np.asarray(weights, dtype=float)
    e = np.asarray(eigenvalues, dtype=float)
    return float(np.sum(w * ((1 + np.exp(-((e - energy) * sigma) ** 2 / 2)) / 2) ** n_cycles))


@dataclass(frozen=True)
class RodeoConfig:
    """Rodeo run parameters.

    ``mode="born"`` scores each trial by its exact all-success probability for
    the drawn times; ``mode="sample"`` draws the outcome.  ``schedule`` is
    ``"gaussian"`` (every cycle time has std sigma) or ``"decreasing"`` (cycle
    k has std sigma / 2^k).
    """

    energy: float
    sigma: float
    n_cycles: int
    n_trials: int = 1000
    seed: int = 0
    stream: int = 0
    mode: str = "born"
    schedule: str = "gaussian"

    def __post_init__(self):
        if not math.isfinite(self.energy):
            raise ValueError("energy must be finite")
        if not (math.isfinite(self.sigma) and self.sigma > 0):
            raise ValueError("sigma must be positive")
        if self.n_cycles < 1:
            raise ValueError("n_cycles must be at least 1")
        if self.n_trials < 1:
            raise ValueError("n_trials must be at least 1")
        if self.mode not in ("born", "sample"):
            raise ValueError(f"mode must be 'born' or 'sample', got {self.mode!r}")
        if self.schedule not in ("gaussian", "decreasing"):
            raise ValueError(f"schedule must be 'gaussian' or 'decreasing', got {self.schedule!r}")

    def cycle_scales(self) -> np.ndarray:
        if self.schedule == "gaussian":
            return np.full(self.n_cycles, self.sigma)
        return self.sigma / 2.0 ** np.arange(self.n_cycles)

    def trial_times(self, trial: int) -> tuple[np.ndarray, np.random.Generator]:
        """Signed cycle times for ``trial`` and its generator (for later outcome draws)."""
        rng = make_rng(self.seed, self.stream, trial)
        return rng.normal(size=self.n_cycles) * self.cycle_scales(), rng


@dataclass(frozen=True, eq=False)
class RodeoResult:
    """Success statistics and the post-selected state's overlap with the target.

    ``target_energy`` is the eigenvalue nearest the configured energy.
    ``infidelity`` refers to the success-weighted ensemble of surviving
    states; ``median_trial_infidelity`` is the median over trials of each
    surviving pure state's infidelity.
    """

    mean: float
    stderr: float
    per_trial: np.ndarray = field(repr=False)
    target_energy: float
    fidelity: float
    infidelity: float
    median_trial_infidelity: float


@lru_cache(maxsize=8)
def _draws(sigma: float, n_cycles: int, n_trials: int, seed: int, stream: int, schedule: str):
    config = RodeoConfig(0.0, sigma, n_cycles, n_trials, seed, stream, schedule=schedule)
    times = np.empty((n_trials, n_cycles))
    uniforms = np.empty(n_trials)
    for i in range(n_trials):
        times[i], rng = config.trial_times(i)
        uniforms[i] = rng.random()
    times.flags.writeable = False
    uniforms.flags.writeable = False
    return times, uniforms


def _trial_draws(config: RodeoConfig) -> tuple[np.ndarray, np.ndarray]:
    """Cycle times (n_trials, n_cycles) and one outcome uniform per trial."""
    return _draws(config.sigma, config.n_cycles, config.n_trials, config.seed, config.stream, config.schedule)


def rodeo_run(h: PauliSum, config: RodeoConfig, initial: StateVector, engine: str = "eigenbasis") -> RodeoResult:
    """Run ``config.n_trials`` independent trials of ``config.n_cycles`` cycles.

    Trial ``i`` draws its times from the substream ``i`` of
    ``(config.seed, config.stream)``, so results do not depend on trial order.
    ``engine="eigenbasis"`` multiplies each spectral component by
    (1 + exp(-i (E_j - E) t)) / 2 per cycle; ``engine="circuit"`` runs the
    gate-level cycle and serves as a cross-check.
    """
    if h.n_qubits != initial.n_qubits:
        raise ValueError(f"Hamiltonian on {h.n_qubits} qubits, state on {initial.n_qubits}")
    spec = exact_spectrum(h)
    eig = spec.eigenvalues
    target = int(np.argmin(np.abs(eig - config.energy)))
    in_block = np.zeros(eig.size, dtype=bool)
    in_block[spec.degenerate_block(target)] = True
    c = spec.vectors.conj().T @ initial.amplitudes
    times, uniforms = _trial_draws(config)

    if engine == "eigenbasis":
        factors = np.ones((config.n_trials, eig.size), dtype=complex)
        for k in range(config.n_cycles):
            factors *= (1 + np.exp(-1j * np.outer(times[:, k], eig - config.energy))) / 2
        amps = factors * c
    elif engine == "circuit":
        amps = np.array([_circuit_trial(h, config.energy, initial, spec.vectors, t) for t in times])
    else:
        raise ValueError(f"unknown engine {engine!r}")
    w = np.abs(amps) ** 2
    born = w.sum(axis=1)
    kept = w[:, in_block].sum(axis=1)
    bad = w[:, ~in_block].sum(axis=1)

    n = config.n_trials
    if config.mode == "born":
        per_trial = born
        trial_ok = born > DEAD_PROBABILITY
        weight_kept, weight_bad = kept.sum(), bad.sum()
    else:
        per_trial = (uniforms < born).astype(float)
        trial_ok = per_trial > 0
        weight_kept = (kept[trial_ok] / born[trial_ok]).sum()
        weight_bad = (bad[trial_ok] / born[trial_ok]).sum()
    mean = float(per_trial.mean())
    stderr = float(per_trial.std(ddof=1) / math.sqrt(n)) if n > 1 else 0.0
    total = weight_kept + weight_bad
    fidelity = float(weight_kept / total) if total > 0 else math.nan
    infidelity = float(weight_bad / total) if total > 0 else math.nan
    median_inf = float(np.median(bad[trial_ok] / born[trial_ok])) if trial_ok.any() else math.nan
    per_trial.flags.writeable = False
    return RodeoResult(mean, stderr, per_trial, float(eig[target]), fidelity, infidelity, median_inf)


def _circuit_trial(
    h: PauliSum, energy: float, initial: StateVector, vectors: np.ndarray, times: np.ndarray
) -> np.ndarray:
    """Unnormalized success-branch amplitudes in the eigenbasis, via gate-level cycles."""
    state, p_total = initial, 1.0
    for t in times:
        try:
            cycle = rodeo_cycle(h, energy, float(t), state)
        except DeadStateError:
            return np.zeros(vectors.shape[1], dtype=complex)
        p_total *= cycle.probability
        state = cycle.state
    return math.sqrt(p_total) * (vectors.conj().T @ state.amplitudes)


# -- scans and peaks --------------------------------------------------------------


@dataclass(frozen=True)
class ScanRow:
    energy: float
    p_hat: float
    stderr: float


@dataclass(frozen=True)
class Peak:
    energy: float
    height: float
    prominence: float
    width: float


@dataclass(frozen=True)
class ScanResult:
    rows: tuple[ScanRow, ...]
    peaks: tuple[Peak, ...]

    @property
    def energies(self) -> np.ndarray:
        return np.array([r.energy for r in self.rows])

    @property
    def p_hat(self) -> np.ndarray:
        return np.array([r.p_hat for r in self.rows])

    @property
    def stderr(self) -> np.ndarray:
        return np.array([r.stderr for r in self.rows])


def detect_peaks(
    energies: Sequence[float], p_hat: Sequence[float], stderr: Sequence[float], n_cycles: int
) -> tuple[Peak, ...]:
    """Interior local maxima that stand out from noise.

    A grid point qualifies when its prominence and its height above the
    1/2^n background both reach three times the pooled standard error
    sqrt(mean(stderr^2)).  Widths are full widths at half prominence,
    converted from grid indices to energy by linear interpolation.
    """
    e = np.asarray(energies, dtype=float)
    p = np.asarray(p_hat, dtype=float)
    se = np.asarray(stderr, dtype=float)
    if not (e.shape == p.shape == se.shape) or e.ndim != 1:
        raise ValueError("energies, p_hat and stderr must be equal-length 1-D arrays")
    if e.size < 3:
        return ()
    threshold = 3.0 * math.sqrt(float(np.mean(se**2)))
    background = 2.0 ** -n_cycles
    idx, props = scipy.signal.find_peaks(p, prominence=max(threshold, 1e-12))
    if idx.size == 0:
        return ()
    widths, _, left, right = scipy.signal.peak_widths(p, idx, rel_height=0.5)
    grid = np.arange(e.size)
    peaks = []
    for k, i in enumerate(idx):
        if p[i] - background < threshold:
            continue
        width = float(np.interp(right[k], grid, e) - np.interp(left[k], grid, e))
        peaks.append(Peak(float(e[i]), float(p[i]), float(props["prominences"][k]), width))
    return tuple(peaks)


def rodeo_scan(
    h: PauliSum, initial: StateVector, e_grid: Sequence[float], config: RodeoConfig
) -> ScanResult:
    """Evaluate :func:`rodeo_run` across ``e_grid`` (``config.energy`` is ignored).

    Every grid point reuses the same per-trial time draws, so neighbouring
    estimates share their sampling noise and the curve stays smooth.
    """
    grid = np.asarray(e_grid, dtype=float)
    if grid.ndim != 1 or grid.size == 0:
        raise ValueError("energy grid must be a nonempty 1-D array")
    if np.any(np.diff(grid) <= 0):
        raise ValueError("energy grid must be strictly ascending")
    rows = []
    for energy in grid:
        r = rodeo_run(h, replace(config, energy=float(energy)), initial)
        rows.append(ScanRow(float(energy), r.mean, r.stderr))
    peaks = detect_peaks(grid, [r.p_hat for r in rows], [r.stderr for r in rows], config.n_cycles)
    return ScanResult(tuple(rows), peaks)
