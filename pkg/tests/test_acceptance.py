"""Exit criteria for the library, one test per criterion.

Each test records a single PASS/FAIL line that is printed in the terminal
summary.  Tolerances are the stated ones; a criterion that cannot be met is
left failing rather than relaxed.
"""

import itertools
import math
import subprocess
import sys
from collections import Counter

import numpy as np
import pytest
from scipy.linalg import expm

from eigenkit.adiabatic import Schedule, fidelity_scan, gap_profile, jansen_bound
from eigenkit.fermion import OrbitalRotation, ladder_matrices, thouless_prepare, thouless_product
from eigenkit.hamiltonian import Graph, all_graphs, build_ising, maxcut_value
from eigenkit.pauli import PauliString, PauliSum
from eigenkit.phase import (
    PhaseUnitary,
    RodeoConfig,
    ipe,
    qft_circuit,
    qpe,
    qpe_resolution,
    rodeo_run,
    rodeo_success_probability,
)
from eigenkit.statevector import Gate, StateVector, circuit_unitary, make_rng
from eigenkit.trotter import ProductFormula, SplitHamiltonian, step_unitary
from eigenkit.variational import (
    Ansatz,
    continuous_maxcut_cost,
    continuous_maxcut_grid_minimum,
    cost,
    maxcut_product_ansatz,
    parameter_shift_gradient,
)

from conftest import record_criterion

pytestmark = pytest.mark.acceptance

SEED = 20240917


def slope(x, y) -> float:
    return float(np.polyfit(np.log(x), np.log(y), 1)[0])


def test_criterion_01_trotter_orders():
    x, z = PauliSum.from_labels({"X": 1.0}), PauliSum.from_labels({"Z": 1.0})
    split = SplitHamiltonian(x, z)
    h = (x + z).to_matrix()
    dts = [0.2, 0.1, 0.05, 0.025]
    steps = [10, 20, 40, 80]
    slopes = {}
    for order in (1, 2):
        per_step = [np.linalg.norm(step_unitary(split, dt, ProductFormula(order)) - expm(-1j * h * dt), 2) for dt in dts]
        exact = expm(-1j * h)
        fixed = [
            np.linalg.norm(np.linalg.matrix_power(step_unitary(split, 1 / n, ProductFormula(order)), n) - exact, 2)
            for n in steps
        ]
        slopes[order] = (slope(dts, per_step), slope(steps, fixed))
    ok = (
        abs(slopes[1][0] - 2) <= 0.1
        and abs(slopes[2][0] - 3) <= 0.1
        and abs(slopes[1][1] + 1) <= 0.1
        and abs(slopes[2][1] + 2) <= 0.1
    )
    record_criterion(
        1, "Trotter orders", ok,
        f"per-step slopes {slopes[1][0]:.3f}, {slopes[2][0]:.3f}; fixed-time slopes {slopes[1][1]:.3f}, {slopes[2][1]:.3f}",
    )
    assert ok


def random_ansatz(rng: np.random.Generator, n: int = 3, n_layers: int = 4) -> Ansatz:
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=n) if set(p) != {"I"}]
    layers = []
    for _ in range(n_layers):
        fixed = []
        for _ in range(rng.integers(0, 3)):
            if rng.random() < 0.5:
                fixed.append(Gate.h(int(rng.integers(n))))
            else:
                a, b = rng.choice(n, size=2, replace=False)
                fixed.append(Gate.cnot(int(a), int(b)))
        layers.append((tuple(fixed), PauliString.from_label(str(rng.choice(labels)))))
    return Ansatz(StateVector.zero(n), tuple(layers))


def random_observable(rng: np.random.Generator, n: int = 3, n_terms: int = 6) -> PauliSum:
    labels = ["".join(p) for p in itertools.product("IXYZ", repeat=n)]
    return PauliSum.from_labels({str(lab): float(rng.normal()) for lab in rng.choice(labels, n_terms, replace=False)})


def test_criterion_02_parameter_shift_exactness():
    rng = np.random.default_rng(SEED)
    worst_shift, worst_fd = 0.0, 0.0
    eps = 1e-5
    for _ in range(20):
        ansatz, h = random_ansatz(rng), random_observable(rng)
        theta = rng.uniform(-math.pi, math.pi, ansatz.n_parameters)
        g_half = parameter_shift_gradient(ansatz, theta, h, math.pi / 2)
        g_quarter = parameter_shift_gradient(ansatz, theta, h, math.pi / 4)
        fd = np.empty(theta.size)
        for j in range(theta.size):
            e = np.zeros_like(theta)
            e[j] = eps
            fd[j] = (cost(ansatz, theta + e, h) - cost(ansatz, theta - e, h)) / (2 * eps)
        worst_shift = max(worst_shift, float(np.max(np.abs(g_half - g_quarter))))
        worst_fd = max(worst_fd, float(np.max(np.abs(g_half - fd))), float(np.max(np.abs(g_quarter - fd))))
    ok = worst_shift <= 1e-10 and worst_fd <= 1e-8
    record_criterion(
        2, "parameter-shift exactness", ok,
        f"max |g(pi/2) - g(pi/4)| = {worst_shift:.2e}, max |g - finite difference| = {worst_fd:.2e} over 20 ansatze",
    )
    assert ok


def test_criterion_03_jordan_wigner_car():
    worst = 0.0
    for n in range(1, 7):
        create, annihilate = ladder_matrices(n)
        eye = np.eye(1 << n)
        for i, j in itertools.product(range(n), repeat=2):
            worst = max(
                worst,
                np.max(np.abs(annihilate[i] @ create[j] + create[j] @ annihilate[i] - eye * (i == j))),
                np.max(np.abs(annihilate[i] @ annihilate[j] + annihilate[j] @ annihilate[i])),
                np.max(np.abs(create[i] @ create[j] + create[j] @ create[i])),
            )
    ok = worst <= 1e-12
    record_criterion(3, "Jordan-Wigner CAR", ok, f"max deviation {worst:.2e} for n_modes 1..6")
    assert ok


def test_criterion_04_thouless_identity():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for n_modes, n_occ in ((4, 2), (6, 3)):
        for _ in range(20):
            rot = OrbitalRotation.random(n_modes, n_occ, rng)
            worst = max(worst, float(np.max(np.abs(thouless_prepare(rot) - thouless_product(rot)))))
    ok = worst <= 1e-10
    record_criterion(4, "Thouless identity", ok, f"max |exponential - product| = {worst:.2e} over 40 rotations")
    assert ok


def test_criterion_05_qft_equals_dft():
    worst = 0.0
    for n in range(1, 6):
        size = 1 << n
        j, k = np.meshgrid(np.arange(size), np.arange(size), indexing="ij")
        dft = np.exp(2j * math.pi * j * k / size) / math.sqrt(size)
        worst = max(worst, float(np.max(np.abs(circuit_unitary(qft_circuit(n), n) - dft))))
    ok = worst <= 1e-10
    record_criterion(5, "QFT circuit", ok, f"max |circuit - DFT| = {worst:.2e} for n 1..5")
    assert ok


def test_criterion_06_qpe():
    point_mass_err = 0.0
    for n in range(3, 8):
        for k in {0, 1, 3, (1 << n) - 1, (1 << n) // 3}:
            result = qpe(PhaseUnitary.from_phases([k / 2**n, 0.0]), StateVector.basis(1, 0), n)
            point_mass_err = max(point_mass_err, abs(result.probabilities[k] - 1.0))

    collapse_err = 0.0
    rng = np.random.default_rng(SEED)
    for n in range(3, 8):
        size = 1 << n
        ka, kb = 1, 1 + max(4, size // 2)  # separation at least 4 / 2^n
        q, _ = np.linalg.qr(rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2)))
        u = PhaseUnitary.from_phases([ka / size, kb / size], q)
        ca, cb = 0.6, 0.8
        result = qpe(u, StateVector(ca * q[:, 0] + cb * q[:, 1]), n)
        collapse_err = max(
            collapse_err,
            abs(result.probabilities[ka] - ca**2),
            abs(result.probabilities[kb] - cb**2),
            1 - abs(np.vdot(q[:, 0], result.collapsed(ka).amplitudes)),
            1 - abs(np.vdot(q[:, 1], result.collapsed(kb).amplitudes)),
        )

    theta = 1 / 3
    ns = list(range(3, 8))
    stds = [qpe_resolution(qpe(PhaseUnitary.from_phases([theta, 0.0]), StateVector.basis(1, 0), n), theta) for n in ns]
    resolution_slope = float(np.polyfit(ns, np.log2(stds), 1)[0])

    ok_mass = point_mass_err <= 1e-10
    ok_collapse = collapse_err <= 1e-10
    ok_slope = abs(resolution_slope + 1.0) <= 0.15
    ok = ok_mass and ok_collapse and ok_slope
    record_criterion(
        6, "QPE", ok,
        f"point-mass error {point_mass_err:.1e} ({'ok' if ok_mass else 'fail'}), "
        f"collapse error {collapse_err:.1e} ({'ok' if ok_collapse else 'fail'}), "
        f"std-vs-n slope {resolution_slope:.3f} at theta=1/3 ({'ok' if ok_slope else 'fail'}, needs -1.0 +- 0.15)",
    )
    assert ok_mass
    assert ok_collapse
    assert ok_slope


def test_criterion_07_ipe():
    dyadic_ok = True
    for n in (3, 4, 5):
        for k in range(1 << n):
            result = ipe(PhaseUnitary.from_phases([k / 2**n, 0.0]), StateVector.basis(1, 0), n, make_rng(SEED, 7, k))
            dyadic_ok &= result.bitstring == format(k, f"0{n}b")

    u = PhaseUnitary.from_phases([0.3, 0.0])
    state = StateVector.basis(1, 0)
    runs = 10_000
    counts = Counter(ipe(u, state, 4, make_rng(SEED, 8, r), check_eigenstate=False).bitstring for r in range(runs))
    modal, hits = counts.most_common(1)[0]
    ok = dyadic_ok and modal == "0101"
    record_criterion(
        7, "iterative phase estimation", ok,
        f"dyadic phases exact for n 3..5: {dyadic_ok}; theta=0.3 modal string {modal} ({hits}/{runs})",
    )
    assert dyadic_ok
    assert modal == "0101"


def test_criterion_08_rodeo_formula():
    h = PauliSum.from_labels({"Z": 0.5, "I": -0.5})  # eigenvalue -1 on |1>
    state = StateVector.basis(1, 1)
    sigma = 1.0
    trials = 4000
    worst = 0.0
    failures = []
    for n in (1, 3, 5):
        for x in (0.0, 0.5, 1.0, 2.0, 4.0):
            energy = -1.0 - x / sigma
            r = rodeo_run(h, RodeoConfig(energy, sigma, n, trials, seed=SEED, stream=n, mode="sample"), state)
            expected = rodeo_success_probability([1.0], [-1.0], energy, sigma, n)
            z = abs(r.mean - expected) / max(r.stderr, 1e-12)
            if abs(r.mean - expected) > 3 * r.stderr + 1e-12:
                failures.append((n, x))
            worst = max(worst, z if r.stderr > 0 else 0.0)
        far = rodeo_run(h, RodeoConfig(-1.0 - 50.0, sigma, n, trials, seed=SEED, stream=10 + n, mode="sample"), state)
        if abs(far.mean - 2.0**-n) > 3 * far.stderr:
            failures.append((n, "background"))
    ok = not failures
    record_criterion(
        8, "rodeo success formula", ok,
        f"largest deviation {worst:.2f} SE over n in (1,3,5) and 5 detunings; background checks included; "
        f"failures: {failures or 'none'}",
    )
    assert ok


def test_criterion_09_rodeo_preparation():
    h = PauliSum.from_labels({"Z": 0.5, "I": -0.5})  # eigenvalues -1 and 0
    state = StateVector.uniform(1)
    ns = list(range(2, 9))
    infid = [
        rodeo_run(h, RodeoConfig(-1.0, 3.5, n, 4000, seed=SEED, stream=n), state).infidelity for n in ns
    ]
    factor = float(np.exp(np.polyfit(ns, np.log(infid), 1)[0]))
    ok = 0.20 <= factor <= 0.55
    record_criterion(9, "rodeo eigenstate preparation", ok, f"per-cycle infidelity factor {factor:.3f} over n 2..8")
    assert ok


def test_criterion_10_adiabatic(gapped_pair):
    h0, h1 = gapped_pair
    initial = StateVector.uniform(2)
    target = StateVector(np.array([0, 1, 1, 0]) / math.sqrt(2))
    sched = Schedule(h0, h1, 1.0, ramp="smoothstep")

    times = [10.0, 20.0, 40.0, 80.0]
    rows = fidelity_scan(sched, initial, target, times, steps_per_time=20)
    scaling = slope(times, [r[2] for r in rows])
    ok_scaling = abs(scaling + 1.0) <= 0.2

    profile = gap_profile(sched, conserved=[PauliSum.from_labels({"XX": 1.0})])
    bound_rows = []
    for delta in (0.1, 0.05):
        report = jansen_bound(sched, profile, delta)
        (_, fid, _), = fidelity_scan(sched, initial, target, [report.required_T], steps_per_time=10)
        bound_rows.append((delta, report.required_T, fid))
    ok_bound = all(fid >= 1 - delta for delta, _, fid in bound_rows)

    ok = ok_scaling and ok_bound
    bounds = ", ".join(f"delta={d}: T={t:.1f} fidelity {f:.8f}" for d, t, f in bound_rows)
    record_criterion(
        10, "adiabatic scaling and bound", ok,
        f"infidelity-vs-T slope {scaling:.2f} ({'ok' if ok_scaling else 'fail'}, needs -1.0 +- 0.2); "
        f"bound ({'ok' if ok_bound else 'fail'}): {bounds}",
    )
    assert ok_bound
    assert ok_scaling


def connected(graph: Graph) -> bool:
    seen, stack = {0}, [0]
    while stack:
        v = stack.pop()
        for w in np.flatnonzero(graph.adjacency[v]):
            if int(w) not in seen:
                seen.add(int(w))
                stack.append(int(w))
    return len(seen) == graph.d


def test_criterion_11_maxcut_equivalence():
    rng = np.random.default_rng(SEED)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(1, 7))
        edges = [(i, j) for i in range(d) for j in range(i + 1, d) if rng.random() < 0.5]
        g = Graph.from_edges(d, edges)
        phi = rng.uniform(0, 2 * math.pi, d)
        worst = max(worst, abs(continuous_maxcut_cost(g, phi) - cost(maxcut_product_ansatz(d), phi, build_ising(g))))
    n_graphs, grid_gap = 0, 0.0
    for d in range(1, 5):
        for g in all_graphs(d):
            if not connected(g):
                continue
            n_graphs += 1
            grid_gap = max(grid_gap, abs(continuous_maxcut_grid_minimum(g) + maxcut_value(g)))
    # the grid contains phi = 0 and pi, so the minimum is an integer up to rounding in the cosine sums
    grid_ok = grid_gap <= 1e-12
    ok = worst <= 1e-10 and grid_ok
    record_criterion(
        11, "MaxCut equivalence", ok,
        f"max |continuous - Ising| = {worst:.2e} over 50 draws; max |grid minimum + MaxCut| = {grid_gap:.1e} on {n_graphs} connected graphs",
    )
    assert ok


def test_criterion_12_cli_rodeo_scan(tmp_path):
    inp = tmp_path / "edge.json"
    inp.write_text('{"graph": {"vertices": 2, "edges": [[0, 1]]}, "initial_state": {"uniform": true}}')
    e_min, e_max, points = -2.0, 1.0, 61
    spacing = (e_max - e_min) / (points - 1)

    def scan(tag: str) -> tuple[bytes, bytes]:
        out, peaks = tmp_path / f"scan{tag}.csv", tmp_path / f"peaks{tag}.csv"
        subprocess.run(
            [sys.executable, "-m", "eigenkit.cli", "rodeo-scan", "--input", str(inp), "--output", str(out),
             "--peaks-output", str(peaks), "--e-min", str(e_min), "--e-max", str(e_max), "--e-points", str(points),
             "--sigma", "3", "--cycles", "4", "--trials", "500", "--seed", "7"],
            check=True,
        )
        return out.read_bytes(), peaks.read_bytes()

    first, second = scan("a"), scan("b")
    identical = first == second
    found = sorted(float(line.split(",")[0]) for line in first[1].decode().splitlines()[1:])
    recovered = len(found) == 2 and abs(found[0] + 1.0) <= spacing and abs(found[1]) <= spacing
    ok = identical and recovered
    record_criterion(
        12, "CLI rodeo-scan", ok,
        f"peaks at {found} (grid spacing {spacing}); repeated runs byte-identical: {identical}",
    )
    assert ok
