"""Command-line front end.

Usage: ``eigenkit COMMAND --input RUN.json [--output PATH] [--seed N] [options]``.

Exit status is 0 on success, 1 when an algorithm reports a domain error and
2 for malformed input or flags.  Results go to ``--output`` (written through a
temporary file and renamed) or to stdout.  Runs are deterministic for a fixed
input and seed; the seed defaults to :data:`DEFAULT_SEED`.
"""

from __future__ import annotations

import argparse
import logging
import math
import sys
import traceback
from typing import Callable, Sequence

import numpy as np

from eigenkit.adiabatic import Schedule, adiabatic_evolve, gap_profile, jansen_bound
from eigenkit.config import ConfigError, Document, parse_ansatz, parse_document, parse_state, parse_unitary
from eigenkit.hamiltonian import exact_spectrum, operator_norm, transverse_field
from eigenkit.output import render_csv, render_json, write_text
from eigenkit.pauli import DenseLimitError, PauliString, PauliSum
from eigenkit.phase import PhaseUnitary, RodeoConfig, ipe, qpe, rodeo_run, rodeo_scan
from eigenkit.statevector import StateVector, expectation, make_rng
from eigenkit.trotter import ProductFormula, SplitHamiltonian, evolve, exact_evolution
from eigenkit.variational import OptimizerConfig, minimize, qaoa_ansatz, qaoa_schedule

__all__ = ["DEFAULT_SEED", "QPE_MIN_PROBABILITY", "build_parser", "main"]

DEFAULT_SEED = 20240917
QPE_MIN_PROBABILITY = 1e-12

log = logging.getLogger("eigenkit")


# -- argument types (reject, never clamp) -------------------------------------


def _positive_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 1:
        raise argparse.ArgumentTypeError(f"must be at least 1, got {value}")
    return value


def _nonnegative_int(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {value}")
    return value


def _finite(text: str) -> float:
    try:
        value = float(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected a number, got {text!r}") from None
    if not math.isfinite(value):
        raise argparse.ArgumentTypeError(f"must be finite, got {text!r}")
    return value


def _positive(text: str) -> float:
    value = _finite(text)
    if value <= 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {value}")
    return value


def _nonnegative(text: str) -> float:
    value = _finite(text)
    if value < 0:
        raise argparse.ArgumentTypeError(f"must be nonnegative, got {value}")
    return value


def _unit_interval(text: str) -> float:
    value = _finite(text)
    if not 0 < value < 1:
        raise argparse.ArgumentTypeError(f"must lie in (0, 1), got {value}")
    return value


def _seed(text: str) -> int:
    try:
        value = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if not 0 <= value < 2**64:
        raise argparse.ArgumentTypeError("seed must be a 64-bit unsigned integer")
    return value


# -- commands ---------------------------------------------------------------------


def _state(doc: Document, n: int, key: str = "initial_state", **kw) -> StateVector:
    return parse_state(doc.raw[key], n, key, **kw)


def _optimizer(args) -> OptimizerConfig:
    try:
        return OptimizerConfig(args.step_size, args.max_iter, args.tolerance, args.alpha)
    except ValueError as exc:
        raise ConfigError("optimizer flags", str(exc)) from exc


def _trace_csv(result) -> str:
    return render_csv(
        ["iteration", "energy", "gradient_norm"],
        [(r.iteration, r.energy, r.gradient_norm) for r in result.trace],
    )


def cmd_spectrum(doc: Document, args) -> str:
    spec = exact_spectrum(doc.hamiltonian())
    return render_csv(["index", "energy"], enumerate(spec.eigenvalues.tolist()))


def cmd_evolve(doc: Document, args) -> str:
    split_raw = doc.raw.get("split")
    if not isinstance(split_raw, dict):
        raise ConfigError("split", "missing required object with fields 'a' and 'b'")
    sub = Document(split_raw)
    part_a, part_b = sub.hamiltonian("a", allow_graph=False), sub.hamiltonian("b", allow_graph=False)
    if part_a.n_qubits != part_b.n_qubits:
        raise ConfigError("split", "parts act on different qubit counts")
    split = SplitHamiltonian(part_a, part_b)
    n = split.n_qubits
    initial = _state(doc, n, hamiltonian=split.total) if doc.has("initial_state") else StateVector.zero(n)
    formula = ProductFormula(args.order)
    approx = evolve(split, args.total_time, args.steps, formula, initial)
    exact = exact_evolution(split.total, args.total_time, initial)
    return render_json({
        "command": "evolve",
        "total_time": args.total_time,
        "n_steps": args.steps,
        "order": args.order,
        "fidelity": approx.fidelity(exact),
        "error_norm": float(np.linalg.norm(approx.amplitudes - exact.amplitudes)),
        "amplitudes_re": approx.amplitudes.real.tolist(),
        "amplitudes_im": approx.amplitudes.imag.tolist(),
    })


def _conserved(doc: Document, n: int) -> list[PauliSum]:
    labels = doc.raw.get("conserved", [])
    if not isinstance(labels, list):
        raise ConfigError("conserved", "expected a list of Pauli labels")
    out = []
    for k, label in enumerate(labels):
        if not isinstance(label, str) or len(label) != n or set(label) - set("IXYZ"):
            raise ConfigError(f"conserved[{k}]", f"expected a {n}-letter Pauli label, got {label!r}")
        out.append(PauliSum(n, [(1.0, PauliString.from_label(label))]))
    return out


def cmd_adiabatic(doc: Document, args) -> str:
    h1 = doc.hamiltonian()
    n = h1.n_qubits
    h0 = doc.hamiltonian("h0", allow_graph=False) if doc.has("h0") else transverse_field(n)
    if h0.n_qubits != n:
        raise ConfigError("h0", f"acts on {h0.n_qubits} qubits, target Hamiltonian on {n}")
    initial = _state(doc, n, hamiltonian=h0) if doc.has("initial_state") else exact_spectrum(h0).state(0)
    schedule = Schedule(h0, h1, args.total_time, args.steps, args.ramp)
    final = adiabatic_evolve(schedule, initial)
    spec = exact_spectrum(h1)
    report = {
        "command": "adiabatic",
        "total_time": args.total_time,
        "n_steps": args.steps,
        "ramp": args.ramp,
        "final_energy": expectation(final, h1),
        "ground_energy": spec.ground_energy,
        "ground_state_weight": spec.projector_weight(final, spec.ground_energy),
    }
    if args.delta is not None:
        profile = gap_profile(schedule, 0, conserved=_conserved(doc, n))
        bound = jansen_bound(schedule, profile, args.delta)
        report["bound"] = {
            "delta": bound.delta,
            "integral": bound.integral_value,
            "boundary_term": bound.boundary_term,
            "required_total_time": bound.required_T,
            "min_gap": profile.min_gap,
        }
    return render_json(report)


def cmd_vqe(doc: Document, args) -> str:
    h = doc.hamiltonian()
    if not doc.has("ansatz"):
        raise ConfigError("ansatz", "missing required field")
    ansatz, theta0 = parse_ansatz(doc.raw["ansatz"], h.n_qubits)
    return _trace_csv(minimize(ansatz, h, theta0, _optimizer(args)))


def cmd_qaoa(doc: Document, args) -> str:
    h1 = doc.hamiltonian()
    n = h1.n_qubits
    h0 = doc.hamiltonian("h0", allow_graph=False) if doc.has("h0") else transverse_field(n)
    if h0.n_qubits != n:
        raise ConfigError("h0", f"acts on {h0.n_qubits} qubits, cost Hamiltonian on {n}")
    initial = _state(doc, n, hamiltonian=h0) if doc.has("initial_state") else exact_spectrum(h0).state(0)
    ansatz, theta0 = qaoa_ansatz(h0, h1, qaoa_schedule(args.layers), initial)
    return _trace_csv(minimize(ansatz, h1, theta0, _optimizer(args)))


def _unitary(doc: Document) -> PhaseUnitary:
    if not doc.has("unitary"):
        raise ConfigError("unitary", "missing required field")
    u = parse_unitary(doc.raw["unitary"])
    if u.hamiltonian is not None:
        norm = operator_norm(u.hamiltonian)
        if norm * abs(u.dt) >= 2 * math.pi:
            log.warning(
                "||H|| * dt = %.6g >= 2 pi: eigenphases wrap around and distinct energies may alias",
                norm * abs(u.dt),
            )
    return u


def _phase_input(doc: Document) -> tuple[PhaseUnitary, StateVector]:
    u = _unitary(doc)
    if not doc.has("initial_state"):
        raise ConfigError("initial_state", "missing required field")
    state = _state(doc, u.n_qubits, hamiltonian=u.hamiltonian, unitary=u)
    return u, state


def cmd_qpe(doc: Document, args) -> str:
    u, state = _phase_input(doc)
    result = qpe(u, state, args.ancilla)
    rows = [(k, p) for k, p in enumerate(result.probabilities.tolist()) if p >= QPE_MIN_PROBABILITY]
    return render_csv(["k", "probability"], rows)


def cmd_ipe(doc: Document, args) -> str:
    u, state = _phase_input(doc)
    result = ipe(u, state, args.digits, make_rng(args.seed))
    return render_csv(
        ["round", "digit", "p0"], [(j, d, p) for j, (d, p) in enumerate(zip(result.digits, result.p0))]
    )


def _rodeo_config(args, energy: float) -> RodeoConfig:
    return RodeoConfig(
        energy, args.sigma, args.cycles, args.trials, args.seed, 0, args.mode, args.schedule
    )


def _rodeo_input(doc: Document) -> tuple[PauliSum, StateVector]:
    h = doc.hamiltonian()
    if not doc.has("initial_state"):
        raise ConfigError("initial_state", "missing required field")
    return h, _state(doc, h.n_qubits, hamiltonian=h)


def cmd_rodeo(doc: Document, args) -> str:
    h, state = _rodeo_input(doc)
    r = rodeo_run(h, _rodeo_config(args, args.energy), state)
    return render_json({
        "command": "rodeo",
        "energy": args.energy,
        "sigma": args.sigma,
        "n_cycles": args.cycles,
        "n_trials": args.trials,
        "mode": args.mode,
        "success_mean": r.mean,
        "success_stderr": r.stderr,
        "target_energy": r.target_energy,
        "fidelity": r.fidelity,
        "infidelity": r.infidelity,
    })


def cmd_rodeo_scan(doc: Document, args) -> str:
    if args.e_max <= args.e_min:
        raise ConfigError("--e-max", f"must exceed --e-min ({args.e_min}), got {args.e_max}")
    if args.e_points < 2:
        raise ConfigError("--e-points", f"need at least 2 grid points, got {args.e_points}")
    h, state = _rodeo_input(doc)
    grid = np.linspace(args.e_min, args.e_max, args.e_points)
    scan = rodeo_scan(h, state, grid, _rodeo_config(args, float(grid[0])))
    for peak in scan.peaks:
        log.info("peak at E = %.6g (height %.6g, width %.6g)", peak.energy, peak.height, peak.width)
    if args.peaks_output is not None:
        write_text(
            args.peaks_output,
            render_csv(
                ["energy", "height", "prominence", "width"],
                [(p.energy, p.height, p.prominence, p.width) for p in scan.peaks],
            ),
        )
    return render_csv(["energy", "p_hat", "stderr"], [(r.energy, r.p_hat, r.stderr) for r in scan.rows])


COMMANDS: dict[str, Callable[[Document, argparse.Namespace], str]] = {
    "spectrum": cmd_spectrum,
    "evolve": cmd_evolve,
    "adiabatic": cmd_adiabatic,
    "vqe": cmd_vqe,
    "qaoa": cmd_qaoa,
    "qpe": cmd_qpe,
    "ipe": cmd_ipe,
    "rodeo": cmd_rodeo,
    "rodeo-scan": cmd_rodeo_scan,
}


# -- parser -------------------------------------------------------------------------


def _add_optimizer(p: argparse.ArgumentParser, max_iter: int) -> None:
    p.add_argument("--step-size", type=_positive, default=0.1, help="gradient descent step (default 0.1)")
    p.add_argument("--max-iter", type=_nonnegative_int, default=max_iter,
                   help=f"maximum parameter updates (default {max_iter})")
    p.add_argument("--tolerance", type=_nonnegative, default=1e-6,
                   help="stop when the gradient norm falls below this (default 1e-6)")
    p.add_argument("--alpha", type=_finite, default=math.pi / 2,
                   help="parameter-shift angle, |sin alpha| > 1e-6 (default pi/2)")


def _add_rodeo(p: argparse.ArgumentParser) -> None:
    p.add_argument("--sigma", type=_positive, required=True, help="std of the Gaussian cycle times")
    p.add_argument("--cycles", type=_positive_int, required=True, help="cycles per trial")
    p.add_argument("--trials", type=_positive_int, default=1000, help="trials per energy (default 1000)")
    p.add_argument("--mode", choices=("born", "sample"), default="born",
                   help="score trials by exact success probability or by a sampled outcome")
    p.add_argument("--schedule", choices=("gaussian", "decreasing"), default="gaussian",
                   help="'decreasing' halves the time scale every cycle")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="eigenkit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, metavar="COMMAND")

    def command(name: str, help_text: str) -> argparse.ArgumentParser:
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--input", required=True, help="JSON run document")
        p.add_argument("--output", default=None, help="result file (default: stdout)")
        p.add_argument("--seed", type=_seed, default=DEFAULT_SEED, help=f"RNG seed (default {DEFAULT_SEED})")
        p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
        return p

    command("spectrum", "exact eigenvalues (CSV: index, energy)")

    p = command("evolve", "product-formula evolution versus exact (JSON)")
    p.add_argument("--total-time", type=_finite, required=True)
    p.add_argument("--steps", type=_positive_int, required=True)
    p.add_argument("--order", type=int, choices=(1, 2), default=1)

    p = command("adiabatic", "adiabatic state preparation (JSON)")
    p.add_argument("--total-time", type=_nonnegative, required=True)
    p.add_argument("--steps", type=_positive_int, default=200)
    p.add_argument("--ramp", choices=("linear", "smoothstep"), default="linear")
    p.add_argument("--delta", type=_unit_interval, default=None,
                   help="also report the sufficient total time for fidelity 1 - delta (smoothstep only)")

    p = command("vqe", "gradient descent on an ansatz (CSV trace)")
    _add_optimizer(p, 1000)

    p = command("qaoa", "QAOA seeded by the linear-ramp schedule, then optimized (CSV trace)")
    p.add_argument("--layers", type=_positive_int, required=True)
    _add_optimizer(p, 100)

    p = command("qpe", "phase estimation histogram (CSV: k, probability)")
    p.add_argument("--ancilla", type=_positive_int, required=True)

    p = command("ipe", "iterative phase estimation digits (CSV: round, digit, p0)")
    p.add_argument("--digits", type=_positive_int, required=True)

    p = command("rodeo", "rodeo filter at one energy (JSON)")
    p.add_argument("--energy", type=_finite, required=True)
    _add_rodeo(p)

    p = command("rodeo-scan", "rodeo success probability over an energy grid (CSV)")
    p.add_argument("--e-min", type=_finite, required=True)
    p.add_argument("--e-max", type=_finite, required=True)
    p.add_argument("--e-points", type=_positive_int, required=True)
    p.add_argument("--peaks-output", default=None, help="CSV of detected peaks")
    _add_rodeo(p)
    return parser


def _origin(exc: BaseException) -> str:
    """Name of the innermost eigenkit module the exception passed through."""
    name = "eigenkit"
    tb = exc.__traceback__
    for frame, _ in traceback.walk_tb(tb):
        mod = frame.f_globals.get("__name__", "")
        if mod.startswith("eigenkit"):
            name = mod
    return name


def _configure_logging(verbose: bool) -> None:
    log.setLevel(logging.INFO if verbose else logging.WARNING)
    if not log.handlers:
        handler = logging.StreamHandler()
        handler.setFormatter(logging.Formatter("eigenkit: %(levelname)s: %(message)s"))
        log.addHandler(handler)


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _configure_logging(args.verbose)
    try:
        with open(args.input, encoding="utf-8") as fh:
            doc = parse_document(fh.read())
        text = COMMANDS[args.command](doc, args)
        write_text(args.output, text)
    except ConfigError as exc:
        print(f"eigenkit: input error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"eigenkit: {exc}", file=sys.stderr)
        return 2
    except (ValueError, ArithmeticError, RuntimeError, DenseLimitError) as exc:
        print(f"eigenkit: {_origin(exc)}: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
