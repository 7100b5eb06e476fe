"""JSON run documents: parsing and validation into domain objects.

Every error is a :class:`ConfigError` naming the offending field with a
dotted path such as ``hamiltonian.terms[2].pauli``.

Schemas
-------
Hamiltonian::

    {"n_qubits": 2, "terms": [{"coeff": 0.5, "pauli": "ZZ"}, {"coeff": -0.5, "pauli": "II"}]}

Pauli labels use the letters I, X, Y, Z with the highest qubit leftmost, so
``"XZ"`` is X on qubit 1 and Z on qubit 0.  Coefficients are real numbers.

Graph::

    {"vertices": 3, "edges": [[0, 1], [1, 2], [0, 2]]}

State (one key)::

    {"bitstring": "01"}           basis state, highest qubit leftmost
    {"basis": 1}                  basis state by amplitude index
    {"uniform": true}             equal superposition
    {"eigenstate": 0}             eigenvector of the document's Hamiltonian,
                                  ascending energy (eigenphase for unitaries)
    {"amplitudes": [[re, im], ...]}   explicit vector, normalized on input

Unitary (one source)::

    {"hamiltonian": {...}, "dt": 0.5}     exp(-i H dt)
    {"phases": [0.375, 0.0]}              diagonal with entries exp(2 pi i theta)
    {"matrix": [[[re, im], ...], ...]}    explicit matrix

Ansatz::

    {"initial_state": {...}, "layers": [{"generator": "XY", "gates": [gate, ...]}, ...],
     "theta0": [0.1, ...]}

with gates ``{"kind": "H", "targets": [0], "controls": [], "angle": 0.3}``.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import Any

import numpy as np
import scipy.linalg

from eigenkit.hamiltonian import Graph, build_ising, exact_spectrum
from eigenkit.pauli import PauliString, PauliSum
from eigenkit.phase import PhaseUnitary
from eigenkit.statevector import Gate, StateVector
from eigenkit.variational import Ansatz

__all__ = [
    "ConfigError",
    "Document",
    "parse_ansatz",
    "parse_document",
    "parse_gate",
    "parse_graph",
    "parse_hamiltonian",
    "parse_state",
    "parse_unitary",
]


class ConfigError(ValueError):
    """Schema or range violation in a run document."""

    def __init__(self, path: str, message: str):
        self.path = path
        super().__init__(f"{path}: {message}" if path else message)


def _get(obj: Any, key: str, path: str, kind: type | tuple[type, ...] | None = None, required: bool = True):
    if not isinstance(obj, dict):
        raise ConfigError(path, f"expected an object, got {type(obj).__name__}")
    here = f"{path}.{key}" if path else key
    if key not in obj:
        if required:
            raise ConfigError(here, "missing required field")
        return None
    value = obj[key]
    if kind is not None and not _is_kind(value, kind):
        names = kind.__name__ if isinstance(kind, type) else " or ".join(k.__name__ for k in kind)
        raise ConfigError(here, f"expected {names}, got {type(value).__name__}")
    return value


def _is_kind(value, kind) -> bool:
    kinds = kind if isinstance(kind, tuple) else (kind,)
    if isinstance(value, bool) and bool not in kinds:
        return False
    if float in kinds and isinstance(value, int):
        return True
    return isinstance(value, kinds)


def _real(value, path: str) -> float:
    if not _is_kind(value, float) or not math.isfinite(value):
        raise ConfigError(path, f"expected a finite number, got {value!r}")
    return float(value)


def _int(value, path: str, minimum: int | None = None) -> int:
    if not _is_kind(value, int):
        raise ConfigError(path, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(path, f"must be at least {minimum}, got {value}")
    return int(value)


def _complex(value, path: str) -> complex:
    if _is_kind(value, float):
        return complex(_real(value, path))
    if isinstance(value, list) and len(value) == 2:
        return complex(_real(value[0], f"{path}[0]"), _real(value[1], f"{path}[1]"))
    raise ConfigError(path, f"expected a number or [re, im] pair, got {value!r}")


def _unknown_keys(obj: dict, allowed: set[str], path: str) -> None:
    extra = sorted(set(obj) - allowed)
    if extra:
        raise ConfigError(path, f"unknown field(s) {extra}")


def parse_hamiltonian(obj: Any, path: str = "hamiltonian") -> PauliSum:
    n = _int(_get(obj, "n_qubits", path), f"{path}.n_qubits", minimum=1)
    _unknown_keys(obj, {"n_qubits", "terms"}, path)
    terms = _get(obj, "terms", path, list)
    pairs = []
    for k, term in enumerate(terms):
        here = f"{path}.terms[{k}]"
        coeff = _real(_get(term, "coeff", here), f"{here}.coeff")
        label = _get(term, "pauli", here, str)
        _unknown_keys(term, {"coeff", "pauli"}, here)
        bad = sorted(set(label) - set("IXYZ"))
        if bad:
            raise ConfigError(f"{here}.pauli", f"unknown Pauli letter(s) {bad} in {label!r}")
        if len(label) != n:
            raise ConfigError(f"{here}.pauli", f"label {label!r} has length {len(label)}, expected {n}")
        pairs.append((coeff, PauliString.from_label(label)))
    return PauliSum(n, pairs)


def parse_graph(obj: Any, path: str = "graph") -> Graph:
    d = _int(_get(obj, "vertices", path), f"{path}.vertices", minimum=1)
    _unknown_keys(obj, {"vertices", "edges"}, path)
    edges = _get(obj, "edges", path, list)
    seen = set()
    for k, e in enumerate(edges):
        here = f"{path}.edges[{k}]"
        if not (isinstance(e, list) and len(e) == 2):
            raise ConfigError(here, f"edge must be a pair [i, j], got {e!r}")
        i, j = _int(e[0], f"{here}[0]", 0), _int(e[1], f"{here}[1]", 0)
        if i >= d or j >= d:
            raise ConfigError(here, f"vertex out of range for {d} vertices")
        if i == j:
            raise ConfigError(here, "self loops are not allowed")
        key = (min(i, j), max(i, j))
        if key in seen:
            raise ConfigError(here, f"duplicate edge {list(key)}")
        seen.add(key)
    return Graph.from_edges(d, edges)


def _eigenvectors_of_unitary(matrix: np.ndarray) -> np.ndarray:
    """Eigenvectors of a unitary, columns ordered by eigenphase in [0, 1)."""
    t, z = scipy.linalg.schur(matrix, output="complex")
    phases = (np.angle(np.diag(t)) / (2 * math.pi)) % 1.0
    return z[:, np.argsort(phases, kind="stable")]


def parse_state(
    obj: Any,
    n_qubits: int,
    path: str = "initial_state",
    hamiltonian: PauliSum | None = None,
    unitary: PhaseUnitary | None = None,
) -> StateVector:
    if not isinstance(obj, dict) or len(obj) != 1:
        raise ConfigError(path, "state must be an object with exactly one key")
    (key, value), = obj.items()
    here = f"{path}.{key}"
    dim = 1 << n_qubits
    if key == "bitstring":
        if not isinstance(value, str) or len(value) != n_qubits or set(value) - {"0", "1"}:
            raise ConfigError(here, f"expected a {n_qubits}-character 0/1 string, got {value!r}")
        return StateVector.from_bitstring(value)
    if key == "basis":
        k = _int(value, here, 0)
        if k >= dim:
            raise ConfigError(here, f"index {k} out of range for {n_qubits} qubits")
        return StateVector.basis(n_qubits, k)
    if key == "uniform":
        if value is not True:
            raise ConfigError(here, "expected true")
        return StateVector.uniform(n_qubits)
    if key == "eigenstate":
        k = _int(value, here, 0)
        if k >= dim:
            raise ConfigError(here, f"index {k} out of range for {n_qubits} qubits")
        if hamiltonian is not None:
            return exact_spectrum(hamiltonian).state(k)
        if unitary is not None:
            return StateVector(_eigenvectors_of_unitary(unitary.matrix)[:, k], normalize=True)
        raise ConfigError(here, "no Hamiltonian or unitary in this document to take eigenstates of")
    if key == "amplitudes":
        if not isinstance(value, list) or len(value) != dim:
            raise ConfigError(here, f"expected a list of {dim} amplitudes")
        amps = np.array([_complex(a, f"{here}[{i}]") for i, a in enumerate(value)])
        norm = np.linalg.norm(amps)
        if norm == 0:
            raise ConfigError(here, "amplitudes are all zero")
        return StateVector(amps / norm, normalize=True)
    raise ConfigError(path, f"unknown state form {key!r}")


def parse_unitary(obj: Any, path: str = "unitary") -> PhaseUnitary:
    if not isinstance(obj, dict):
        raise ConfigError(path, "expected an object")
    sources = [k for k in ("hamiltonian", "phases", "matrix") if k in obj]
    if len(sources) != 1:
        raise ConfigError(path, "give exactly one of 'hamiltonian' (with 'dt'), 'phases' or 'matrix'")
    src = sources[0]
    try:
        if src == "hamiltonian":
            _unknown_keys(obj, {"hamiltonian", "dt"}, path)
            h = parse_hamiltonian(obj["hamiltonian"], f"{path}.hamiltonian")
            dt = _real(_get(obj, "dt", path), f"{path}.dt")
            if dt == 0:
                raise ConfigError(f"{path}.dt", "must be nonzero")
            return PhaseUnitary.from_hamiltonian(h, dt)
        if src == "phases":
            _unknown_keys(obj, {"phases"}, path)
            phases = _get(obj, "phases", path, list)
            values = [_real(v, f"{path}.phases[{i}]") for i, v in enumerate(phases)]
            if len(values) < 2 or len(values) & (len(values) - 1):
                raise ConfigError(f"{path}.phases", "length must be a power of two, at least 2")
            return PhaseUnitary.from_phases(values)
        _unknown_keys(obj, {"matrix"}, path)
        rows = _get(obj, "matrix", path, list)
        m = np.array(
            [[_complex(v, f"{path}.matrix[{r}][{c}]") for c, v in enumerate(row)] for r, row in enumerate(rows)]
        )
        return PhaseUnitary.from_matrix(m)
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_gate(obj: Any, path: str) -> Gate:
    kind = _get(obj, "kind", path, str)
    _unknown_keys(obj, {"kind", "targets", "controls", "angle"}, path)
    targets = [_int(q, f"{path}.targets[{i}]", 0) for i, q in enumerate(_get(obj, "targets", path, list))]
    controls = [
        _int(q, f"{path}.controls[{i}]", 0) for i, q in enumerate(_get(obj, "controls", path, list, False) or [])
    ]
    angle = _get(obj, "angle", path, float, required=False)
    try:
        if kind in ("H", "X", "Y", "Z"):
            gate = Gate(kind, tuple(targets))
        elif kind == "PHASE":
            gate = Gate.phase(_real(angle, f"{path}.angle"), *targets)
        elif kind == "SWAP":
            gate = Gate.swap(*targets)
        else:
            raise ConfigError(f"{path}.kind", f"unsupported gate kind {kind!r}")
        return gate.controlled_by(*controls) if controls else gate
    except ConfigError:
        raise
    except (ValueError, TypeError) as exc:
        raise ConfigError(path, str(exc)) from exc


def parse_ansatz(obj: Any, n_qubits: int, path: str = "ansatz") -> tuple[Ansatz, np.ndarray]:
    _unknown_keys(obj, {"initial_state", "layers", "theta0"}, path)
    initial = parse_state(_get(obj, "initial_state", path), n_qubits, f"{path}.initial_state")
    layers = []
    for k, layer in enumerate(_get(obj, "layers", path, list)):
        here = f"{path}.layers[{k}]"
        _unknown_keys(layer, {"generator", "gates"}, here)
        label = _get(layer, "generator", here, str)
        if set(label) - set("IXYZ") or len(label) != n_qubits:
            raise ConfigError(f"{here}.generator", f"expected a {n_qubits}-letter Pauli label, got {label!r}")
        gates = tuple(
            parse_gate(g, f"{here}.gates[{i}]") for i, g in enumerate(_get(layer, "gates", here, list, False) or [])
        )
        for g in gates:
            if max(g.qubits) >= n_qubits:
                raise ConfigError(f"{here}.gates", f"gate touches qubit {max(g.qubits)} outside the register")
        layers.append((gates, PauliString.from_label(label)))
    theta_raw = _get(obj, "theta0", path, list, required=False)
    if theta_raw is None:
        theta0 = np.zeros(len(layers))
    else:
        theta0 = np.array([_real(v, f"{path}.theta0[{i}]") for i, v in enumerate(theta_raw)])
        if theta0.size != len(layers):
            raise ConfigError(f"{path}.theta0", f"expected {len(layers)} values, got {theta0.size}")
    return Ansatz(initial, tuple(layers)), theta0


@dataclass
class Document:
    """Parsed top-level JSON object with field-path-aware accessors."""

    raw: dict

    def has(self, key: str) -> bool:
        return key in self.raw

    def hamiltonian(self, key: str = "hamiltonian", allow_graph: bool = True) -> PauliSum:
        """The named Hamiltonian, or the Ising Hamiltonian of ``graph`` if absent."""
        if key in self.raw:
            return parse_hamiltonian(self.raw[key], key)
        if allow_graph and "graph" in self.raw:
            return build_ising(parse_graph(self.raw["graph"], "graph"))
        alt = " or 'graph'" if allow_graph else ""
        raise ConfigError(key, f"missing required field (give '{key}'{alt})")

    def graph(self) -> Graph:
        return parse_graph(_get(self.raw, "graph", ""), "graph")


def parse_document(text: str) -> Document:
    try:
        raw = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError("", f"invalid JSON at line {exc.lineno} column {exc.colno}: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError("", "top level must be a JSON object")
    return Document(raw)
