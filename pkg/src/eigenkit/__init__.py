"""Dense statevector toolkit for preparing and detecting Hamiltonian eigenstates.

Submodules:

* :mod:`eigenkit.pauli` - Pauli strings and sums
* :mod:`eigenkit.statevector` - states, gates, measurement, seeded RNG
* :mod:`eigenkit.hamiltonian` - Ising/MaxCut builders and the exact spectrum
* :mod:`eigenkit.trotter` - product formulas
* :mod:`eigenkit.adiabatic` - interpolated evolution, gap tracking, time bound
* :mod:`eigenkit.fermion` - ladder operators, Jordan-Wigner, Thouless and UCC states
* :mod:`eigenkit.variational` - ansatz states, parameter shift, QAOA, MaxCut
* :mod:`eigenkit.phase` - QFT, phase estimation and the rodeo algorithm
* :mod:`eigenkit.cli` - command-line interface
"""

from eigenkit.hamiltonian import Graph, build_ising, exact_spectrum, transverse_field
from eigenkit.pauli import PauliString, PauliSum
from eigenkit.statevector import Gate, StateVector, make_rng

__all__ = [
    "Gate",
    "Graph",
    "PauliString",
    "PauliSum",
    "StateVector",
    "build_ising",
    "exact_spectrum",
    "make_rng",
    "transverse_field",
]

__version__ = "0.1.0"
