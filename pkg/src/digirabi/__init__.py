"""Analog-digital simulation of the quantum Rabi and Dicke models.

Builds the circuit-QED Hamiltonians on truncated Fock x qubit spaces, runs the
Trotterized Jaynes-Cummings + qubit-flip protocol (ideal or under Lindblad
noise) and evaluates fidelities, observables and resource bounds.
"""

__version__ = "0.1.0"
