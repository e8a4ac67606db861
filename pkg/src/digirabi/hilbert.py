"""Operators and states on truncated qubit(s) x Fock-mode spaces.

Tensor ordering is fixed as ``qubit_1 x ... x qubit_N x mode``. The single
qubit basis is ``(|e>, |g>)`` so that ``sigma_z |e> = +|e>`` and
``sigma_+ |g> = |e>``. The mode keeps Fock levels ``|0> ... |M>``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from functools import reduce
from typing import Iterable, Sequence

import numpy as np

HERMITIAN_TOL = 1e-12
UNITARY_TOL = 1e-10
NORM_TOL = 1e-9
TRACE_TOL = 1e-9


class LayoutError(ValueError):
    """Raised when operators or states live on incompatible spaces."""


@dataclass(frozen=True)
class SpaceLayout:
    n_qubits: int
    fock_cutoff: int

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise LayoutError(f"n_qubits must be a positive integer, got {self.n_qubits!r}")
        if int(self.fock_cutoff) != self.fock_cutoff or self.fock_cutoff < 1:
            raise LayoutError(f"fock_cutoff must be >= 1, got {self.fock_cutoff!r}")

    @property
    def mode_dim(self) -> int:
        return self.fock_cutoff + 1

    @property
    def dim(self) -> int:
        return 2**self.n_qubits * self.mode_dim

    def factor_dims(self) -> list[int]:
        return [2] * self.n_qubits + [self.mode_dim]


@dataclass(frozen=True, eq=False)
class Operator:
    """Dense matrix on a :class:`SpaceLayout`.

    ``hermitian`` is set by the constructors when the matrix passes the
    Hermiticity check; it is never trusted blindly by :func:`propagator`.
    """

    layout: SpaceLayout
    matrix: np.ndarray
    hermitian: bool = False
    unitary: bool = False

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=complex)
        if m.shape != (self.layout.dim, self.layout.dim):
            raise LayoutError(f"matrix shape {m.shape} does not match layout dimension {self.layout.dim}")
        m.setflags(write=False)
        object.__setattr__(self, "matrix", m)
        if self.hermitian and not is_hermitian(m):
            raise ValueError("operator flagged Hermitian fails the Hermiticity check")
        if self.unitary and not is_unitary(m):
            raise ValueError("operator flagged unitary fails the unitarity check")

    @property
    def dag(self) -> "Operator":
        return Operator(self.layout, self.matrix.conj().T, hermitian=self.hermitian, unitary=self.unitary)

    def __matmul__(self, other: "Operator") -> "Operator":
        _check_same(self.layout, other.layout)
        return Operator(self.layout, self.matrix @ other.matrix)

    def __add__(self, other: "Operator") -> "Operator":
        return embed_and_add([(1.0, self), (1.0, other)])

    def __sub__(self, other: "Operator") -> "Operator":
        return embed_and_add([(1.0, self), (-1.0, other)])

    def __mul__(self, c: complex) -> "Operator":
        return embed_and_add([(c, self)])

    __rmul__ = __mul__


@dataclass(frozen=True, eq=False)
class QuantumState:
    layout: SpaceLayout
    kind: str
    data: np.ndarray = field(repr=False)

    def __post_init__(self):
        d = np.asarray(self.data, dtype=complex)
        n = self.layout.dim
        if self.kind == "pure":
            if d.shape != (n,):
                raise LayoutError(f"pure state must have shape ({n},), got {d.shape}")
            if abs(np.linalg.norm(d) - 1.0) >= NORM_TOL:
                raise ValueError(f"state vector is not normalized (norm={np.linalg.norm(d):.12g})")
        elif self.kind == "density":
            if d.shape != (n, n):
                raise LayoutError(f"density matrix must have shape ({n}, {n}), got {d.shape}")
            if abs(np.trace(d) - 1.0) >= TRACE_TOL:
                raise ValueError(f"density matrix trace is {np.trace(d).real:.12g}")
            if np.max(np.abs(d - d.conj().T)) >= 1e-10:
                raise ValueError("density matrix is not Hermitian")
            if np.linalg.eigvalsh(d).min() <= -1e-8:
                raise ValueError("density matrix has a negative eigenvalue")
        else:
            raise ValueError(f"unknown state kind {self.kind!r}")
        d.setflags(write=False)
        object.__setattr__(self, "data", d)

    @classmethod
    def pure(cls, layout: SpaceLayout, vec) -> "QuantumState":
        return cls(layout, "pure", vec)

    @classmethod
    def density(cls, layout: SpaceLayout, rho) -> "QuantumState":
        return cls(layout, "density", rho)

    def to_density(self) -> "QuantumState":
        if self.kind == "density":
            return self
        return QuantumState(self.layout, "density", np.outer(self.data, self.data.conj()))


def _check_same(a: SpaceLayout, b: SpaceLayout):
    if a != b:
        raise LayoutError(f"layout mismatch: {a} vs {b}")


def is_hermitian(m: np.ndarray, tol: float = HERMITIAN_TOL) -> bool:
    return bool(np.max(np.abs(m - m.conj().T), initial=0.0) < tol)


def is_unitary(m: np.ndarray, tol: float = UNITARY_TOL) -> bool:
    return bool(np.max(np.abs(m.conj().T @ m - np.eye(m.shape[0])), initial=0.0) < tol)


def kron_all(factors: Sequence[np.ndarray]) -> np.ndarray:
    return reduce(np.kron, factors)


def _embed(layout: SpaceLayout, slot: int, local: np.ndarray) -> np.ndarray:
    factors = [np.eye(d, dtype=complex) for d in layout.factor_dims()]
    factors[slot] = np.asarray(local, dtype=complex)
    return kron_all(factors)


def mode_destroy(fock_cutoff: int) -> np.ndarray:
    """Bare ``(M+1) x (M+1)`` annihilation matrix."""
    return np.diag(np.sqrt(np.arange(1, fock_cutoff + 1, dtype=float)), k=1).astype(complex)


_PAULI = {
    "x": np.array([[0, 1], [1, 0]], dtype=complex),
    "y": np.array([[0, -1j], [1j, 0]], dtype=complex),
    "z": np.array([[1, 0], [0, -1]], dtype=complex),
    # basis (|e>, |g>): sigma_+ |g> = |e>
    "plus": np.array([[0, 1], [0, 0]], dtype=complex),
    "minus": np.array([[0, 0], [1, 0]], dtype=complex),
}


def make_destroy(layout: SpaceLayout) -> Operator:
    return Operator(layout, _embed(layout, layout.n_qubits, mode_destroy(layout.fock_cutoff)))


def make_number(layout: SpaceLayout) -> Operator:
    n = np.diag(np.arange(layout.mode_dim, dtype=float))
    return Operator(layout, _embed(layout, layout.n_qubits, n), hermitian=True)


def make_identity(layout: SpaceLayout) -> Operator:
    return Operator(layout, np.eye(layout.dim, dtype=complex), hermitian=True, unitary=True)


def make_pauli(layout: SpaceLayout, qubit_index: int, axis: str) -> Operator:
    if not 0 <= qubit_index < layout.n_qubits:
        raise IndexError(f"qubit index {qubit_index} out of range for {layout.n_qubits} qubit(s)")
    try:
        local = _PAULI[axis]
    except KeyError:
        raise ValueError(f"unknown Pauli axis {axis!r}") from None
    return Operator(layout, _embed(layout, qubit_index, local), hermitian=axis in ("x", "y", "z"))


def collective(layout: SpaceLayout, axis: str) -> Operator:
    """Sum of ``make_pauli(layout, j, axis)`` over all qubits."""
    return embed_and_add([(1.0, make_pauli(layout, j, axis)) for j in range(layout.n_qubits)])


def embed_and_add(terms: Iterable[tuple[complex, Operator]]) -> Operator:
    terms = list(terms)
    if not terms:
        raise ValueError("embed_and_add needs at least one term")
    layout = terms[0][1].layout
    total = np.zeros((layout.dim, layout.dim), dtype=complex)
    for c, op in terms:
        _check_same(layout, op.layout)
        total += c * op.matrix
    return Operator(layout, total, hermitian=is_hermitian(total))


def commutator(a: Operator, b: Operator) -> Operator:
    _check_same(a.layout, b.layout)
    return Operator(a.layout, a.matrix @ b.matrix - b.matrix @ a.matrix)


class EigenPropagator:
    """Reusable ``exp(-i H t)`` from one Hermitian eigendecomposition."""

    def __init__(self, H: Operator):
        if not H.hermitian:
            raise ValueError("propagator requires a Hermitian-flagged operator")
        self.layout = H.layout
        self.energies, self.vectors = np.linalg.eigh(H.matrix)

    def matrix(self, t: float) -> np.ndarray:
        phases = np.exp(-1j * self.energies * t)
        return (self.vectors * phases) @ self.vectors.conj().T

    def __call__(self, t: float) -> Operator:
        return Operator(self.layout, self.matrix(t), unitary=True)

    def evolve(self, psi: np.ndarray, times: np.ndarray) -> np.ndarray:
        """Rows are ``exp(-i H t_k) psi``."""
        coeffs = self.vectors.conj().T @ psi
        phases = np.exp(-1j * np.outer(times, self.energies))
        return (phases * coeffs) @ self.vectors.T


def propagator(H: Operator, duration: float) -> Operator:
    return EigenPropagator(H)(duration)


def expectation(state: QuantumState, A: Operator) -> complex:
    _check_same(state.layout, A.layout)
    if state.kind == "pure":
        return complex(np.vdot(state.data, A.matrix @ state.data))
    return complex(np.trace(state.data @ A.matrix))


def basis_state(layout: SpaceLayout, qubits: str | Sequence[str], fock: int = 0) -> QuantumState:
    """Product basis state, e.g. ``basis_state(layout, "eg", 0)`` for ``|e,g,0>``."""
    qubits = list(qubits)
    if len(qubits) != layout.n_qubits:
        raise LayoutError(f"expected {layout.n_qubits} qubit labels, got {len(qubits)}")
    if not 0 <= fock <= layout.fock_cutoff:
        raise ValueError(f"Fock level {fock} outside 0..{layout.fock_cutoff}")
    local = {"e": np.array([1, 0], dtype=complex), "g": np.array([0, 1], dtype=complex)}
    mode = np.zeros(layout.mode_dim, dtype=complex)
    mode[fock] = 1.0
    try:
        factors = [local[q] for q in qubits]
    except KeyError as exc:
        raise ValueError(f"qubit labels must be 'e' or 'g', got {exc.args[0]!r}") from None
    return QuantumState.pure(layout, kron_all(factors + [mode]))


def top_fock_population(layout: SpaceLayout, data: np.ndarray) -> float:
    """Population of ``|M>`` for a state vector or density matrix."""
    d = layout.mode_dim
    if data.ndim == 1:
        amps = data.reshape(-1, d)[:, -1]
        return float(np.sum(np.abs(amps) ** 2))
    diag = np.real(np.diagonal(data)).reshape(-1, d)
    return float(np.sum(diag[:, -1]))
