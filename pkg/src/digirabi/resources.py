"""Resource bounds for the digital Dicke simulation.

The gate-count bound follows the product-formula analysis of Berry et al.
and Wiebe et al. for a Hamiltonian split into exponentiable pieces, with the
norm of the truncated Dicke Hamiltonian bounded term by term.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .hamiltonians import DickeParams
from .hilbert import Operator, commutator


@dataclass(frozen=True)
class ResourceQuery:
    dicke: DickeParams
    M: int
    t: float
    epsilon: float
    k: int = 1

    def __post_init__(self):
        if not self.epsilon > 0:
            raise ValueError(f"error budget epsilon must be positive, got {self.epsilon}")
        if int(self.k) != self.k or self.k < 1:
            raise ValueError(f"fractal depth k must be a positive integer, got {self.k}")
        if self.t < 0:
            raise ValueError(f"time must be non-negative, got {self.t}")
        if int(self.M) != self.M or self.M < 0:
            raise ValueError(f"Fock truncation M must be a non-negative integer, got {self.M}")


def dicke_norm_bound(q: ResourceQuery) -> float:
    """``omega_r M + N (omega_q + 2 |g| sqrt(M + 1))``."""
    rp = q.dicke.rabi
    return rp.omega_r_R * q.M + q.dicke.n_qubits * (rp.omega_q_R + 2 * abs(rp.g_R) * math.sqrt(q.M + 1))


def gate_count_bound(q: ResourceQuery) -> float:
    """Upper bound on gates for error ``epsilon`` at time ``t``; not rounded."""
    k = q.k
    scaled = 2.0 * q.t * dicke_norm_bound(q)
    return 2.0 * 5.0 ** (2 * k) * scaled ** (1.0 + 1.0 / (2 * k)) / q.epsilon ** (1.0 / (2 * k))


def spectral_norm(m: np.ndarray) -> float:
    return float(np.linalg.norm(m, 2))


def trotter_error_estimate(H1: Operator, H2: Operator, t: float, n: int) -> float:
    """First-order product-formula bound ``t^2 / (2 n) * ||[H1, H2]||_2``."""
    if not (H1.hermitian and H2.hermitian):
        raise ValueError("trotter_error_estimate needs Hermitian operators")
    return t**2 / (2 * n) * spectral_norm(commutator(H1, H2).matrix)
