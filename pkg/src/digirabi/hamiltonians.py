"""Hamiltonian builders and device <-> model parameter maps.

All frequencies are angular (rad/ns). The digital protocol splits the Rabi
(or Dicke) Hamiltonian into a Jaynes-Cummings part and an anti-Jaynes-Cummings
part; the latter is realized on hardware as a JC evolution sandwiched between
two pi rotations about x.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Union

import numpy as np

from .hilbert import (
    LayoutError,
    Operator,
    SpaceLayout,
    embed_and_add,
    make_destroy,
    make_number,
    make_pauli,
)

Split = Union[str, float]


@dataclass(frozen=True)
class PhysicalParams:
    """Device-frame frequencies (rad/ns)."""

    omega_r: float
    omega_q1: float
    omega_q2: float
    g: float
    omega_tilde: float

    def __post_init__(self):
        if not self.g > 0:
            raise ValueError(f"coupling g must be positive, got {self.g}")
        for name in ("omega_r", "omega_q1", "omega_q2", "omega_tilde"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative, got {getattr(self, name)}")

    @property
    def delta_r(self) -> float:
        return self.omega_r - self.omega_tilde

    def delta_q(self, step: int) -> float:
        if step == 1:
            return (self.omega_q1 - self.omega_tilde) / 2
        if step == 2:
            return (self.omega_q2 - self.omega_tilde) / 2
        raise ValueError(f"step must be 1 or 2, got {step}")


@dataclass(frozen=True)
class RabiParams:
    """Simulated quantum Rabi model frequencies (rad/ns)."""

    omega_r_R: float
    omega_q_R: float
    g_R: float

    def __post_init__(self):
        if not self.g_R > 0:
            raise ValueError(f"g_R must be positive, got {self.g_R}")
        for name in ("omega_r_R", "omega_q_R"):
            if getattr(self, name) < 0:
                warnings.warn(f"negative simulated frequency {name}={getattr(self, name)}", stacklevel=3)


@dataclass(frozen=True)
class DickeParams:
    rabi: RabiParams
    n_qubits: int

    def __post_init__(self):
        if int(self.n_qubits) != self.n_qubits or self.n_qubits < 1:
            raise ValueError(f"n_qubits must be a positive integer, got {self.n_qubits}")


@dataclass(frozen=True)
class DiracParams:
    mass_energy: float
    light_speed: float

    def __post_init__(self):
        if self.mass_energy < 0:
            raise ValueError("mass_energy must be non-negative")
        if not self.light_speed > 0:
            raise ValueError("light_speed must be positive")

    def to_rabi(self) -> RabiParams:
        """Rabi parameters whose dynamics reproduce this Dirac Hamiltonian."""
        return RabiParams(0.0, 2.0 * self.mass_energy, self.light_speed / math.sqrt(2.0))


@dataclass(frozen=True)
class StepSpec:
    """One Trotter step Hamiltonian in rotating-frame form.

    ``native`` is the JC Hamiltonian the hardware runs during the step,
    ``delta_r a^dag a + delta_q sum_j sz_j + g sum_j (a^dag s-_j + a s+_j)``.
    With ``rotated=True`` the step is bracketed by global pi pulses, so its
    effective Hamiltonian is the anti-JC form with ``-delta_q``.
    """

    delta_r: float
    delta_q: float
    g: float
    rotated: bool
    n_qubits: int = 1

    def native(self, layout: SpaceLayout) -> Operator:
        _require_qubits(layout, self.n_qubits)
        return _collective_jc(layout, self.delta_r, self.delta_q, self.g, counter=False)

    def effective(self, layout: SpaceLayout) -> Operator:
        _require_qubits(layout, self.n_qubits)
        if self.rotated:
            return _collective_jc(layout, self.delta_r, -self.delta_q, self.g, counter=True)
        return self.native(layout)


def _require_qubits(layout: SpaceLayout, n: int):
    if layout.n_qubits != n:
        raise LayoutError(f"expected a {n}-qubit layout, got {layout.n_qubits}")


def _single_qubit(layout: SpaceLayout):
    if layout.n_qubits != 1:
        raise LayoutError("this builder needs a single-qubit layout; use the Tavis-Cummings/Dicke builders")


def _collective_jc(layout: SpaceLayout, boson: float, qubit: float, g: float, counter: bool) -> Operator:
    a = make_destroy(layout)
    terms = [(boson, make_number(layout))]
    for j in range(layout.n_qubits):
        sp, sm = make_pauli(layout, j, "plus"), make_pauli(layout, j, "minus")
        terms.append((qubit, make_pauli(layout, j, "z")))
        if counter:
            terms += [(g, a.dag @ sp), (g, a @ sm)]
        else:
            terms += [(g, a.dag @ sm), (g, a @ sp)]
    return embed_and_add(terms)


def build_jc_lab(p: PhysicalParams, layout: SpaceLayout) -> Operator:
    _single_qubit(layout)
    return _collective_jc(layout, p.omega_r, p.omega_q1 / 2, p.g, counter=False)


def build_jc_rotating(p: PhysicalParams, step: int, layout: SpaceLayout) -> Operator:
    _single_qubit(layout)
    return _collective_jc(layout, p.delta_r, p.delta_q(step), p.g, counter=False)


def build_anti_jc_rotating(p: PhysicalParams, layout: SpaceLayout) -> Operator:
    _single_qubit(layout)
    return _collective_jc(layout, p.delta_r, -p.delta_q(2), p.g, counter=True)


def build_dicke(dp: DickeParams, layout: SpaceLayout) -> Operator:
    if layout.n_qubits != dp.n_qubits:
        raise LayoutError(f"layout has {layout.n_qubits} qubits but DickeParams has {dp.n_qubits}")
    rp = dp.rabi
    a = make_destroy(layout)
    field_x = a.matrix + a.matrix.conj().T
    terms = [(rp.omega_r_R, make_number(layout))]
    for j in range(layout.n_qubits):
        sx = make_pauli(layout, j, "x")
        terms.append((rp.omega_q_R / 2, make_pauli(layout, j, "z")))
        terms.append((rp.g_R, Operator(layout, sx.matrix @ field_x)))
    return embed_and_add(terms)


def build_rabi(rp: RabiParams, layout: SpaceLayout) -> Operator:
    _single_qubit(layout)
    return build_dicke(DickeParams(rp, 1), layout)


def qubit_split(omega_q_R: float, split: Split = "symmetric") -> tuple[float, float]:
    """Rotating-frame qubit frequencies ``(w1, w2)`` with ``w1 - w2 = omega_q_R``.

    ``w_i = omega_q_i - omega_tilde = 2 * delta_q_i``. ``"symmetric"`` centres
    the pair on the frame, ``"second-resonant"`` tunes step 2 onto the frame
    (``delta_q_2 = 0``); a float sets ``w2`` directly.
    """
    if split == "symmetric":
        w2 = -omega_q_R / 2
    elif split == "second-resonant":
        w2 = 0.0
    elif isinstance(split, (int, float)) and not isinstance(split, bool):
        w2 = float(split)
    else:
        raise ValueError(f"unknown qubit split {split!r}")
    return w2 + omega_q_R, w2


def build_tavis_cummings_steps(dp: DickeParams, split: Split = "symmetric") -> tuple[StepSpec, StepSpec]:
    rp = dp.rabi
    w1, w2 = qubit_split(rp.omega_q_R, split)
    half_r = rp.omega_r_R / 2
    return (
        StepSpec(half_r, w1 / 2, rp.g_R, rotated=False, n_qubits=dp.n_qubits),
        StepSpec(half_r, w2 / 2, rp.g_R, rotated=True, n_qubits=dp.n_qubits),
    )


def decompose_rabi(rp: RabiParams, split: Split = "symmetric") -> tuple[StepSpec, StepSpec]:
    return build_tavis_cummings_steps(DickeParams(rp, 1), split)


def build_dirac(dirac: DiracParams, layout: SpaceLayout) -> Operator:
    """``mc^2 sz + c p sx`` with ``p = i (a^dag - a) / sqrt 2``.

    Equal to ``build_rabi(dirac.to_rabi())`` conjugated by the mode phase
    rotation ``R = exp(-i pi/2 a^dag a)``, i.e. ``R^dag H_rabi R``.
    """
    _single_qubit(layout)
    a = make_destroy(layout).matrix
    p = 1j * (a.conj().T - a) / math.sqrt(2.0)
    sx = make_pauli(layout, 0, "x").matrix
    return embed_and_add([
        (dirac.mass_energy, make_pauli(layout, 0, "z")),
        (dirac.light_speed, Operator(layout, sx @ p)),
    ])


def mode_phase_rotation(layout: SpaceLayout, theta: float) -> Operator:
    """``exp(-i theta a^dag a)``; maps ``a -> a e^{-i theta}`` under ``R^dag a R``."""
    n = np.real(np.diagonal(make_number(layout).matrix))
    return Operator(layout, np.diag(np.exp(-1j * theta * n)), unitary=True)


def global_pi_pulse(layout: SpaceLayout) -> Operator:
    """``exp(-i pi/2 sum_j sx_j) = prod_j (-i sx_j)``."""
    u = np.eye(layout.dim, dtype=complex)
    for j in range(layout.n_qubits):
        u = u @ (-1j * make_pauli(layout, j, "x").matrix)
    return Operator(layout, u, unitary=True)


def map_physical_to_simulated(p: PhysicalParams) -> RabiParams:
    omega_r_R = 2.0 * (p.omega_r - p.omega_tilde)
    if omega_r_R < 0:
        warnings.warn("rotating frame above the resonator: negative simulated boson frequency", stacklevel=2)
    return RabiParams(omega_r_R, p.omega_q1 - p.omega_q2, p.g)


def map_simulated_to_physical(rp: RabiParams, omega_r: float, g: float, split: Split = "symmetric") -> PhysicalParams:
    if g != rp.g_R:
        raise ValueError(f"coupling is not tunable: device g={g} but simulated g_R={rp.g_R}")
    omega_tilde = omega_r - rp.omega_r_R / 2
    _, w2 = qubit_split(rp.omega_q_R, split)
    omega_q2 = omega_tilde + w2
    return PhysicalParams(
        omega_r=omega_r,
        omega_q1=omega_q2 + rp.omega_q_R,
        omega_q2=omega_q2,
        g=g,
        omega_tilde=omega_tilde,
    )
