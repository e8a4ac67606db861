"""Exact, digital (Trotterized) and dissipative time evolution.

A Trotter step of the protocol is

    [JC step 1, t/n] -> [pi pulse] -> [JC step 2, t/n] -> [pi pulse]

Pulses rotate every qubit by pi about x. In ``ideal`` mode they are the
instantaneous unitary ``prod_j (-i sx_j)``; in ``pulsed`` mode they last
``T_f`` and are driven by ``H_f = f(t) sum_j sx_j`` with ``int f = pi/2``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np
from scipy.integrate import quad

from .hamiltonians import (
    DickeParams,
    DiracParams,
    PhysicalParams,
    RabiParams,
    Split,
    StepSpec,
    build_tavis_cummings_steps,
    global_pi_pulse,
)
from .hilbert import (
    EigenPropagator,
    LayoutError,
    Operator,
    QuantumState,
    SpaceLayout,
    collective,
    make_destroy,
    make_number,
    make_pauli,
    top_fock_population,
)
from .observables import measure_series

TRUNCATION_THRESHOLD = 1e-4
PULSE_AREA_TOL = 1e-9


class IntegratorError(RuntimeError):
    def __init__(self, message: str, segment: int | None = None):
        super().__init__(message if segment is None else f"segment {segment}: {message}")
        self.segment = segment


class PulseCalibrationError(ValueError):
    pass


@dataclass(frozen=True)
class PulseEnvelope:
    """Flip-pulse drive ``f(t)`` on ``[0, duration]``.

    ``"sin2"``: ``scale * (pi / T) * sin^2(pi t / T)``.
    ``"rect"``: ``scale * pi / (2 T)``.
    Both have area ``scale * pi / 2``.
    """

    duration: float
    shape: str = "sin2"
    scale: float = 1.0

    def __post_init__(self):
        if not self.duration > 0:
            raise ValueError("pulse duration must be positive")
        if self.shape not in ("sin2", "rect"):
            raise ValueError(f"unknown pulse shape {self.shape!r}")

    def __call__(self, t):
        T = self.duration
        if self.shape == "sin2":
            return self.scale * (math.pi / T) * np.sin(math.pi * np.asarray(t) / T) ** 2
        return self.scale * (math.pi / (2 * T)) * np.ones_like(np.asarray(t, dtype=float))

    @property
    def peak(self) -> float:
        T = self.duration
        return self.scale * (math.pi / T if self.shape == "sin2" else math.pi / (2 * T))


def pulse_area(env: PulseEnvelope) -> float:
    area, _ = quad(env, 0.0, env.duration, epsabs=1e-13, epsrel=1e-13)
    return area


def pulse_unitary_check(env: PulseEnvelope) -> float:
    """Integrated rotation angle of ``env``; raises unless it equals pi/2."""
    angle = pulse_area(env)
    if abs(angle - math.pi / 2) > PULSE_AREA_TOL:
        raise PulseCalibrationError(f"pulse area {angle:.12g} differs from pi/2")
    return angle


@dataclass(frozen=True)
class NoiseParams:
    kappa: float = 0.0
    gamma_phi: float = 0.0
    gamma_minus: float = 0.0

    def __post_init__(self):
        for name in ("kappa", "gamma_phi", "gamma_minus"):
            if getattr(self, name) < 0:
                raise ValueError(f"{name} must be non-negative")

    @property
    def is_zero(self) -> bool:
        return self.kappa == 0 and self.gamma_phi == 0 and self.gamma_minus == 0


@dataclass(frozen=True, eq=False)
class HamiltonianSegment:
    H: Operator
    duration: float
    step: int
    label: str


@dataclass(frozen=True, eq=False)
class PulseSegment:
    duration: float
    envelope: Optional[PulseEnvelope]
    step: int
    background: Optional[Operator] = None


Segment = Union[HamiltonianSegment, PulseSegment]


@dataclass(frozen=True, eq=False)
class ProtocolSchedule:
    layout: SpaceLayout
    segments: tuple
    simulated_time: float
    n_steps: int
    mode: str
    steps: tuple

    @property
    def protocol_time(self) -> float:
        return float(sum(s.duration for s in self.segments))


@dataclass(eq=False)
class Trajectory:
    """Time grid plus named observable series.

    ``times`` is the simulated time for unitary runs. Lindblad runs sample
    inside pulses, where simulated time stands still, so their grid is the
    protocol (wall-clock) time and the simulated time is the ``t_sim``
    series. Each of the two JC segments of a Trotter step advances the
    simulated time by half its duration, since ``H1 + H2`` is the target.
    """

    times: np.ndarray
    observables: dict
    layout: SpaceLayout
    final_state: QuantumState
    truncation: float
    states: Optional[np.ndarray] = None
    protocol_times: Optional[np.ndarray] = None
    threshold: float = TRUNCATION_THRESHOLD
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        for name, s in self.observables.items():
            if len(s) != len(self.times):
                raise ValueError(f"series {name!r} has length {len(s)}, grid has {len(self.times)}")

    @property
    def truncation_flag(self) -> bool:
        return self.truncation > self.threshold

    def final(self, name: str) -> float:
        return float(self.observables[name][-1])


def _as_steps(params, split: Split) -> tuple[StepSpec, StepSpec]:
    if isinstance(params, tuple) and len(params) == 2 and all(isinstance(s, StepSpec) for s in params):
        return params
    if isinstance(params, PhysicalParams):
        return (
            StepSpec(params.delta_r, params.delta_q(1), params.g, rotated=False),
            StepSpec(params.delta_r, params.delta_q(2), params.g, rotated=True),
        )
    if isinstance(params, DiracParams):
        params = params.to_rabi()
    if isinstance(params, RabiParams):
        params = DickeParams(params, 1)
    if isinstance(params, DickeParams):
        return build_tavis_cummings_steps(params, split)
    raise TypeError(f"cannot build a protocol from {type(params).__name__}")


def build_schedule(
    params,
    t: float,
    n: int,
    mode: str = "ideal",
    *,
    layout: SpaceLayout,
    envelope: Optional[PulseEnvelope] = None,
    split: Split = "symmetric",
    pulse_with_jc: bool = False,
) -> ProtocolSchedule:
    """Digital protocol reaching simulated time ``t`` in ``n`` Trotter steps."""
    if not t > 0:
        raise ValueError(f"simulated time must be positive, got {t}")
    if int(n) != n or n < 1:
        raise ValueError(f"number of steps must be a positive integer, got {n}")
    if mode not in ("ideal", "pulsed"):
        raise ValueError(f"mode must be 'ideal' or 'pulsed', got {mode!r}")
    steps = _as_steps(params, split)
    if steps[0].n_qubits != layout.n_qubits:
        raise LayoutError(f"protocol is for {steps[0].n_qubits} qubit(s), layout has {layout.n_qubits}")
    h1, h2 = steps[0].native(layout), steps[1].native(layout)
    dt = t / n
    if mode == "pulsed":
        envelope = envelope or PulseEnvelope(10.0)
        pulse_unitary_check(envelope)
        t_f = envelope.duration
    else:
        envelope, t_f = None, 0.0
    background = h2 if (pulse_with_jc and mode == "pulsed") else None
    segs: list[Segment] = []
    for k in range(n):
        segs.append(HamiltonianSegment(h1, dt, k, "jc1"))
        segs.append(PulseSegment(t_f, envelope, k, background))
        segs.append(HamiltonianSegment(h2, dt, k, "jc2"))
        segs.append(PulseSegment(t_f, envelope, k, background))
    return ProtocolSchedule(layout, tuple(segs), float(t), int(n), mode, steps)


def _reference_states(reference: Optional[Operator], psi0: np.ndarray, t_sim: np.ndarray):
    if reference is None:
        return None
    return EigenPropagator(reference).evolve(psi0, t_sim)


def evolve_exact(H: Operator, psi0: QuantumState, times, store_states: bool = False) -> Trajectory:
    """``exp(-i H t) psi0`` on a grid via one eigendecomposition.

    The ``overlap0`` series is ``|<psi0|psi(t)>|^2``.
    """
    if psi0.kind != "pure":
        raise ValueError("evolve_exact needs a pure initial state")
    if H.layout != psi0.layout:
        raise LayoutError("Hamiltonian and state layouts differ")
    times = np.asarray(times, dtype=float)
    psis = EigenPropagator(H).evolve(psi0.data, times)
    obs = measure_series(H.layout, psis, "pure")
    obs["overlap0"] = np.abs(psis @ psi0.data.conj()) ** 2
    trunc = max(top_fock_population(H.layout, p) for p in psis)
    return Trajectory(
        times, obs, H.layout, QuantumState.pure(H.layout, psis[-1]), trunc,
        states=psis if store_states else None,
    )


def _pulse_propagator(layout: SpaceLayout, angle: float) -> np.ndarray:
    # exp(-i angle sum_j sx_j) = prod_j (cos(angle) - i sin(angle) sx_j)
    u = np.eye(layout.dim, dtype=complex)
    eye = np.eye(layout.dim)
    for j in range(layout.n_qubits):
        sx = make_pauli(layout, j, "x").matrix
        u = u @ (math.cos(angle) * eye - 1j * math.sin(angle) * sx)
    return u


def _rk4_pure(psi, hamiltonian: Callable[[float], np.ndarray], duration: float, h_max: float):
    n_sub = max(1, math.ceil(duration / h_max))
    h = duration / n_sub
    t = 0.0
    for _ in range(n_sub):
        k1 = -1j * (hamiltonian(t) @ psi)
        k2 = -1j * (hamiltonian(t + h / 2) @ (psi + h / 2 * k1))
        k3 = -1j * (hamiltonian(t + h / 2) @ (psi + h / 2 * k2))
        k4 = -1j * (hamiltonian(t + h) @ (psi + h * k3))
        psi = psi + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
    return psi


def _spectral_radius(H: Operator) -> float:
    return float(np.max(np.abs(np.linalg.eigvalsh(H.matrix))))


def _step_size(seg: Segment, layout: SpaceLayout, radius_cache: dict) -> float:
    if isinstance(seg, HamiltonianSegment):
        key = id(seg.H)
        if key not in radius_cache:
            radius_cache[key] = _spectral_radius(seg.H)
        omega_max = radius_cache[key]
        limits = [seg.duration / 200]
    else:
        omega_max = seg.envelope.peak * layout.n_qubits
        if seg.background is not None:
            key = id(seg.background)
            if key not in radius_cache:
                radius_cache[key] = _spectral_radius(seg.background)
            omega_max += radius_cache[key]
        limits = [seg.duration / 50]
    if omega_max > 0:
        limits.append(0.01 / omega_max)
    return min(limits)


class _UnitaryStepper:
    """Applies schedule segments to a state vector, caching propagators."""

    def __init__(self, sched: ProtocolSchedule):
        self.sched = sched
        self._eig: dict[int, EigenPropagator] = {}
        self._unit: dict[tuple, np.ndarray] = {}
        self._radius: dict[int, float] = {}
        self._sx = collective(sched.layout, "x").matrix

    def _hamiltonian_u(self, seg: HamiltonianSegment) -> np.ndarray:
        key = (id(seg.H), seg.duration)
        if key not in self._unit:
            if id(seg.H) not in self._eig:
                self._eig[id(seg.H)] = EigenPropagator(seg.H)
            self._unit[key] = self._eig[id(seg.H)].matrix(seg.duration)
        return self._unit[key]

    def _pulse_u(self, seg: PulseSegment) -> Optional[np.ndarray]:
        if seg.background is not None:
            return None
        key = ("pulse", seg.envelope)
        if key not in self._unit:
            if seg.envelope is None:
                self._unit[key] = global_pi_pulse(self.sched.layout).matrix
            else:
                self._unit[key] = _pulse_propagator(self.sched.layout, pulse_area(seg.envelope))
        return self._unit[key]

    def apply(self, seg: Segment, psi: np.ndarray) -> np.ndarray:
        if isinstance(seg, HamiltonianSegment):
            return self._hamiltonian_u(seg) @ psi
        u = self._pulse_u(seg)
        if u is not None:
            return u @ psi
        bg, env, sx = seg.background.matrix, seg.envelope, self._sx
        h_max = _step_size(seg, self.sched.layout, self._radius)
        return _rk4_pure(psi, lambda t: bg + env(t) * sx, seg.duration, h_max)


def run_schedule_unitary(
    s: ProtocolSchedule,
    psi0: QuantumState,
    reference: Optional[Operator] = None,
    store_states: bool = False,
) -> Trajectory:
    """Apply the schedule to a pure state, recording after every Trotter step.

    ``reference`` (e.g. the Rabi Hamiltonian) adds a ``fidelity`` series
    against exact evolution to the same simulated time.
    """
    if psi0.kind != "pure":
        raise ValueError("run_schedule_unitary needs a pure state; use run_schedule_lindblad for noise")
    if psi0.layout != s.layout:
        raise LayoutError("schedule and state layouts differ")
    stepper = _UnitaryStepper(s)
    psi = psi0.data.copy()
    record = [psi.copy()]
    t_proto = [0.0]
    elapsed = 0.0
    for i, seg in enumerate(s.segments):
        psi = stepper.apply(seg, psi)
        elapsed += seg.duration
        if i % 4 == 3:
            norm = np.linalg.norm(psi)
            if abs(norm - 1.0) > 1e-9:
                raise IntegratorError(f"norm drifted to {norm:.12g}", i)
            record.append(psi.copy())
            t_proto.append(elapsed)
    psis = np.array(record)
    t_sim = np.arange(s.n_steps + 1) * (s.simulated_time / s.n_steps)
    t_sim[-1] = s.simulated_time
    obs = measure_series(s.layout, psis, "pure", _reference_states(reference, psi0.data, t_sim))
    trunc = max(top_fock_population(s.layout, p) for p in psis)
    return Trajectory(
        t_sim, obs, s.layout, QuantumState.pure(s.layout, psis[-1]), trunc,
        states=psis if store_states else None,
        protocol_times=np.array(t_proto),
    )


def digital_scan(
    params,
    times,
    n: int,
    psi0: QuantumState,
    reference: Optional[Operator] = None,
    split: Split = "symmetric",
) -> Trajectory:
    """Final states of independent ideal ``n``-step protocols, one per time.

    This is the fidelity-versus-time study: each grid point ``t`` is a fresh
    run with step ``t / n``; ``t = 0`` returns ``psi0``.
    """
    layout = psi0.layout
    steps = _as_steps(params, split)
    p1 = EigenPropagator(steps[0].native(layout))
    p2 = EigenPropagator(steps[1].native(layout))
    pulse = global_pi_pulse(layout).matrix
    times = np.asarray(times, dtype=float)
    finals = []
    for t in times:
        if t == 0:
            finals.append(psi0.data.copy())
            continue
        dt = t / n
        u_step = pulse @ p2.matrix(dt) @ pulse @ p1.matrix(dt)
        psi = psi0.data
        for _ in range(n):
            psi = u_step @ psi
        finals.append(psi)
    psis = np.array(finals)
    obs = measure_series(layout, psis, "pure", _reference_states(reference, psi0.data, times))
    trunc = max(top_fock_population(layout, p) for p in psis)
    return Trajectory(times, obs, layout, QuantumState.pure(layout, psis[-1]), trunc, meta={"n_steps": n})


def protocol_unitary(s: ProtocolSchedule) -> np.ndarray:
    """Full ideal-mode protocol unitary (segments composed in time order)."""
    if s.mode != "ideal":
        raise ValueError("protocol_unitary is defined for ideal schedules")
    stepper = _UnitaryStepper(s)
    u = np.eye(s.layout.dim, dtype=complex)
    for seg in s.segments:
        u = stepper.apply(seg, u)
    return u


class _Dissipator:
    """Precomputed pieces of the Lindblad right-hand side."""

    def __init__(self, layout: SpaceLayout, noise: NoiseParams):
        jumps = []
        if noise.kappa > 0:
            jumps.append((noise.kappa, make_destroy(layout).matrix))
        for j in range(layout.n_qubits):
            if noise.gamma_phi > 0:
                jumps.append((noise.gamma_phi, make_pauli(layout, j, "z").matrix))
            if noise.gamma_minus > 0:
                jumps.append((noise.gamma_minus, make_pauli(layout, j, "minus").matrix))
        self.jumps = [(rate, L, L.conj().T) for rate, L in jumps]
        anti = np.zeros((layout.dim, layout.dim), dtype=complex)
        for rate, L, Ld in self.jumps:
            anti += 0.5 * rate * (Ld @ L)
        self.anti = anti

    def rhs(self, H: np.ndarray, rho: np.ndarray) -> np.ndarray:
        # -i[H, rho] + sum_k rate_k (L rho L^dag - {L^dag L, rho}/2)
        heff = H - 1j * self.anti
        out = -1j * (heff @ rho - rho @ heff.conj().T)
        for rate, L, Ld in self.jumps:
            out += rate * (L @ rho @ Ld)
        return out


def lindblad_rhs(rho: QuantumState, H: Operator, noise: NoiseParams) -> np.ndarray:
    """``d rho / dt``; dissipators on ``a``, and on ``sz_j``, ``s-_j`` for every qubit."""
    if rho.kind != "density":
        raise ValueError("lindblad_rhs needs a density matrix")
    if rho.layout != H.layout:
        raise LayoutError("state and Hamiltonian layouts differ")
    return _Dissipator(H.layout, noise).rhs(H.matrix, rho.data)


def run_schedule_lindblad(
    s: ProtocolSchedule,
    rho0: QuantumState,
    noise: NoiseParams,
    samples_per_segment: int = 1,
    reference: Optional[Operator] = None,
    store_states: bool = False,
) -> Trajectory:
    """Integrate the master equation across a pulsed schedule with fixed-step RK4.

    Each segment is sampled at ``samples_per_segment`` evenly spaced interior
    points including its end. Series include ``t_sim`` and ``trace``.
    """
    if s.mode != "pulsed":
        raise ValueError("run_schedule_lindblad needs a pulsed schedule")
    if rho0.layout != s.layout:
        raise LayoutError("schedule and state layouts differ")
    layout = s.layout
    if rho0.kind == "pure":
        psi_start = rho0.data
        rho0 = rho0.to_density()
    else:
        psi_start = None
    diss = _Dissipator(layout, noise)
    sx = collective(layout, "x").matrix
    zero = np.zeros((layout.dim, layout.dim), dtype=complex)
    radius: dict[int, float] = {}
    rho = rho0.data.copy()
    samples = [rho.copy()]
    t_proto, t_sim = [0.0], [0.0]
    elapsed, simulated = 0.0, 0.0
    for i, seg in enumerate(s.segments):
        if seg.duration == 0:
            continue
        h_max = _step_size(seg, layout, radius)
        n_sub = math.ceil(seg.duration / h_max / samples_per_segment) * samples_per_segment
        h = seg.duration / n_sub
        if isinstance(seg, HamiltonianSegment):
            H0 = seg.H.matrix
            hfun = lambda t, H0=H0: H0
            advances = True
        else:
            bg = zero if seg.background is None else seg.background.matrix
            env = seg.envelope
            hfun = lambda t, bg=bg, env=env: bg + env(t) * sx
            advances = False
        t = 0.0
        every = n_sub // samples_per_segment
        for k in range(1, n_sub + 1):
            k1 = diss.rhs(hfun(t), rho)
            k2 = diss.rhs(hfun(t + h / 2), rho + h / 2 * k1)
            k3 = diss.rhs(hfun(t + h / 2), rho + h / 2 * k2)
            k4 = diss.rhs(hfun(t + h), rho + h * k3)
            rho = rho + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
            t = k * h
            if k % every == 0:
                if not np.all(np.isfinite(rho)):
                    raise IntegratorError("non-finite density matrix", i)
                tr = np.trace(rho).real
                if abs(tr - 1.0) > 1e-6:
                    raise IntegratorError(f"trace drifted to {tr:.12g}", i)
                samples.append(rho.copy())
                t_proto.append(elapsed + t)
                t_sim.append(simulated + (t / 2 if advances else 0.0))
        elapsed += seg.duration
        if advances:
            simulated += seg.duration / 2
    rhos = np.array(samples)
    t_sim_arr = np.array(t_sim)
    ref = None
    if reference is not None:
        if psi_start is None:
            raise ValueError("a fidelity reference needs a pure initial state")
        ref = _reference_states(reference, psi_start, t_sim_arr)
    obs = measure_series(layout, rhos, "density", ref)
    obs["t_sim"] = t_sim_arr
    obs["trace"] = np.real(np.trace(rhos, axis1=1, axis2=2))
    trunc = max(top_fock_population(layout, r) for r in rhos)
    rho_final = 0.5 * (rhos[-1] + rhos[-1].conj().T)
    return Trajectory(
        np.array(t_proto), obs, layout, QuantumState.density(layout, rho_final), trunc,
        states=rhos if store_states else None,
        protocol_times=np.array(t_proto),
    )


def frame_transform(state: QuantumState, omega_tilde: float, t: float) -> QuantumState:
    """Apply ``U = exp(i omega_tilde t (a^dag a + sum_j sz_j / 2))``."""
    layout = state.layout
    gen = np.real(np.diagonal(make_number(layout).matrix)).copy()
    for j in range(layout.n_qubits):
        gen += 0.5 * np.real(np.diagonal(make_pauli(layout, j, "z").matrix))
    phase = np.exp(1j * omega_tilde * t * gen)
    if state.kind == "pure":
        return QuantumState.pure(layout, phase * state.data)
    return QuantumState.density(layout, phase[:, None] * state.data * phase.conj()[None, :])
