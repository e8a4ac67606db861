"""Measured quantities: fidelity, populations, field quadratures, revivals."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Optional, Union

import numpy as np
from scipy.signal import find_peaks

from .hilbert import (
    LayoutError,
    Operator,
    QuantumState,
    SpaceLayout,
    expectation,
    make_destroy,
    make_number,
    make_pauli,
)

if TYPE_CHECKING:
    from .dynamics import Trajectory

DEFAULT_PROMINENCE = 0.05


def fidelity(a: QuantumState, b: QuantumState) -> float:
    """``|<a|b>|^2`` for two pure states, ``<psi|rho|psi>`` for a mixed/pure pair."""
    if a.layout != b.layout:
        raise LayoutError(f"layout mismatch: {a.layout} vs {b.layout}")
    if a.kind == "pure" and b.kind == "pure":
        return float(abs(np.vdot(a.data, b.data)) ** 2)
    if a.kind == "density" and b.kind == "density":
        raise ValueError("fidelity between two density matrices is not supported")
    rho, psi = (a, b) if a.kind == "density" else (b, a)
    return float(np.real(np.vdot(psi.data, rho.data @ psi.data)))


def photon_number(state: QuantumState) -> float:
    return float(np.real(expectation(state, make_number(state.layout))))


def qubit_inversion(state: QuantumState, qubit: Union[int, str] = "collective") -> float:
    """``<sz_j>`` for an index, or ``sum_j <sz_j> / N`` for ``"collective"``."""
    layout = state.layout
    if qubit == "collective":
        vals = [expectation(state, make_pauli(layout, j, "z")).real for j in range(layout.n_qubits)]
        return float(np.mean(vals))
    return float(expectation(state, make_pauli(layout, int(qubit), "z")).real)


def quadrature_operator(layout: SpaceLayout, theta: float) -> Operator:
    """``x_theta = (a e^{-i theta} + a^dag e^{i theta}) / sqrt 2``; theta=0 is x, pi/2 is p."""
    a = make_destroy(layout).matrix
    m = (a * np.exp(-1j * theta) + a.conj().T * np.exp(1j * theta)) / math.sqrt(2.0)
    return Operator(layout, m, hermitian=True)


def quadrature(state: QuantumState, theta: float = 0.0) -> float:
    return float(expectation(state, quadrature_operator(state.layout, theta)).real)


def measure_series(
    layout: SpaceLayout,
    data: np.ndarray,
    kind: str,
    reference: Optional[np.ndarray] = None,
    quadrature_phases: dict[str, float] | None = None,
) -> dict[str, np.ndarray]:
    """Vectorized observables over a stack of states.

    ``data`` is ``(T, D)`` for pure states or ``(T, D, D)`` for density
    matrices; ``reference`` is an optional ``(T, D)`` stack of pure states
    used for the ``fidelity`` series.
    """
    if quadrature_phases is None:
        quadrature_phases = {"x": 0.0, "p": math.pi / 2}
    if kind == "pure":
        pops = np.abs(data) ** 2
    else:
        pops = np.real(np.diagonal(data, axis1=1, axis2=2))
    d = layout.mode_dim
    n_q = layout.n_qubits
    shaped = pops.reshape(len(pops), *([2] * n_q), d)
    out: dict[str, np.ndarray] = {}
    sz_each = []
    for j in range(n_q):
        axes = tuple(k + 1 for k in range(n_q + 1) if k != j)
        marg = shaped.sum(axis=axes)
        sz_each.append(marg[:, 0] - marg[:, 1])
    out["sz"] = np.mean(sz_each, axis=0)
    if n_q > 1:
        for j, s in enumerate(sz_each):
            out[f"sz_{j + 1}"] = s
    mode_marg = shaped.sum(axis=tuple(range(1, n_q + 1)))
    out["n_phot"] = mode_marg @ np.arange(d, dtype=float)
    for name, theta in quadrature_phases.items():
        q = quadrature_operator(layout, theta).matrix
        if kind == "pure":
            out[name] = np.real(np.einsum("ti,ij,tj->t", data.conj(), q, data))
        else:
            out[name] = np.real(np.einsum("tij,ji->t", data, q))
    if reference is not None:
        if kind == "pure":
            out["fidelity"] = np.abs(np.einsum("ti,ti->t", reference.conj(), data)) ** 2
        else:
            out["fidelity"] = np.real(np.einsum("ti,tij,tj->t", reference.conj(), data, reference))
    return out


@dataclass(frozen=True)
class RevivalReport:
    peak_indices: np.ndarray
    peak_times: np.ndarray
    peak_values: np.ndarray
    period: Optional[float]


def revival_diagnostics(traj: "Trajectory", series_name: str, prominence: float | None = None) -> RevivalReport:
    """Local maxima of a series and their mean spacing.

    ``prominence`` is a fraction of the series range (default 5%). Peak
    times are refined by a parabola through the three samples around each
    maximum. ``period`` is ``None`` when fewer than two peaks are found.
    """
    y = np.asarray(traj.observables[series_name], dtype=float)
    t = np.asarray(traj.times, dtype=float)
    frac = DEFAULT_PROMINENCE if prominence is None else prominence
    span = float(np.ptp(y)) if len(y) else 0.0
    if span <= 0:
        empty = np.array([], dtype=int)
        return RevivalReport(empty, np.array([]), np.array([]), None)
    idx, _ = find_peaks(y, prominence=frac * span)
    times = []
    for i in idx:
        y0, y1, y2 = y[i - 1], y[i], y[i + 1]
        denom = y0 - 2 * y1 + y2
        shift = 0.5 * (y0 - y2) / denom if denom != 0 else 0.0
        times.append(t[i] + shift * (t[i + 1] - t[i - 1]) / 2)
    times = np.array(times)
    period = float(np.mean(np.diff(times))) if len(times) >= 2 else None
    return RevivalReport(idx, times, y[idx], period)
