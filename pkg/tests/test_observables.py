import math

import numpy as np
import pytest

from digirabi.dynamics import Trajectory, evolve_exact
from digirabi.hamiltonians import RabiParams, build_rabi
from digirabi.hilbert import LayoutError, QuantumState, SpaceLayout, basis_state
from digirabi.observables import (
    fidelity,
    measure_series,
    photon_number,
    quadrature,
    qubit_inversion,
    revival_diagnostics,
)


def coherent(layout, alpha, qubit="g"):
    d = layout.mode_dim
    c = np.array([alpha**m / math.sqrt(math.factorial(m)) for m in range(d)], dtype=complex)
    c *= math.exp(-abs(alpha) ** 2 / 2)
    v = np.zeros(layout.dim, complex)
    off = 0 if qubit == "e" else d
    v[off:off + d] = c
    return QuantumState.pure(layout, v / np.linalg.norm(v))


def test_fidelity_pure_and_mixed():
    layout = SpaceLayout(1, 3)
    e0, g0 = basis_state(layout, "e", 0), basis_state(layout, "g", 0)
    assert fidelity(e0, e0) == pytest.approx(1.0)
    assert fidelity(e0, g0) == 0.0
    mixed = QuantumState.density(layout, 0.5 * (e0.to_density().data + g0.to_density().data))
    assert fidelity(mixed, e0) == pytest.approx(0.5)
    assert fidelity(e0, mixed) == pytest.approx(0.5)
    with pytest.raises(ValueError):
        fidelity(mixed, mixed)
    with pytest.raises(LayoutError):
        fidelity(e0, basis_state(SpaceLayout(1, 4), "e", 0))


def test_fidelity_ignores_global_phase():
    layout = SpaceLayout(1, 2)
    a = coherent(layout, 0.4 + 0.2j)
    b = QuantumState.pure(layout, np.exp(0.7j) * a.data)
    assert fidelity(a, b) == pytest.approx(1.0, abs=1e-14)


def test_photon_number_and_quadratures_of_coherent_state():
    layout = SpaceLayout(1, 40)
    alpha = 1.2 * np.exp(0.6j)
    psi = coherent(layout, alpha)
    assert photon_number(psi) == pytest.approx(abs(alpha) ** 2, abs=1e-10)
    assert quadrature(psi, 0.0) == pytest.approx(math.sqrt(2) * alpha.real, abs=1e-10)
    assert quadrature(psi, math.pi / 2) == pytest.approx(math.sqrt(2) * alpha.imag, abs=1e-10)


def test_qubit_inversion_per_qubit_and_collective():
    layout = SpaceLayout(3, 1)
    psi = basis_state(layout, "egg", 1)
    assert qubit_inversion(psi, 0) == 1.0
    assert qubit_inversion(psi, 2) == -1.0
    assert qubit_inversion(psi) == pytest.approx(-1 / 3)


def test_measure_series_matches_scalar_observables():
    layout = SpaceLayout(2, 3)
    rng = np.random.default_rng(7)
    stack = rng.normal(size=(5, layout.dim)) + 1j * rng.normal(size=(5, layout.dim))
    stack /= np.linalg.norm(stack, axis=1, keepdims=True)
    series = measure_series(layout, stack, "pure", reference=stack[::-1])
    rhos = np.einsum("ti,tj->tij", stack, stack.conj())
    series_rho = measure_series(layout, rhos, "density", reference=stack[::-1])
    for t in range(5):
        s = QuantumState.pure(layout, stack[t])
        assert series["sz"][t] == pytest.approx(qubit_inversion(s), abs=1e-12)
        assert series["sz_2"][t] == pytest.approx(qubit_inversion(s, 1), abs=1e-12)
        assert series["n_phot"][t] == pytest.approx(photon_number(s), abs=1e-12)
        assert series["p"][t] == pytest.approx(quadrature(s, math.pi / 2), abs=1e-12)
        ref = QuantumState.pure(layout, stack[4 - t])
        assert series["fidelity"][t] == pytest.approx(fidelity(s, ref), abs=1e-12)
    for key in series:
        np.testing.assert_allclose(series_rho[key], series[key], atol=1e-12)


def test_single_qubit_series_has_no_per_qubit_columns():
    layout = SpaceLayout(1, 2)
    out = measure_series(layout, basis_state(layout, "e", 0).data[None, :], "pure")
    assert set(out) == {"sz", "n_phot", "x", "p"}


def test_revival_period_of_dsc_photon_number():
    w = 1.0
    layout = SpaceLayout(1, 30)
    t = np.linspace(0, 6 * np.pi, 301)
    traj = evolve_exact(build_rabi(RabiParams(w, 0.0, w), layout), basis_state(layout, "e", 0), t)
    rep = revival_diagnostics(traj, "n_phot")
    assert len(rep.peak_times) == 3
    assert rep.period == pytest.approx(2 * np.pi / w, rel=1e-3)
    np.testing.assert_allclose(rep.peak_values, 4.0, atol=1e-2)


def test_revival_diagnostics_without_peaks():
    layout = SpaceLayout(1, 1)
    traj = Trajectory(np.linspace(0, 1, 5), {"flat": np.ones(5), "ramp": np.arange(5.0)},
                      layout, basis_state(layout, "g", 0), 0.0)
    assert revival_diagnostics(traj, "flat").period is None
    rep = revival_diagnostics(traj, "ramp")
    assert rep.period is None and len(rep.peak_indices) == 0
