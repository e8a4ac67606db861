from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from mpmath import mp, mpf

from digirabi.hamiltonians import DickeParams, RabiParams, build_dicke, decompose_rabi
from digirabi.hilbert import Operator, SpaceLayout, make_destroy, make_number
from digirabi.resources import (
    ResourceQuery,
    dicke_norm_bound,
    gate_count_bound,
    spectral_norm,
    trotter_error_estimate,
)
from digirabi.units import mhz


def query(wr=1.0, wq=1.0, g=1.0, N=1, M=4, t=1.0, eps=1e-3, k=1):
    return ResourceQuery(DickeParams(RabiParams(wr, wq, g), N), M, t, eps, k)


def test_norm_bound_smallest_arguments():
    assert dicke_norm_bound(query(wr=0.0, wq=0.7, g=0.2, M=0)) == pytest.approx(0.7 + 0.4)


@pytest.mark.parametrize("N", [1, 2, 3])
@pytest.mark.parametrize("M", range(1, 9))
def test_norm_bound_dominates_spectrum(N, M):
    rp = RabiParams(mhz(100), mhz(100), mhz(100))
    H = build_dicke(DickeParams(rp, N), SpaceLayout(N, M))
    assert dicke_norm_bound(query(rp.omega_r_R, rp.omega_q_R, rp.g_R, N, M)) >= spectral_norm(H.matrix)


@settings(max_examples=50, deadline=None)
@given(M=st.integers(0, 20), N=st.integers(1, 5), wq=st.floats(0, 3), g=st.floats(0.01, 3))
def test_norm_bound_monotone(M, N, wq, g):
    b = dicke_norm_bound(query(wq=wq, g=g, N=N, M=M))
    assert dicke_norm_bound(query(wq=wq, g=g, N=N, M=M + 1)) >= b
    assert dicke_norm_bound(query(wq=wq, g=g, N=N + 1, M=M)) >= b
    assert dicke_norm_bound(query(wq=wq + 0.1, g=g, N=N, M=M)) >= b
    assert dicke_norm_bound(query(wq=wq, g=g + 0.1, N=N, M=M)) >= b


def test_gate_count_zero_time():
    assert gate_count_bound(query(t=0.0)) == 0.0


@pytest.mark.parametrize("k", [1, 2, 3])
def test_gate_count_epsilon_halving(k):
    a = gate_count_bound(query(eps=1e-3, k=k))
    b = gate_count_bound(query(eps=5e-4, k=k))
    assert b / a == pytest.approx(2 ** (1 / (2 * k)), rel=1e-12)


def test_gate_count_independent_evaluation():
    # g = w_r = w_q = 2 pi 100 MHz, N = 1, M = 16, t = one revival period
    w = mhz(100)
    t = 2 * np.pi / w
    q = query(w, w, w, 1, 16, t, 1e-3, 1)
    mp.dps = 40
    W = mpf(w)
    B = W * 16 + 1 * (W + 2 * W * mp.sqrt(17))
    ref = 2 * mpf(5) ** 2 * (2 * mpf(t) * B) ** (mpf(3) / 2) / mpf("1e-3") ** (mpf(1) / 2)
    assert gate_count_bound(q) == pytest.approx(float(ref), rel=1e-12)
    assert 2 * 5 ** Fraction(2) == 50


@settings(max_examples=50, deadline=None)
@given(t=st.floats(0.1, 10), M=st.integers(0, 10), N=st.integers(1, 4),
       eps=st.floats(1e-6, 0.1), k=st.integers(1, 3))
def test_gate_count_monotone(t, M, N, eps, k):
    b = gate_count_bound(query(N=N, M=M, t=t, eps=eps, k=k))
    assert gate_count_bound(query(N=N, M=M, t=t * 1.1, eps=eps, k=k)) >= b
    assert gate_count_bound(query(N=N + 1, M=M, t=t, eps=eps, k=k)) >= b
    assert gate_count_bound(query(N=N, M=M + 1, t=t, eps=eps, k=k)) >= b
    assert gate_count_bound(query(N=N, M=M, t=t, eps=eps * 2, k=k)) <= b


def test_query_validation():
    with pytest.raises(ValueError):
        query(eps=0.0)
    with pytest.raises(ValueError):
        query(k=0)
    with pytest.raises(ValueError):
        query(t=-1.0)
    with pytest.raises(ValueError):
        query(M=-1)


def test_trotter_estimate_trivial_cases():
    layout = SpaceLayout(1, 4)
    n = make_number(layout)
    assert trotter_error_estimate(n, n * 2.0, 3.0, 5) == 0.0
    h1, h2 = decompose_rabi(RabiParams(1, 1, 1))
    a, b = h1.effective(layout), h2.effective(layout)
    assert trotter_error_estimate(a, b, 1.0, 8) == pytest.approx(trotter_error_estimate(a, b, 1.0, 4) / 2)
    with pytest.raises(ValueError):
        trotter_error_estimate(make_destroy(layout), n, 1.0, 1)


def _expm_h(H, t):
    w, v = np.linalg.eigh(H)
    return (v * np.exp(-1j * w * t)) @ v.conj().T


@pytest.mark.parametrize("rp", [RabiParams(2, 2, 1), RabiParams(1, 1, 1), RabiParams(0.5, 1, 1), RabiParams(0.5, 1.5, 1)])
@pytest.mark.parametrize("n", [4, 8, 16])
def test_trotter_estimate_dominates_operator_error(rp, n):
    layout = SpaceLayout(1, 12)
    t = 1.0
    h1, h2 = decompose_rabi(rp)
    A, B = h1.effective(layout), h2.effective(layout)
    exact = _expm_h(A.matrix + B.matrix, t)
    step = _expm_h(B.matrix, t / n) @ _expm_h(A.matrix, t / n)
    measured = spectral_norm(exact - np.linalg.matrix_power(step, n))
    assert measured <= trotter_error_estimate(A, B, t, n)


@pytest.mark.parametrize("rp", [RabiParams(1, 1, 1), RabiParams(2, 2, 1), RabiParams(0.5, 1, 1), RabiParams(0.5, 1.5, 1)])
def test_wider_split_increases_commutator_estimate(rp):
    layout = SpaceLayout(1, 12)
    wq = rp.omega_q_R

    def estimate(split):
        h1, h2 = decompose_rabi(rp, split)
        return trotter_error_estimate(h1.effective(layout), h2.effective(layout), 1.0, 1)

    # shifting both detunings upward from the second-resonant split
    offsets = [0.0, 0.5, 1.0, 2.0, 4.0, 8.0]
    values = [estimate(d * wq) for d in offsets]
    assert values[0] == pytest.approx(estimate("second-resonant"))
    assert all(b > a for a, b in zip(values, values[1:]))
    # the symmetric default never does worse than the second-resonant split
    assert estimate("symmetric") <= values[0]


def test_spectral_norm_is_largest_singular_value():
    m = np.array([[0, 2], [0, 0]], dtype=complex)
    assert spectral_norm(m) == pytest.approx(2.0)
    assert spectral_norm(Operator(SpaceLayout(1, 1), np.eye(4), hermitian=True).matrix) == 1.0
