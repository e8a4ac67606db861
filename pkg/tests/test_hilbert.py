import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from digirabi.hilbert import (
    EigenPropagator,
    LayoutError,
    Operator,
    QuantumState,
    SpaceLayout,
    basis_state,
    commutator,
    embed_and_add,
    expectation,
    make_destroy,
    make_identity,
    make_number,
    make_pauli,
    propagator,
    top_fock_population,
)


def test_layout_dimension_and_validation():
    assert SpaceLayout(1, 4).dim == 10
    assert SpaceLayout(3, 2).dim == 24
    with pytest.raises(LayoutError):
        SpaceLayout(0, 3)
    with pytest.raises(LayoutError):
        SpaceLayout(1, 0)


def test_destroy_smallest_truncation():
    a = make_destroy(SpaceLayout(1, 1)).matrix
    # qubit identity on top of the 2x2 mode block
    np.testing.assert_array_equal(a[:2, :2], [[0, 1], [0, 0]])
    np.testing.assert_array_equal(a[2:, 2:], [[0, 1], [0, 0]])
    assert np.count_nonzero(a[:2, 2:]) == 0


def test_destroy_ladder_element():
    layout = SpaceLayout(1, 3)
    a = make_destroy(layout).matrix
    # |e, m> is index m
    assert a[2, 3] == pytest.approx(1.7320508075688772)


def test_number_operator_diagonal_by_brute_force():
    layout = SpaceLayout(1, 4)
    a = make_destroy(layout).matrix
    n = np.zeros_like(a)
    for i in range(layout.dim):
        for j in range(layout.dim):
            n[i, j] = sum(np.conj(a[k, i]) * a[k, j] for k in range(layout.dim))
    np.testing.assert_allclose(np.diag(n).real[:5], [0, 1, 2, 3, 4])
    np.testing.assert_allclose(n, make_number(layout).matrix, atol=1e-14)


@pytest.mark.parametrize("n_q,M", [(1, 1), (1, 6), (2, 3), (3, 2)])
def test_canonical_commutator_except_top_level(n_q, M):
    layout = SpaceLayout(n_q, M)
    a = make_destroy(layout).matrix
    c = a @ a.conj().T - a.conj().T @ a
    diag = np.real(np.diag(c)).reshape(-1, M + 1)
    np.testing.assert_allclose(diag[:, :M], 1.0, atol=1e-14)
    np.testing.assert_allclose(diag[:, M], -M, atol=1e-12)
    assert np.max(np.abs(c - np.diag(np.diag(c)))) < 1e-14


def test_pauli_conventions():
    layout = SpaceLayout(1, 1)
    sz = make_pauli(layout, 0, "z").matrix
    np.testing.assert_array_equal(np.diag(sz).real, [1, 1, -1, -1])
    e = basis_state(layout, "e", 0)
    g = basis_state(layout, "g", 0)
    sp = make_pauli(layout, 0, "plus").matrix
    np.testing.assert_allclose(sp @ g.data, e.data)
    assert expectation(e, make_pauli(layout, 0, "z")) == pytest.approx(1.0)


@pytest.mark.parametrize("layout", [SpaceLayout(1, 2), SpaceLayout(2, 1), SpaceLayout(3, 1)])
def test_ladder_anticommutator_is_identity(layout):
    for j in range(layout.n_qubits):
        sp = make_pauli(layout, j, "plus").matrix
        sm = make_pauli(layout, j, "minus").matrix
        np.testing.assert_allclose(sp @ sm + sm @ sp, np.eye(layout.dim), atol=1e-15)


def test_pauli_commutator_brute_force():
    layout = SpaceLayout(2, 1)
    for j in range(2):
        sx, sy, sz = (make_pauli(layout, j, ax) for ax in "xyz")
        c = commutator(sx, sz).matrix
        np.testing.assert_allclose(c, -2j * sy.matrix, atol=1e-15)


def test_pauli_index_out_of_range():
    with pytest.raises(IndexError):
        make_pauli(SpaceLayout(2, 1), 2, "x")
    with pytest.raises(ValueError):
        make_pauli(SpaceLayout(1, 1), 0, "w")


def test_embed_and_add_identity_and_adjoint():
    layout = SpaceLayout(1, 3)
    a, n = make_destroy(layout), make_number(layout)
    np.testing.assert_array_equal(embed_and_add([(1, a), (0, n)]).matrix, a.matrix)
    c = 0.3 - 1.7j
    lhs = embed_and_add([(c, a)]).matrix.conj().T
    np.testing.assert_allclose(lhs, np.conj(c) * a.matrix.conj().T)
    assert embed_and_add([(2.0, n)]).hermitian
    assert not embed_and_add([(1.0, a)]).hermitian


def test_free_hamiltonian_is_diagonal_with_expected_spectrum():
    layout = SpaceLayout(1, 5)
    w, wq = 1.3, 0.4
    H = embed_and_add([(w, make_number(layout)), (wq / 2, make_pauli(layout, 0, "z"))])
    off = H.matrix - np.diag(np.diag(H.matrix))
    assert np.max(np.abs(off)) == 0
    expected = sorted(m * w + s * wq / 2 for m in range(6) for s in (1, -1))
    np.testing.assert_allclose(sorted(np.diag(H.matrix).real), expected)


def test_embed_and_add_layout_mismatch():
    with pytest.raises(LayoutError):
        embed_and_add([(1, make_number(SpaceLayout(1, 2))), (1, make_number(SpaceLayout(1, 3)))])


def test_propagator_identity_at_zero():
    layout = SpaceLayout(1, 3)
    H = embed_and_add([(0.7, make_number(layout)), (0.2, make_pauli(layout, 0, "x"))])
    np.testing.assert_allclose(propagator(H, 0.0).matrix, np.eye(layout.dim), atol=1e-14)


def test_propagator_pi_rotation():
    layout = SpaceLayout(1, 1)
    sx = make_pauli(layout, 0, "x")
    U = propagator(embed_and_add([(np.pi / 2, sx)]), 1.0)
    np.testing.assert_allclose(U.matrix, -1j * sx.matrix, atol=1e-14)


def test_propagator_diagonal_brute_force():
    layout = SpaceLayout(1, 4)
    energies = np.linspace(-2.0, 3.0, layout.dim)
    H = Operator(layout, np.diag(energies), hermitian=True)
    t = 0.731
    expected = np.diag([np.exp(-1j * e * t) for e in energies])
    np.testing.assert_allclose(propagator(H, t).matrix, expected, atol=1e-14)


def test_propagator_rejects_non_hermitian():
    with pytest.raises(ValueError):
        propagator(make_destroy(SpaceLayout(1, 2)), 1.0)


def _random_hermitian(layout, seed):
    rng = np.random.default_rng(seed)
    m = rng.normal(size=(layout.dim, layout.dim)) + 1j * rng.normal(size=(layout.dim, layout.dim))
    return Operator(layout, (m + m.conj().T) / 2, hermitian=True)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**31), t1=st.floats(-3, 3), t2=st.floats(-3, 3))
def test_propagator_group_property(seed, t1, t2):
    layout = SpaceLayout(1, 3)
    prop = EigenPropagator(_random_hermitian(layout, seed))
    lhs = prop.matrix(t1) @ prop.matrix(t2)
    assert np.max(np.abs(lhs - prop.matrix(t1 + t2))) < 1e-10
    u = prop(t1).matrix
    assert np.max(np.abs(u.conj().T @ u - np.eye(layout.dim))) < 1e-10


def test_expectation_vacuum_and_excited():
    layout = SpaceLayout(1, 4)
    vac = basis_state(layout, "g", 0)
    assert expectation(vac, make_number(layout)) == pytest.approx(0.0)
    assert expectation(basis_state(layout, "e", 2), make_pauli(layout, 0, "z")) == pytest.approx(1.0)


def test_expectation_photon_number_direct_sum():
    layout = SpaceLayout(1, 10)
    rng = np.random.default_rng(3)
    c = rng.normal(size=11) + 1j * rng.normal(size=11)
    c /= np.linalg.norm(c)
    psi = np.zeros(layout.dim, dtype=complex)
    psi[:11] = c  # qubit |e>
    val = expectation(QuantumState.pure(layout, psi), make_number(layout))
    assert val.real == pytest.approx(sum(m * abs(c[m]) ** 2 for m in range(11)), abs=1e-12)
    assert abs(val.imag) < 1e-9


@settings(max_examples=25, deadline=None)
@given(seed=st.integers(0, 2**31))
def test_expectation_linear_and_conjugate_symmetric(seed):
    layout = SpaceLayout(1, 3)
    rng = np.random.default_rng(seed)
    v = rng.normal(size=layout.dim) + 1j * rng.normal(size=layout.dim)
    state = QuantumState.pure(layout, v / np.linalg.norm(v))
    A = Operator(layout, rng.normal(size=(layout.dim,) * 2) + 1j * rng.normal(size=(layout.dim,) * 2))
    B = make_destroy(layout)
    assert expectation(state, A.dag) == pytest.approx(np.conj(expectation(state, A)), abs=1e-12)
    lin = expectation(state, embed_and_add([(2.0, A), (-0.5j, B)]))
    assert lin == pytest.approx(2.0 * expectation(state, A) - 0.5j * expectation(state, B), abs=1e-12)
    rho = state.to_density()
    assert expectation(rho, A) == pytest.approx(expectation(state, A), abs=1e-12)


def test_state_invariants_enforced():
    layout = SpaceLayout(1, 1)
    with pytest.raises(ValueError):
        QuantumState.pure(layout, np.ones(4))
    with pytest.raises(ValueError):
        QuantumState.density(layout, np.eye(4))
    bad = np.diag([1.2, -0.2, 0, 0]).astype(complex)
    with pytest.raises(ValueError):
        QuantumState.density(layout, bad)


def test_constructions_deterministic():
    layout = SpaceLayout(2, 4)
    for build in (make_destroy, make_number, make_identity):
        assert np.array_equal(build(layout).matrix, build(layout).matrix)


def test_top_fock_population():
    layout = SpaceLayout(1, 3)
    psi = basis_state(layout, "g", 3)
    assert top_fock_population(layout, psi.data) == pytest.approx(1.0)
    assert top_fock_population(layout, psi.to_density().data) == pytest.approx(1.0)
    assert top_fock_population(layout, basis_state(layout, "e", 2).data) == 0.0
