import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdplab import matrixkit as mk
from cdplab.errors import InvalidInput, NotHermitian
from cdplab.sampling import random_density, random_hermitian

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_svd_reconstructs_random_matrix(rng):
    m = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
    u, s, v = mk.svd(m)
    assert np.linalg.norm(u @ np.diag(s) @ mk.dagger(v) - m, 2) <= 1e-10
    assert np.all(np.diff(s) <= 0)


def test_svd_rejects_non_finite():
    with pytest.raises(InvalidInput):
        mk.svd(np.array([[1.0, np.nan], [0.0, 1.0]]))


@given(seeds, st.integers(min_value=1, max_value=4), st.integers(min_value=1, max_value=4))
def test_svd_rectangular_unitary_factors(seed, rows, cols):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))
    u, s, v = mk.svd(m)
    assert np.allclose(mk.dagger(u) @ u, np.eye(rows), atol=1e-12)
    assert np.allclose(mk.dagger(v) @ v, np.eye(cols), atol=1e-12)
    sigma = np.zeros((rows, cols))
    sigma[: len(s), : len(s)] = np.diag(s)
    assert np.allclose(u @ sigma @ mk.dagger(v), m, atol=1e-10)


@pytest.mark.parametrize(
    "m, expected",
    [
        (np.diag([1.0, -1.0]), [-1.0, 1.0]),
        (np.eye(2) / 2, [0.5, 0.5]),
    ],
)
def test_hermitian_eigen_known_spectra(m, expected):
    w, v = mk.hermitian_eigen(m)
    assert np.allclose(w, expected, atol=1e-14)
    assert np.allclose(mk.dagger(v) @ v, np.eye(2), atol=1e-14)


def test_hermitian_eigen_rejects_non_hermitian():
    with pytest.raises(NotHermitian):
        mk.hermitian_eigen(np.array([[0.0, 1.0], [0.0, 0.0]]))


def test_hermitian_eigen_tolerance_scales_with_norm():
    big = 1e6 * np.diag([1.0, -1.0]).astype(complex)
    big[0, 1] += 1e-7  # relative asymmetry 1e-13
    mk.hermitian_eigen(big)


@given(seeds)
def test_hermitian_eigen_trace_identity(seed):
    h = random_hermitian(3, seed)
    w, _ = mk.hermitian_eigen(h)
    assert abs(np.sum(w) - np.trace(h).real) <= 1e-10


def test_norms_of_pauli_z():
    z = np.diag([1.0, -1.0])
    assert mk.p_norm(z, 1) == pytest.approx(2.0)
    assert mk.p_norm(z, np.inf) == pytest.approx(1.0)
    assert mk.p_norm(z, 2) == pytest.approx(np.sqrt(2))


def test_norm_rejects_unsupported_order():
    with pytest.raises(InvalidInput):
        mk.p_norm(np.eye(2), 3)


@given(seeds)
def test_norm_ordering_and_trace_norm_agree(seed):
    rng = np.random.default_rng(seed)
    m = rng.standard_normal((3, 3)) + 1j * rng.standard_normal((3, 3))
    one, two, inf = (mk.p_norm(m, p) for p in (1, 2, np.inf))
    assert inf <= two + 1e-12 <= one + 2e-12
    h = m + mk.dagger(m)
    assert mk.trace_norm(h) == pytest.approx(mk.p_norm(h, 1), rel=1e-12)


def test_kron_examples():
    assert np.array_equal(mk.kron(np.eye(2), np.eye(2)), np.eye(4))
    zero, one = np.diag([1.0, 0.0]), np.diag([0.0, 1.0])
    out = mk.kron(zero, one)
    expected = np.zeros((4, 4))
    expected[1, 1] = 1.0
    assert np.array_equal(out, expected)


@given(seeds)
def test_kron_mixed_product(seed):
    rng = np.random.default_rng(seed)
    a, b, c, d = (rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2)) for _ in range(4))
    assert np.allclose(mk.kron(a, b) @ mk.kron(c, d), mk.kron(a @ c, b @ d), atol=1e-12)


def test_partial_trace_of_product_state():
    ra = random_density(2, seed=1)
    rb = random_density(3, seed=2)
    rho = np.kron(ra, rb)
    assert np.allclose(mk.partial_trace(rho, 2, 3, "B"), ra, atol=1e-14)
    assert np.allclose(mk.partial_trace(rho, 2, 3, "A"), rb, atol=1e-14)


def test_partial_trace_dimension_mismatch():
    with pytest.raises(InvalidInput):
        mk.partial_trace(np.eye(6), 2, 2)
    with pytest.raises(InvalidInput):
        mk.partial_trace(np.eye(4), 2, 2, traced="C")


@given(seeds, st.integers(min_value=1, max_value=3), st.integers(min_value=1, max_value=3))
def test_partial_trace_preserves_trace(seed, dA, dB):
    rho = random_density(dA * dB, seed=seed)
    assert abs(np.trace(mk.partial_trace(rho, dA, dB, "B")) - 1) <= 1e-12
    assert abs(np.trace(mk.partial_trace(rho, dA, dB, "A")) - 1) <= 1e-12


def test_operator_basis_d3():
    ops = mk.hermitian_operator_basis(3)
    assert len(ops) == 9
    assert np.allclose(mk.gram_matrix(ops), np.eye(9), atol=1e-12)
    assert all(mk.is_hermitian(op) for op in ops)


@pytest.mark.parametrize("d", [1, 2, 3, 4, 5])
def test_operator_basis_orthonormal(d):
    ops = mk.hermitian_operator_basis(d)
    assert mk.is_orthonormal_basis(ops, d, atol=1e-12)


def test_operator_basis_qubit_is_scaled_pauli():
    ops = mk.hermitian_operator_basis(2)
    paulis = [np.eye(2), np.array([[0, 1], [1, 0]]), np.array([[0, -1j], [1j, 0]]), np.diag([1, -1])]
    for op, p in zip(ops, paulis):
        assert np.allclose(op, p / np.sqrt(2))


def test_operator_basis_rejects_bad_dimension():
    with pytest.raises(InvalidInput):
        mk.hermitian_operator_basis(0)
