import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from cdplab import matrixkit as mk
from cdplab.errors import InvalidInput
from cdplab.objects import BipartiteState, bell_vector, isotropic_state, pure_state
from cdplab.osd import (
    correlation_matrix,
    lowest_osc_cap,
    operator_schmidt,
    osr,
    passes_realignment,
    r_cn,
    r_cn_corrected,
    realignment_sum,
    tail_correlation_bound,
)
from cdplab.sampling import random_density, random_product_density, random_separable_density

seeds = st.integers(min_value=0, max_value=2**32 - 1)
dims = st.sampled_from([(2, 2), (2, 3), (3, 2), (3, 3)])

bell = pure_state(bell_vector(2), 2, 2)


def test_correlation_matrix_of_product_has_rank_one():
    st_ = BipartiteState(2, 3, random_product_density(2, 3, seed=3))
    s = np.linalg.svd(correlation_matrix(st_), compute_uv=False)
    assert s[1] <= 1e-12 * s[0]


def test_correlation_matrix_rejects_bad_basis():
    skewed = mk.hermitian_operator_basis(2)
    skewed[1] = skewed[1] * 2
    with pytest.raises(InvalidInput):
        correlation_matrix(bell, basisA=skewed)


def test_correlation_matrix_of_bell_state():
    s = np.linalg.svd(correlation_matrix(bell), compute_uv=False)
    assert np.allclose(s, 0.5, atol=1e-12)


def test_isotropic_coefficients():
    osd = operator_schmidt(isotropic_state(2, 0.5))
    assert np.allclose(osd.coefficients, [0.5, 0.25, 0.25, 0.25], atol=1e-12)
    assert osd.rank == 4 and osd.full_rank


def test_pure_state_coefficients_are_products_of_schmidt_weights():
    psi = np.array([np.sqrt(0.8), 0, 0, np.sqrt(0.2)])
    osd = operator_schmidt(pure_state(psi, 2, 2))
    assert np.allclose(osd.coefficients, [0.8, 0.4, 0.4, 0.2], atol=1e-12)


@given(seeds, dims)
def test_decomposition_reconstructs_state(seed, d):
    dA, dB = d
    st_ = BipartiteState(dA, dB, random_density(dA * dB, seed=seed))
    osd = operator_schmidt(st_)
    assert np.allclose(osd.reconstruct(), st_.rho, atol=1e-10)
    assert np.all(np.diff(osd.coefficients) <= 1e-15)
    for ops, d_ in ((osd.ops_A, dA), (osd.ops_B, dB)):
        assert mk.is_orthonormal_basis(ops, d_, atol=1e-10)
        assert all(mk.is_hermitian(op, 1e-10) for op in ops)


@given(seeds, dims)
def test_coefficients_square_to_purity(seed, d):
    dA, dB = d
    st_ = BipartiteState(dA, dB, random_density(dA * dB, seed=seed))
    assert np.sum(operator_schmidt(st_).coefficients ** 2) == pytest.approx(st_.purity(), abs=1e-12)


def test_product_state_has_osr_one():
    st_ = BipartiteState(3, 2, random_product_density(3, 2, seed=9))
    assert osr(st_) == 1


def test_threshold_changes_rank():
    st_ = isotropic_state(2, 0.5)
    assert osr(st_, threshold=1e-10) == 4
    assert osr(st_, threshold=0.6) == 1


@pytest.mark.parametrize(
    "state, total, passes",
    [
        (bell, 2.0, False),
        (isotropic_state(2, 1 / 3), 1.0, True),
        (isotropic_state(2, 0.0), 0.5, True),
    ],
)
def test_realignment(state, total, passes):
    osd = operator_schmidt(state)
    assert realignment_sum(osd) == pytest.approx(total, abs=1e-12)
    assert passes_realignment(osd) is passes


@given(seeds)
def test_product_states_pass_realignment(seed):
    rho = random_product_density(2, 3, seed=seed)
    st_ = BipartiteState(2, 3, rho)
    osd = operator_schmidt(st_)
    expected = np.linalg.norm(st_.rho_A, "fro") * np.linalg.norm(st_.rho_B, "fro")
    assert realignment_sum(osd) == pytest.approx(expected, abs=1e-12)
    assert passes_realignment(osd)


@given(seeds)
def test_separable_mixtures_pass_realignment(seed):
    st_ = BipartiteState(2, 2, random_separable_density(2, 2, seed=seed))
    assert passes_realignment(operator_schmidt(st_))


def test_tail_bound_examples():
    ra, rb = random_density(2, seed=1), random_density(2, seed=2)
    prod = BipartiteState(2, 2, np.kron(ra, rb))
    lhs, rhs = tail_correlation_bound(prod, ra, rb)
    assert lhs == pytest.approx(0.0, abs=1e-12) and rhs == pytest.approx(0.0, abs=1e-12)
    lhs, rhs = tail_correlation_bound(bell, np.eye(2) / 2, np.eye(2) / 2)
    assert lhs == pytest.approx(0.75) and rhs == pytest.approx(0.75)


@given(seeds, seeds)
def test_tail_bound_holds(s1, s2):
    st_ = BipartiteState(2, 2, random_density(4, seed=s1))
    lhs, rhs = tail_correlation_bound(st_, random_density(2, seed=s2), random_density(2, seed=s2 + 1))
    assert lhs <= rhs + 1e-12


def test_r_cn_values():
    assert r_cn(2) == pytest.approx((6 - math.sqrt(3)) / 26, abs=1e-12)
    assert r_cn(2) == pytest.approx(0.16415, abs=1e-5)
    assert r_cn(3) == pytest.approx((24 - math.sqrt(8)) / 219, abs=1e-12)
    for d in range(2, 9):
        assert r_cn(d) < 1 / d**2
        assert r_cn_corrected(d) < 1 / d**2


def test_r_cn_rejects_small_d():
    with pytest.raises(InvalidInput):
        r_cn(1)
    with pytest.raises(InvalidInput):
        r_cn_corrected(1)


def test_boundary_isotropic_state_exceeds_printed_cap_only():
    # The separable isotropic state at p=1/3 has r_4 = 1/6: above the printed cap, below the corrected one.
    r4 = operator_schmidt(isotropic_state(2, 1 / 3)).r(4)
    assert r4 == pytest.approx(1 / 6, abs=1e-12)
    assert r_cn(2) < r4 < r_cn_corrected(2)


def test_lowest_osc_cap_examples():
    r_last, cap = lowest_osc_cap(bell)
    assert r_last == pytest.approx(0.5) and cap == pytest.approx(math.sqrt(0.75))
    iso = isotropic_state(2, 0.5)
    r_last, cap = lowest_osc_cap(iso)
    assert r_last == pytest.approx(0.25)
    assert cap == pytest.approx(math.sqrt(iso.purity() - 0.25))


def test_lowest_osc_cap_needs_square_split():
    with pytest.raises(InvalidInput):
        lowest_osc_cap(BipartiteState(2, 3, np.eye(6) / 6))
