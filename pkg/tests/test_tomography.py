import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdplab.errors import InvalidInput, NotTomographicallyComplete
from cdplab.objects import (
    BipartiteState,
    HermitianPreservingMap,
    QuantumChannel,
    apply_channel_on_A,
    isotropic_state,
    unitary_channel,
)
from cdplab.osd import operator_schmidt
from cdplab.sampling import random_classical_on_A, random_density, random_kraus, random_unitary
from cdplab.tomography import (
    SWEEP_COLUMNS,
    gue_noise,
    noise_sensitivity,
    reconstruct_channel,
    reconstruct_from_state,
    sensitivity_sweep,
    sweep_csv,
)

seeds = st.integers(min_value=0, max_value=2**32 - 1)


def test_round_trip_isotropic_unitary():
    ch = unitary_channel(random_unitary(2, seed=1))
    res = reconstruct_from_state(isotropic_state(2, 0.3), ch)
    assert res.residual_to_truth <= 1e-8
    assert res.conditioning == pytest.approx(2 / 0.3)
    x = random_density(2, seed=2)
    assert np.allclose(res.as_map()(x), ch(x), atol=1e-8)


@given(seeds, st.sampled_from([(2, 2), (2, 3), (3, 2)]))
def test_round_trip_random(seed, dims):
    d_in, d_out = dims
    rho = BipartiteState(d_in, d_in, random_density(d_in * d_in, seed=seed))
    ch = QuantumChannel.from_kraus(random_kraus(d_in, d_out, 2, seed=seed + 1))
    assert reconstruct_from_state(rho, ch).residual_to_truth <= 1e-8


def test_round_trip_with_larger_ancilla():
    rho = BipartiteState(2, 3, random_density(6, seed=3))
    ch = QuantumChannel.from_kraus(random_kraus(2, 2, 3, seed=4))
    assert reconstruct_from_state(rho, ch).residual_to_truth <= 1e-8


def test_non_cp_map_is_recovered():
    # The formula is linear, so any Hermiticity-preserving map comes back.
    transpose = HermitianPreservingMap(2, 2, np.eye(4)[[0, 2, 1, 3]])
    rho = isotropic_state(2, 0.6)
    res = reconstruct_channel(apply_channel_on_A(transpose, rho), operator_schmidt(rho), truth=transpose)
    assert res.residual_to_truth <= 1e-10


@settings(max_examples=5)
@given(seeds)
def test_classical_states_are_not_complete(seed):
    rho = BipartiteState(2, 2, random_classical_on_A(2, 2, seed=seed))
    with pytest.raises(NotTomographicallyComplete):
        reconstruct_from_state(rho, unitary_channel(random_unitary(2, seed=seed)))


def test_output_dimension_must_be_compatible():
    osd = operator_schmidt(isotropic_state(2, 0.5))
    with pytest.raises(InvalidInput):
        reconstruct_channel(np.eye(5) / 5, osd)


def test_gue_noise_has_requested_norm(rng):
    n = gue_noise(4, 1e-3, rng)
    assert np.linalg.norm(n, "fro") == pytest.approx(1e-3)
    assert np.allclose(n, n.conj().T)


def test_zero_noise_is_exact():
    st_ = noise_sensitivity(isotropic_state(2, 0.5), unitary_channel(random_unitary(2, seed=0)), 0.0, trials=3)
    assert st_.max_residual <= 1e-9


def test_noise_sensitivity_rejects_bad_arguments():
    with pytest.raises(InvalidInput):
        noise_sensitivity(isotropic_state(2, 0.5), unitary_channel(np.eye(2)), -1.0)


def test_noise_amplification_grows_as_weight_drops():
    ch = unitary_channel(random_unitary(2, seed=2016))
    rows = sensitivity_sweep(2, (1.0, 0.5, 0.1), ch, noise_level=1e-6, trials=20, seed=0)
    means = [r["mean_residual"] for r in rows]
    assert means[0] < means[1] < means[2]
    assert [r["r_min"] for r in rows] == pytest.approx([0.5, 0.25, 0.05])


def test_equal_r_min_gives_comparable_residuals():
    ch = unitary_channel(random_unitary(2, seed=9))
    iso = isotropic_state(2, 0.5)
    # Local unitary on the ancilla keeps every operator Schmidt coefficient.
    u = np.kron(np.eye(2), random_unitary(2, seed=10))
    rotated = BipartiteState(2, 2, u @ iso.rho @ u.conj().T)
    a = noise_sensitivity(iso, ch, 1e-6, trials=20, seed=1)
    b = noise_sensitivity(rotated, ch, 1e-6, trials=20, seed=2)
    assert a.r_min == pytest.approx(b.r_min)
    assert 1 / 3 <= a.mean_residual / b.mean_residual <= 3


def test_sweep_csv_layout():
    rows = [{"p": 0.5, "r_min": 0.25, "noise_level": 1e-6, "mean_residual": 1e-5, "max_residual": 2e-5, "trials": 4}]
    text = sweep_csv(rows)
    lines = text.strip().split("\n")
    assert lines[0] == ",".join(SWEEP_COLUMNS)
    assert lines[1].split(",")[-1] == "4"
