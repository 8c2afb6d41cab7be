import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cdplab.cdp import pure_witness_channels
from cdplab.diamond import (
    check_watt_inequality,
    conjugation_sup_check,
    diamond_norm,
    diamond_norm_ascent,
    diamond_norm_sdp,
    superop_one_norm,
    trace_distance,
)
from cdplab.errors import InvalidInput
from cdplab.objects import (
    HermitianPreservingMap,
    QuantumChannel,
    channel_difference,
    dephasing_channel,
    identity_channel,
    unitary_channel,
)
from cdplab.sampling import random_density, random_hermitian, random_kraus

seeds = st.integers(min_value=0, max_value=2**32 - 1)
plus = np.full((2, 2), 0.5)


def random_difference(seed, d=2):
    a = QuantumChannel.from_kraus(random_kraus(d, d, 2, seed=seed))
    b = QuantumChannel.from_kraus(random_kraus(d, d, 2, seed=seed + 1))
    return channel_difference(a, b)


def test_trace_distance_examples():
    assert trace_distance(np.eye(2) / 2, np.eye(2) / 2) == 0.0
    assert trace_distance(np.eye(2) / 2, np.diag([1.0, 0.0])) == pytest.approx(0.5)


def test_trace_distance_dimension_mismatch():
    with pytest.raises(InvalidInput):
        trace_distance(np.eye(2) / 2, np.eye(3) / 3)


@given(seeds)
def test_trace_distance_is_a_bounded_metric(seed):
    a, b, c = (random_density(3, seed=seed + k) for k in range(3))
    dab = trace_distance(a, b)
    assert 0.0 <= dab <= 1.0 + 1e-12
    assert dab == pytest.approx(trace_distance(b, a), abs=1e-14)
    assert dab <= trace_distance(a, c) + trace_distance(c, b) + 1e-12


def test_superop_one_norm_examples():
    zero = HermitianPreservingMap(2, 2, np.zeros((4, 4)))
    assert superop_one_norm(zero) == 0.0
    delta = channel_difference(identity_channel(2), dephasing_channel(2))
    assert np.sum(np.abs(np.linalg.eigvalsh(delta(plus)))) == pytest.approx(1.0)
    assert superop_one_norm(delta) == pytest.approx(1.0, abs=1e-9)


def test_superop_one_norm_matches_bloch_grid():
    delta = channel_difference(identity_channel(2), dephasing_channel(2))
    best = 0.0
    for theta in np.linspace(0, np.pi, 100):
        for phi in np.linspace(0, 2 * np.pi, 100):
            v = np.array([np.cos(theta / 2), np.exp(1j * phi) * np.sin(theta / 2)])
            best = max(best, np.sum(np.abs(np.linalg.eigvalsh(delta(np.outer(v, v.conj()))))))
    assert superop_one_norm(delta) == pytest.approx(best, abs=1e-3)
    assert superop_one_norm(delta) >= best - 1e-12


def test_sdp_examples():
    zero = channel_difference(identity_channel(2), identity_channel(2))
    assert diamond_norm_sdp(zero).value == 0.0
    l0, l1 = pure_witness_channels(2)
    res = diamond_norm_sdp(channel_difference(l0, l1))
    assert res.value == pytest.approx(2.0, abs=1e-6)
    assert abs(res.sdp_gap) <= 1e-6


def test_sdp_identity_vs_dephasing():
    delta = channel_difference(identity_channel(2), dephasing_channel(2))
    assert diamond_norm_sdp(delta).value == pytest.approx(1.0, abs=1e-6)


@pytest.mark.parametrize("d", [2, 3])
def test_single_channel_has_norm_one(d):
    ch = QuantumChannel.from_kraus(random_kraus(d, d, 3, seed=d))
    assert diamond_norm_sdp(ch).value == pytest.approx(1.0, abs=1e-6)


def test_ascent_on_antipodal_unitary():
    u = np.diag([1.0, np.exp(1j * np.pi)])
    delta = channel_difference(unitary_channel(u), identity_channel(2))
    asc = diamond_norm_ascent(delta)
    assert asc.value == pytest.approx(2.0, abs=1e-7)
    assert asc.value == pytest.approx(diamond_norm_sdp(delta).value, abs=1e-6)


def test_ascent_on_witness_pair():
    l0, l1 = pure_witness_channels(2)
    assert diamond_norm_ascent(channel_difference(l0, l1)).value >= 2 - 1e-7


@settings(max_examples=10)
@given(seeds)
def test_ascent_never_exceeds_sdp(seed):
    delta = random_difference(seed)
    asc = diamond_norm_ascent(delta, restarts=8, seed=seed).value
    sdp = diamond_norm_sdp(delta).value
    assert asc <= sdp + 1e-6
    assert asc >= sdp - 1e-5


def test_ascent_witness_attains_value():
    delta = random_difference(11)
    res = diamond_norm_ascent(delta)
    w = res.witness_input / np.linalg.norm(res.witness_input)
    from cdplab.objects import apply_channel_on_A

    out = apply_channel_on_A(delta, (np.outer(w, w.conj()), 2, 2))
    assert np.sum(np.abs(np.linalg.eigvalsh(out))) == pytest.approx(res.value, abs=1e-9)


def test_diamond_norm_both_reports_each_method():
    res = diamond_norm(random_difference(3), "both", restarts=8)
    assert res.sdp_value == res.value
    assert res.ascent_value <= res.sdp_value + 1e-6
    d = res.to_dict()
    assert set(d) >= {"value", "sdp_gap", "ascent_value", "witness_input"}
    with pytest.raises(InvalidInput):
        diamond_norm(random_difference(3), "guess")


def test_general_map_sdp_for_non_difference():
    # 2 * identity is Hermiticity preserving but not trace annihilating.
    m = identity_channel(2).scaled(2.0)
    assert diamond_norm_sdp(m).value == pytest.approx(2.0, abs=1e-5)


def test_hermitian_map_inequality_zero_input():
    delta = random_difference(5)
    assert check_watt_inequality(delta, np.zeros((4, 4))) == (0.0, 0.0)


@settings(max_examples=10)
@given(seeds)
def test_hermitian_map_inequality_random(seed):
    delta = random_difference(seed)
    x = random_hermitian(4, seed + 7)
    lhs, rhs = check_watt_inequality(delta, x)
    assert lhs <= rhs + 1e-8


@pytest.mark.parametrize("x, expected", [(np.eye(2), 1.0), (np.diag([3.0, -1.0]), 3.0)])
def test_conjugation_sup_examples(x, expected):
    best, inf_norm = conjugation_sup_check(x)
    assert inf_norm == pytest.approx(expected)
    assert best == pytest.approx(expected, abs=1e-9)


@settings(max_examples=5)
@given(seeds)
def test_conjugation_sup_matches_operator_norm(seed):
    x = random_hermitian(3, seed)
    best, inf_norm = conjugation_sup_check(x, samples=16, seed=seed)
    assert best == pytest.approx(inf_norm, abs=1e-6)
