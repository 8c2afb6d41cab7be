"""Channel discrimination power: exact values, proven bounds, witnesses, estimators.

CDP_A(rho) = inf over channel pairs of ||(L0 - L1) (x) id [rho]||_1 / ||L0 - L1||_diamond.
Every number here is either a proven bound or a ratio realized by an explicit
pair of channels; the adversarial estimate is the smallest realized ratio and so
is an upper bound on the true infimum.

Searches with random ingredients run in a canonical local frame of the state
(see :func:`canonical_frame`), so estimates do not move when the state is
conjugated by a unitary on A.
"""

from __future__ import annotations

import itertools
import math
import threading
import warnings
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np
from scipy.optimize import minimize

from . import matrixkit as mk
from ._parallel import ordered_map, split_seed
from .diamond import diamond_norm_ascent, diamond_norm_sdp
from .errors import InvalidInput, NotCompletelyPositive
from .objects import (
    BipartiteState,
    HermitianPreservingMap,
    PureBipartiteState,
    QuantumChannel,
    apply_channel_on_A,
    bell_vector,
    block_dephasing_channel,
    channel_difference,
    dephasing_channel,
    identity_channel,
    isotropic_state,
    process_on_B,
    schmidt_decompose,
    unitary_channel,
)
from .osd import (
    DEFAULT_THRESHOLD,
    OperatorSchmidtDecomposition,
    degenerate_blocks,
    operator_schmidt,
    passes_realignment,
    r_cn,
    r_cn_corrected,
    realignment_sum,
)
from .sampling import random_hermitian, random_kraus, random_unitary, rng_from

ESTIMATOR_MARGIN = 1e-4
DEFAULT_ROTATIONS = 16
DEFAULT_BASIS_BUDGET = 64
_FRAME_SEED = 20160302
_SEARCH_GRID = 2.0**36


@dataclass(frozen=True, eq=False)
class CdpReport:
    state_id: str
    lower_bound: float
    upper_bound: float
    adversarial_estimate: float
    witness_channels: tuple
    bound_provenance: list
    exact: float | None = None

    def to_dict(self) -> dict:
        from .io import channel_to_dict

        return {
            "state_id": self.state_id,
            "lower_bound": self.lower_bound,
            "upper_bound": self.upper_bound,
            "adversarial_estimate": self.adversarial_estimate,
            "exact": self.exact,
            "bound_provenance": [{"tag": t, "value": v} for t, v in self.bound_provenance],
            "witness_channels": [channel_to_dict(c) for c in self.witness_channels],
        }


@dataclass(frozen=True, eq=False)
class PerturbationChannelPair:
    """L_i[X] = Tr(X) 1/dA + eps Tr(A X) Y_i, i = 0, 1, for a Hermitian probe A."""

    epsilon: float
    probe_op: np.ndarray = field(repr=False)
    Y0: np.ndarray = field(repr=False)
    Y1: np.ndarray = field(repr=False)
    channels: tuple = field(repr=False)

    @property
    def cp_cap(self) -> float:
        return perturbation_cp_cap(self.probe_op, self.Y0, self.Y1)

    @property
    def difference(self) -> HermitianPreservingMap:
        return channel_difference(*self.channels)


# --- ratios ---------------------------------------------------------------


def output_distance(state: BipartiteState, delta: HermitianPreservingMap) -> float:
    """||(Delta (x) id)[rho]||_1."""
    return mk.trace_norm(apply_channel_on_A(delta, state))


def discrimination_ratio(state: BipartiteState, channels, diamond: float | None = None,
                         method: str = "ascent", restarts: int = 8, seed=0) -> float:
    """||Delta (x) id[rho]||_1 / ||Delta||_diamond for a channel pair (or Delta itself)."""
    delta = channels if isinstance(channels, HermitianPreservingMap) else channel_difference(*channels)
    if diamond is None:
        if method == "sdp":
            diamond = diamond_norm_sdp(delta).value
        else:
            diamond = diamond_norm_ascent(delta, restarts=restarts, seed=seed).value
    if diamond <= 1e-14:
        raise InvalidInput("channels are identical; the ratio is undefined")
    return output_distance(state, delta) / diamond


def probe_image(state: BipartiteState, a) -> np.ndarray:
    """Tr_A[(A (x) 1) rho], an operator on B."""
    r4 = state.rho.reshape(state.dA, state.dB, state.dA, state.dB)
    return np.einsum("ac,cbae->be", a, r4)


def probe_ratio(state: BipartiteState, a) -> float:
    """||Tr_A[(A (x) 1) rho]||_1 / ||A||_inf, the ratio realized by the perturbation pair on A.

    For an OSD factor A_l this is r_l ||B_l||_1 / ||A_l||_inf.
    """
    a_inf = mk.p_norm(a, np.inf)
    if a_inf < 1e-300:
        return math.inf
    return mk.trace_norm(probe_image(state, a)) / a_inf


# --- canonical frame ------------------------------------------------------------


def _frame_functionals(state: BipartiteState) -> list[np.ndarray]:
    rng = np.random.default_rng(_FRAME_SEED)
    r4 = state.rho.reshape(state.dA, state.dB, state.dA, state.dB)
    out = []
    for _ in range(3):
        g = random_hermitian(state.dB, rng)
        out.append(np.einsum("eb,abce->ac", g, r4))
    out.append(state.rho_A)
    return out


def canonical_frame(state: BipartiteState, rtol: float = 1e-7) -> np.ndarray:
    """Unitary W on A with W(U rho U^dag) = U W(rho) up to a global phase.

    Columns are eigenvectors of a fixed functional Tr_B[(1 (x) G) rho]; their phases are
    fixed by making the first row of a second functional real and positive. Falls back
    to the identity when every functional is degenerate (e.g. OSR-deficient product states).
    """
    ms = _frame_functionals(state)
    for i, m in enumerate(ms):
        w, v = np.linalg.eigh(m)
        scale = max(np.max(np.abs(w)), 1e-300)
        if np.min(np.diff(w)) <= rtol * scale:
            continue
        for j, m2 in enumerate(ms):
            if j == i:
                continue
            row = (mk.dagger(v) @ m2 @ v)[0, 1:]
            scale2 = max(np.max(np.abs(m2)), 1e-300)
            if np.min(np.abs(row)) <= rtol * scale2:
                continue
            v = v.copy()
            v[:, 1:] *= np.conj(row) / np.abs(row)
            return v
    return np.eye(state.dA, dtype=np.complex128)


def _rotate_A(state: BipartiteState, w: np.ndarray) -> BipartiteState:
    k = np.kron(w, np.eye(state.dB))
    rho = mk.dagger(k) @ state.rho @ k
    return BipartiteState(state.dA, state.dB, 0.5 * (rho + mk.dagger(rho)))


def canonical_state(state: BipartiteState) -> tuple[BipartiteState, np.ndarray]:
    """(W^dag rho W, W) with W = canonical_frame(rho), entries rounded to a 2^-36 grid.

    States related by a unitary on A have canonical forms that agree to rounding error.
    The searches run on this matrix and are not smooth in it, so the rounding makes both
    runs see the same bits (unless an entry falls within ~1e-15 of a grid boundary).
    Searches report their final values on the unrounded state.
    """
    w = canonical_frame(state)
    rho = _rotate_A(state, w).rho
    rho = (np.round(rho.real * _SEARCH_GRID) + 1j * np.round(rho.imag * _SEARCH_GRID)) / _SEARCH_GRID
    rho = 0.5 * (rho + mk.dagger(rho))
    return BipartiteState(state.dA, state.dB, rho / np.trace(rho).real), w


# --- pure states ------------------------------------------------------------


def cdp_pure_exact(psi: PureBipartiteState, side: str = "A") -> float:
    """CDP of a pure state on the given side: p_{d_side}, zero when the Schmidt rank is smaller.

    With dA > dB the A-side value is 0 (Schmidt rank at most dB < dA).
    """
    if not isinstance(psi, PureBipartiteState):
        raise InvalidInput("expected a PureBipartiteState (see schmidt_decompose)")
    if side not in ("A", "B"):
        raise InvalidInput(f"side must be 'A' or 'B', got {side!r}")
    d = psi.dA if side == "A" else psi.dB
    return psi.p(d)


def pure_witness_channels(dA: int, basis=None) -> tuple[QuantumChannel, QuantumChannel]:
    """The perfectly distinguishable pair with outputs on span{|0>,|1>,|2>}.

    L0[X] = Tr(PX)|2><2| + <v|X|v> |0><0|,  L1[X] = Tr(PX)|2><2| + <v|X|v> |1><1|,
    where v is the last column of ``basis`` (|dA-1> by default) and P = 1 - |v><v|.
    """
    if int(dA) != dA or dA < 2:
        raise InvalidInput(f"witness channels need dA >= 2, got {dA!r}")
    u = np.eye(dA, dtype=np.complex128) if basis is None else mk.as_matrix(basis, square=True)
    ket = np.eye(3, dtype=np.complex128)
    rest = [np.outer(ket[:, 2], np.conj(u[:, i])) for i in range(dA - 1)]
    flag = np.conj(u[:, dA - 1])
    l0 = QuantumChannel.from_kraus(rest + [np.outer(ket[:, 0], flag)])
    l1 = QuantumChannel.from_kraus(rest + [np.outer(ket[:, 1], flag)])
    return l0, l1


def pure_state_witness(psi: PureBipartiteState) -> tuple[QuantumChannel, QuantumChannel]:
    """Witness pair in the Schmidt basis of A, flagged on the dA-th Schmidt vector."""
    basis = psi.basis_A
    if basis.shape[1] < psi.dA:  # dA > dB: complete the Schmidt vectors to a basis
        q, _ = np.linalg.qr(np.hstack([basis, np.eye(psi.dA)]))
        basis = np.hstack([basis, q[:, basis.shape[1]:psi.dA]])
    return pure_witness_channels(psi.dA, basis)


def eigenbasis_witness(state: BipartiteState) -> tuple[float, tuple[QuantumChannel, QuantumChannel]]:
    """Witness pair flagged on the least-populated eigenvector v of rho_A.

    Delta (x) id[rho] = (|0><0| - |1><1|) (x) <v|rho|v>_A, so the ratio is exactly lambda_min(rho_A).
    """
    w, v = np.linalg.eigh(state.rho_A)
    basis = np.roll(v, -1, axis=1)
    return max(float(w[0]), 0.0), pure_witness_channels(state.dA, basis)


def cdp_lower_bound_pure_lemma(psi, map_: HermitianPreservingMap, diamond: float | None = None) -> tuple[float, float]:
    """(p_d ||Delta||_diamond, ||Delta (x) id[psi]||_1) for a d x d pure state."""
    if not isinstance(psi, PureBipartiteState):
        raise InvalidInput("expected a PureBipartiteState")
    if psi.dA != psi.dB or map_.d_in != psi.dA:
        raise InvalidInput("lemma needs dA == dB == map input dimension")
    if diamond is None:
        diamond = diamond_norm_sdp(map_).value
    lhs = psi.p(psi.dA) * diamond
    rhs = output_distance(psi.density(), map_)
    assert lhs <= rhs + 1e-7, (lhs, rhs)
    return lhs, rhs


# --- operator Schmidt bounds ----------------------------------------------------


def _frame_directions(osd: OperatorSchmidtDecomposition) -> np.ndarray:
    """Gell-Mann elements carried into the canonical frame, as coordinate columns."""
    state = BipartiteState(osd.dA, osd.dB, osd.reconstruct())
    w = canonical_frame(state)
    gm = mk.hermitian_operator_basis(osd.dA)
    cols = [[np.real(np.trace(gi @ w @ gj @ mk.dagger(w))) for gi in gm] for gj in gm]
    return np.array(cols).T


def upper_bound_candidates(osd: OperatorSchmidtDecomposition, rotations: int = DEFAULT_ROTATIONS, seed=0):
    """List of (ratio, r, a_coords, b_coords) over OSD representatives.

    Candidates: the canonical factors, and in every degenerate block the unit vectors
    x -> (U x, V x) obtained by projecting each frame-rotated Gell-Mann element into the
    block, plus ``rotations`` seeded random combinations of those projections. Working
    from the state's canonical frame keeps the set covariant under local unitaries.
    """
    dA, dB = osd.dA, osd.dB
    u, v = osd.left, osd.right
    gm = np.array(mk._gell_mann(dA))
    gmb = np.array(mk._gell_mann(dB))

    def norms(a_c, b_c):
        a = np.tensordot(a_c, gm, axes=1)
        b = np.tensordot(b_c, gmb, axes=1)
        return mk.p_norm(a, np.inf), mk.trace_norm(b)

    out = []
    for i in range(dA * dA):
        r = osd.r_effective(i + 1)
        b_c = v[:, i] if i < dB * dB else np.zeros(dB * dB)
        if r == 0.0:
            out.append((0.0, 0.0, u[:, i], b_c))
            continue
        a_inf, b_one = norms(u[:, i], b_c)
        out.append((r * b_one / a_inf, r, u[:, i], b_c))
    blocks = [b for b in degenerate_blocks(osd) if len(b) > 1 and osd.r_effective(b[-1] + 1) > 0.0]
    if not blocks:
        return out
    dirs = _frame_directions(osd)
    rng = rng_from(seed)
    for block in blocks:
        r = osd.r(block[0] + 1)
        ub, vb = u[:, block], v[:, block]
        proj = ub.T @ dirs
        xs = list(proj.T) + [proj @ rng.standard_normal(dA * dA) for _ in range(rotations)]
        for x in xs:
            nx = np.linalg.norm(x)
            if nx < 1e-6:
                continue
            a_c, b_c = ub @ (x / nx), vb @ (x / nx)
            a_inf, b_one = norms(a_c, b_c)
            out.append((r * b_one / a_inf, r, a_c, b_c))
    return out


def _check_hermitian_factors(osd: OperatorSchmidtDecomposition):
    for op in list(osd.ops_A) + list(osd.ops_B):
        if not mk.is_hermitian(op, 1e-9):
            raise InvalidInput("operator Schmidt factors must be Hermitian")


def cdp_bounds_general(osd: OperatorSchmidtDecomposition, dA: int | None = None, dB: int | None = None,
                       rotations: int = DEFAULT_ROTATIONS, seed=0, clamp: bool = True) -> tuple[float, float]:
    """(r_{dA^2} / dA^{5/2}, min_i r_i ||B_i||_1 / ||A_i||_inf), the latter clamped at 1/dA."""
    dA = osd.dA if dA is None else dA
    dB = osd.dB if dB is None else dB
    if (dA, dB) != (osd.dA, osd.dB):
        raise InvalidInput("dimensions do not match the decomposition")
    _check_hermitian_factors(osd)
    lower = osd.r_effective(dA * dA) / dA**2.5
    upper = min(c[0] for c in upper_bound_candidates(osd, rotations, seed))
    if clamp:
        upper = min(upper, 1.0 / dA)
    return lower, upper


def perturbation_cp_cap(probe_op, y0, y1) -> float:
    d = probe_op.shape[0]
    return 1.0 / (d * mk.p_norm(probe_op, np.inf) * max(mk.p_norm(y0, np.inf), mk.p_norm(y1, np.inf)))


def probe_channels(a, Y0=None, Y1=None, epsilon: float | None = None) -> PerturbationChannelPair:
    """Channels L_i[X] = Tr(X) 1/d + eps Tr(A X) Y_i; Choi 1/d (x) 1 + eps Y_i (x) A^T."""
    a = mk.hermitize(a, 1e-9)
    d = a.shape[0]
    gm = mk.hermitian_operator_basis(d)
    y0 = gm[1] if Y0 is None else mk.hermitize(Y0, 1e-10)
    y1 = -gm[1] if Y1 is None else mk.hermitize(Y1, 1e-10)
    if y0.shape != (d, d) or y1.shape != (d, d):
        raise InvalidInput("Y0 and Y1 must act on the probe's space")
    if abs(np.trace(y0)) > 1e-10 or abs(np.trace(y1)) > 1e-10:
        raise InvalidInput("Y0 and Y1 must be traceless")
    if np.allclose(y0, y1, atol=1e-14):
        raise InvalidInput("Y0 and Y1 must differ")
    cap = perturbation_cp_cap(a, y0, y1)
    eps = 0.9 * cap if epsilon is None else float(epsilon)
    if eps <= 0:
        raise InvalidInput("epsilon must be positive")
    if eps > cap * (1 + 1e-12):
        raise NotCompletelyPositive(f"epsilon {eps:.3e} exceeds the complete-positivity cap {cap:.3e}")
    base = np.kron(np.eye(d) / d, np.eye(d))
    chans = tuple(QuantumChannel.from_choi(base + eps * np.kron(y, a.T), d, d) for y in (y0, y1))
    return PerturbationChannelPair(eps, a, y0, y1, chans)


def perturbation_pair(osd: OperatorSchmidtDecomposition, l: int, Y0=None, Y1=None, epsilon: float | None = None,
                      check_state: BipartiteState | None = None):
    """(pair, r_l ||B_l||_1 / ||A_l||_inf) for the perturbation pair probing OSD factor A_l (1-based).

    With ``check_state`` the ratio is also computed numerically (output trace norm over an
    ascent diamond norm) and both the numerator and the denominator must match their
    closed forms within 1e-7.
    """
    dA = osd.dA
    if not 1 <= l <= dA * dA:
        raise InvalidInput(f"index l={l} out of range 1..{dA * dA}")
    if l > osd.rank:
        raise InvalidInput(f"index l={l} exceeds the operator Schmidt rank {osd.rank}")
    r = osd.r(l)
    a, b = osd.ops_A[l - 1], osd.ops_B[l - 1]
    pair = probe_channels(a, Y0, Y1, epsilon)
    a_inf, b_one = mk.p_norm(a, np.inf), mk.trace_norm(b)
    ratio = r * b_one / a_inf
    if check_state is not None:
        y_one = mk.trace_norm(pair.Y0 - pair.Y1)
        delta = pair.difference
        num = output_distance(check_state, delta)
        den = diamond_norm_ascent(delta, restarts=8).value
        eps = pair.epsilon
        if abs(num - r * eps * y_one * b_one) > 1e-7 * max(1.0, num):
            raise AssertionError(f"numerator {num} != {r * eps * y_one * b_one}")
        if abs(den - eps * y_one * a_inf) > 1e-7 * max(1.0, den):
            raise AssertionError(f"denominator {den} != {eps * y_one * a_inf}")
        if abs(num / den - ratio) > 1e-7:
            raise AssertionError(f"ratio {num / den} != {ratio}")
    return pair, ratio


# --- isotropic ----------------------------------------------------------------------


def cdp_isotropic_bounds(d: int, p: float) -> tuple[float, float]:
    """(p / (d+1-p), min(2p/d, 1/d))."""
    if int(d) != d or d < 2:
        raise InvalidInput(f"d must be an integer >= 2, got {d!r}")
    if not 0.0 <= p <= 1.0:
        raise InvalidInput(f"p must lie in [0, 1], got {p!r}")
    return p / (d + 1 - p), min(2 * p / d, 1 / d)


def isotropic_weight(state: BipartiteState, atol: float = 1e-10) -> float | None:
    """p if the state equals the isotropic state of weight p, else None."""
    if state.dA != state.dB:
        return None
    d = state.dA
    phi = bell_vector(d)
    fid = float(np.real(np.conj(phi) @ state.rho @ phi))
    p = (fid - 1 / d**2) / (1 - 1 / d**2)
    if not -atol <= p <= 1 + atol:
        return None
    p = min(max(p, 0.0), 1.0)
    if np.max(np.abs(isotropic_state(d, p).rho - state.rho)) > atol:
        return None
    return p


# --- disturbance bounds ---------------------------------------------------------------------


def _disturbance(rho: np.ndarray, dA: int, dB: int, u: np.ndarray, labels) -> float:
    """||rho - (Pi (x) id)[rho]||_1, Pi the (block) dephasing in the columns of u."""
    k = np.kron(u, np.eye(dB))
    ru = (mk.dagger(k) @ rho @ k).reshape(dA, dB, dA, dB)
    lab = np.asarray(labels)
    off = ru * (lab[:, None] != lab[None, :])[:, None, :, None]
    return float(np.sum(np.abs(np.linalg.eigvalsh(off.reshape(dA * dB, dA * dB)))))


@lru_cache(maxsize=256)
def _basis_search(rho_bytes: bytes, dA: int, dB: int, labels: tuple, budget: int, seed: int):
    """Minimize the (block) dephasing disturbance over bases on A; returns (value, basis)."""
    rho = np.frombuffer(rho_bytes, dtype=np.complex128).reshape(dA * dB, dA * dB)
    state = BipartiteState(dA, dB, rho.copy())
    rng = rng_from(seed)
    starts = [np.linalg.eigh(state.rho_A)[1], np.eye(dA, dtype=np.complex128)]
    r4 = rho.reshape(dA, dB, dA, dB)
    for _ in range(3):
        g = random_hermitian(dB, rng)
        starts.append(np.linalg.eigh(np.einsum("eb,abce->ac", g, r4))[1])
    starts.extend(random_unitary(dA, rng) for _ in range(max(budget - len(starts), 0)))
    obj = lambda u: _disturbance(rho, dA, dB, u, labels)
    scored = sorted(((obj(u), i) for i, u in enumerate(starts)), key=lambda t: (t[0], t[1]))
    best_val, best_u = scored[0][0], starts[scored[0][1]]

    def local(u0):
        def f(x):
            return obj(u0 @ mk.unitary_from_generator(mk.hermitian_from_params(x, dA)))

        res = minimize(f, np.zeros(dA * dA), method="Powell",
                       options={"xtol": 1e-9, "ftol": 1e-13, "maxfev": 600 * dA * dA})
        return float(res.fun), u0 @ mk.unitary_from_generator(mk.hermitian_from_params(res.x, dA))

    if best_val > 1e-12:
        for val, u in ordered_map(local, [starts[i] for _, i in scored[:3]]):
            if val < best_val:
                best_val, best_u = val, u
    best_u = best_u.copy()
    best_u.setflags(write=False)
    return max(best_val, 0.0), best_u


def _search(state_c: BipartiteState, labels, budget, seed):
    rho = np.ascontiguousarray(state_c.rho, dtype=np.complex128)
    return _basis_search(rho.tobytes(), state_c.dA, state_c.dB, tuple(labels), int(budget), int(seed))


def cdp_discord_bound(state: BipartiteState, basis_search_budget: int = DEFAULT_BASIS_BUDGET, seed: int = 0,
                      return_basis: bool = False):
    """min over projective measurements Pi_A of ||rho - (Pi_A (x) id)[rho]||_1, i.e. 2 D(rho, Pi[rho]).

    Starts: the eigenbasis of rho_A, eigenbases of Tr_B[(1 (x) G) rho] for random G, and random
    unitaries (``basis_search_budget`` in total); the best three are refined over U exp(iH).
    """
    state_c, w = canonical_state(state)
    _, u = _search(state_c, range(state.dA), basis_search_budget, seed)
    basis = w @ u
    val = _disturbance_of(state, dephasing_channel(state.dA, basis))
    return (val, basis) if return_basis else val


def _disturbance_of(state: BipartiteState, channel) -> float:
    return mk.trace_norm(state.rho - apply_channel_on_A(channel, state))


def _set_partitions(n: int):
    """Labelings of range(n) into at least two blocks (canonical form, no duplicates)."""
    seen = []
    for labels in itertools.product(range(n), repeat=n):
        mapping = {}
        canon = tuple(mapping.setdefault(x, len(mapping)) for x in labels)
        if len(mapping) >= 2 and canon not in seen:
            seen.append(canon)
    return seen


def _reduction_family(dA: int):
    return _set_partitions(dA) if dA <= 4 else [tuple(range(dA))]


def _labels_channel(u, labels) -> QuantumChannel:
    dA = u.shape[0]
    if len(set(labels)) == dA:
        return dephasing_channel(dA, u)
    projs = []
    for blk in sorted(set(labels)):
        cols = u[:, [i for i in range(dA) if labels[i] == blk]]
        projs.append(cols @ mk.dagger(cols))
    return block_dephasing_channel(projs)


def cdp_osr_reduction_bound(state: BipartiteState, channel_family_budget: int = DEFAULT_BASIS_BUDGET, seed: int = 0,
                            threshold: float = DEFAULT_THRESHOLD, return_channel: bool = False):
    """min ||rho - (L (x) id)[rho]||_1 over searched channels L that push the OSR below dA^2.

    Family: the identity (when the OSR is already deficient), and complete dephasings and
    coarse-grainings (block dephasings) in optimized bases. Each candidate's OSR drop is
    verified after the fact with the given threshold.
    """
    dA = state.dA
    if operator_schmidt(state, threshold).rank < dA * dA:
        return (0.0, identity_channel(dA)) if return_channel else 0.0
    state_c, w = canonical_state(state)
    best_val, best_channel = math.inf, None
    for labels in _reduction_family(dA):
        _, u = _search(state_c, labels, channel_family_budget, seed)
        channel = _labels_channel(w @ u, labels)
        processed = BipartiteState(dA, state.dB, apply_channel_on_A(channel, state))
        if operator_schmidt(processed, threshold).rank >= dA * dA:
            continue
        val = _disturbance_of(state, channel)
        if val < best_val:
            best_val, best_channel = val, channel
    return (best_val, best_channel) if return_channel else best_val


# --- adversarial estimator ------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class Estimate:
    value: float
    witness: tuple
    family: str
    candidates: int

    def __iter__(self):
        return iter((self.value, self.witness))


def _refine_probe(state: BipartiteState, a0: np.ndarray) -> tuple[float, np.ndarray]:
    d = state.dA
    gm = np.array(mk._gell_mann(d))
    x0 = np.real(np.einsum("kij,ji->k", gm, a0))
    f = lambda x: probe_ratio(state, np.tensordot(x, gm, axes=1))
    res = minimize(f, x0, method="Powell", options={"xtol": 1e-10, "ftol": 1e-14, "maxfev": 150 * d * d})
    a = np.tensordot(res.x, gm, axes=1)
    return probe_ratio(state, a), a


class _ProbeCache(threading.local):
    def __init__(self):
        self.problems = {}


_PROBE_CACHE = _ProbeCache()


def _build_probe_sdp(dA: int, dB: int):
    """min ||Tr_A[(A (x) 1) rho]||_1 s.t. -1 <= A <= 1, <v|A|v> = 1, for A in Gell-Mann coordinates.

    The constraints force ||A||_inf = 1, so the optimum is the smallest probe ratio among
    probes having v as an eigenvector of eigenvalue ||A||_inf.
    """
    import cvxpy as cp

    k = dA * dA
    gm = np.array(mk._gell_mann(dA))
    x = cp.Variable(k)
    l_re = cp.Parameter((dB * dB, k))
    l_im = cp.Parameter((dB * dB, k))
    g = cp.Parameter(k)
    image = cp.reshape(l_re @ x, (dB, dB), order="C") + 1j * cp.reshape(l_im @ x, (dB, dB), order="C")
    probe = cp.reshape(gm.reshape(k, k).T @ x, (dA, dA), order="C")
    pos = cp.Variable((dB, dB), hermitian=True)
    neg = cp.Variable((dB, dB), hermitian=True)
    upper = cp.Variable((dA, dA), hermitian=True)
    lower = cp.Variable((dA, dA), hermitian=True)
    problem = cp.Problem(cp.Minimize(cp.real(cp.trace(pos + neg))), [
        pos >> 0,
        neg >> 0,
        pos - neg == image,
        upper >> 0,
        lower >> 0,
        upper == np.eye(dA) - probe,
        lower == np.eye(dA) + probe,
        g @ x == 1,
    ])
    return x, l_re, l_im, g, problem


def _polish_probe(state: BipartiteState, a: np.ndarray, rounds: int = 8) -> tuple[float, np.ndarray]:
    """Convex re-optimization of a probe with its top eigenvector held fixed.

    Derivative-free searches stall on the kinks of the trace norm; with the eigenvector v
    fixed the problem is a small SDP. Each round re-reads v from the improved probe.
    """
    import cvxpy as cp

    dA, dB = state.dA, state.dB
    key = (dA, dB)
    if key not in _PROBE_CACHE.problems:
        _PROBE_CACHE.problems[key] = _build_probe_sdp(dA, dB)
    x, l_re, l_im, g, problem = _PROBE_CACHE.problems[key]
    gm = np.array(mk._gell_mann(dA))
    images = np.array([probe_image(state, op).reshape(-1) for op in gm]).T
    l_re.value, l_im.value = images.real.copy(), images.imag.copy()
    a = 0.5 * (a + mk.dagger(a))
    best = probe_ratio(state, a)
    for _ in range(rounds):
        w, v = np.linalg.eigh(a)
        top = int(np.argmax(np.abs(w)))
        vec = v[:, top]
        g.value = np.real(np.einsum("i,kij,j->k", np.conj(vec), gm, vec)) * np.sign(w[top])
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", UserWarning)
            try:
                problem.solve(solver="CLARABEL", warm_start=False, tol_gap_abs=1e-11, tol_gap_rel=1e-11, tol_feas=1e-11)
            except cp.SolverError:
                break
        if problem.status not in ("optimal", "optimal_inaccurate") or x.value is None:
            break
        cand = np.tensordot(x.value, gm, axes=1)
        val = probe_ratio(state, cand)
        if val >= best - 1e-13:
            break
        best, a = val, cand
    return best, a


def _off_diagonal_probes(u: np.ndarray, labels) -> list[np.ndarray]:
    d = u.shape[0]
    out = []
    for i, j in itertools.combinations(range(d), 2):
        if labels[i] == labels[j]:
            continue
        e = np.outer(u[:, i], np.conj(u[:, j]))
        out.append(e + mk.dagger(e))
        out.append(1j * (e - mk.dagger(e)))
    return out


def _random_channel(rng, d_in, d_out) -> QuantumChannel:
    n_min = -(-d_in // d_out)
    n_kraus = int(rng.integers(n_min, n_min + 3))
    return QuantumChannel.from_kraus(random_kraus(d_in, d_out, n_kraus, rng))


def _pair_ratio(state, pair, restarts, rng):
    delta = channel_difference(*pair)
    # any ascent value is a valid lower bound on the diamond norm, so a short run suffices
    den = diamond_norm_ascent(delta, restarts=restarts, seed=rng, max_iter=300, tol=1e-12).value
    if den < 1e-8:
        return math.inf
    return output_distance(state, delta) / den


def _channel_from_isometry(v, d_out) -> QuantumChannel:
    q, r = np.linalg.qr(v)
    q = q * (np.diag(r) / np.abs(np.diag(r)))
    n = q.shape[0] // d_out
    return QuantumChannel.from_kraus([q[k * d_out:(k + 1) * d_out] for k in range(n)])


def _refine_pair(state, pair, ratio, rng, steps, restarts):
    """Random local search on the Stinespring isometries; accepts only improvements."""
    step = 0.2
    best, best_pair = ratio, pair
    for _ in range(steps):
        new = []
        for c in best_pair:
            v = np.vstack(c.kraus)
            g = rng.standard_normal(v.shape) + 1j * rng.standard_normal(v.shape)
            new.append(_channel_from_isometry(v + step * g, c.d_out))
        val = _pair_ratio(state, new, restarts, rng)
        if val < best:
            best, best_pair = val, tuple(new)
        else:
            step *= 0.7
    return best, best_pair


def cdp_adversarial_estimate(state: BipartiteState, budget: int = 16, seed=0, refine_steps: int = 12,
                             rotations: int = DEFAULT_ROTATIONS, threshold: float = DEFAULT_THRESHOLD,
                             basis_search_budget: int = DEFAULT_BASIS_BUDGET, ascent_restarts: int = 3) -> Estimate:
    """Smallest realized discrimination ratio; an upper bound on CDP_A.

    Families:
      (a) the flagged pair on the least-populated eigenvector of rho_A (ratio lambda_min(rho_A));
      (b) perturbation pairs on every OSD factor and degenerate-block representative, on
          operators off-diagonal in the bases found by the discord and coarse-graining
          searches, and Powell refinements of the best three followed by a convex polish
          with the top eigenvector fixed (ratio computed exactly);
      (c) ``budget`` random CPTP pairs with output dimension 2..dA+1, the best two refined
          by random local search. Diamond norms come from the ascent, a lower bound, so each
          ratio is at least the true ratio of its pair.
    Family (b) contains the operator-Schmidt upper-bound candidates, so the estimate never exceeds that upper
    bound, and its off-diagonal probes keep it below the discord and OSR-reduction bounds.
    """
    dA = state.dA
    ratio_a, pair_a = eigenbasis_witness(state)
    best = (ratio_a, pair_a, "eigenbasis")
    count = 1

    osd = operator_schmidt(state, threshold)
    lower = osd.r_effective(dA * dA) / dA**2.5
    cands = upper_bound_candidates(osd, rotations)
    count += len(cands)
    gm = np.array(mk._gell_mann(dA))
    top = min(cands, key=lambda c: c[0])
    if top[0] < best[0]:
        best = (top[0], probe_channels(np.tensordot(top[2], gm, axes=1)).channels, "perturbation")
    if best[0] <= 0.0:
        return Estimate(0.0, tuple(best[1]), best[2], count)

    state_c, w = canonical_state(state)
    # Candidates recomputed on the rounded canonical state so the search input is bit-stable.
    probes = [np.tensordot(c[2], gm, axes=1) for c in upper_bound_candidates(operator_schmidt(state_c, threshold), rotations)]
    for labels in _reduction_family(dA):
        _, u = _search(state_c, labels, basis_search_budget, 0)
        probes.extend(_off_diagonal_probes(u, labels))
    scored = sorted(((probe_ratio(state_c, a), i) for i, a in enumerate(probes)), key=lambda t: (t[0], t[1]))
    count += len(probes)
    refined = [_refine_probe(state_c, probes[i]) for _, i in scored[:3]]
    refined.append((scored[0][0], probes[scored[0][1]]))
    refined += [_polish_probe(state_c, a) for _, a in refined]
    _, a_c = min(refined, key=lambda t: t[0])
    a = w @ a_c @ mk.dagger(w)
    val = probe_ratio(state, a)
    if val < best[0]:
        best = (val, probe_channels(a).channels, "perturbation")

    if budget > 0:
        seeds = split_seed(seed, 2)
        rng = rng_from(seeds[0])
        outs = [int(rng.integers(2, dA + 2)) for _ in range(budget)]

        def evaluate(item):
            d_out, s = item
            r = rng_from(s)
            pair = (_random_channel(r, dA, d_out), _random_channel(r, dA, d_out))
            return _pair_ratio(state_c, pair, ascent_restarts, r), pair

        results = ordered_map(evaluate, zip(outs, split_seed(seeds[1], budget)))
        count += len(results)
        order = sorted(range(len(results)), key=lambda i: (results[i][0], i))
        back = unitary_channel(mk.dagger(w))
        for i in order[:2]:
            ratio, pair = _refine_pair(state_c, results[i][1], results[i][0], rng, refine_steps, ascent_restarts)
            count += refine_steps
            if ratio < best[0]:
                best = (ratio, tuple(c.compose(back) for c in pair), "random")

    value = float(best[0])
    assert value >= lower - 1e-8, (value, lower)
    return Estimate(value, tuple(best[1]), best[2], count)


# --- structural checks -------------------------------------------------------------------------


@dataclass(frozen=True)
class ContinuityRecord:
    estimate_rho: float
    estimate_sigma: float
    bound_diff: float
    trace_dist: float
    holds: bool

    def __iter__(self):
        return iter((self.bound_diff, self.trace_dist))


def cdp_continuity_check(rho: BipartiteState, sigma: BipartiteState, budget: int = 8, seed=0) -> ContinuityRecord:
    """Compare |est(rho) - est(sigma)| with ||rho - sigma||_1 (estimator margin 1e-4)."""
    if (rho.dA, rho.dB) != (sigma.dA, sigma.dB):
        raise InvalidInput("states have different dimensions")
    e1 = cdp_adversarial_estimate(rho, budget=budget, seed=seed).value
    e2 = cdp_adversarial_estimate(sigma, budget=budget, seed=seed).value
    diff = abs(e1 - e2)
    dist = mk.trace_norm(rho.rho - sigma.rho)
    return ContinuityRecord(e1, e2, diff, dist, diff <= dist + ESTIMATOR_MARGIN)


@dataclass(frozen=True)
class MonotonicityRecord:
    bounds_before: tuple
    bounds_after: tuple
    estimate_before: float
    estimate_after: float
    exact_before: float | None
    exact_after: float | None
    holds: bool


def pure_of(state: BipartiteState, atol: float = 1e-10) -> PureBipartiteState | None:
    """Schmidt form of a pure density matrix, or None for mixed states."""
    if not state.is_pure(atol):
        return None
    w, v = np.linalg.eigh(state.rho)
    psi = v[:, -1] / np.linalg.norm(v[:, -1])
    return schmidt_decompose(psi, state.dA, state.dB)


def cdp_monotonicity_check(state: BipartiteState, gamma_B: QuantumChannel, budget: int = 8, seed=0) -> MonotonicityRecord:
    """CDP_A must not increase under a channel acting on B."""
    after = process_on_B(state, gamma_B)
    b0 = cdp_bounds_general(operator_schmidt(state))
    b1 = cdp_bounds_general(operator_schmidt(after))
    e0 = cdp_adversarial_estimate(state, budget=budget, seed=seed).value
    e1 = cdp_adversarial_estimate(after, budget=budget, seed=seed).value
    holds = e1 <= e0 + ESTIMATOR_MARGIN
    p0, p1 = pure_of(state), pure_of(after)
    x0 = cdp_pure_exact(p0) if p0 is not None else None
    x1 = cdp_pure_exact(p1) if p1 is not None else None
    if x0 is not None and x1 is not None:
        holds = holds and x1 <= x0 + 1e-10
    return MonotonicityRecord(b0, b1, e0, e1, x0, x1, holds)


@dataclass(frozen=True)
class SeparableCapRecord:
    premise: bool
    realignment_sum: float
    r_last: float
    theorem2_upper: float
    cap_printed: float
    cap_corrected: float
    holds_printed: bool
    holds_corrected: bool


def separable_cap_check(state: BipartiteState) -> SeparableCapRecord:
    """For states passing the realignment test, compare r_{d^2} d with the r_CN d cap.

    The verdict uses the corrected constant (:func:`r_cn_corrected`); the printed one
    is reported alongside, since the isotropic state at p = 1/(d+1) exceeds it at d = 2.
    """
    if state.dA != state.dB:
        raise InvalidInput("separable cap check needs dA == dB")
    d = state.dA
    osd = operator_schmidt(state)
    premise = passes_realignment(osd)
    r_last = osd.r(d * d)
    upper = r_last * d
    printed, corrected = r_cn(d) * d, r_cn_corrected(d) * d
    ok_p = (not premise) or upper <= printed + 1e-9
    ok_c = (not premise) or upper <= corrected + 1e-9
    return SeparableCapRecord(premise, realignment_sum(osd), r_last, upper, printed, corrected, ok_p, ok_c)


# --- report ---------------------------------------------------------------------------------------


def cdp_report(state: BipartiteState, state_id: str = "state", budget: int = 16, seed=0,
               threshold: float = DEFAULT_THRESHOLD, basis_search_budget: int = DEFAULT_BASIS_BUDGET) -> CdpReport:
    """Bracket [lower, estimate, upper] with every applicable bound tagged by its origin."""
    osd = operator_schmidt(state, threshold)
    lower, upper = cdp_bounds_general(osd)
    provenance = [("thm2-lower", lower), ("thm2-upper", upper)]
    exact = None
    pure = pure_of(state)
    if pure is not None:
        exact = cdp_pure_exact(pure)
        provenance.append(("thm1", exact))
        lower = upper = exact
    p = isotropic_weight(state)
    if p is not None:
        lo, hi = cdp_isotropic_bounds(state.dA, p)
        provenance += [("eq12-lower", lo), ("eq12-upper", hi)]
        if exact is None:
            lower, upper = max(lower, lo), min(upper, hi)
    provenance.append(("discord", cdp_discord_bound(state, basis_search_budget)))
    provenance.append(("osr-reduction", cdp_osr_reduction_bound(state, basis_search_budget, threshold=threshold)))
    est = cdp_adversarial_estimate(state, budget=budget, seed=seed, threshold=threshold,
                                   basis_search_budget=basis_search_budget)
    provenance.append(("adversarial", est.value))
    return CdpReport(state_id, lower, upper, est.value, est.witness, provenance, exact)
