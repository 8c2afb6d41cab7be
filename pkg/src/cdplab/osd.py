"""Operator Schmidt decomposition and the correlation-structure bounds built on it."""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from . import matrixkit as mk
from .errors import InvalidInput
from .objects import BipartiteState

DEFAULT_THRESHOLD = 1e-10
REALIGNMENT_TOL = 1e-10


@dataclass(frozen=True, eq=False)
class OperatorSchmidtDecomposition:
    """rho = sum_i r_i A_i (x) B_i with Hermitian, Hilbert-Schmidt orthonormal factors.

    ``coefficients`` has min(dA^2, dB^2) entries. ``ops_A`` and ``ops_B`` are
    complete bases (dA^2 and dB^2 elements); factors past the coefficient list
    pair with r_i = 0. ``left``/``right`` hold the same factors as real
    coordinate vectors in the Gell-Mann bases (columns).
    """

    dA: int
    dB: int
    coefficients: np.ndarray
    ops_A: list = field(repr=False)
    ops_B: list = field(repr=False)
    rank: int
    threshold: float
    left: np.ndarray = field(repr=False)
    right: np.ndarray = field(repr=False)

    def r(self, k: int) -> float:
        """k-th coefficient, 1-based; zero beyond the stored list."""
        if 1 <= k <= len(self.coefficients):
            return float(self.coefficients[k - 1])
        return 0.0

    def r_effective(self, k: int) -> float:
        """Like :meth:`r` but zero for indices beyond the thresholded rank."""
        return self.r(k) if k <= self.rank else 0.0

    def reconstruct(self) -> np.ndarray:
        n = self.dA * self.dB
        out = np.zeros((n, n), dtype=np.complex128)
        for r, a, b in zip(self.coefficients, self.ops_A, self.ops_B):
            out += r * np.kron(a, b)
        return out

    @property
    def full_rank(self) -> bool:
        """OSR equals dA^2 (tomographic completeness on A)."""
        return self.rank == self.dA**2


def correlation_matrix(state, basisA=None, basisB=None) -> np.ndarray:
    """C_ij = <<F_i (x) G_j | rho>>, shape (dA^2, dB^2). Defaults to Gell-Mann bases."""
    state = _as_state(state)
    dA, dB = state.dA, state.dB
    basisA = mk.hermitian_operator_basis(dA) if basisA is None else list(basisA)
    basisB = mk.hermitian_operator_basis(dB) if basisB is None else list(basisB)
    if not mk.is_orthonormal_basis(basisA, dA) or not mk.is_orthonormal_basis(basisB, dB):
        raise InvalidInput("local operator bases must be Hilbert-Schmidt orthonormal and complete")
    fa = np.conj(np.array(basisA))
    gb = np.conj(np.array(basisB))
    r4 = state.rho.reshape(dA, dB, dA, dB)
    return np.einsum("iac,jbd,abcd->ij", fa, gb, r4, optimize=True)


def _as_state(state) -> BipartiteState:
    if isinstance(state, BipartiteState):
        return state
    raise InvalidInput("expected a BipartiteState")


def _sign_key(op: np.ndarray, tol: float = 1e-12) -> float:
    tr = np.trace(op).real
    if abs(tr) > tol:
        return tr
    for x in np.diag(op).real:
        if abs(x) > tol:
            return x
    for x in op.reshape(-1):
        if abs(x.real) > tol:
            return x.real
        if abs(x.imag) > tol:
            return x.imag
    return 1.0


def _ops_from_coords(coords: np.ndarray, d: int) -> list[np.ndarray]:
    basis = np.array(mk._gell_mann(d))
    return [np.tensordot(coords[:, i], basis, axes=1) for i in range(coords.shape[1])]


def operator_schmidt(state, threshold: float = DEFAULT_THRESHOLD) -> OperatorSchmidtDecomposition:
    """OSD via the SVD of the real correlation matrix in Gell-Mann (x) Gell-Mann coordinates."""
    state = _as_state(state)
    dA, dB = state.dA, state.dB
    c = correlation_matrix(state).real
    u, s, v = mk.svd(c)
    u, v = u.real.copy(), v.real.copy()
    k = len(s)
    ops_A = _ops_from_coords(u, dA)
    ops_B = _ops_from_coords(v, dB)
    for i in range(k):
        if _sign_key(ops_A[i]) < 0:
            u[:, i] *= -1
            v[:, i] *= -1
            ops_A[i] = -ops_A[i]
            ops_B[i] = -ops_B[i]
    for i in range(k, dA * dA):
        if _sign_key(ops_A[i]) < 0:
            u[:, i] *= -1
            ops_A[i] = -ops_A[i]
    for i in range(k, dB * dB):
        if _sign_key(ops_B[i]) < 0:
            v[:, i] *= -1
            ops_B[i] = -ops_B[i]
    cutoff = threshold * max(float(s[0]) if k else 0.0, 1e-300)
    rank = int(np.sum(s > cutoff))
    return OperatorSchmidtDecomposition(dA, dB, s, ops_A, ops_B, rank, threshold, u, v)


def osr(state, threshold: float = DEFAULT_THRESHOLD) -> int:
    return operator_schmidt(state, threshold).rank


def degenerate_blocks(osd: OperatorSchmidtDecomposition, rtol: float = 1e-8) -> list[list[int]]:
    """Index groups (0-based) of numerically equal coefficients."""
    s = osd.coefficients
    scale = max(float(s[0]), 1e-300)
    blocks, current = [], [0]
    for i in range(1, len(s)):
        if abs(s[i] - s[current[-1]]) <= rtol * scale:
            current.append(i)
        else:
            blocks.append(current)
            current = [i]
    blocks.append(current)
    return blocks


def realignment_sum(osd: OperatorSchmidtDecomposition) -> float:
    return float(np.sum(osd.coefficients))


def passes_realignment(osd: OperatorSchmidtDecomposition) -> bool:
    """True when sum_i r_i <= 1 (the computable cross-norm test is not violated)."""
    return realignment_sum(osd) <= 1.0 + REALIGNMENT_TOL


def tail_correlation_bound(state, sigmaA, sigmaB) -> tuple[float, float]:
    """(Tr rho^2 - r_1^2, ||rho - sigmaA (x) sigmaB||_2^2); the first never exceeds the second."""
    state = _as_state(state)
    sigmaA = mk.as_matrix(sigmaA, square=True)
    sigmaB = mk.as_matrix(sigmaB, square=True)
    if sigmaA.shape[0] != state.dA or sigmaB.shape[0] != state.dB:
        raise InvalidInput("product state dimensions do not match the bipartition")
    osd = operator_schmidt(state)
    lhs = max(state.purity() - osd.r(1) ** 2, 0.0)
    rhs = float(np.linalg.norm(state.rho - np.kron(sigmaA, sigmaB), "fro") ** 2)
    return lhs, rhs


def r_cn(d: int) -> float:
    """Closed-form cap on r_{d^2} for states passing the realignment test, as printed.

    (d(d^2-1) - sqrt(d^2-1)) / (d(d^2-1)^2 + d^3). At d=2 the separable isotropic
    state with p=1/3 exceeds this value; see :func:`r_cn_corrected`.
    """
    if int(d) != d or d < 2:
        raise InvalidInput(f"r_cn needs an integer d >= 2, got {d!r}")
    val = (d * (d**2 - 1) - math.sqrt(d**2 - 1)) / (d * (d**2 - 1) ** 2 + d**3)
    assert val < 1 / d**2
    return val


def r_cn_corrected(d: int) -> float:
    """Largest r with r^2 <= (d^2-1) r^2 + (1-(d^2-1) r)^2 - 1/d^2 and r <= 1-(d^2-1)r.

    This is the smaller root of (d^4-d^2-1) r^2 - 2(d^2-1) r + (d^2-1)/d^2,
    i.e. (d(d^2-1) - sqrt(d^2-1)) / (d(d^4-d^2-1)).
    """
    if int(d) != d or d < 2:
        raise InvalidInput(f"r_cn needs an integer d >= 2, got {d!r}")
    val = (d * (d**2 - 1) - math.sqrt(d**2 - 1)) / (d * (d**4 - d**2 - 1))
    assert val < 1 / d**2
    return val


def lowest_osc_cap(state) -> tuple[float, float]:
    """(r_{d^2}, sqrt(Tr rho^2 - 1/d^2)) for a d x d state."""
    state = _as_state(state)
    if state.dA != state.dB:
        raise InvalidInput("lowest_osc_cap needs dA == dB")
    d = state.dA
    osd = operator_schmidt(state)
    r_last = osd.r(d * d)
    cap = math.sqrt(max(state.purity() - 1.0 / d**2, 0.0))
    assert r_last <= cap + 1e-10
    return r_last, cap


def osd_report(state, threshold: float = DEFAULT_THRESHOLD) -> dict:
    osd = operator_schmidt(state, threshold)
    total = realignment_sum(osd)
    report = {
        "dA": state.dA,
        "dB": state.dB,
        "coefficients": [float(x) for x in osd.coefficients],
        "rank": osd.rank,
        "threshold": threshold,
        "realignment_sum": total,
        "passes_realignment": passes_realignment(osd),
        "realignment_verdict": "passes" if passes_realignment(osd) else "fails (entangled)",
    }
    if state.dA == state.dB:
        d = state.dA
        r_last = osd.r(d * d)
        report["r_last"] = r_last
        report["r_cn"] = r_cn(d) if d >= 2 else None
        report["r_cn_corrected"] = r_cn_corrected(d) if d >= 2 else None
    return report
