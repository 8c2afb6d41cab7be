"""Trace distance, super-operator 1-norm and the diamond norm.

The diamond norm is computed two independent ways: the standard semidefinite
program (solved with cvxpy, primal and dual separately so the duality
gap is explicit) and an ascent over pure inputs (I (x) C)|Omega>
with ||C||_2 = 1. The ascent value is always a lower bound; the SDP dual
value is an upper bound.
"""

from __future__ import annotations

import threading
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import matrixkit as mk
from .errors import InvalidInput, SolverFailed
from .objects import BipartiteState, HermitianPreservingMap
from .sampling import ginibre, rng_from

DEFAULT_RESTARTS = 32


@dataclass(frozen=True)
class DiamondResult:
    value: float
    method: str
    sdp_gap: float | None = None
    witness_input: np.ndarray | None = field(default=None, repr=False)
    iterations: int = 0
    sdp_value: float | None = None
    ascent_value: float | None = None

    def to_dict(self) -> dict:
        return {
            "value": self.value,
            "method": self.method,
            "sdp_gap": self.sdp_gap,
            "iterations": self.iterations,
            "sdp_value": self.sdp_value,
            "ascent_value": self.ascent_value,
            "witness_input": None if self.witness_input is None else {
                "real": self.witness_input.real.tolist(),
                "imag": self.witness_input.imag.tolist(),
            },
        }


def _matrix_of(x):
    return x.rho if isinstance(x, BipartiteState) else mk.as_matrix(x, square=True)


def trace_distance(rho, sigma) -> float:
    """D(rho, sigma) = ||rho - sigma||_1 / 2."""
    a, b = _matrix_of(rho), _matrix_of(sigma)
    if a.shape != b.shape:
        raise InvalidInput(f"dimension mismatch: {a.shape} vs {b.shape}")
    return 0.5 * mk.trace_norm(a - b)


def _sign(h: np.ndarray) -> np.ndarray:
    w, v = np.linalg.eigh(h)
    return (v * np.where(w >= 0, 1.0, -1.0)) @ mk.dagger(v)


def superop_one_norm(map_: HermitianPreservingMap, restarts: int = DEFAULT_RESTARTS, seed=0,
                     max_iter: int = 500, tol: float = 1e-14, return_witness: bool = False):
    """sup ||Gamma[psi psi^dagger]||_1 over pure inputs, by alternating maximization.

    With S = sign(Gamma[psi psi^dagger]) fixed, <psi|Gamma^dagger(S)|psi> is maximized by the
    top eigenvector of Gamma^dagger(S); each sweep can only increase the objective.
    """
    rng = rng_from(seed)
    d = map_.d_in
    best, best_psi = 0.0, np.eye(d, dtype=np.complex128)[:, 0]
    starts = [np.eye(d, dtype=np.complex128)[:, i] for i in range(d)]
    starts += [ginibre(rng, d, 1)[:, 0] for _ in range(restarts)]
    for psi in starts:
        psi = psi / np.linalg.norm(psi)
        val = -1.0
        for _ in range(max_iter):
            out = map_(np.outer(psi, np.conj(psi)))
            new_val = float(np.sum(np.abs(mk.eigvalsh(out))))
            if new_val <= val + tol:
                break
            val = new_val
            g = map_.adjoint(_sign(0.5 * (out + mk.dagger(out))))
            _, v = np.linalg.eigh(0.5 * (g + mk.dagger(g)))
            psi = v[:, -1]
        val = max(val, new_val)
        if val > best:
            best, best_psi = val, psi
    return (best, best_psi) if return_witness else best


def _ascent_run(j, jq, d_in, d_out, c, max_iter, tol):
    """Alternating maximization from one start. ``jq`` is J regrouped as [(o,q),(b,d)]."""
    n = d_out * d_in
    jr = j.reshape(d_out, d_in, n)
    c = c / np.linalg.norm(c)
    val, it = -1.0, 0
    for it in range(1, max_iter + 1):
        # (1 (x) C) J (1 (x) C^dagger) without forming the Kronecker product
        m = np.matmul(np.matmul(c, jr).reshape(n, d_out, d_in), mk.dagger(c)).reshape(n, n)
        w, v = np.linalg.eigh(0.5 * (m + mk.dagger(m)))
        new_val = float(np.sum(np.abs(w)))
        if new_val <= val + tol * max(1.0, new_val):
            return max(val, new_val), c, it, True
        val = new_val
        s = (v * np.where(w >= 0, 1.0, -1.0)) @ mk.dagger(v)
        s_ae = s.reshape(d_out, d_in, d_out, d_in).transpose(1, 3, 0, 2).reshape(d_in * d_in, d_out * d_out)
        q = (s_ae @ jq).reshape(d_in, d_in, d_in, d_in).transpose(0, 2, 1, 3).reshape(d_in * d_in, d_in * d_in)
        _, qv = np.linalg.eigh(0.5 * (q + mk.dagger(q)))
        c = qv[:, -1].reshape(d_in, d_in)
    return val, c, it, False


def diamond_norm_ascent(map_: HermitianPreservingMap, restarts: int = DEFAULT_RESTARTS, seed=0,
                        max_iter: int = 5000, tol: float = 1e-14, screen_iter: int = 40,
                        keep: int = 3) -> DiamondResult:
    """Lower bound on ||map||_diamond from pure inputs (I (x) C)|Omega>, ||C||_2 = 1.

    For fixed S = sign(M(C)), M(C) = (I (x) C) J (I (x) C^dagger), Tr(S M(C)) is a Hermitian
    quadratic form in vec(C); its maximum on the unit sphere is the top eigenvector. Alternating
    the two steps is monotone. All starts run ``screen_iter`` sweeps; the best ``keep`` are then
    iterated to convergence.
    """
    rng = rng_from(seed)
    d_in, d_out = map_.d_in, map_.d_out
    j = map_.choi
    jq = j.reshape(d_out, d_in, d_out, d_in).transpose(2, 0, 3, 1).reshape(d_out * d_out, d_in * d_in)
    starts = [np.eye(d_in, dtype=np.complex128)]
    starts += [ginibre(rng, d_in, d_in) for _ in range(restarts)]
    screened, total_iter = [], 0
    for c in starts:
        val, c, it, _ = _ascent_run(j, jq, d_in, d_out, c, screen_iter, tol)
        total_iter += it
        screened.append((val, c))
    screened.sort(key=lambda t: -t[0])
    best, best_c = screened[0]
    for val, c in screened[:keep]:
        val, c, it, _ = _ascent_run(j, jq, d_in, d_out, c, max_iter, tol)
        total_iter += it
        if val > best:
            best, best_c = val, c
    best = max(best, 0.0)
    witness = best_c.T.reshape(-1)  # (I (x) C)|Omega> = sum_k |k> (x) C|k>
    return DiamondResult(best, "ascent", None, witness, total_iter, None, best)


class _SdpCache(threading.local):
    def __init__(self):
        self.problems = {}


_CACHE = _SdpCache()


def _build_general_sdp(d_in: int, d_out: int):
    """Primal/dual SDP pair for an arbitrary Hermiticity-preserving map."""
    import cvxpy as cp

    n = d_in * d_out
    j_re = cp.Parameter((n, n))
    j_im = cp.Parameter((n, n))
    jmat = j_re + 1j * j_im

    y0 = cp.Variable((n, n), hermitian=True)
    y1 = cp.Variable((n, n), hermitian=True)
    a0 = cp.Variable()
    a1 = cp.Variable()
    eye_in = np.eye(d_in)
    dual = cp.Problem(cp.Minimize(0.5 * (a0 + a1)), [
        cp.bmat([[y0, -jmat], [-jmat.H, y1]]) >> 0,
        a0 * eye_in - cp.partial_trace(y0, [d_out, d_in], axis=0) >> 0,
        a1 * eye_in - cp.partial_trace(y1, [d_out, d_in], axis=0) >> 0,
    ])

    x = cp.Variable((n, n), complex=True)
    r0 = cp.Variable((d_in, d_in), hermitian=True)
    r1 = cp.Variable((d_in, d_in), hermitian=True)
    eye_out = np.eye(d_out)
    # Re Tr(J^dagger X) = sum_ij Re J_ij Re X_ij + Im J_ij Im X_ij.
    primal = cp.Problem(cp.Maximize(cp.sum(cp.multiply(j_re, cp.real(x)) + cp.multiply(j_im, cp.imag(x)))), [
        cp.bmat([[cp.kron(eye_out, r0), x], [x.H, cp.kron(eye_out, r1)]]) >> 0,
        cp.real(cp.trace(r0)) == 1,
        cp.real(cp.trace(r1)) == 1,
    ])
    return j_re, j_im, primal, dual, 1.0


def _build_difference_sdp(d_in: int, d_out: int):
    """Compact pair valid when Tr_out J = 0 (difference of two trace-preserving maps).

    ||Delta||_diamond / 2 = max <J, W> s.t. 0 <= W <= 1 (x) rho, Tr rho = 1
                          = min ||Tr_out Z||_inf s.t. Z >= J, Z >= 0.
    """
    import cvxpy as cp

    n = d_in * d_out
    j_re = cp.Parameter((n, n))
    j_im = cp.Parameter((n, n))
    jmat = j_re + 1j * j_im
    z = cp.Variable((n, n), hermitian=True)
    a = cp.Variable()
    dual = cp.Problem(cp.Minimize(a), [
        z >> 0,
        z - jmat >> 0,
        a * np.eye(d_in) - cp.partial_trace(z, [d_out, d_in], axis=0) >> 0,
    ])
    w = cp.Variable((n, n), hermitian=True)
    rho = cp.Variable((d_in, d_in), hermitian=True)
    primal = cp.Problem(cp.Maximize(cp.sum(cp.multiply(j_re, cp.real(w)) + cp.multiply(j_im, cp.imag(w)))), [
        w >> 0,
        cp.kron(np.eye(d_out), rho) - w >> 0,
        cp.real(cp.trace(rho)) == 1,
    ])
    return j_re, j_im, primal, dual, 2.0


def _solve(problem, first: str, eps: float):
    import cvxpy as cp

    order = [first] + [s for s in ("CLARABEL", "SCS") if s != first]
    status, value = None, None
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", UserWarning)
        for name in order:
            kwargs = {"eps_abs": eps, "eps_rel": eps, "max_iters": 200000} if name == "SCS" else {}
            try:
                problem.solve(solver=name, warm_start=False, **kwargs)
            except cp.SolverError:
                continue
            status, value = problem.status, problem.value
            if status == "optimal":
                break
    return status, value


def _is_trace_annihilating(map_: HermitianPreservingMap, atol: float = 1e-10) -> bool:
    reduced = mk.partial_trace(map_.choi, map_.d_out, map_.d_in, "A")
    return bool(np.max(np.abs(reduced)) <= atol)


def diamond_norm_sdp(map_: HermitianPreservingMap, gap_tol: float = 1e-6, eps: float = 1e-10) -> DiamondResult:
    """Diamond norm from a primal/dual SDP pair; value is the midpoint of the two optima.

    Differences of channels use the compact program (one PSD block of size d_in*d_out);
    other maps use the general block program. ``sdp_gap`` is dual minus primal.
    """
    d_in, d_out = map_.d_in, map_.d_out
    if not np.any(np.abs(map_.choi) > 1e-15):
        return DiamondResult(0.0, "sdp", 0.0, None, 0, 0.0, None)
    compact = _is_trace_annihilating(map_)
    key = (d_in, d_out, compact)
    if key not in _CACHE.problems:
        _CACHE.problems[key] = (_build_difference_sdp if compact else _build_general_sdp)(d_in, d_out)
    j_re, j_im, primal, dual, scale = _CACHE.problems[key]
    j_re.value = np.ascontiguousarray(map_.choi.real)
    j_im.value = np.ascontiguousarray(map_.choi.imag)
    first = "CLARABEL" if compact else "SCS"
    p_status, p_val = _solve(primal, first, eps)
    d_status, d_val = _solve(dual, first, eps)
    residuals = {"primal_status": p_status, "dual_status": d_status}
    ok = ("optimal", "optimal_inaccurate")
    if p_status not in ok or d_status not in ok:
        raise SolverFailed("diamond-norm SDP did not converge", residuals)
    p_val, d_val = scale * p_val, scale * d_val
    gap = float(d_val - p_val)
    residuals["gap"] = gap
    if abs(gap) > gap_tol:
        raise SolverFailed(f"diamond-norm SDP duality gap {gap:.3e} exceeds {gap_tol:.0e}", residuals)
    value = max(0.5 * (p_val + d_val), 0.0)
    return DiamondResult(float(value), "sdp", gap, None, 0, float(value), None)


def diamond_norm(map_: HermitianPreservingMap, method: str = "both", restarts: int = DEFAULT_RESTARTS,
                 seed=0) -> DiamondResult:
    """Diamond norm via ``"sdp"``, ``"ascent"`` or ``"both"`` (value from the SDP, witness from ascent)."""
    if method == "sdp":
        return diamond_norm_sdp(map_)
    if method == "ascent":
        return diamond_norm_ascent(map_, restarts, seed)
    if method != "both":
        raise InvalidInput(f"unknown method {method!r}")
    sdp = diamond_norm_sdp(map_)
    asc = diamond_norm_ascent(map_, restarts, seed)
    return DiamondResult(sdp.value, "both", sdp.sdp_gap, asc.witness_input, asc.iterations,
                         sdp.value, asc.value)


def check_watt_inequality(map_: HermitianPreservingMap, x, diamond: float | None = None) -> tuple[float, float]:
    """(||(Gamma (x) id)[X]||_1, ||Gamma||_diamond ||X||_1) for Hermitian X on A (x) B."""
    from .objects import apply_channel_on_A

    x = mk.hermitize(_matrix_of(x), rtol=1e-10)
    if x.shape[0] % map_.d_in:
        raise InvalidInput("operator dimension is not a multiple of the map input dimension")
    d_anc = x.shape[0] // map_.d_in
    lhs = mk.trace_norm(apply_channel_on_A(map_, (x, map_.d_in, d_anc)))
    if diamond is None:
        diamond = diamond_norm_sdp(map_).value
    rhs = diamond * mk.trace_norm(x)
    assert lhs <= rhs + 1e-8, (lhs, rhs)
    return lhs, rhs


def conjugation_sup_check(x, samples: int = 64, seed=0, max_iter: int = 500) -> tuple[float, float]:
    """Estimate max_{||C||_2 = 1} ||C X C^dagger||_1 and compare with ||X||_inf."""
    x = mk.hermitize(x, rtol=1e-10)
    d = x.shape[0]
    rng = rng_from(seed)
    w, v = np.linalg.eigh(x)
    top = v[:, int(np.argmax(np.abs(w)))]
    starts = [np.outer(top, np.conj(top))] + [ginibre(rng, d, d) for _ in range(samples)]
    best = 0.0
    for c in starts:
        c = c / np.linalg.norm(c)
        val = -1.0
        for _ in range(max_iter):
            m = c @ x @ mk.dagger(c)
            ev, evec = np.linalg.eigh(0.5 * (m + mk.dagger(m)))
            new_val = float(np.sum(np.abs(ev)))
            if new_val <= val + 1e-15:
                break
            val = new_val
            s = (evec * np.where(ev >= 0, 1.0, -1.0)) @ mk.dagger(evec)
            q = np.kron(s, x.T)
            _, qv = np.linalg.eigh(0.5 * (q + mk.dagger(q)))
            c = qv[:, -1].reshape(d, d)
        best = max(best, val, new_val)
    inf_norm = float(np.max(np.abs(w)))
    return best, inf_norm
