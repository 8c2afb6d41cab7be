"""Validated quantum states and maps, and conversions between representations.

Choi convention used throughout the package: for a map ``Phi`` from a
``d_in``-dimensional system to a ``d_out``-dimensional one,

    J(Phi) = sum_ij Phi(|i><j|) (x) |i><j|

i.e. the output factor comes first and ``Tr J = d_in`` for trace-preserving
maps. With this ordering ``(Phi (x) id)[rho_AB]`` keeps A as the first factor.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import matrixkit as mk
from .errors import InvalidInput, NotCompletelyPositive, ReconstructionFailed

STATE_TOL = 1e-10
CHANNEL_TOL = 1e-9


def _check_dims(*dims):
    for d in dims:
        if int(d) != d or d < 1:
            raise InvalidInput(f"dimensions must be positive integers, got {dims}")


@dataclass(frozen=True, eq=False)
class BipartiteState:
    """Density matrix on A (x) B with a declared split.

    Construction validates Hermiticity, unit trace and positivity (all within
    1e-10). Eigenvalues in [-1e-10, 0) are clipped and the matrix renormalized.
    """

    dA: int
    dB: int
    rho: np.ndarray

    def __post_init__(self):
        _check_dims(self.dA, self.dB)
        rho = mk.as_matrix(self.rho, square=True, name="rho")
        n = self.dA * self.dB
        if rho.shape != (n, n):
            raise InvalidInput(f"rho has shape {rho.shape}, expected ({n}, {n}) for dA={self.dA}, dB={self.dB}")
        scale = max(1.0, float(np.max(np.abs(rho))))
        if np.max(np.abs(rho - mk.dagger(rho))) > STATE_TOL * scale:
            raise InvalidInput("state is not Hermitian within 1e-10")
        rho = 0.5 * (rho + mk.dagger(rho))
        tr = np.trace(rho).real
        if abs(tr - 1.0) > STATE_TOL:
            raise InvalidInput(f"state has trace {tr!r}, expected 1 within 1e-10")
        w, v = np.linalg.eigh(rho)
        if w[0] < -STATE_TOL:
            raise InvalidInput(f"state has eigenvalue {w[0]:.3e} below -1e-10")
        if w[0] < 0:
            w = np.clip(w, 0.0, None)
            rho = (v * w) @ mk.dagger(v)
            rho = rho / np.trace(rho).real
        rho.setflags(write=False)
        object.__setattr__(self, "rho", rho)

    @property
    def dim(self) -> int:
        return self.dA * self.dB

    @property
    def rho_A(self) -> np.ndarray:
        return mk.partial_trace(self.rho, self.dA, self.dB, "B")

    @property
    def rho_B(self) -> np.ndarray:
        return mk.partial_trace(self.rho, self.dA, self.dB, "A")

    def purity(self) -> float:
        return float(np.real(np.trace(self.rho @ self.rho)))

    def is_pure(self, atol: float = 1e-10) -> bool:
        return abs(self.purity() - 1.0) <= atol

    def swapped(self) -> "BipartiteState":
        t = self.rho.reshape(self.dA, self.dB, self.dA, self.dB).transpose(1, 0, 3, 2)
        return BipartiteState(self.dB, self.dA, t.reshape(self.dim, self.dim))


@dataclass(frozen=True, eq=False)
class PureBipartiteState:
    dA: int
    dB: int
    amplitudes: np.ndarray
    schmidt_coefficients: np.ndarray
    basis_A: np.ndarray = field(repr=False)
    basis_B: np.ndarray = field(repr=False)

    def density(self) -> BipartiteState:
        psi = self.amplitudes
        return BipartiteState(self.dA, self.dB, np.outer(psi, np.conj(psi)))

    def p(self, k: int) -> float:
        """k-th Schmidt coefficient, 1-based; 0 beyond the list."""
        return float(self.schmidt_coefficients[k - 1]) if 1 <= k <= len(self.schmidt_coefficients) else 0.0


def schmidt_decompose(psi, dA: int, dB: int) -> PureBipartiteState:
    """Schmidt coefficients p_i (descending) and local bases of a pure vector."""
    _check_dims(dA, dB)
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    if psi.size != dA * dB:
        raise InvalidInput(f"vector has length {psi.size}, expected {dA * dB}")
    if not np.all(np.isfinite(psi)):
        raise InvalidInput("vector has non-finite entries")
    if abs(np.linalg.norm(psi) - 1.0) > 1e-12:
        raise InvalidInput(f"vector is not normalized (norm {np.linalg.norm(psi)!r})")
    u, s, v = mk.svd(psi.reshape(dA, dB))
    p = s**2
    # The coefficient matrix is sum_k s_k u_k v_k^T, so B's Schmidt vectors are conj(v_k).
    return PureBipartiteState(dA, dB, psi, p, u, np.conj(v))


def bell_vector(d: int) -> np.ndarray:
    """|psi+> = sum_i |ii>/sqrt(d)."""
    return np.eye(d, dtype=np.complex128).reshape(-1) / np.sqrt(d)


def isotropic_state(d: int, p: float) -> BipartiteState:
    """(1-p) 1/d^2 + p |psi+><psi+|."""
    _check_dims(d)
    if not 0.0 <= p <= 1.0:
        raise InvalidInput(f"isotropic weight p must lie in [0, 1], got {p!r}")
    phi = bell_vector(d)
    rho = (1 - p) * np.eye(d * d) / d**2 + p * np.outer(phi, phi)
    return BipartiteState(d, d, rho)


def pure_state(psi, dA: int, dB: int) -> BipartiteState:
    psi = np.asarray(psi, dtype=np.complex128).reshape(-1)
    return BipartiteState(dA, dB, np.outer(psi, np.conj(psi)))


# --- maps -----------------------------------------------------------------


def choi_of(kraus) -> np.ndarray:
    """Choi matrix sum_k |K_k>><<K_k| with row-major vectorization."""
    kraus = [mk.as_matrix(k, name="Kraus operator") for k in kraus]
    if not kraus:
        raise InvalidInput("empty Kraus list")
    shape = kraus[0].shape
    if any(k.shape != shape for k in kraus):
        raise InvalidInput("Kraus operators have inconsistent shapes")
    vecs = np.array([k.reshape(-1) for k in kraus])
    return vecs.T @ np.conj(vecs)


def kraus_of(choi, d_in: int, d_out: int, tol: float = CHANNEL_TOL) -> list[np.ndarray]:
    """Kraus operators from a PSD Choi matrix; eigenvalues below ``tol`` relative are dropped."""
    choi = mk.as_matrix(choi, square=True, name="choi")
    if choi.shape[0] != d_in * d_out:
        raise InvalidInput(f"Choi shape {choi.shape} does not match d_in*d_out = {d_in * d_out}")
    w, v = np.linalg.eigh(0.5 * (choi + mk.dagger(choi)))
    scale = max(1.0, float(np.max(np.abs(w))))
    if w[0] < -tol * scale:
        raise NotCompletelyPositive(f"Choi matrix has eigenvalue {w[0]:.3e}")
    keep = w > tol * scale * 1e-3
    if not np.any(keep):
        keep = w >= w.max()
    return [np.sqrt(lam) * v[:, k].reshape(d_out, d_in) for k, lam in zip(np.flatnonzero(keep), w[keep])]


def _apply_choi(choi, d_in, d_out, rho, d_anc, side="A") -> np.ndarray:
    j4 = choi.reshape(d_out, d_in, d_out, d_in)
    if side == "A":
        r4 = rho.reshape(d_in, d_anc, d_in, d_anc)
        out = np.einsum("oipj,ibjc->obpc", j4, r4, optimize=True)
        return out.reshape(d_out * d_anc, d_out * d_anc)
    r4 = rho.reshape(d_anc, d_in, d_anc, d_in)
    out = np.einsum("oipj,bicj->bocp", j4, r4, optimize=True)
    return out.reshape(d_anc * d_out, d_anc * d_out)


@dataclass(frozen=True, eq=False)
class HermitianPreservingMap:
    """A linear map stored by its (Hermitian) Choi matrix."""

    d_in: int
    d_out: int
    choi: np.ndarray

    def __post_init__(self):
        _check_dims(self.d_in, self.d_out)
        choi = mk.as_matrix(self.choi, square=True, name="choi")
        if choi.shape[0] != self.d_in * self.d_out:
            raise InvalidInput(f"Choi shape {choi.shape} does not match d_in*d_out")
        scale = max(1.0, float(np.max(np.abs(choi))))
        if np.max(np.abs(choi - mk.dagger(choi))) > STATE_TOL * scale:
            raise InvalidInput("Choi matrix of a Hermiticity-preserving map must be Hermitian")
        choi = 0.5 * (choi + mk.dagger(choi))
        choi.setflags(write=False)
        object.__setattr__(self, "choi", choi)

    def __call__(self, x) -> np.ndarray:
        x = mk.as_matrix(x, square=True)
        if x.shape[0] != self.d_in:
            raise InvalidInput(f"input has dimension {x.shape[0]}, map expects {self.d_in}")
        return _apply_choi(self.choi, self.d_in, self.d_out, x, 1)

    def adjoint(self, s) -> np.ndarray:
        """Heisenberg-picture map: Tr(S Phi(X)) = Tr(Phi^dagger(S) X)."""
        j4 = self.choi.reshape(self.d_out, self.d_in, self.d_out, self.d_in)
        return np.einsum("oipj,po->ij", j4, np.asarray(s)).T

    def __sub__(self, other) -> "HermitianPreservingMap":
        if (self.d_in, self.d_out) != (other.d_in, other.d_out):
            raise InvalidInput("maps have different dimensions")
        return HermitianPreservingMap(self.d_in, self.d_out, self.choi - other.choi)

    def scaled(self, c: float) -> "HermitianPreservingMap":
        return HermitianPreservingMap(self.d_in, self.d_out, c * self.choi)


@dataclass(frozen=True, eq=False)
class QuantumChannel(HermitianPreservingMap):
    """CPTP map: Kraus list plus the derived Choi matrix."""

    kraus: tuple = ()

    def __post_init__(self):
        super().__post_init__()
        eye = np.eye(self.d_in)
        tp = sum(mk.dagger(k) @ k for k in self.kraus) if self.kraus else None
        if tp is None or np.max(np.abs(tp - eye)) > CHANNEL_TOL:
            raise InvalidInput("Kraus operators are not trace preserving within 1e-9")
        if np.linalg.eigvalsh(self.choi)[0] < -CHANNEL_TOL:
            raise NotCompletelyPositive("Choi matrix is not positive semidefinite within 1e-9")

    @classmethod
    def from_kraus(cls, kraus, d_in: int | None = None, d_out: int | None = None) -> "QuantumChannel":
        kraus = tuple(mk.as_matrix(k, name="Kraus operator") for k in kraus)
        if not kraus:
            raise InvalidInput("empty Kraus list")
        d_out_k, d_in_k = kraus[0].shape
        if (d_in is not None and d_in != d_in_k) or (d_out is not None and d_out != d_out_k):
            raise InvalidInput(f"Kraus shape {kraus[0].shape} does not match d_out x d_in = {d_out} x {d_in}")
        for k in kraus:
            k.setflags(write=False)
        return cls(d_in_k, d_out_k, choi_of(kraus), kraus)

    @classmethod
    def from_choi(cls, choi, d_in: int, d_out: int) -> "QuantumChannel":
        return cls.from_kraus(kraus_of(choi, d_in, d_out), d_in, d_out)

    def __call__(self, x) -> np.ndarray:
        x = mk.as_matrix(x, square=True)
        if x.shape[0] != self.d_in:
            raise InvalidInput(f"input has dimension {x.shape[0]}, channel expects {self.d_in}")
        return sum(k @ x @ mk.dagger(k) for k in self.kraus)

    def compose(self, first: "QuantumChannel") -> "QuantumChannel":
        """self o first."""
        if first.d_out != self.d_in:
            raise InvalidInput("dimension mismatch in composition")
        return QuantumChannel.from_kraus([a @ b for a in self.kraus for b in first.kraus])


def channel_difference(c0: HermitianPreservingMap, c1: HermitianPreservingMap) -> HermitianPreservingMap:
    return HermitianPreservingMap(c0.d_in, c0.d_out, c0.choi) - HermitianPreservingMap(c1.d_in, c1.d_out, c1.choi)


def apply_channel_on_A(map_, state) -> np.ndarray:
    """(map (x) id_B)[rho_AB]; accepts a BipartiteState or (matrix, dB) tuple."""
    rho, dA, dB = _unpack(state)
    if map_.d_in != dA:
        raise InvalidInput(f"map input dimension {map_.d_in} != dA = {dA}")
    return _apply_choi(map_.choi, map_.d_in, map_.d_out, rho, dB, "A")


def apply_channel_on_B(map_, state) -> np.ndarray:
    """(id_A (x) map)[rho_AB]."""
    rho, dA, dB = _unpack(state)
    if map_.d_in != dB:
        raise InvalidInput(f"map input dimension {map_.d_in} != dB = {dB}")
    return _apply_choi(map_.choi, map_.d_in, map_.d_out, rho, dA, "B")


def _unpack(state):
    if isinstance(state, BipartiteState):
        return state.rho, state.dA, state.dB
    rho, dA, dB = state
    rho = mk.as_matrix(rho, square=True)
    if rho.shape[0] != dA * dB:
        raise InvalidInput("operator dimension does not match dA*dB")
    return rho, dA, dB


def process_on_B(state: BipartiteState, channel: QuantumChannel) -> BipartiteState:
    return BipartiteState(state.dA, channel.d_out, apply_channel_on_B(channel, state))


def process_on_A(state: BipartiteState, channel: QuantumChannel) -> BipartiteState:
    return BipartiteState(channel.d_out, state.dB, apply_channel_on_A(channel, state))


# --- canonical channels ----------------------------------------------------


def identity_channel(d: int) -> QuantumChannel:
    return QuantumChannel.from_kraus([np.eye(d)])


def unitary_channel(u) -> QuantumChannel:
    return QuantumChannel.from_kraus([u])


def dephasing_channel(d: int, basis=None) -> QuantumChannel:
    """X -> sum_i |a_i><a_i| X |a_i><a_i| in the columns of ``basis`` (computational by default)."""
    u = np.eye(d) if basis is None else np.asarray(basis)
    return QuantumChannel.from_kraus([np.outer(u[:, i], np.conj(u[:, i])) for i in range(d)])


def block_dephasing_channel(projectors) -> QuantumChannel:
    """X -> sum_k P_k X P_k for orthogonal projectors summing to identity."""
    return QuantumChannel.from_kraus(list(projectors))


def replacement_channel(d_in: int, sigma) -> QuantumChannel:
    """X -> Tr(X) sigma."""
    sigma = mk.as_matrix(sigma, square=True)
    w, v = np.linalg.eigh(0.5 * (sigma + mk.dagger(sigma)))
    kraus = []
    for k in range(len(w)):
        if w[k] > 1e-14:
            for i in range(d_in):
                e = np.zeros(d_in)
                e[i] = 1
                kraus.append(np.sqrt(w[k]) * np.outer(v[:, k], e))
    return QuantumChannel.from_kraus(kraus)


def depolarizing_channel(d: int) -> QuantumChannel:
    """Fully depolarizing: X -> Tr(X) 1/d."""
    return replacement_channel(d, np.eye(d) / d)


# --- purification / extension ----------------------------------------------


@dataclass(frozen=True, eq=False)
class ExtensionRecord:
    """Result of rebuilding rho_AB from a purification of rho_A."""

    channel: QuantumChannel
    purification: np.ndarray
    residual: float
    isometry: np.ndarray = field(repr=False)


def _purify(rho, tol=1e-12):
    w, v = np.linalg.eigh(0.5 * (rho + mk.dagger(rho)))
    keep = w > tol
    return w[keep], v[:, keep]


def purify_and_extend_check(state: BipartiteState, atol: float = 1e-8) -> ExtensionRecord:
    """Find Lambda: A' -> B with (id_A (x) Lambda)[Psi_AA'] = rho_AB.

    Psi_AA' = sum_j sqrt(mu_j) |e_j>|j> purifies rho_A. A purification Phi_ABC
    of rho_AB also purifies rho_A, so (<e_j| (x) 1)|Phi>/sqrt(mu_j) are
    orthonormal vectors |phi_j> on BC; V|j> = |phi_j> (completed to an isometry)
    relates the two purifications and Lambda = Tr_C[V . V^dagger].
    """
    dA, dB = state.dA, state.dB
    lam, vecs = _purify(state.rho)
    dC = max(len(lam), -(-dA // dB))
    phi = np.zeros((dA, dB, dC), dtype=np.complex128)
    for k in range(len(lam)):
        phi[:, :, k] = np.sqrt(lam[k]) * vecs[:, k].reshape(dA, dB)

    mu, e = np.linalg.eigh(state.rho_A)
    psi = np.zeros((dA, dA), dtype=np.complex128)
    for j in range(dA):
        psi[:, j] = np.sqrt(max(mu[j], 0.0)) * e[:, j]

    v_iso = np.zeros((dB * dC, dA), dtype=np.complex128)
    support = mu > 1e-12
    for j in np.flatnonzero(support):
        v_iso[:, j] = np.tensordot(np.conj(e[:, j]), phi, axes=(0, 0)).reshape(-1) / np.sqrt(mu[j])
    free = np.flatnonzero(~support)
    if free.size:
        used = v_iso[:, support]
        q, _ = np.linalg.qr(np.hstack([used, np.eye(dB * dC, dtype=np.complex128)]))
        v_iso[:, free] = q[:, used.shape[1]:used.shape[1] + free.size]

    kraus = [v_iso.reshape(dB, dC, dA)[:, c, :] for c in range(dC)]
    try:
        channel = QuantumChannel.from_kraus(kraus)
    except InvalidInput as exc:
        raise ReconstructionFailed(f"extension channel is not CPTP: {exc}") from exc
    psi_vec = psi.reshape(-1)
    rebuilt = apply_channel_on_B(channel, (np.outer(psi_vec, np.conj(psi_vec)), dA, dA))
    residual = float(np.linalg.norm(rebuilt - state.rho))
    if residual > atol:
        raise ReconstructionFailed(f"extension residual {residual:.3e} exceeds {atol:.0e}", residual)
    return ExtensionRecord(channel, psi_vec, residual, v_iso)
