"""Dense complex linear algebra primitives.

Matrices are plain ``numpy.ndarray`` objects of dtype complex128. The
helpers here validate shape and finiteness, and return decompositions in a
deterministic order so that downstream reports are reproducible.
"""

from __future__ import annotations

from functools import lru_cache

import numpy as np

from .errors import InvalidInput, NotHermitian

HERMITIAN_RTOL = 1e-12


def as_matrix(m, *, square: bool = False, name: str = "matrix") -> np.ndarray:
    """Coerce ``m`` to a finite 2-D complex array."""
    arr = np.asarray(m, dtype=np.complex128)
    if arr.ndim != 2:
        raise InvalidInput(f"{name} must be 2-dimensional, got shape {arr.shape}")
    if arr.size == 0:
        raise InvalidInput(f"{name} must be non-empty")
    if not np.all(np.isfinite(arr)):
        raise InvalidInput(f"{name} has non-finite entries")
    if square and arr.shape[0] != arr.shape[1]:
        raise InvalidInput(f"{name} must be square, got shape {arr.shape}")
    return arr


def dagger(m: np.ndarray) -> np.ndarray:
    return np.conj(m).T


def is_hermitian(m, rtol: float = HERMITIAN_RTOL) -> bool:
    m = as_matrix(m)
    if m.shape[0] != m.shape[1]:
        return False
    scale = max(1.0, float(np.linalg.norm(m, 2)))
    return float(np.max(np.abs(m - dagger(m)))) <= rtol * scale


def hermitize(m, rtol: float = HERMITIAN_RTOL) -> np.ndarray:
    """Return (m + m^dagger)/2, refusing inputs that are not Hermitian within ``rtol``."""
    m = as_matrix(m, square=True)
    if not is_hermitian(m, rtol):
        raise NotHermitian("matrix is not Hermitian within tolerance")
    return 0.5 * (m + dagger(m))


def _stable_descending(values: np.ndarray) -> np.ndarray:
    return np.argsort(-values, kind="stable")


def svd(m):
    """Singular value decomposition ``m = U @ diag(s) @ V^dagger``.

    Returns ``(U, s, V)`` with ``s`` descending; note ``V`` and not ``V^dagger``.
    Ties keep their original index order.
    """
    m = as_matrix(m)
    u, s, vh = np.linalg.svd(m, full_matrices=True)
    k = len(s)
    order = _stable_descending(s)
    u = u.copy()
    u[:, :k] = u[:, order]
    v = dagger(vh).copy()
    v[:, :k] = v[:, order]
    return u, s[order], v


def hermitian_eigen(m, rtol: float = HERMITIAN_RTOL):
    """Eigenvalues (ascending) and orthonormal eigenvectors of a Hermitian matrix."""
    h = hermitize(m, rtol)
    w, v = np.linalg.eigh(h)
    return w, v


def eigvalsh(m) -> np.ndarray:
    """Eigenvalues of the Hermitian part of ``m``, no tolerance check (internal hot path)."""
    m = np.asarray(m)
    return np.linalg.eigvalsh(0.5 * (m + np.conj(m).T))


def p_norm(m, p) -> float:
    """Schatten p-norm for p in {1, 2, inf}."""
    m = as_matrix(m)
    if p in (1, "1"):
        return float(np.sum(np.linalg.svd(m, compute_uv=False)))
    if p in (2, "2", "fro"):
        return float(np.linalg.norm(m, "fro"))
    if p in (np.inf, "inf", "infinity", float("inf")):
        return float(np.linalg.norm(m, 2))
    raise InvalidInput(f"unsupported norm order p={p!r}; use 1, 2 or inf")


def trace_norm(m) -> float:
    """Trace norm, using the eigenvalues when ``m`` is (numerically) Hermitian."""
    m = np.asarray(m, dtype=np.complex128)
    if m.shape[0] == m.shape[1] and np.allclose(m, np.conj(m).T, atol=1e-13, rtol=0):
        return float(np.sum(np.abs(eigvalsh(m))))
    return float(np.sum(np.linalg.svd(m, compute_uv=False)))


def kron(a, b) -> np.ndarray:
    return np.kron(as_matrix(a, name="a"), as_matrix(b, name="b"))


def partial_trace(m, dA: int, dB: int, traced: str = "B") -> np.ndarray:
    """Trace out subsystem ``traced`` ('A' or 'B') of an operator on A (x) B."""
    m = as_matrix(m, square=True)
    if dA < 1 or dB < 1 or m.shape[0] != dA * dB:
        raise InvalidInput(f"shape {m.shape} does not match dA*dB = {dA}*{dB}")
    t = m.reshape(dA, dB, dA, dB)
    if traced in ("B", "b", 1):
        return np.einsum("ijkj->ik", t)
    if traced in ("A", "a", 0):
        return np.einsum("ijil->jl", t)
    raise InvalidInput(f"traced must be 'A' or 'B', got {traced!r}")


@lru_cache(maxsize=None)
def _gell_mann(d: int) -> tuple:
    ops = [np.eye(d, dtype=np.complex128) / np.sqrt(d)]
    sym, asym = [], []
    for j in range(d):
        for k in range(j + 1, d):
            s = np.zeros((d, d), dtype=np.complex128)
            s[j, k] = s[k, j] = 1 / np.sqrt(2)
            sym.append(s)
            a = np.zeros((d, d), dtype=np.complex128)
            a[j, k] = -1j / np.sqrt(2)
            a[k, j] = 1j / np.sqrt(2)
            asym.append(a)
    diag = []
    for l in range(1, d):
        entries = np.zeros(d)
        entries[:l] = 1.0
        entries[l] = -l
        diag.append(np.diag(entries / np.sqrt(l * (l + 1))).astype(np.complex128))
    ops.extend(sym + asym + diag)
    for op in ops:
        op.setflags(write=False)
    return tuple(ops)


def hermitian_operator_basis(d: int) -> list[np.ndarray]:
    """Hilbert-Schmidt orthonormal Hermitian basis of d x d matrices.

    Order: identity/sqrt(d), symmetric, antisymmetric, then diagonal
    generalized Gell-Mann elements. For d=2 this is the Pauli basis over sqrt(2).
    """
    if int(d) != d or d < 1:
        raise InvalidInput(f"dimension must be a positive integer, got {d!r}")
    return [op.copy() for op in _gell_mann(int(d))]


def basis_matrix(d: int) -> np.ndarray:
    """The basis stacked as rows of vec'd operators, shape (d**2, d**2)."""
    return np.array([op.reshape(-1) for op in _gell_mann(int(d))])


def gram_matrix(ops) -> np.ndarray:
    vecs = np.array([np.asarray(op).reshape(-1) for op in ops])
    return np.conj(vecs) @ vecs.T


def is_orthonormal_basis(ops, d: int, atol: float = 1e-10) -> bool:
    if len(ops) != d * d or any(np.asarray(op).shape != (d, d) for op in ops):
        return False
    return bool(np.allclose(gram_matrix(ops), np.eye(d * d), atol=atol))


def psd_sqrt(m) -> np.ndarray:
    w, v = np.linalg.eigh(0.5 * (m + dagger(m)))
    w = np.clip(w, 0.0, None)
    return (v * np.sqrt(w)) @ dagger(v)


def unitary_from_generator(h) -> np.ndarray:
    """exp(iH) for Hermitian H."""
    w, v = np.linalg.eigh(0.5 * (h + dagger(h)))
    return (v * np.exp(1j * w)) @ dagger(v)


def hermitian_from_params(x, d: int) -> np.ndarray:
    """Real vector of length d**2 -> Hermitian matrix, via the Gell-Mann basis."""
    x = np.asarray(x, dtype=float)
    return np.tensordot(x, np.array(_gell_mann(d)), axes=1)
