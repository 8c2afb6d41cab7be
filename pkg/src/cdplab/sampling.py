"""Random states and channels for sweeps and property tests."""

from __future__ import annotations

import numpy as np

from .matrixkit import dagger


def rng_from(seed=None) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def ginibre(rng, rows, cols) -> np.ndarray:
    return rng.standard_normal((rows, cols)) + 1j * rng.standard_normal((rows, cols))


def random_unitary(d: int, seed=None) -> np.ndarray:
    """Haar random unitary (QR of a Ginibre matrix with phase fix)."""
    rng = rng_from(seed)
    q, r = np.linalg.qr(ginibre(rng, d, d))
    ph = np.diag(r) / np.abs(np.diag(r))
    return q * ph


def random_isometry(d_in: int, d_out: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    q, r = np.linalg.qr(ginibre(rng, d_out, d_in))
    return q * (np.diag(r) / np.abs(np.diag(r)))


def random_pure_vector(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    v = ginibre(rng, d, 1)[:, 0]
    return v / np.linalg.norm(v)


def random_density(d: int, rank: int | None = None, seed=None) -> np.ndarray:
    """Random density matrix from the induced (Ginibre) measure."""
    rng = rng_from(seed)
    g = ginibre(rng, d, rank or d)
    rho = g @ dagger(g)
    return rho / np.trace(rho).real


def random_hermitian(d: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    g = ginibre(rng, d, d)
    return 0.5 * (g + dagger(g))


def random_kraus(d_in: int, d_out: int, n_kraus: int = 2, seed=None) -> list[np.ndarray]:
    """Kraus operators of a random channel, sliced from a random isometry."""
    v = random_isometry(d_in, d_out * n_kraus, seed)
    return [v[k * d_out:(k + 1) * d_out, :] for k in range(n_kraus)]


def random_product_density(dA: int, dB: int, seed=None) -> np.ndarray:
    rng = rng_from(seed)
    return np.kron(random_density(dA, seed=rng), random_density(dB, seed=rng))


def random_separable_density(dA: int, dB: int, n_terms: int | None = None, seed=None) -> np.ndarray:
    """Convex mixture of at most ``n_terms`` random product states (default dA*dB)."""
    rng = rng_from(seed)
    n = n_terms or dA * dB
    weights = rng.dirichlet(np.ones(n))
    rho = np.zeros((dA * dB, dA * dB), dtype=np.complex128)
    for w in weights:
        rank_a = int(rng.integers(1, dA + 1))
        rank_b = int(rng.integers(1, dB + 1))
        rho += w * np.kron(random_density(dA, rank_a, rng), random_density(dB, rank_b, rng))
    return rho


def random_classical_on_A(dA: int, dB: int, seed=None, basis=None) -> np.ndarray:
    """sum_i p_i |a_i><a_i| (x) rho_i with a random orthonormal basis {a_i} unless given."""
    rng = rng_from(seed)
    u = random_unitary(dA, rng) if basis is None else np.asarray(basis)
    p = rng.dirichlet(np.ones(dA))
    rho = np.zeros((dA * dB, dA * dB), dtype=np.complex128)
    for i in range(dA):
        proj = np.outer(u[:, i], np.conj(u[:, i]))
        rho += p[i] * np.kron(proj, random_density(dB, seed=rng))
    return rho
