"""Ancilla-assisted channel tomography by inverting the operator Schmidt decomposition.

If rho = sum_i r_i A_i (x) B_i with all dA^2 coefficients nonzero, then
Tr_B[(1 (x) B_i) (L (x) id)[rho]] = r_i L[A_i], which fixes L on a basis.
"""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from . import matrixkit as mk
from ._parallel import ordered_map, split_seed
from .errors import InvalidInput, NotTomographicallyComplete
from .objects import BipartiteState, HermitianPreservingMap, apply_channel_on_A, isotropic_state
from .osd import OperatorSchmidtDecomposition, operator_schmidt
from .sampling import random_hermitian, rng_from

SWEEP_COLUMNS = ("p", "r_min", "noise_level", "mean_residual", "max_residual", "trials")


@dataclass(frozen=True, eq=False)
class ReconstructionResult:
    reconstructed_choi: np.ndarray
    residual_to_truth: float | None
    conditioning: float
    d_in: int
    d_out: int

    def as_map(self) -> HermitianPreservingMap:
        return HermitianPreservingMap(self.d_in, self.d_out, self.reconstructed_choi)


def _images(output_state: np.ndarray, osd: OperatorSchmidtDecomposition, d_out: int) -> list[np.ndarray]:
    """L[A_i] = Tr_B[(1 (x) B_i) output] / r_i for every factor."""
    x4 = output_state.reshape(d_out, osd.dB, d_out, osd.dB)
    return [np.einsum("eb,abce->ac", b, x4) / r for r, b in zip(osd.coefficients, osd.ops_B)]


def reconstruct_channel(output_state, osd: OperatorSchmidtDecomposition, truth=None) -> ReconstructionResult:
    """Choi matrix of L from (L (x) id)[rho] and the OSD of rho.

    The map is evaluated on the Gell-Mann inputs G_k and assembled as
    J = sum_k L[G_k] (x) G_k^T, the same convention as :func:`cdplab.objects.choi_of`.
    """
    dA, dB = osd.dA, osd.dB
    if osd.rank < dA * dA:
        raise NotTomographicallyComplete(
            f"operator Schmidt rank {osd.rank} < dA^2 = {dA * dA}; the reconstruction formula is singular"
        )
    x = mk.as_matrix(output_state, square=True, name="output_state")
    if x.shape[0] % dB:
        raise InvalidInput(f"output dimension {x.shape[0]} is not a multiple of dB = {dB}")
    d_out = x.shape[0] // dB
    imgs = _images(x, osd, d_out)
    gm = mk.hermitian_operator_basis(dA)
    choi = np.zeros((d_out * dA, d_out * dA), dtype=np.complex128)
    for g in gm:
        # L[G] = sum_i <<A_i|G>> L[A_i]
        lg = sum(np.trace(a @ g) * img for a, img in zip(osd.ops_A, imgs))
        choi += np.kron(lg, g.T)
    residual = None
    if truth is not None:
        residual = float(np.linalg.norm(choi - truth.choi, "fro"))
    conditioning = 1.0 / osd.r(dA * dA)
    return ReconstructionResult(choi, residual, conditioning, dA, d_out)


def reconstruct_from_state(state: BipartiteState, channel, threshold: float = 1e-10) -> ReconstructionResult:
    """Forward-apply ``channel`` on A, then reconstruct; residual against ``channel``."""
    osd = operator_schmidt(state, threshold)
    return reconstruct_channel(apply_channel_on_A(channel, state), osd, truth=channel)


def gue_noise(n: int, level: float, rng) -> np.ndarray:
    """Random Hermitian matrix with Frobenius norm ``level``."""
    h = random_hermitian(n, rng)
    return h * (level / np.linalg.norm(h, "fro"))


@dataclass(frozen=True)
class NoiseStats:
    r_min: float
    noise_level: float
    mean_residual: float
    max_residual: float
    trials: int


def noise_sensitivity(rho: BipartiteState, channel, noise_level: float, trials: int = 20, seed=0) -> NoiseStats:
    """Reconstruct from outputs perturbed by GUE noise of 2-norm ``noise_level``.

    The error operator is the formula applied to the noise alone, so residuals grow
    like noise_level / r_min.
    """
    if noise_level < 0 or trials < 1:
        raise InvalidInput("noise_level must be >= 0 and trials >= 1")
    osd = operator_schmidt(rho)
    out = apply_channel_on_A(channel, rho)

    def one(s):
        noisy = out + gue_noise(out.shape[0], noise_level, rng_from(s)) if noise_level > 0 else out
        return reconstruct_channel(noisy, osd, truth=channel).residual_to_truth

    res = np.array(ordered_map(one, split_seed(seed, trials)))
    return NoiseStats(osd.r(rho.dA**2), noise_level, float(res.mean()), float(res.max()), trials)


def sensitivity_sweep(d: int, ps, channel, noise_level: float = 1e-6, trials: int = 20, seed=0) -> list[dict]:
    """Noise sensitivity across isotropic probes; one row per p."""
    rows = []
    for p in ps:
        st = noise_sensitivity(isotropic_state(d, p), channel, noise_level, trials, seed)
        rows.append({
            "p": float(p),
            "r_min": st.r_min,
            "noise_level": st.noise_level,
            "mean_residual": st.mean_residual,
            "max_residual": st.max_residual,
            "trials": st.trials,
        })
    return rows


def sweep_csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.DictWriter(buf, fieldnames=SWEEP_COLUMNS, lineterminator="\n")
    writer.writeheader()
    for row in rows:
        writer.writerow({k: repr(row[k]) if isinstance(row[k], float) else row[k] for k in SWEEP_COLUMNS})
    return buf.getvalue()
