"""Channel discrimination power of bipartite states: OSD, diamond norms, bounds, tomography."""

from .errors import (
    CdpLabError,
    InvalidInput,
    NotCompletelyPositive,
    NotHermitian,
    NotTomographicallyComplete,
    ParseError,
    ReconstructionFailed,
    SolverFailed,
    ValidationError,
)
from .objects import (
    BipartiteState,
    HermitianPreservingMap,
    PureBipartiteState,
    QuantumChannel,
    apply_channel_on_A,
    choi_of,
    isotropic_state,
    kraus_of,
    purify_and_extend_check,
    schmidt_decompose,
)
from .osd import OperatorSchmidtDecomposition, operator_schmidt, osr, r_cn, r_cn_corrected
from .diamond import DiamondResult, diamond_norm, diamond_norm_ascent, diamond_norm_sdp, trace_distance
from .cdp import (
    CdpReport,
    PerturbationChannelPair,
    cdp_adversarial_estimate,
    cdp_bounds_general,
    cdp_discord_bound,
    cdp_isotropic_bounds,
    cdp_osr_reduction_bound,
    cdp_pure_exact,
    cdp_report,
    perturbation_pair,
    pure_witness_channels,
)
from .tomography import ReconstructionResult, noise_sensitivity, reconstruct_channel

__version__ = "0.1.0"
