"""gridcodec: utility-aware lossy compression of smart-grid load profiles.

Learns linear and non-linear rank-limited codecs that minimize the
downstream decision-maker's optimality loss (a budgeted p-norm
water-filling problem) instead of reconstruction distortion, and
benchmarks them against the classical KLT under dead-zone quantization.
"""

from .autoencoder import (
    AutoencoderCodec,
    TrainConfig,
    ae_decode,
    ae_encode,
    ae_forward,
    ae_init,
    ae_loss,
    ae_loss_gradients,
    ae_train,
)
from .errors import (
    DimensionMismatch,
    EmptySelection,
    GridCodecError,
    InvalidBits,
    InvalidTask,
    NonFinite,
    ParseError,
    RankTooLarge,
    TooLarge,
    UnsupportedExponent,
)
from .linearize import apply_region_jacobian, identify_region, linearize_at
from .profiles import (
    ACTIVE_ATOL,
    BUDGET_RTOL,
    INFINITY,
    Allocation,
    LinearizationPoint,
    ProfileDataset,
    TaskSpec,
    validate_dataset,
)
from .quantize import QuantMode, QuantizerSpec, calibrate, quantize_dequantize
from .transforms import (
    FitReport,
    LinearCodec,
    StopReason,
    empirical_loss,
    encode_decode,
    fit_utility_linear,
    klt_fit,
    loss_gradient,
)
from .waterfill import (
    active_count,
    oracle_solve,
    pnorm,
    pnorm_subgradient,
    solve_waterfill,
    utility,
)

__version__ = "0.1.0"

__all__ = [
    "ACTIVE_ATOL",
    "Allocation",
    "AutoencoderCodec",
    "BUDGET_RTOL",
    "DimensionMismatch",
    "EmptySelection",
    "FitReport",
    "GridCodecError",
    "INFINITY",
    "InvalidBits",
    "InvalidTask",
    "LinearCodec",
    "LinearizationPoint",
    "NonFinite",
    "ParseError",
    "ProfileDataset",
    "QuantMode",
    "QuantizerSpec",
    "RankTooLarge",
    "StopReason",
    "TaskSpec",
    "TooLarge",
    "TrainConfig",
    "UnsupportedExponent",
    "active_count",
    "ae_decode",
    "ae_encode",
    "ae_forward",
    "ae_init",
    "ae_loss",
    "ae_loss_gradients",
    "ae_train",
    "apply_region_jacobian",
    "calibrate",
    "empirical_loss",
    "encode_decode",
    "fit_utility_linear",
    "identify_region",
    "klt_fit",
    "linearize_at",
    "loss_gradient",
    "oracle_solve",
    "pnorm",
    "pnorm_subgradient",
    "quantize_dequantize",
    "solve_waterfill",
    "utility",
    "validate_dataset",
]
