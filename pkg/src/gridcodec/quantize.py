"""Dead-zone uniform scalar quantizer with per-coefficient calibration.

Two range modes: SIGNED coefficients (linear codecs) get a symmetric
dead-zone quantizer whose zero cell is twice the width of the others;
UNIT coefficients (sigmoid outputs, known to lie in [0, 1]) get a plain
uniform quantizer, since a dead zone around 0 is meaningless there.
Indices are fixed-rate, ``bits`` per coefficient; there is no entropy
coding, so a profile costs exactly N * bits.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, InvalidBits
from .profiles import _frozen_array


class QuantMode(str, Enum):
    SIGNED = "signed"
    UNIT = "unit"


@dataclass(frozen=True)
class QuantizerSpec:
    """Calibrated per-coefficient ranges; ``magnitudes`` is None in UNIT mode."""

    mode: QuantMode
    magnitudes: np.ndarray | None = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "mode", QuantMode(self.mode))
        if self.mode is QuantMode.SIGNED:
            if self.magnitudes is None:
                raise DimensionMismatch("SIGNED mode requires per-coefficient magnitudes")
            object.__setattr__(self, "magnitudes", _frozen_array(self.magnitudes, ndim=1))
            if np.any(self.magnitudes <= 0):
                raise DimensionMismatch("calibrated magnitudes must be positive")
        elif self.magnitudes is not None:
            raise DimensionMismatch("UNIT mode takes no magnitudes")

    def to_json_dict(self, bits: int) -> dict:
        out = {"bits": int(bits), "mode": self.mode.value}
        if self.magnitudes is not None:
            out["m"] = [float(m) for m in self.magnitudes]
        return out


def calibrate(coefficient_samples, mode: QuantMode = QuantMode.SIGNED) -> QuantizerSpec:
    """Fit per-coefficient ranges from a T x N sample of encoder outputs.

    SIGNED mode records each column's max magnitude (1.0 for all-zero
    columns); UNIT mode ignores the samples, the range is fixed to [0, 1].
    """
    mode = QuantMode(mode)
    if mode is QuantMode.UNIT:
        return QuantizerSpec(mode=mode)
    samples = np.atleast_2d(np.asarray(coefficient_samples, dtype=float))
    magnitudes = np.max(np.abs(samples), axis=0)
    magnitudes[magnitudes == 0.0] = 1.0
    return QuantizerSpec(mode=mode, magnitudes=magnitudes)


def quantize_dequantize(theta, spec: QuantizerSpec, bits: int) -> tuple[np.ndarray, np.ndarray]:
    """Round coefficients to ``bits``-wide indices and reconstruct.

    SIGNED: cell width m / 2^(bits-1); index sign(t) * floor(|t| / width)
    clamped to +-(2^(bits-1) - 1); index 0 reconstructs exactly to 0,
    others to the cell midpoint.  UNIT: width 1 / 2^bits, indices
    0 .. 2^bits - 1, midpoint reconstruction.
    """
    if bits < 1:
        raise InvalidBits(f"bits must be >= 1, got {bits}")
    theta = np.asarray(theta, dtype=float)
    if spec.mode is QuantMode.SIGNED:
        if theta.shape != spec.magnitudes.shape:
            raise DimensionMismatch(
                f"coefficients have shape {theta.shape}, calibration {spec.magnitudes.shape}")
        width = spec.magnitudes / 2.0 ** (bits - 1)
        top = 2 ** (bits - 1) - 1
        indices = np.sign(theta) * np.floor(np.abs(theta) / width)
        indices = np.clip(indices, -top, top).astype(int)
        recon = np.sign(indices) * (np.abs(indices) + 0.5) * width
        recon[indices == 0] = 0.0
        return indices, recon
    width = 1.0 / 2.0 ** bits
    indices = np.clip(np.floor(theta / width), 0, 2 ** bits - 1).astype(int)
    return indices, (indices + 0.5) * width
