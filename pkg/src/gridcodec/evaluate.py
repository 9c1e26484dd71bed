"""Utility-loss metrics, codec comparison, and rate sweeps.

All metrics solve both decision problems exactly per profile; the affine
approximation never enters evaluation.  Two normalizations of the loss are
always reported side by side: the pooled ratio sum|gap| / sum|ideal| and
the mean of per-profile ratios, so either convention can be read off one
report.  Reports are plain dicts matching ``REPORT_SCHEMA`` and serialize
deterministically (sorted keys, shortest-repr floats).
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import jsonschema
import numpy as np

from .autoencoder import AutoencoderCodec, ae_decode, ae_encode
from .errors import DimensionMismatch
from .profiles import ProfileDataset, TaskSpec
from .quantize import QuantMode, QuantizerSpec, calibrate, quantize_dequantize
from .transforms import LinearCodec
from .waterfill import pnorm, solve_waterfill

Codec = LinearCodec | AutoencoderCodec

REPORT_SCHEMA = {
    "type": "object",
    "required": ["task", "codecs"],
    "properties": {
        "task": {
            "type": "object",
            "required": ["p", "E"],
            "properties": {
                "p": {"oneOf": [{"type": "integer", "minimum": 1}, {"const": "inf"}]},
                "E": {"type": "number", "exclusiveMinimum": 0},
                "P": {"type": "integer", "minimum": 1},
            },
        },
        "codecs": {
            "type": "array",
            "items": {
                "type": "object",
                "required": ["name", "mse_loss", "relative_percent"],
                "properties": {
                    "name": {"type": "string"},
                    "mse_loss": {"type": "number", "minimum": 0},
                    "relative_percent": {"type": "number", "minimum": 0},
                    "relative_percent_mean": {"type": "number", "minimum": 0},
                    "mean_true_utility": {"type": "number"},
                    "quantizer": {
                        "type": "object",
                        "required": ["bits", "mode"],
                        "properties": {
                            "bits": {"type": "integer", "minimum": 1},
                            "mode": {"enum": ["signed", "unit"]},
                            "m": {"type": "array", "items": {"type": "number"}},
                        },
                    },
                    "curve": {
                        "type": "array",
                        "items": {
                            "type": "array",
                            "minItems": 3,
                            "maxItems": 3,
                            "prefixItems": [
                                {"type": "integer", "minimum": 1},
                                {"type": "number", "minimum": 0},
                                {"type": "number", "minimum": 0},
                            ],
                        },
                    },
                },
            },
        },
    },
}


@dataclass(frozen=True)
class EvalEntry:
    """Per-codec metrics; ``curve`` rows are (bits, mse_loss, relative_percent)."""

    name: str
    mse_loss: float
    relative_percent: float
    relative_percent_mean: float
    mean_true_utility: float
    quantizer: dict | None = None
    curve: tuple[tuple[int, float, float], ...] | None = None

    def to_json_dict(self) -> dict:
        out = {
            "name": self.name,
            "mse_loss": self.mse_loss,
            "relative_percent": self.relative_percent,
            "relative_percent_mean": self.relative_percent_mean,
            "mean_true_utility": self.mean_true_utility,
        }
        if self.quantizer is not None:
            out["quantizer"] = self.quantizer
        if self.curve is not None:
            out["curve"] = [[b, m, r] for b, m, r in self.curve]
        return out


def default_quant_mode(codec: Codec) -> QuantMode:
    """Signed dead-zone range for linear codecs, [0, 1] for sigmoid coefficients."""
    return QuantMode.UNIT if isinstance(codec, AutoencoderCodec) else QuantMode.SIGNED


def codec_coefficients(codec: Codec, dataset: ProfileDataset) -> np.ndarray:
    """Encoder outputs for every profile, stacked T x N (calibration input)."""
    if isinstance(codec, AutoencoderCodec):
        return np.stack([ae_encode(codec, ell) for ell in dataset])
    return dataset.values @ codec.matrix.T


def reconstruct(codec: Codec, profile,
                quantizer: tuple[QuantizerSpec, int] | None = None) -> np.ndarray:
    """Encode, optionally quantize-dequantize, decode one profile."""
    if isinstance(codec, AutoencoderCodec):
        theta = ae_encode(codec, profile)
        if quantizer is not None:
            spec, bits = quantizer
            _, theta = quantize_dequantize(theta, spec, bits)
        return ae_decode(codec, theta)
    theta = codec.matrix @ np.asarray(profile, dtype=float)
    if quantizer is not None:
        spec, bits = quantizer
        _, theta = quantize_dequantize(theta, spec, bits)
    return codec.matrix.T @ theta


def _utility_gaps(codec: Codec, dataset: ProfileDataset, task: TaskSpec,
                  quantizer, ideal_norms: np.ndarray) -> np.ndarray:
    gaps = np.empty(dataset.count)
    for i, ell in enumerate(dataset):
        recon = reconstruct(codec, ell, quantizer)
        achieved = pnorm(solve_waterfill(recon, task).x + ell, task.exponent)
        gaps[i] = achieved - ideal_norms[i]
    return gaps


def _entry_from_gaps(name: str, gaps: np.ndarray, ideal_norms: np.ndarray,
                     quantizer_dict: dict | None = None,
                     curve=None) -> EvalEntry:
    abs_gaps = np.abs(gaps)
    pooled_denominator = float(np.sum(ideal_norms))
    pooled = 100.0 * float(np.sum(abs_gaps)) / pooled_denominator if pooled_denominator > 0 else 0.0
    ratios = np.where(ideal_norms > 0, abs_gaps / np.where(ideal_norms > 0, ideal_norms, 1.0), 0.0)
    return EvalEntry(
        name=name,
        mse_loss=float(np.mean(gaps ** 2)),
        relative_percent=pooled,
        relative_percent_mean=100.0 * float(np.mean(ratios)),
        mean_true_utility=float(np.mean(-ideal_norms)),
        quantizer=quantizer_dict,
        curve=curve,
    )


def _ideal_norms(dataset: ProfileDataset, task: TaskSpec) -> np.ndarray:
    return np.array([
        pnorm(solve_waterfill(ell, task).x + ell, task.exponent) for ell in dataset
    ])


def eval_codec(codec: Codec, dataset: ProfileDataset, task: TaskSpec,
               quantizer: tuple[QuantizerSpec, int] | None = None,
               name: str = "codec") -> EvalEntry:
    """Score one codec over a dataset, optionally through a quantizer."""
    if codec.dim != dataset.dim:
        raise DimensionMismatch(f"codec dimension {codec.dim} != dataset dimension {dataset.dim}")
    ideal_norms = _ideal_norms(dataset, task)
    gaps = _utility_gaps(codec, dataset, task, quantizer, ideal_norms)
    quant_dict = None
    if quantizer is not None:
        spec, bits = quantizer
        quant_dict = spec.to_json_dict(bits)
    return _entry_from_gaps(name, gaps, ideal_norms, quantizer_dict=quant_dict)


def sweep_bits(codec: Codec, dataset: ProfileDataset, task: TaskSpec,
               bits_list, name: str = "codec",
               calibration_dataset: ProfileDataset | None = None) -> EvalEntry:
    """Rate sweep: calibrate once, then score at each bit width.

    Calibration uses ``calibration_dataset`` when given (the training split
    in a holdout protocol; evaluation coefficients may then clip) and the
    evaluated dataset otherwise.  Headline metrics are the unquantized
    reference; the curve holds (bits, mse_loss, relative_percent) in the
    order given."""
    bits_list = [int(b) for b in bits_list]
    if not bits_list:
        raise DimensionMismatch("bits_list must be nonempty")
    spec = calibrate(codec_coefficients(codec, calibration_dataset or dataset),
                     default_quant_mode(codec))
    ideal_norms = _ideal_norms(dataset, task)
    base_gaps = _utility_gaps(codec, dataset, task, None, ideal_norms)
    curve = []
    for bits in bits_list:
        gaps = _utility_gaps(codec, dataset, task, (spec, bits), ideal_norms)
        abs_gaps = np.abs(gaps)
        denom = float(np.sum(ideal_norms))
        relative = 100.0 * float(np.sum(abs_gaps)) / denom if denom > 0 else 0.0
        curve.append((bits, float(np.mean(gaps ** 2)), relative))
    return _entry_from_gaps(name, base_gaps, ideal_norms, curve=tuple(curve))


def build_report(task: TaskSpec, entries) -> dict:
    """Assemble the report dict shared by the JSON and CSV emitters."""
    p = "inf" if task.is_max_norm else int(task.exponent)
    return {
        "task": {"p": p, "E": float(task.budget), "P": int(task.dim)},
        "codecs": [entry.to_json_dict() for entry in entries],
    }


def validate_report(report: dict) -> None:
    jsonschema.validate(report, REPORT_SCHEMA)


def report_to_json(report: dict) -> str:
    return json.dumps(report, indent=2, sort_keys=True, allow_nan=False) + "\n"


def write_report_json(report: dict, path) -> None:
    Path(path).write_text(report_to_json(report))


def write_report_csv(report: dict, path) -> None:
    """Flat delimited view: one row per (codec, bits) point for plotting."""
    lines = ["codec,bits,mse_loss,relative_percent"]
    for entry in report["codecs"]:
        bits = entry.get("quantizer", {}).get("bits", "")
        lines.append(f"{entry['name']},{bits},{entry['mse_loss']!r},{entry['relative_percent']!r}")
        for b, mse, rel in entry.get("curve", []):
            lines.append(f"{entry['name']},{b},{mse!r},{rel!r}")
    Path(path).write_text("\n".join(lines) + "\n")
