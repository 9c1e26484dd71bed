"""Non-linear codec: one sigmoid hidden layer of width N, linear decoder.

The encoder squashes its N outputs into (0, 1), which is what makes the
fixed-range coefficient quantizer well-posed downstream.  Training
minimizes the squared utility gap between decisions computed on the
reconstruction and on the true profile; the gradient is routed through
the decision map via its affine region model, recomputed at every
forward pass.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, UnsupportedExponent
from .linearize import apply_region_jacobian
from .profiles import ProfileDataset, TaskSpec, _frozen_array, as_profile
from .transforms import FitReport, StopReason
from .waterfill import pnorm, pnorm_subgradient, solve_waterfill


@dataclass(frozen=True)
class AutoencoderCodec:
    """Weights of the two dense layers; the last column of each is the bias."""

    encoder_weights: np.ndarray  # N x (P+1)
    decoder_weights: np.ndarray  # P x (N+1)

    def __post_init__(self) -> None:
        object.__setattr__(self, "encoder_weights", _frozen_array(self.encoder_weights, ndim=2))
        object.__setattr__(self, "decoder_weights", _frozen_array(self.decoder_weights, ndim=2))
        n, p_plus_1 = self.encoder_weights.shape
        p, n_plus_1 = self.decoder_weights.shape
        if p_plus_1 != p + 1 or n_plus_1 != n + 1:
            raise DimensionMismatch(
                f"layer shapes {self.encoder_weights.shape} / {self.decoder_weights.shape} "
                "are not (N, P+1) / (P, N+1)")
        if not (np.all(np.isfinite(self.encoder_weights)) and np.all(np.isfinite(self.decoder_weights))):
            raise DimensionMismatch("codec weights have non-finite entries")

    @property
    def rank(self) -> int:
        return self.encoder_weights.shape[0]

    @property
    def dim(self) -> int:
        return self.decoder_weights.shape[0]

    def to_json_dict(self) -> dict:
        return {
            "kind": "autoencoder",
            "N": self.rank,
            "P": self.dim,
            "W1": [[float(v) for v in row] for row in self.encoder_weights],
            "W2": [[float(v) for v in row] for row in self.decoder_weights],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "AutoencoderCodec":
        return cls(np.array(obj["W1"], dtype=float), np.array(obj["W2"], dtype=float))


@dataclass(frozen=True)
class TrainConfig:
    """Training hyperparameters; batch_size 0 means full batch."""

    epochs: int = 500
    learning_rate: float = 0.01
    batch_size: int = 0
    seed: int = 0
    init_scale: float = 0.1


def _sigmoid(t: np.ndarray) -> np.ndarray:
    out = np.empty_like(t)
    pos = t >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-t[pos]))
    expt = np.exp(t[~pos])
    out[~pos] = expt / (1.0 + expt)
    return out


def ae_init(dim: int, width: int, seed: int = 0, init_scale: float = 0.1) -> AutoencoderCodec:
    """Fresh codec with uniform(-init_scale, init_scale) weights, zero biases."""
    rng = np.random.default_rng(seed)
    enc = np.zeros((width, dim + 1))
    dec = np.zeros((dim, width + 1))
    enc[:, :dim] = rng.uniform(-init_scale, init_scale, size=(width, dim))
    dec[:, :width] = rng.uniform(-init_scale, init_scale, size=(dim, width))
    return AutoencoderCodec(enc, dec)


def ae_encode(codec: AutoencoderCodec, profile) -> np.ndarray:
    """Sigmoid coefficients in (0, 1)^N for one profile."""
    ell = as_profile(profile, codec.dim)
    return _sigmoid(codec.encoder_weights[:, :-1] @ ell + codec.encoder_weights[:, -1])


def ae_decode(codec: AutoencoderCodec, theta) -> np.ndarray:
    """Linear reconstruction from (possibly quantized) coefficients."""
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (codec.rank,):
        raise DimensionMismatch(f"coefficients have shape {theta.shape}, expected ({codec.rank},)")
    return codec.decoder_weights[:, :-1] @ theta + codec.decoder_weights[:, -1]


def ae_forward(codec: AutoencoderCodec, profile) -> tuple[np.ndarray, np.ndarray]:
    """Encode to sigmoid coefficients in (0, 1) and linearly decode."""
    theta = ae_encode(codec, profile)
    return theta, ae_decode(codec, theta)


def ae_loss(codec: AutoencoderCodec, profile, task: TaskSpec) -> float:
    """Squared utility gap of the decision taken on the reconstruction."""
    ell = as_profile(profile, codec.dim)
    _, recon = ae_forward(codec, ell)
    achieved = pnorm(solve_waterfill(recon, task).x + ell, task.exponent)
    ideal = pnorm(solve_waterfill(ell, task).x + ell, task.exponent)
    return (achieved - ideal) ** 2


def ae_loss_gradients(codec: AutoencoderCodec, profile, task: TaskSpec,
                      ideal_norm: float | None = None):
    """Per-profile loss and analytic weight gradients.

    The chain rule passes through the decision map using the affine model
    of the reconstruction's region (frozen during the backward pass) and
    then through the linear decoder and sigmoid encoder.  Returns
    (loss, encoder_gradient, decoder_gradient).
    """
    p = task.exponent
    if not math.isinf(p) and p < 2:
        raise UnsupportedExponent(f"gradient needs exponent >= 2 or INFINITY, got {p}")
    ell = as_profile(profile, codec.dim)
    if ideal_norm is None:
        ideal_norm = pnorm(solve_waterfill(ell, task).x + ell, p)
    hidden_in = codec.encoder_weights[:, :-1] @ ell + codec.encoder_weights[:, -1]
    theta = _sigmoid(hidden_in)
    recon = codec.decoder_weights[:, :-1] @ theta + codec.decoder_weights[:, -1]
    alloc = solve_waterfill(recon, task)
    v = alloc.x + ell
    vnorm = pnorm(v, p)
    gap = vnorm - ideal_norm
    loss = gap ** 2
    if vnorm == 0.0:
        return loss, np.zeros_like(codec.encoder_weights), np.zeros_like(codec.decoder_weights)
    d_recon = 2.0 * gap * apply_region_jacobian(alloc.active, pnorm_subgradient(v, vnorm, p))
    aug_theta = np.append(theta, 1.0)
    dec_grad = np.outer(d_recon, aug_theta)
    d_theta = codec.decoder_weights[:, :-1].T @ d_recon
    d_hidden = d_theta * theta * (1.0 - theta)
    aug_ell = np.append(ell, 1.0)
    enc_grad = np.outer(d_hidden, aug_ell)
    return loss, enc_grad, dec_grad


def ae_train(dataset: ProfileDataset, task: TaskSpec, config: TrainConfig,
             width: int | None = None, initial: AutoencoderCodec | None = None,
             progress=None) -> tuple[AutoencoderCodec, FitReport]:
    """Gradient-descent training on the mean utility loss.

    Deterministic for a fixed config: initialization and batch shuffling
    both draw from the seeded generator.  Returns the best-loss epoch's
    weights (epoch 0 = the initialization counts) and the full loss trace.
    """
    if initial is None:
        if width is None:
            raise DimensionMismatch("either an initial codec or a width is required")
        initial = ae_init(dataset.dim, width, seed=config.seed, init_scale=config.init_scale)
    enc = initial.encoder_weights.copy()
    dec = initial.decoder_weights.copy()
    rng = np.random.default_rng(config.seed)
    ideal_norms = np.array([
        pnorm(solve_waterfill(ell, task).x + ell, task.exponent) for ell in dataset
    ])

    def mean_loss() -> float:
        codec = AutoencoderCodec(enc, dec)
        total = np.empty(dataset.count)
        for i, ell in enumerate(dataset):
            _, recon = ae_forward(codec, ell)
            achieved = pnorm(solve_waterfill(recon, task).x + ell, task.exponent)
            total[i] = (achieved - ideal_norms[i]) ** 2
        return float(np.mean(total))

    def step_full_batch() -> float:
        """One full-batch update; returns the mean loss at the pre-update weights
        (the same pass yields both, halving the solver calls)."""
        nonlocal enc, dec
        codec = AutoencoderCodec(enc, dec)
        enc_grad = np.zeros_like(enc)
        dec_grad = np.zeros_like(dec)
        total = np.empty(dataset.count)
        for i in range(dataset.count):
            loss_i, g_enc, g_dec = ae_loss_gradients(codec, dataset.values[i], task,
                                                     ideal_norm=ideal_norms[i])
            total[i] = loss_i
            enc_grad += g_enc
            dec_grad += g_dec
        enc = enc - config.learning_rate * enc_grad / dataset.count
        dec = dec - config.learning_rate * dec_grad / dataset.count
        return float(np.mean(total))

    def step_minibatch() -> None:
        nonlocal enc, dec
        order = rng.permutation(dataset.count)
        for start in range(0, dataset.count, config.batch_size):
            batch = order[start:start + config.batch_size]
            codec = AutoencoderCodec(enc, dec)
            enc_grad = np.zeros_like(enc)
            dec_grad = np.zeros_like(dec)
            for i in batch:
                _, g_enc, g_dec = ae_loss_gradients(codec, dataset.values[i], task,
                                                    ideal_norm=ideal_norms[i])
                enc_grad += g_enc
                dec_grad += g_dec
            enc = enc - config.learning_rate * enc_grad / batch.size
            dec = dec - config.learning_rate * dec_grad / batch.size

    trace: list[float] = []
    best = (enc.copy(), dec.copy(), math.inf)

    def record(loss: float, epoch: int, weights) -> None:
        nonlocal best
        trace.append(loss)
        if progress is not None:
            progress(epoch, loss)
        if loss < best[2]:
            best = (weights[0].copy(), weights[1].copy(), loss)

    if config.batch_size > 0:
        record(mean_loss(), 0, (enc, dec))
        for epoch in range(1, config.epochs + 1):
            step_minibatch()
            record(mean_loss(), epoch, (enc, dec))
    else:
        # Fused path: each step returns the loss at its pre-update weights,
        # so the trace costs one pass per epoch plus one closing evaluation.
        for epoch in range(config.epochs):
            before = (enc, dec)
            record(step_full_batch(), epoch, before)
        record(mean_loss(), config.epochs, (enc, dec))
    report = FitReport(iterations=config.epochs, loss_trace=tuple(trace),
                       stop_reason=StopReason.MAX_ITERATIONS)
    return AutoencoderCodec(best[0], best[1]), report
