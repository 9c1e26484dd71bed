"""Linear rank-N codecs: KLT baseline and the utility-trained transform.

A linear codec is an N x P matrix M; encoding projects a profile to
theta = M l and decoding reconstructs lhat = M^T theta.  ``klt_fit``
builds the classical mean-square-optimal codec from the top eigenvectors
of the empirical second-moment matrix (no mean-centering, so the decoder
stays exactly M^T M l).  ``fit_utility_linear`` descends the empirical
squared utility loss instead, treating the decision map as locally affine
(its region Jacobian is frozen for each step and refreshed from the
current reconstructions every iteration).
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

import numpy as np

from .errors import DimensionMismatch, RankTooLarge, UnsupportedExponent
from .linearize import apply_region_jacobian
from .profiles import ProfileDataset, TaskSpec, _frozen_array, as_profile
from .waterfill import pnorm, pnorm_subgradient, solve_waterfill, utility

# Stop once one iteration improves the loss by less than this fraction.
RELATIVE_IMPROVEMENT_THRESHOLD = 1e-4
# Below this squared-loss level the codec is already exact to float noise
# and relative improvements are meaningless; treat as converged.
LOSS_FLOOR = 1e-18


class StopReason(str, Enum):
    MAX_ITERATIONS = "max_iterations"
    RELATIVE_IMPROVEMENT_BELOW_THRESHOLD = "relative_improvement_below_threshold"


@dataclass(frozen=True)
class LinearCodec:
    """Rank-limited linear transform; rows of ``matrix`` are the analysis basis."""

    matrix: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "matrix", _frozen_array(self.matrix, ndim=2))
        if not np.all(np.isfinite(self.matrix)):
            raise DimensionMismatch("codec matrix has non-finite entries")

    @property
    def rank(self) -> int:
        return self.matrix.shape[0]

    @property
    def dim(self) -> int:
        return self.matrix.shape[1]

    def to_json_dict(self) -> dict:
        return {
            "kind": "linear",
            "N": self.rank,
            "P": self.dim,
            "B": [[float(v) for v in row] for row in self.matrix],
        }

    @classmethod
    def from_json_dict(cls, obj: dict) -> "LinearCodec":
        matrix = np.array(obj["B"], dtype=float)
        if matrix.shape != (obj["N"], obj["P"]):
            raise DimensionMismatch(
                f"matrix shape {matrix.shape} disagrees with declared ({obj['N']}, {obj['P']})")
        return cls(matrix)


@dataclass(frozen=True)
class FitReport:
    """Trace of a gradient-descent fit: loss per iterate and why it stopped."""

    iterations: int
    loss_trace: tuple[float, ...]
    stop_reason: StopReason


def klt_fit(dataset: ProfileDataset, rank: int) -> LinearCodec:
    """Codec whose rows are the top eigenvectors of the second-moment matrix.

    Eigenvalues are sorted descending; each row is normalized so its first
    entry of magnitude above 1e-12 is positive, making the result
    deterministic up to eigenvalue ties.
    """
    if not 1 <= rank <= dataset.dim:
        raise RankTooLarge(f"rank must be in [1, {dataset.dim}], got {rank}")
    second_moment = dataset.values.T @ dataset.values / dataset.count
    _, vectors = np.linalg.eigh(second_moment)  # ascending eigenvalues
    rows = vectors[:, ::-1][:, :rank].T.copy()
    for row in rows:
        nonzero = np.nonzero(np.abs(row) > 1e-12)[0]
        if nonzero.size and row[nonzero[0]] < 0:
            row *= -1.0
    return LinearCodec(rows)


def encode_decode(codec: LinearCodec, profile) -> tuple[np.ndarray, np.ndarray]:
    """Project to coefficients theta = M l and reconstruct lhat = M^T theta."""
    ell = as_profile(profile, codec.dim)
    theta = codec.matrix @ ell
    return theta, codec.matrix.T @ theta


def _loss_and_gradient(matrix: np.ndarray, dataset: ProfileDataset, task: TaskSpec,
                       true_utilities: np.ndarray, want_gradient: bool):
    """One pass over the dataset: empirical squared utility loss and, when
    requested, its gradient with the per-profile affine decision model frozen."""
    count = dataset.count
    coeffs = dataset.values @ matrix.T
    recons = coeffs @ matrix
    gaps = np.empty(count)
    grad = np.zeros_like(matrix) if want_gradient else None
    for i in range(count):
        ell = dataset.values[i]
        alloc = solve_waterfill(recons[i], task)
        v = alloc.x + ell
        vnorm = pnorm(v, task.exponent)
        gaps[i] = true_utilities[i] + vnorm  # u*(l) - u(x(lhat); l)
        if grad is None or vnorm == 0.0:
            continue
        direction = pnorm_subgradient(v, vnorm, task.exponent)
        pushed = apply_region_jacobian(alloc.active, direction)
        scale = 2.0 * gaps[i]
        grad += scale * (np.outer(coeffs[i], pushed) + np.outer(matrix @ pushed, ell))
    loss = float(np.mean(gaps ** 2))
    if grad is not None:
        grad /= count
    return loss, grad


def _true_utilities(dataset: ProfileDataset, task: TaskSpec) -> np.ndarray:
    return np.array([
        utility(solve_waterfill(ell, task).x, ell, task.exponent) for ell in dataset
    ])


def empirical_loss(codec: LinearCodec, dataset: ProfileDataset, task: TaskSpec) -> float:
    """Mean squared utility gap over the dataset, both decisions solved exactly."""
    loss, _ = _loss_and_gradient(codec.matrix, dataset, task,
                                 _true_utilities(dataset, task), want_gradient=False)
    return loss


def loss_gradient(codec: LinearCodec, dataset: ProfileDataset, task: TaskSpec) -> np.ndarray:
    """Gradient of the empirical loss in the codec matrix.

    Each profile's decision map is replaced by its affine region model at
    the current reconstruction; only exponents >= 2 (or the max norm) have
    a well-defined descent direction.
    """
    p = task.exponent
    if not math.isinf(p) and p < 2:
        raise UnsupportedExponent(f"gradient needs exponent >= 2 or INFINITY, got {p}")
    _, grad = _loss_and_gradient(codec.matrix, dataset, task,
                                 _true_utilities(dataset, task), want_gradient=True)
    return grad


def fit_utility_linear(dataset: ProfileDataset, task: TaskSpec, rank: int,
                       max_iterations: int = 200, learning_rate: float = 0.05,
                       progress=None) -> tuple[LinearCodec, FitReport]:
    """Fixed-step gradient descent on the empirical utility loss, KLT start.

    Stops at ``max_iterations`` or as soon as one iteration fails to improve
    the exact loss by at least 0.01% (relative).  Returns the best iterate
    seen, which can precede the last: a fixed step on this piecewise-smooth
    objective may overshoot.  ``progress``, when given, is called with
    (iteration, loss) after each evaluation.
    """
    p = task.exponent
    if not math.isinf(p) and p < 2:
        raise UnsupportedExponent(f"gradient needs exponent >= 2 or INFINITY, got {p}")
    matrix = klt_fit(dataset, rank).matrix.copy()
    true_utils = _true_utilities(dataset, task)
    loss, grad = _loss_and_gradient(matrix, dataset, task, true_utils, want_gradient=True)
    trace = [loss]
    best_matrix, best_loss = matrix.copy(), loss
    if progress is not None:
        progress(0, loss)
    iterations = 0
    stop_reason = StopReason.MAX_ITERATIONS
    for iteration in range(1, max_iterations + 1):
        matrix = matrix - learning_rate * grad
        loss, grad = _loss_and_gradient(matrix, dataset, task, true_utils, want_gradient=True)
        trace.append(loss)
        iterations = iteration
        if progress is not None:
            progress(iteration, loss)
        if loss < best_loss:
            best_matrix, best_loss = matrix.copy(), loss
        previous = trace[-2]
        relative_drop = (previous - loss) / previous if previous > LOSS_FLOOR else 0.0
        if relative_drop < RELATIVE_IMPROVEMENT_THRESHOLD:
            stop_reason = StopReason.RELATIVE_IMPROVEMENT_BELOW_THRESHOLD
            break
    report = FitReport(iterations=iterations, loss_trace=tuple(trace), stop_reason=stop_reason)
    return LinearCodec(best_matrix), report
