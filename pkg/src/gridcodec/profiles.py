"""Core value types for load profiles and the downstream decision problem.

A load profile is a plain length-P float vector (one energy reading per
time slot); ``ProfileDataset`` stacks T of them row-major as a T x P array.
All types here are immutable after construction (arrays are frozen
read-only), so they can be shared freely across threads.

The numerical tolerances used throughout the package are centralized here:
``BUDGET_RTOL`` for budget-feasibility checks and ``ACTIVE_ATOL`` for
deciding whether an allocation entry counts as strictly positive.
"""

from __future__ import annotations

import math
import numbers
from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionMismatch, InvalidTask, NonFinite

# Relative tolerance on "allocations sum to the budget".
BUDGET_RTOL = 1e-9
# Absolute threshold above which an allocation entry counts as loaded.
ACTIVE_ATOL = 1e-12

# Distinguished exponent value selecting the max-norm decision problem.
INFINITY = math.inf


def _frozen_array(values, dtype=float, ndim: int | None = None) -> np.ndarray:
    arr = np.array(values, dtype=dtype)
    if ndim is not None and arr.ndim != ndim:
        raise DimensionMismatch(f"expected a {ndim}-d array, got shape {arr.shape}")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True)
class ProfileDataset:
    """A T x P collection of load profiles plus free-form provenance metadata."""

    values: np.ndarray
    metadata: dict[str, str] = field(default_factory=dict)

    def __post_init__(self) -> None:
        object.__setattr__(self, "values", _frozen_array(self.values, ndim=2))

    @classmethod
    def from_profiles(cls, profiles, dim: int | None = None,
                      metadata: dict[str, str] | None = None) -> "ProfileDataset":
        """Stack individual profiles, raising loudly on any length mismatch."""
        rows = [np.asarray(p, dtype=float) for p in profiles]
        if not rows:
            raise DimensionMismatch("dataset must contain at least one profile")
        if dim is None:
            dim = rows[0].shape[0] if rows[0].ndim == 1 else -1
        for i, row in enumerate(rows):
            if row.ndim != 1 or row.shape[0] != dim:
                raise DimensionMismatch(f"profile {i} has length {row.size}, expected {dim}")
        return cls(np.stack(rows), metadata or {})

    @property
    def count(self) -> int:
        return self.values.shape[0]

    @property
    def dim(self) -> int:
        return self.values.shape[1]

    def profile(self, index: int) -> np.ndarray:
        return self.values[index]

    def __iter__(self):
        return iter(self.values)


@dataclass(frozen=True)
class TaskSpec:
    """Parameters of the decision problem: norm exponent, energy budget, dimension.

    ``exponent`` is a positive integer or ``INFINITY`` (the max norm);
    ``budget`` is the total energy E > 0 the decision must allocate.
    """

    exponent: int | float
    budget: float
    dim: int

    def __post_init__(self) -> None:
        p = self.exponent
        if isinstance(p, numbers.Integral):
            p = int(p)
        elif not (isinstance(p, float) and math.isinf(p) and p > 0):
            raise InvalidTask(f"exponent must be a positive integer or INFINITY, got {p!r}")
        if p != INFINITY and p < 1:
            raise InvalidTask(f"exponent must be >= 1, got {p}")
        object.__setattr__(self, "exponent", p)
        if not (self.budget > 0 and math.isfinite(self.budget)):
            raise InvalidTask(f"budget must be a positive finite number, got {self.budget!r}")
        if self.dim < 1:
            raise InvalidTask(f"dim must be >= 1, got {self.dim}")

    @property
    def is_max_norm(self) -> bool:
        return math.isinf(self.exponent)


@dataclass(frozen=True)
class Allocation:
    """A feasible decision: nonnegative loads summing to the budget.

    ``active`` holds the indices with load numerically above ``ACTIVE_ATOL``,
    sorted ascending; ``water_level`` is the common level mu the loaded
    coordinates are raised to.
    """

    x: np.ndarray
    water_level: float
    active: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "x", _frozen_array(self.x, ndim=1))
        object.__setattr__(self, "active", tuple(int(j) for j in self.active))

    @property
    def n_active(self) -> int:
        return len(self.active)


@dataclass(frozen=True)
class LinearizationPoint:
    """Affine local model of the optimal decision: x(l) = jacobian @ l + offset.

    Valid throughout the region of profile space sharing this active set;
    rows and columns outside ``active`` are exactly zero.
    """

    jacobian: np.ndarray
    offset: np.ndarray
    n_active: int
    active: tuple[int, ...]

    def __post_init__(self) -> None:
        object.__setattr__(self, "jacobian", _frozen_array(self.jacobian, ndim=2))
        object.__setattr__(self, "offset", _frozen_array(self.offset, ndim=1))
        object.__setattr__(self, "active", tuple(int(j) for j in self.active))


def validate_dataset(dataset: ProfileDataset, dim: int | None = None) -> None:
    """Check dataset invariants; raise on the first violation.

    Raises DimensionMismatch when a profile length disagrees with ``dim``
    (or the dataset is empty), NonFinite when any entry is NaN or infinite.
    """
    if dataset.count < 1:
        raise DimensionMismatch("dataset must contain at least one profile")
    if dim is not None and dataset.dim != dim:
        raise DimensionMismatch(f"dataset profiles have length {dataset.dim}, expected {dim}")
    if not np.all(np.isfinite(dataset.values)):
        bad = np.argwhere(~np.isfinite(dataset.values))
        i, j = bad[0]
        raise NonFinite(f"profile {i} has a non-finite entry at slot {j}")


def as_profile(values, dim: int | None = None) -> np.ndarray:
    """Coerce to a 1-d float vector, optionally checking its length."""
    arr = np.asarray(values, dtype=float)
    if arr.ndim != 1:
        raise DimensionMismatch(f"a profile must be 1-d, got shape {arr.shape}")
    if dim is not None and arr.shape[0] != dim:
        raise DimensionMismatch(f"profile has length {arr.shape[0]}, expected {dim}")
    return arr
