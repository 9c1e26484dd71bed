"""Local affine model of the water-filling decision map.

Profile space partitions into regions on which the optimal active set is
constant; inside a region the decision is exactly affine in the profile,
x(l) = J l + c.  Over the active block the Jacobian has -1 + 1/n on the
diagonal and 1/n off it (n = active count), zero elsewhere; the offset is
E/n on active coordinates.  On region boundaries the model is the
one-sided derivative implied by the solver's deterministic tie-breaking.
"""

from __future__ import annotations

import numpy as np

from .profiles import LinearizationPoint, TaskSpec
from .waterfill import solve_waterfill


def identify_region(profile, task: TaskSpec) -> tuple[int, ...]:
    """Active set of the optimal decision at ``profile`` (the region label)."""
    return solve_waterfill(profile, task).active


def linearize_at(profile, task: TaskSpec) -> LinearizationPoint:
    """Jacobian and offset of the decision map in the region containing ``profile``.

    The returned model reproduces the exact solver throughout the region:
    for any profile l' with the same active set, x(l') = jacobian @ l' + offset.
    """
    active = identify_region(profile, task)
    n = len(active)
    dim = task.dim
    jacobian = np.zeros((dim, dim))
    offset = np.zeros(dim)
    if n:
        sel = np.array(active, dtype=int)
        block = np.full((n, n), 1.0 / n)
        np.fill_diagonal(block, -1.0 + 1.0 / n)
        jacobian[np.ix_(sel, sel)] = block
        offset[sel] = task.budget / n
    return LinearizationPoint(jacobian=jacobian, offset=offset, n_active=n, active=active)


def apply_region_jacobian(active: tuple[int, ...], vec: np.ndarray) -> np.ndarray:
    """Multiply by the region's Jacobian without materializing the matrix:
    (J v)_j = mean over the active set of v minus v_j there, zero elsewhere.

    The matrix is symmetric, so this serves for both J v and v^T J.  Used
    by both training loops, where building the full P x P block per
    profile per iteration would dominate the cost."""
    out = np.zeros_like(vec)
    if active:
        sel = np.array(active, dtype=int)
        out[sel] = np.mean(vec[sel]) - vec[sel]
    return out
