"""Exact solution of the budgeted p-norm decision problem.

The problem: given a profile ``l`` and budget E, choose nonnegative loads
``x`` with sum(x) = E minimizing ||x + l||_p.  For every exponent p > 1
(and in the max-norm limit) the minimizer has water-filling form
x_j = max(mu - l_j, 0), with the level mu set so loads sum to E.  The
exponent therefore only changes the achieved utility value, never the
allocation itself; p = 1 is degenerate (non-unique minimizers) and we
return the same water-filling point for determinism.

``oracle_solve`` is an independent reference solver that enumerates every
candidate active set; its cost grows exponentially with the dimension and
it is intended for tests only.
"""

from __future__ import annotations

import itertools
import math

import numpy as np

from .errors import DimensionMismatch, InvalidTask, TooLarge
from .profiles import ACTIVE_ATOL, Allocation, TaskSpec, as_profile

# Largest dimension oracle_solve will enumerate (2^P - 1 subsets).
ORACLE_MAX_DIM = 12


def pnorm(v: np.ndarray, exponent: int | float) -> float:
    """||v||_p, overflow-safe for large p via max-normalization."""
    v = np.asarray(v, dtype=float)
    peak = float(np.max(np.abs(v), initial=0.0))
    if math.isinf(exponent) or peak == 0.0:
        return peak
    if exponent == 1:
        return float(np.sum(np.abs(v)))
    return peak * float(np.sum((np.abs(v) / peak) ** exponent) ** (1.0 / exponent))


def utility(x, profile, exponent: int | float) -> float:
    """u(x; l) = -||x + l||_p, the decision-maker's objective."""
    x = np.asarray(x, dtype=float)
    ell = np.asarray(profile, dtype=float)
    if x.shape != ell.shape:
        raise DimensionMismatch(f"decision has shape {x.shape}, profile {ell.shape}")
    return -pnorm(x + ell, exponent)


def pnorm_subgradient(v: np.ndarray, vnorm: float, exponent: int | float) -> np.ndarray:
    """d||v||_p / dv, computed as sign(v) * (|v|/||v||)^(p-1) for stability.

    For the max norm this is the basis direction of the peak coordinate
    (lowest index on ties), signed.  ``vnorm`` must be ||v||_p and positive.
    """
    if math.isinf(exponent):
        k = int(np.argmax(np.abs(v)))
        d = np.zeros_like(v)
        d[k] = math.copysign(1.0, v[k])
        return d
    return np.sign(v) * (np.abs(v) / vnorm) ** (exponent - 1)


def active_count(ell_sorted: np.ndarray, budget: float) -> int:
    """Number of coordinates loaded by the water-filling solution.

    ``ell_sorted`` must be non-decreasing.  Returns the largest n such that
    (n-1) * ell_sorted[n-1] - sum(ell_sorted[:n-1]) < budget; n = 1 always
    qualifies since the budget is positive.
    """
    s = np.asarray(ell_sorted, dtype=float)
    n = s.shape[0]
    # threshold(n) = (n-1)*s[n-1] - sum(s[:n-1]) is non-decreasing in n,
    # so the qualifying set is a prefix.
    counts = np.arange(n, dtype=float)
    prefix = np.concatenate(([0.0], np.cumsum(s)[:-1]))
    below = counts * s - prefix < budget
    failures = np.nonzero(~below)[0]
    return int(failures[0]) if failures.size else n


def solve_waterfill(profile, task: TaskSpec) -> Allocation:
    """Exact minimizer of ||x + l||_p over the budget simplex.

    The allocation is identical for every exponent p > 1 and for the max
    norm.  Ties between equal profile entries at the activity boundary are
    broken toward the lower original index (stable sort).
    """
    ell = as_profile(profile, task.dim)
    if task.budget <= 0:
        raise InvalidTask(f"budget must be positive, got {task.budget}")
    order = np.argsort(ell, kind="stable")
    s = ell[order]
    nstar = active_count(s, task.budget)
    mu = (task.budget + float(np.sum(s[:nstar]))) / nstar
    x_sorted = np.zeros_like(s)
    x_sorted[:nstar] = np.maximum(mu - s[:nstar], 0.0)
    x = np.empty_like(ell)
    x[order] = x_sorted
    active = tuple(int(j) for j in np.nonzero(x > ACTIVE_ATOL)[0])
    return Allocation(x=x, water_level=mu, active=active)


def oracle_solve(profile, task: TaskSpec) -> Allocation:
    """Reference solver by exhaustive enumeration of candidate active sets.

    For each nonempty subset I the first-order conditions with the budget
    constraint give a common level c = (E + sum_I l_j) / |I| and loads
    x_j = c - l_j on I.  A candidate survives when it is primal feasible
    (x_j > -tol on I) and no excluded coordinate could profitably enter
    (l_j >= c - tol off I).  The best-utility survivor is returned.
    Only for small dimensions; raises TooLarge above ORACLE_MAX_DIM.
    """
    ell = as_profile(profile, task.dim)
    n = ell.shape[0]
    if n > ORACLE_MAX_DIM:
        raise TooLarge(f"oracle enumerates 2^P - 1 subsets; P = {n} > {ORACLE_MAX_DIM}")
    tol = 1e-9
    best: Allocation | None = None
    best_u = -math.inf
    indices = range(n)
    for size in range(1, n + 1):
        for subset in itertools.combinations(indices, size):
            sel = np.array(subset, dtype=int)
            level = (task.budget + float(np.sum(ell[sel]))) / size
            loads = level - ell[sel]
            if np.min(loads) <= -tol:
                continue
            rest = np.setdiff1d(np.arange(n), sel, assume_unique=True)
            if rest.size and np.min(ell[rest]) < level - tol:
                continue
            x = np.zeros(n)
            x[sel] = np.maximum(loads, 0.0)
            u = utility(x, ell, task.exponent)
            if u > best_u:
                best_u = u
                active = tuple(int(j) for j in np.nonzero(x > ACTIVE_ATOL)[0])
                best = Allocation(x=x, water_level=level, active=active)
    assert best is not None  # the water-filling active set always survives both checks
    return best
