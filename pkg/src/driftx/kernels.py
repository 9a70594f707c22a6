"""Laplace kernel and pairwise kernel matrices.

The kernel is k_tau(x, y) = exp(-||x - y||_2 / tau). Distances are true
Euclidean norms (not squared) accumulated in double precision; scipy's
cdist computes them from coordinate differences directly, so the matrix is
exactly symmetric with unit diagonal when both sides are the same array.
"""

from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import as_points

# Default temperature for raw 2D toy coordinates (span roughly [-2, 2]).
DEFAULT_TAU = 0.5


@dataclass(frozen=True)
class KernelParams:
    """One or more kernel temperature groups with aggregation weights."""

    temperatures: tuple = (DEFAULT_TAU,)
    group_weights: tuple = None

    def __post_init__(self):
        temps = tuple(float(t) for t in np.atleast_1d(self.temperatures))
        if not temps:
            raise ValueError("at least one temperature is required")
        for t in temps:
            if not np.isfinite(t) or t <= 0:
                raise ValueError(f"temperatures must be finite and positive, got {t}")
        if self.group_weights is None:
            weights = tuple(1.0 for _ in temps)
        else:
            weights = tuple(float(w) for w in np.atleast_1d(self.group_weights))
        if len(weights) != len(temps):
            raise ValueError("group_weights must match temperatures in length")
        for w in weights:
            if not np.isfinite(w) or w < 0:
                raise ValueError(f"group weights must be finite and >= 0, got {w}")
        if not any(w > 0 for w in weights):
            raise ValueError("at least one group weight must be positive")
        object.__setattr__(self, "temperatures", temps)
        object.__setattr__(self, "group_weights", weights)

    @property
    def num_groups(self) -> int:
        return len(self.temperatures)


def _check_tau(tau) -> float:
    tau = float(tau)
    if not np.isfinite(tau) or tau <= 0:
        raise ValueError(f"tau must be finite and positive, got {tau}")
    return tau


def laplace_kernel(x, y, tau) -> float:
    """Kernel value for a single pair of points, in (0, 1]."""
    tau = _check_tau(tau)
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise ValueError(f"dimension mismatch: {x.shape[0]} vs {y.shape[0]}")
    if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
        raise ValueError("kernel inputs must be finite")
    return float(np.exp(-np.linalg.norm(x - y) / tau))


def kernel_matrix(a, b, tau) -> np.ndarray:
    """Pairwise kernel values: entry (i, j) = k(a_i, b_j)."""
    tau = _check_tau(tau)
    pa, pb = as_points(a), as_points(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    return np.exp(cdist(pa, pb) / -tau)
