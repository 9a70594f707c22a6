"""2D toy distributions and the sample-quality metric.

Three families, all roughly filling [-2, 2]^2:

* swissroll: two interleaved spiral arms. Angle theta runs one turn from
  pi/2, radius grows linearly 0.4 -> 2.0, the second arm is rotated by pi,
  and Gaussian jitter of scale `noise` is added.
* checkerboard: uniform over the 8 dark cells of a 4x4 board on
  [-extent, extent]^2 (cells with even coordinate parity).
* gmm: equally weighted isotropic Gaussians centered on a circle of
  radius 1.5.

With `labeled=True` each mode (arm / cell / component) is tagged as a
class. Sample quality is measured by the energy distance V-statistic,
which is parameter-free and zero exactly when the two multisets coincide.
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import FeatureSet, as_points
from .rng import prng_stream


class ToyKind(enum.Enum):
    SWISSROLL = "swissroll"
    CHECKERBOARD = "checkerboard"
    GMM = "gmm"


@dataclass(frozen=True)
class ToyDistribution:
    kind: ToyKind
    noise: float = 0.05
    modes: int = 8          # gmm components
    extent: float = 2.0     # checkerboard half-width
    labeled: bool = False

    def __post_init__(self):
        if self.noise < 0 or not np.isfinite(self.noise):
            raise ValueError(f"noise must be finite and >= 0, got {self.noise}")
        if self.kind == ToyKind.GMM and self.modes < 1:
            raise ValueError("gmm needs at least one mode")
        if self.extent <= 0:
            raise ValueError("board extent must be positive")


def swissroll(noise=0.05, labeled=False) -> ToyDistribution:
    return ToyDistribution(ToyKind.SWISSROLL, noise=noise, labeled=labeled)


def checkerboard(extent=2.0, labeled=False) -> ToyDistribution:
    return ToyDistribution(ToyKind.CHECKERBOARD, noise=0.0, extent=extent, labeled=labeled)


def gaussian_mixture(modes=8, noise=0.15, labeled=False) -> ToyDistribution:
    return ToyDistribution(ToyKind.GMM, noise=noise, modes=modes, labeled=labeled)


def sample_toy(dist: ToyDistribution, n: int, seed) -> FeatureSet:
    if n < 1:
        raise ValueError(f"sample count must be >= 1, got {n}")
    rng = prng_stream(seed)
    if dist.kind == ToyKind.SWISSROLL:
        arm = rng.integers(2, size=n)
        u = rng.uniform(size=n)
        theta = 0.5 * np.pi + 2.0 * np.pi * u + np.pi * arm
        radius = 0.4 + 1.6 * u
        pts = np.stack([radius * np.cos(theta), radius * np.sin(theta)], axis=1)
        pts += dist.noise * rng.standard_normal((n, 2))
        labels = arm if dist.labeled else None
    elif dist.kind == ToyKind.CHECKERBOARD:
        cells = _dark_cells()
        pick = rng.integers(len(cells), size=n)
        offsets = rng.uniform(size=(n, 2))
        half = dist.extent / 2.0
        pts = (cells[pick] + offsets) * half - dist.extent
        labels = pick if dist.labeled else None
    elif dist.kind == ToyKind.GMM:
        centers = _gmm_centers(dist.modes)
        pick = rng.integers(dist.modes, size=n)
        pts = centers[pick] + dist.noise * rng.standard_normal((n, 2))
        labels = pick if dist.labeled else None
    else:
        raise ValueError(f"unknown toy kind {dist.kind!r}")
    return FeatureSet(pts, labels)


def _dark_cells() -> np.ndarray:
    """Lower-left corners (in cell units 0..3) of the 8 even-parity cells."""
    return np.array([(i, j) for i in range(4) for j in range(4) if (i + j) % 2 == 0],
                    dtype=np.float64)


def _gmm_centers(modes: int) -> np.ndarray:
    angles = 2.0 * np.pi * np.arange(modes) / modes
    return 1.5 * np.stack([np.cos(angles), np.sin(angles)], axis=1)


def energy_distance(a, b) -> float:
    """Energy distance V-statistic 2 E||a-b|| - E||a-a'|| - E||b-b'||.

    Means run over all ordered pairs (self-pairs included), so identical
    multisets score exactly zero and the value is non-negative up to float
    roundoff.
    """
    pa, pb = as_points(a), as_points(b)
    if pa.shape[1] != pb.shape[1]:
        raise ValueError(f"dimension mismatch: {pa.shape[1]} vs {pb.shape[1]}")
    cross = cdist(pa, pb).mean()
    within_a = cdist(pa, pa).mean()
    within_b = cdist(pb, pb).mean()
    return float(2.0 * cross - within_a - within_b)
