"""Landmark feature maps, attractive summaries, and shard composition.

A basis holds r landmarks and the symmetric transform
W = (K_UU + lambda*I)^(-1/2), computed by eigendecomposition with a small
eigenvalue floor so duplicate landmarks stay well-defined. The feature map
phi(z) = W^T k(z, U)^T turns kernel evaluations against the full positive
support into one matrix product against cached summaries:

    A = sum_j phi(y_j) y_j^T   (r x D)
    b = sum_j phi(y_j)         (r,)

so the attractive barycenter of any query is A^T phi(x) / (phi(x).b + eps).
Summaries add across disjoint positive shards, and banks of per-shard
(basis, summary) pairs evaluate by sequential accumulation: only one
shard's query features are alive at a time.
"""

import hashlib
from dataclasses import dataclass

import numpy as np

from .data import as_points
from .instrument import record_buffer
from .kernels import kernel_matrix

DEFAULT_LAMBDA = 1e-6
DEFAULT_EPSILON = 1e-12
EIGENVALUE_FLOOR = 1e-12


def _basis_id(landmarks: np.ndarray, tau: float, lam: float) -> str:
    h = hashlib.sha256()
    h.update(np.ascontiguousarray(landmarks).tobytes())
    h.update(np.float64(tau).tobytes())
    h.update(np.float64(lam).tobytes())
    return h.hexdigest()[:16]


@dataclass(frozen=True)
class NystromBasis:
    """Landmarks plus the regularized inverse-square-root transform."""

    landmarks: np.ndarray  # (r, D)
    transform: np.ndarray  # (r, r), symmetric
    tau: float
    lam: float
    basis_id: str

    @property
    def r(self) -> int:
        return self.landmarks.shape[0]

    @property
    def dim(self) -> int:
        return self.landmarks.shape[1]


def build_basis(landmarks, tau, lam=DEFAULT_LAMBDA) -> NystromBasis:
    """Eigendecompose K_UU + lam*I and form its inverse square root.

    Eigenvalues are floored at EIGENVALUE_FLOOR before the -1/2 power so a
    rank-deficient landmark Gram (duplicate landmarks) cannot produce
    non-finite entries.
    """
    pts = getattr(landmarks, "points", None)
    pts = as_points(landmarks if pts is None else pts)
    lam = float(lam)
    if lam < 0 or not np.isfinite(lam):
        raise ValueError(f"lambda must be finite and >= 0, got {lam}")
    gram = kernel_matrix(pts, pts, tau)
    gram[np.diag_indices_from(gram)] += lam
    try:
        evals, evecs = np.linalg.eigh(gram)
    except np.linalg.LinAlgError as exc:
        raise ValueError(f"landmark Gram eigendecomposition failed: {exc}") from None
    if not (np.all(np.isfinite(evals)) and np.all(np.isfinite(evecs))):
        raise ValueError("landmark Gram eigendecomposition produced non-finite values")
    evals = np.maximum(evals, EIGENVALUE_FLOOR)
    w = (evecs * (evals ** -0.5)) @ evecs.T
    w = 0.5 * (w + w.T)
    return NystromBasis(pts.copy(), w, float(tau), lam, _basis_id(pts, tau, lam))


def features(basis: NystromBasis, z) -> np.ndarray:
    """Feature rows phi(z_i)^T for a batch of points, shape (B, r)."""
    pts = as_points(z)
    if pts.shape[1] != basis.dim:
        raise ValueError(f"dimension mismatch: {pts.shape[1]} vs basis dim {basis.dim}")
    return kernel_matrix(pts, basis.landmarks, basis.tau) @ basis.transform


def feature_map(basis: NystromBasis, z) -> np.ndarray:
    """phi(z) for a single point, shape (r,)."""
    z = np.asarray(z, dtype=np.float64)
    if z.ndim != 1:
        raise ValueError("feature_map takes a single point; use features() for batches")
    return features(basis, z[None, :])[0]


def projected_kernel(basis: NystromBasis, z, z2) -> float:
    """Low-rank kernel value phi(z) . phi(z2)."""
    return float(feature_map(basis, np.asarray(z, dtype=np.float64).ravel())
                 @ feature_map(basis, np.asarray(z2, dtype=np.float64).ravel()))


@dataclass(frozen=True)
class AttractiveSummary:
    """Cached positive-support aggregates (A, b) for one basis."""

    a_p: np.ndarray  # (r, D)
    b_p: np.ndarray  # (r,)
    count: int
    basis_id: str
    class_id: int = None

    def __post_init__(self):
        if self.a_p.shape[0] != self.b_p.shape[0]:
            raise ValueError("summary A and b disagree on landmark count")

    @property
    def nbytes(self) -> int:
        return self.a_p.nbytes + self.b_p.nbytes


def empty_summary(basis: NystromBasis, class_id=None) -> AttractiveSummary:
    return AttractiveSummary(np.zeros((basis.r, basis.dim)), np.zeros(basis.r),
                             0, basis.basis_id, class_id)


def build_summary(basis: NystromBasis, positives, class_id=None) -> AttractiveSummary:
    """Accumulate A = sum phi(y) y^T and b = sum phi(y) over the positives."""
    pts = as_points(positives)
    if pts.shape[0] < 1:
        raise ValueError("positives must be non-empty")
    phi = features(basis, pts)  # (N, r)
    return AttractiveSummary(phi.T @ pts, phi.sum(axis=0), pts.shape[0],
                             basis.basis_id, class_id)


def merge_summaries(a: AttractiveSummary, b: AttractiveSummary) -> AttractiveSummary:
    """Add two summaries over disjoint positives (same basis)."""
    if a.basis_id != b.basis_id:
        raise ValueError("cannot merge summaries built on different bases")
    if a.class_id != b.class_id:
        raise ValueError("cannot merge summaries with different class tags")
    return AttractiveSummary(a.a_p + b.a_p, a.b_p + b.b_p, a.count + b.count,
                             a.basis_id, a.class_id)


class ShardedSummaryBank:
    """(basis, summary) shard pairs with the shared denominator offset."""

    __slots__ = ("shards", "epsilon")

    def __init__(self, shards, epsilon=DEFAULT_EPSILON):
        shards = tuple((basis, summary) for basis, summary in shards)
        if not shards:
            raise ValueError("bank needs at least one shard")
        epsilon = float(epsilon)
        if not np.isfinite(epsilon) or epsilon <= 0:
            raise ValueError(f"epsilon must be finite and positive, got {epsilon}")
        dim = shards[0][0].dim
        for basis, summary in shards:
            if summary.basis_id != basis.basis_id:
                raise ValueError("summary is not bound to its paired basis")
            if basis.dim != dim:
                raise ValueError("all shards must share the point dimension")
            if summary.a_p.shape != (basis.r, basis.dim):
                raise ValueError("summary A shape does not match its basis")
        self.shards = shards
        self.epsilon = epsilon

    @property
    def dim(self) -> int:
        return self.shards[0][0].dim

    @property
    def total_landmarks(self) -> int:
        return sum(basis.r for basis, _ in self.shards)

    @property
    def total_count(self) -> int:
        return sum(summary.count for _, summary in self.shards)

    def class_shard(self, class_id: int):
        for basis, summary in self.shards:
            if summary.class_id == class_id:
                return basis, summary
        raise KeyError(f"bank has no shard for class {class_id}")

    def resident_bytes(self) -> int:
        """Bytes held by the cached summaries and transforms (A and W blocks)."""
        return sum(s.a_p.nbytes + b.transform.nbytes for b, s in self.shards)

    def __len__(self) -> int:
        return len(self.shards)


def single_shard_bank(basis: NystromBasis, positives, epsilon=DEFAULT_EPSILON,
                      class_id=None) -> ShardedSummaryBank:
    return ShardedSummaryBank([(basis, build_summary(basis, positives, class_id))],
                              epsilon=epsilon)


def compose_shards_batch(bank: ShardedSummaryBank, queries):
    """Accumulate (numerator, denominator) over shards for a query batch.

    Returns numerator (B, D) and denominator (B,), without the epsilon
    offset. Shards are processed sequentially, so the live query-feature
    workspace is one shard's (B, r_s) block.
    """
    pts = as_points(queries)
    if pts.shape[1] != bank.dim:
        raise ValueError(f"dimension mismatch: {pts.shape[1]} vs bank dim {bank.dim}")
    numerator = np.zeros((pts.shape[0], bank.dim))
    denominator = np.zeros(pts.shape[0])
    for basis, summary in bank.shards:
        phi = features(basis, pts)  # (B, r_s)
        record_buffer("query_features", phi.nbytes)
        numerator += phi @ summary.a_p
        denominator += phi @ summary.b_p
    return numerator, denominator


def compose_shards(bank: ShardedSummaryBank, x):
    """Single-point composition: (numerator vector, scalar denominator)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1:
        raise ValueError("compose_shards takes a single point")
    num, den = compose_shards_batch(bank, x[None, :])
    return num[0], float(den[0])


def concatenated_reference_mean(bank: ShardedSummaryBank, queries) -> np.ndarray:
    """Attractive mean through one explicit concatenated summary.

    Stacks the shard landmarks, builds the block-diagonal transform as one
    dense matrix, and evaluates stacked-A/b in a single pass. Sequential
    shard composition must agree with this evaluation; the two code paths
    share no accumulation order.
    """
    pts = as_points(queries)
    total_r = bank.total_landmarks
    transform = np.zeros((total_r, total_r))
    stacked_a = np.zeros((total_r, bank.dim))
    stacked_b = np.zeros(total_r)
    kernel_blocks = []
    pos = 0
    for basis, summary in bank.shards:
        block = slice(pos, pos + basis.r)
        transform[block, block] = basis.transform
        stacked_a[block] = summary.a_p
        stacked_b[block] = summary.b_p
        kernel_blocks.append(kernel_matrix(pts, basis.landmarks, basis.tau))
        pos += basis.r
    phi = np.hstack(kernel_blocks) @ transform  # (B, total_r)
    numerator = phi @ stacked_a
    denominator = phi @ stacked_b
    return numerator / (denominator + bank.epsilon)[:, None]
