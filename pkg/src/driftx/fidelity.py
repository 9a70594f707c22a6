"""Field-approximation diagnostics and distortion-bound checks.

Three batch metrics compare an exact attractive field against its
projected counterpart: mean per-row cosine similarity, relative Frobenius
error, and the mean squared error of the drifted targets (identical to the
field MSE because the query terms cancel).

Per-query diagnostics check the local distortion bound: with residual
vector r(x)_j = k(x, y_j) - k_proj(x, y_j) over the N positives and kernel
mass d(x) = mean_j k(x, y_j), whenever

    ||r(x)||_2 <= sqrt(N) d(x) / 2

the projected attractive field deviates from the exact one by at most

    4 R ||r(x)||_2 / (sqrt(N) d(x)),       R = max_j ||y_j||.

The on-support variant bounds the mean squared deviation over the data
points themselves by 16 R^2 ||K - K_proj||_F^2 / (N^2 kappa_min^2) under a
row-wise condition on the Gram residual. Both checks evaluate the means
with a zero denominator offset, matching the statements being verified.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .data import FeatureSet, as_points
from .kernels import kernel_matrix
from .nystrom import NystromBasis, ShardedSummaryBank, features


def cosine_fidelity(v_exact, v_proj) -> float:
    """Mean per-row cosine similarity between two field evaluations."""
    a, b = _aligned(v_exact, v_proj)
    na, nb = np.linalg.norm(a, axis=1), np.linalg.norm(b, axis=1)
    for name, norms in (("exact", na), ("projected", nb)):
        bad = np.flatnonzero(norms == 0.0)
        if bad.size:
            raise ValueError(f"zero-norm {name} field row {bad[0]}")
    return float(np.mean(np.einsum("ij,ij->i", a, b) / (na * nb)))


def relative_l2_fidelity(v_exact, v_proj) -> float:
    """|| V_proj - V_exact ||_F / || V_exact ||_F."""
    a, b = _aligned(v_exact, v_proj)
    denom = np.linalg.norm(a)
    if denom == 0.0:
        raise ValueError("exact field is identically zero")
    return float(np.linalg.norm(b - a) / denom)


def target_mse(queries, v_exact, v_proj) -> float:
    """Mean squared error between drifted targets; the query terms cancel."""
    a, b = _aligned(v_exact, v_proj)
    q = as_points(queries)
    if q.shape != a.shape:
        raise ValueError(f"queries shape {q.shape} does not match fields {a.shape}")
    return float(np.sum((b - a) ** 2) / a.size)


def _aligned(v_exact, v_proj):
    a = np.asarray(v_exact, dtype=np.float64)
    b = np.asarray(v_proj, dtype=np.float64)
    if a.shape != b.shape or a.ndim != 2:
        raise ValueError(f"field shapes must match, got {a.shape} and {b.shape}")
    return a, b


@dataclass(frozen=True)
class BoundDiagnostic:
    """Distortion-bound check for one query (zero-offset means)."""

    residual_norm: float   # ||r(x)||_2
    kernel_mass: float     # d(x), mean exact kernel value
    condition_holds: bool  # residual <= sqrt(N) d(x) / 2
    bound_value: float     # 4 R ||r||_2 / (sqrt(N) d(x))
    actual_error: float    # || mu_proj(x) - mu_exact(x) ||_2
    data_radius: float     # R


class OnSupportBound(NamedTuple):
    lhs: float
    rhs: float
    condition_holds: bool


def projected_kernel_rows(queries, positives, projector) -> np.ndarray:
    """Low-rank kernel values k_proj(x_i, y_j) as a (B, N) matrix.

    `projector` is a single basis or a bank. With a bank whose shards are
    class-tagged, each positive is evaluated through its own class's
    feature map (the composed evaluation uses exactly that kernel), so the
    positives must carry labels; a single-shard bank behaves like a basis.
    """
    q = as_points(queries)
    pts = as_points(positives)
    if isinstance(projector, NystromBasis):
        return features(projector, q) @ features(projector, pts).T
    if not isinstance(projector, ShardedSummaryBank):
        raise TypeError(f"projector must be a basis or bank, got {type(projector)}")
    if len(projector) == 1:
        basis, _ = projector.shards[0]
        return features(basis, q) @ features(basis, pts).T
    if not isinstance(positives, FeatureSet) or positives.labels is None:
        raise ValueError("a multi-shard bank needs labeled positives to assign shards")
    out = np.zeros((q.shape[0], pts.shape[0]))
    for basis, summary in projector.shards:
        if summary.class_id is None:
            raise ValueError("multi-shard banks must tag every shard with a class")
        cols = positives.class_indices(summary.class_id)
        if cols.size:
            out[:, cols] = features(basis, q) @ features(basis, pts[cols]).T
    return out


def verify_local_bound(query, positives, projector, tau, data_radius=None) -> BoundDiagnostic:
    """Evaluate the local distortion bound at one query point."""
    x = np.asarray(query, dtype=np.float64).ravel()
    pts = as_points(positives)
    n = pts.shape[0]
    if n < 1:
        raise ValueError("positives must be non-empty")
    k = kernel_matrix(x[None, :], pts, tau)[0]
    k_proj = projected_kernel_rows(x[None, :], positives, projector)[0]
    mass = float(k.mean())
    if mass < 1e-300:
        raise ValueError(f"kernel mass is numerically zero ({mass}); query too far from data")
    radius = float(np.max(np.linalg.norm(pts, axis=1))) if data_radius is None \
        else float(data_radius)
    residual = float(np.linalg.norm(k - k_proj))
    condition = residual <= np.sqrt(n) * mass / 2.0
    bound = 4.0 * radius * residual / (np.sqrt(n) * mass)
    mu_exact = (k @ pts) / k.sum()
    den_proj = k_proj.sum()
    if den_proj == 0.0:
        raise ValueError("projected kernel mass is exactly zero at this query")
    mu_proj = (k_proj @ pts) / den_proj
    return BoundDiagnostic(residual, mass, bool(condition), bound,
                           float(np.linalg.norm(mu_proj - mu_exact)), radius)


def verify_on_support_bound(positives, projector, tau) -> OnSupportBound:
    """Evaluate the mean-squared distortion bound over the support points."""
    pts = as_points(positives)
    n = pts.shape[0]
    gram = kernel_matrix(pts, pts, tau)
    gram_proj = projected_kernel_rows(positives, positives, projector)
    kappa_min = float(gram.mean(axis=1).min())
    if kappa_min < 1e-300:
        raise ValueError("minimum kernel mass over the support is numerically zero")
    resid = gram - gram_proj
    row_norms = np.linalg.norm(resid, axis=1)
    condition = float(row_norms.max()) <= np.sqrt(n) * kappa_min / 2.0
    radius = float(np.max(np.linalg.norm(pts, axis=1)))
    mu_exact = (gram @ pts) / gram.sum(axis=1)[:, None]
    den = gram_proj.sum(axis=1)
    if np.any(den == 0.0):
        raise ValueError("projected kernel mass vanished at a support point")
    mu_proj = (gram_proj @ pts) / den[:, None]
    lhs = float(np.mean(np.sum((mu_proj - mu_exact) ** 2, axis=1)))
    rhs = 16.0 * radius**2 * float(np.sum(resid**2)) / (n**2 * kappa_min**2)
    return OnSupportBound(lhs, rhs, bool(condition))


@dataclass(frozen=True)
class FidelityReport:
    cosine_similarity: float
    relative_l2_error: float
    target_mse: float
    per_query: tuple  # of BoundDiagnostic


def fidelity_report(queries, positives, projector, tau, epsilon=1e-12) -> FidelityReport:
    """Compare exact vs projected attractive fields on a query batch.

    The three batch metrics use the production estimators (with the epsilon
    offset); the per-query diagnostics use the zero-offset means required
    by the bound statements.
    """
    from .field import exact_attractive_mean, projected_attractive_mean

    q = as_points(queries)
    v_exact = exact_attractive_mean(q, positives, tau, epsilon) - q
    if isinstance(projector, NystromBasis):
        from .nystrom import single_shard_bank
        bank = single_shard_bank(projector, positives, epsilon=epsilon)
    else:
        bank = projector
    v_proj = projected_attractive_mean(q, bank) - q
    diags = tuple(verify_local_bound(q[i], positives, projector, tau)
                  for i in range(q.shape[0]))
    return FidelityReport(cosine_fidelity(v_exact, v_proj),
                          relative_l2_fidelity(v_exact, v_proj),
                          target_mse(q, v_exact, v_proj), diags)
