"""Exact and projected drifting fields.

The field at a query x is the difference of two normalized kernel-weighted
barycenters: attraction toward the positive (data) support and repulsion
from the negative (generated) support,

    V(x) = mu_attract(x) - mu_repel(x),

where mu(x) = sum_j k(x, y_j) y_j / (sum_j k(x, y_j) + eps). Attraction may
run exactly against a positive set or through a summary bank; repulsion is
exact by default and has a projected variant (summaries rebuilt from the
current negatives each call) as an ablation switch. Self-interactions can
be masked when the queries are the negative set itself.

With several temperature groups the per-group fields are combined as
sum_g alpha_g * V_g / (||V_g|| + eps_norm) per query; a single group is
returned unnormalized.
"""

import enum
from dataclasses import dataclass, field as dc_field

import numpy as np

from .data import FeatureSet, as_points
from .instrument import record_buffer
from .kernels import KernelParams, kernel_matrix
from .nystrom import (ShardedSummaryBank, compose_shards_batch, features)


class Estimator(enum.Enum):
    EXACT = "exact"
    PROJECTED = "projected"


class Conditioning(enum.Enum):
    UNCONDITIONAL = "unconditional"
    PER_CLASS = "per-class"


@dataclass(frozen=True)
class DriftFieldConfig:
    kernel: KernelParams = dc_field(default_factory=KernelParams)
    epsilon: float = 1e-12
    epsilon_norm: float = 1e-8
    attraction: Estimator = Estimator.EXACT
    repulsion: Estimator = Estimator.EXACT
    conditioning: Conditioning = Conditioning.UNCONDITIONAL

    def __post_init__(self):
        for name in ("epsilon", "epsilon_norm"):
            v = getattr(self, name)
            if not np.isfinite(v) or v <= 0:
                raise ValueError(f"{name} must be finite and positive, got {v}")


@dataclass(frozen=True)
class FieldEvaluation:
    """Drift vectors with their attraction/repulsion decomposition.

    attract_mass/repel_mass hold the raw kernel masses (denominators before
    the epsilon offset), one row per temperature group.
    """

    V: np.ndarray           # (B, D)
    mu_attract: np.ndarray  # (B, D)
    mu_repel: np.ndarray    # (B, D)
    attract_mass: np.ndarray  # (G, B)
    repel_mass: np.ndarray    # (G, B)


def exact_attractive_mean(queries, positives, tau, epsilon) -> np.ndarray:
    """Kernel-weighted barycenter of the positives for each query row."""
    mu, _ = _exact_mean(as_points(queries), as_points(positives), tau, epsilon,
                        buffer_tag="attraction_kernel")
    return mu


def _exact_mean(q, pts, tau, epsilon, mask_self=False, buffer_tag=None):
    if pts.shape[0] < 1:
        raise ValueError("support set must be non-empty")
    k = kernel_matrix(q, pts, tau)
    if buffer_tag:
        record_buffer(buffer_tag, k.nbytes)
    if mask_self:
        np.fill_diagonal(k, 0.0)
    mass = k.sum(axis=1)
    mu = (k @ pts) / (mass + epsilon)[:, None]
    return mu, mass


def exact_repulsive_mean(queries, negatives, tau, epsilon, mask_self=False) -> np.ndarray:
    """Kernel-weighted barycenter of the negatives, optionally self-masked.

    With mask_self the queries must be the negative set itself (index
    aligned, at least two rows); the kernel diagonal is zeroed so a sample
    never repels itself.
    """
    q, n = as_points(queries), as_points(negatives)
    if mask_self:
        _check_self_masking(q, n)
    mu, _ = _exact_mean(q, n, tau, epsilon, mask_self=mask_self,
                        buffer_tag="repulsion_kernel")
    return mu


def _check_self_masking(q, n):
    if q.shape[0] < 2:
        raise ValueError("self-masked repulsion needs at least 2 samples")
    if q.shape != n.shape or not np.array_equal(q, n):
        raise ValueError("self-masked repulsion requires queries == negatives, index-aligned")


def projected_attractive_mean(queries, bank: ShardedSummaryBank,
                              conditioning=Conditioning.UNCONDITIONAL,
                              query_labels=None) -> np.ndarray:
    """Summary-bank barycenter A^T phi(x) / (phi(x).b + eps), shard-composed."""
    mu, _ = _projected_attract(as_points(queries), bank, conditioning, query_labels)
    return mu


def _projected_attract(q, bank, conditioning, query_labels):
    if conditioning == Conditioning.UNCONDITIONAL:
        num, den = compose_shards_batch(bank, q)
        return num / (den + bank.epsilon)[:, None], den
    labels = _check_labels(q, query_labels, "query_labels")
    mu = np.zeros((q.shape[0], bank.dim))
    mass = np.zeros(q.shape[0])
    for cid in np.unique(labels):
        rows = np.flatnonzero(labels == cid)
        try:
            basis, summary = bank.class_shard(int(cid))
        except KeyError:
            raise ValueError(f"bank has no shard for query class {int(cid)}") from None
        phi = features(basis, q[rows])
        record_buffer("query_features", phi.nbytes)
        den = phi @ summary.b_p
        mu[rows] = (phi @ summary.a_p) / (den + bank.epsilon)[:, None]
        mass[rows] = den
    return mu, mass


def projected_repulsive_mean(queries, negatives, bank: ShardedSummaryBank,
                             mask_self=False) -> np.ndarray:
    """Ablation estimator: repulsion through the bank's landmark bases.

    Summaries of the current negatives are rebuilt on every call (negatives
    change each step, so nothing can be cached). Self-masking subtracts each
    query's own projected contribution, the low-rank analog of zeroing the
    kernel diagonal.
    """
    mu, _ = _projected_repel(as_points(queries), as_points(negatives), bank, mask_self)
    return mu


def _projected_repel(q, n, bank, mask_self):
    if mask_self:
        _check_self_masking(q, n)
    num = np.zeros((q.shape[0], bank.dim))
    den = np.zeros(q.shape[0])
    for basis, _ in bank.shards:
        phi_n = features(basis, n)  # (N-, r_s)
        phi_q = features(basis, q)
        record_buffer("query_features", phi_q.nbytes)
        num += phi_q @ (phi_n.T @ n)
        den += phi_q @ phi_n.sum(axis=0)
        if mask_self:
            self_k = np.einsum("ij,ij->i", phi_q, phi_q)
            num -= self_k[:, None] * q
            den -= self_k
    return num / (den + bank.epsilon)[:, None], den


def _check_labels(q, labels, name):
    if labels is None:
        raise ValueError(f"per-class conditioning requires {name}")
    labels = np.asarray(labels, dtype=np.int64)
    if labels.shape != (q.shape[0],):
        raise ValueError(f"{name} must have one entry per query row")
    return labels


def _exact_attract_per_class(q, positives: FeatureSet, tau, epsilon, labels):
    if positives.labels is None:
        raise ValueError("per-class attraction requires labeled positives")
    mu = np.zeros((q.shape[0], positives.dim))
    mass = np.zeros(q.shape[0])
    for cid in np.unique(labels):
        rows = np.flatnonzero(labels == cid)
        support = positives.class_indices(int(cid))
        if len(support) == 0:
            raise ValueError(f"no positives available for query class {int(cid)}")
        mu[rows], mass[rows] = _exact_mean(q[rows], positives.points[support],
                                           tau, epsilon, buffer_tag="attraction_kernel")
    return mu, mass


def _exact_repel_per_class(q, negatives, tau, epsilon, mask_self, q_labels, n_labels):
    n = as_points(negatives)
    if mask_self:
        _check_self_masking(q, n)
    if n_labels is None:
        raise ValueError("per-class repulsion requires labeled negatives")
    n_labels = np.asarray(n_labels, dtype=np.int64)
    k = kernel_matrix(q, n, tau)
    record_buffer("repulsion_kernel", k.nbytes)
    k *= (q_labels[:, None] == n_labels[None, :])
    if mask_self:
        np.fill_diagonal(k, 0.0)
    mass = k.sum(axis=1)
    return (k @ n) / (mass + epsilon)[:, None], mass


def drift_field(queries, support, negatives, config: DriftFieldConfig,
                query_labels=None, mask_self=False) -> FieldEvaluation:
    """Evaluate the drifting field for a batch of queries.

    `support` feeds the attraction side: a positive FeatureSet (or array)
    in exact mode, a ShardedSummaryBank in projected mode, or a sequence of
    banks (one per temperature group). Projected repulsion reuses the same
    bank(s) for its bases. `negatives` may carry labels (FeatureSet) for
    per-class conditioning.
    """
    q = as_points(queries)
    groups = config.kernel.num_groups
    banks = _attraction_banks(support, config, groups)
    per_class = config.conditioning == Conditioning.PER_CLASS
    labels = _check_labels(q, query_labels, "query_labels") if per_class else None

    mu_a = np.empty((groups, q.shape[0], q.shape[1]))
    mu_r = np.empty_like(mu_a)
    mass_a = np.empty((groups, q.shape[0]))
    mass_r = np.empty_like(mass_a)
    for g in range(groups):
        tau = config.kernel.temperatures[g]
        if config.attraction == Estimator.EXACT:
            if per_class:
                mu_a[g], mass_a[g] = _exact_attract_per_class(
                    q, support, tau, config.epsilon, labels)
            else:
                mu_a[g], mass_a[g] = _exact_mean(q, as_points(support), tau,
                                                 config.epsilon,
                                                 buffer_tag="attraction_kernel")
        else:
            mu_a[g], mass_a[g] = _projected_attract(
                q, banks[g], config.conditioning, labels)
        if config.repulsion == Estimator.EXACT:
            if per_class:
                n_labels = negatives.labels if isinstance(negatives, FeatureSet) else None
                mu_r[g], mass_r[g] = _exact_repel_per_class(
                    q, negatives, tau, config.epsilon, mask_self, labels, n_labels)
            else:
                n = as_points(negatives)
                if mask_self:
                    _check_self_masking(q, n)
                mu_r[g], mass_r[g] = _exact_mean(q, n, tau, config.epsilon,
                                                 mask_self=mask_self,
                                                 buffer_tag="repulsion_kernel")
        else:
            if banks[g] is None:
                raise ValueError("projected repulsion needs a summary bank for its bases")
            mu_r[g], mass_r[g] = _projected_repel(q, as_points(negatives),
                                                  banks[g], mask_self)

    if groups == 1:
        v = mu_a[0] - mu_r[0]
        out = FieldEvaluation(v, mu_a[0], mu_r[0], mass_a, mass_r)
    else:
        v_g = mu_a - mu_r  # (G, B, D)
        weights = np.array(config.kernel.group_weights)[:, None] / (
            np.linalg.norm(v_g, axis=2) + config.epsilon_norm)  # (G, B)
        agg_a = np.einsum("gb,gbd->bd", weights, mu_a)
        agg_r = np.einsum("gb,gbd->bd", weights, mu_r)
        out = FieldEvaluation(agg_a - agg_r, agg_a, agg_r, mass_a, mass_r)
    if not np.all(np.isfinite(out.V)):
        raise FloatingPointError("drift field produced non-finite values")
    return out


def _attraction_banks(support, config, groups):
    """Resolve the per-group summary banks (None entries in exact mode)."""
    if config.attraction == Estimator.EXACT:
        if config.repulsion == Estimator.PROJECTED:
            raise ValueError(
                "projected repulsion reuses the attraction bank's bases; "
                "configure projected attraction as well")
        return [None] * groups
    if isinstance(support, ShardedSummaryBank):
        banks = [support] * groups if groups == 1 else None
        if banks is None:
            raise ValueError(f"{groups} temperature groups need {groups} summary banks")
    else:
        try:
            banks = list(support)
        except TypeError:
            raise ValueError("projected estimators need a summary bank") from None
        if not all(isinstance(b, ShardedSummaryBank) for b in banks):
            raise ValueError("projected estimators need summary banks")
        if len(banks) != groups:
            raise ValueError(f"{groups} temperature groups need {groups} summary banks")
    for g, bank in enumerate(banks):
        taus = {basis.tau for basis, _ in bank.shards}
        if len(taus) == 1 and not np.isclose(taus.pop(), config.kernel.temperatures[g]):
            raise ValueError(
                f"bank temperature differs from configured group {g} temperature")
    return banks


def drift_targets(queries, evaluation: FieldEvaluation) -> np.ndarray:
    """Drifted regression targets x + V(x), row-wise."""
    q = as_points(queries)
    if q.shape != evaluation.V.shape:
        raise ValueError(f"shape mismatch: queries {q.shape} vs field {evaluation.V.shape}")
    return q + evaluation.V
