"""Landmark selection over a feature set: random, k-means, k-center,
facility location. Global scope selects from the whole set; per-class scope
runs the strategy independently inside each class with `budget` landmarks
per class. Every landmark is an actual training point (k-means snaps its
centroids to the nearest data point).
"""

import enum
from dataclasses import dataclass

import numpy as np
from scipy.spatial.distance import cdist

from .data import FeatureSet
from .kernels import _check_tau
from .rng import prng_stream


class Strategy(enum.Enum):
    RANDOM = "random"
    KMEANS = "kmeans"
    KCENTER = "kcenter"
    FACILITY_LOCATION = "facility"


class Scope(enum.Enum):
    GLOBAL = "global"
    PER_CLASS = "per-class"


@dataclass(frozen=True)
class LandmarkSet:
    """Selected landmarks plus their row indices in the source data."""

    points: np.ndarray          # (r, D), rows copied from the source set
    source_indices: np.ndarray  # (r,) distinct indices into the source set
    strategy: Strategy
    scope: Scope

    def __post_init__(self):
        idx = np.asarray(self.source_indices, dtype=np.int64)
        pts = np.asarray(self.points, dtype=np.float64)
        if pts.ndim != 2 or pts.shape[0] != idx.shape[0] or pts.shape[0] < 1:
            raise ValueError("landmark points and source_indices must align, r >= 1")
        if len(np.unique(idx)) != len(idx):
            raise ValueError("source_indices must be distinct")
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "source_indices", idx)

    @property
    def r(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def _scope_units(data: FeatureSet, scope: Scope):
    """Yield (class_id, global index array) per selection unit."""
    if scope == Scope.GLOBAL:
        yield None, np.arange(data.n)
    else:
        if data.labels is None:
            raise ValueError("per-class selection requires labeled data")
        for cid in data.class_ids():
            yield cid, data.class_indices(cid)


def _check_budget(budget: int, available: int, class_id) -> int:
    budget = int(budget)
    if budget < 1:
        raise ValueError(f"budget must be >= 1, got {budget}")
    if budget > available:
        where = "data set" if class_id is None else f"class {class_id}"
        raise ValueError(f"budget {budget} exceeds {available} available points in {where}")
    return budget


def _assemble(data, picked, strategy, scope) -> LandmarkSet:
    picked = np.concatenate(picked)
    return LandmarkSet(data.points[picked].copy(), picked, strategy, scope)


def select_random(data: FeatureSet, budget: int, scope: Scope, seed) -> LandmarkSet:
    """Uniform sample without replacement (per class under per-class scope)."""
    rng = prng_stream(seed)
    picked = []
    for cid, idx in _scope_units(data, scope):
        b = _check_budget(budget, len(idx), cid)
        picked.append(idx[rng.choice(len(idx), size=b, replace=False)])
    return _assemble(data, picked, Strategy.RANDOM, scope)


def select_kcenter(data: FeatureSet, budget: int, scope: Scope, seed) -> LandmarkSet:
    """Greedy farthest-point selection.

    The first landmark is drawn uniformly from the unit; each following one
    maximizes the minimum distance to the landmarks chosen so far. Ties go
    to the lowest index (np.argmax returns the first maximizer).
    """
    rng = prng_stream(seed)
    picked = []
    for cid, idx in _scope_units(data, scope):
        b = _check_budget(budget, len(idx), cid)
        pts = data.points[idx]
        chosen = [int(rng.integers(len(idx)))]
        mindist = cdist(pts[chosen[0]][None, :], pts)[0]
        while len(chosen) < b:
            nxt = int(np.argmax(mindist))
            chosen.append(nxt)
            mindist = np.minimum(mindist, cdist(pts[nxt][None, :], pts)[0])
        picked.append(idx[chosen])
    return _assemble(data, picked, Strategy.KCENTER, scope)


def select_facility_location(data: FeatureSet, budget: int, scope: Scope, tau) -> LandmarkSet:
    """Greedy coverage maximization under similarity s(x, u) = exp(-||x-u||/tau).

    Objective F(S) = sum_x max_{u in S} s(x, u) over the unit; at each step
    the candidate with the largest non-negative marginal gain is added
    (clipped gains, ties to the lowest index). Candidate and evaluation sets
    are both the unit itself.
    """
    tau = _check_tau(tau)
    picked = []
    for cid, idx in _scope_units(data, scope):
        b = _check_budget(budget, len(idx), cid)
        pts = data.points[idx]
        sim = np.exp(cdist(pts, pts) / -tau)  # sim[x, u]
        best = np.zeros(len(idx))
        chosen: list = []
        for _ in range(b):
            gains = np.clip(sim - best[:, None], 0.0, None).sum(axis=0)
            gains[chosen] = -np.inf
            u = int(np.argmax(gains))
            chosen.append(u)
            best = np.maximum(best, sim[:, u])
        picked.append(idx[chosen])
    return _assemble(data, picked, Strategy.FACILITY_LOCATION, scope)


def select_kmeans(data: FeatureSet, budget: int, scope: Scope, seed,
                  max_iters: int = 50) -> LandmarkSet:
    """Lloyd's algorithm on the squared-Euclidean objective, then medoid snap.

    Initialization is distance-weighted (k-means++ style) from the seed
    stream. An emptied cluster is reseeded at the point farthest from its
    assigned centroid. After convergence each centroid is replaced by the
    nearest data point; duplicate medoids are refilled with the next-nearest
    unused point.
    """
    if max_iters < 1:
        raise ValueError("max_iters must be >= 1")
    rng = prng_stream(seed)
    picked = []
    for cid, idx in _scope_units(data, scope):
        b = _check_budget(budget, len(idx), cid)
        pts = data.points[idx]
        centers = pts[_kmeanspp_init(pts, b, rng)].copy()
        assign = None
        for _ in range(max_iters):
            d2 = cdist(pts, centers, "sqeuclidean")
            new_assign = np.argmin(d2, axis=1)
            for c in range(b):
                members = new_assign == c
                if np.any(members):
                    centers[c] = pts[members].mean(axis=0)
                else:
                    # reseed at the point farthest from its assigned centroid
                    worst = int(np.argmax(d2[np.arange(len(pts)), new_assign]))
                    centers[c] = pts[worst]
                    new_assign[worst] = c
            if assign is not None and np.array_equal(assign, new_assign):
                break
            assign = new_assign
        picked.append(idx[_medoid_snap(pts, centers)])
    return _assemble(data, picked, Strategy.KMEANS, scope)


def _kmeanspp_init(pts, k, rng):
    chosen = [int(rng.integers(len(pts)))]
    d2 = cdist(pts[chosen[0]][None, :], pts, "sqeuclidean")[0]
    for _ in range(1, k):
        total = d2.sum()
        if total <= 0.0:
            # all remaining mass on already-chosen points: fall back to uniform
            probs = np.full(len(pts), 1.0 / len(pts))
        else:
            probs = d2 / total
        nxt = int(rng.choice(len(pts), p=probs))
        chosen.append(nxt)
        d2 = np.minimum(d2, cdist(pts[nxt][None, :], pts, "sqeuclidean")[0])
    return chosen


def _medoid_snap(pts, centers):
    """Nearest data point per centroid; duplicates refilled by next-nearest."""
    order = np.argsort(cdist(centers, pts), axis=1, kind="stable")
    used = set()
    snapped = []
    for c in range(len(centers)):
        for cand in order[c]:
            if int(cand) not in used:
                used.add(int(cand))
                snapped.append(int(cand))
                break
    return np.array(snapped, dtype=np.int64)


def select_landmarks(data: FeatureSet, strategy: Strategy, budget: int, scope: Scope,
                     seed=0, tau=None, max_iters: int = 50) -> LandmarkSet:
    """Dispatch over the four strategies with one call signature."""
    if strategy == Strategy.RANDOM:
        return select_random(data, budget, scope, seed)
    if strategy == Strategy.KMEANS:
        return select_kmeans(data, budget, scope, seed, max_iters=max_iters)
    if strategy == Strategy.KCENTER:
        return select_kcenter(data, budget, scope, seed)
    if strategy == Strategy.FACILITY_LOCATION:
        if tau is None:
            raise ValueError("facility location needs a similarity temperature tau")
        return select_facility_location(data, budget, scope, tau)
    raise ValueError(f"unknown strategy {strategy!r}")
