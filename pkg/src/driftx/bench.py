"""Cost-model predictions and wall-clock measurements for field estimation.

Unit-op predictions follow the leading-order counts: a kernel evaluation
costs D, a multiply-add costs 1, constants are not modeled. Per step over a
batch of B queries,

    exact:             B*N+*D + B*N-*D
    projected:         B*(r*D + r^2) + B*N-*D
    projected sharded: B*(r*D + sum_s r_s^2) + B*N-*D

Memory is accounted analytically at 8 bytes per real from the estimator's
own buffers (summary A r*D, transform r^2, query-feature workspace B*r,
repulsion kernel B*N-); sharding replaces r^2 by sum_s r_s^2 and the
workspace by max_s B*r_s, while the exact estimator holds the B*N+ and
B*N- kernel blocks. Wall-clock measurement uses a monotonic clock, median
of >= 5 repeats after >= 2 warmups, on a single thread unless the caller
explicitly opts into the threaded variant.
"""

import ctypes
import ctypes.util
import enum
import time
from dataclasses import dataclass

import numpy as np

from .field import exact_attractive_mean, exact_repulsive_mean, projected_attractive_mean
from .nystrom import ShardedSummaryBank, build_basis, build_summary
from .rng import prng_stream

BYTES_PER_REAL = 8

_M_TRIM_THRESHOLD = -1
_M_MMAP_MAX = -4
_allocator_pinned = False


def pin_allocator() -> bool:
    """Stabilize timings by keeping large buffers on the retained heap.

    By default glibc mmaps allocations above a dynamic threshold and unmaps
    them on free, so every timed evaluation at a large size pays fresh page
    faults while smaller sizes reuse warm arena pages; that skews scaling
    sweeps. Disabling mmap-backed allocation and heap trimming makes the
    per-size constants comparable. Process-global and idempotent; returns
    False on platforms without glibc mallopt.
    """
    global _allocator_pinned
    if _allocator_pinned:
        return True
    try:
        libc = ctypes.CDLL(ctypes.util.find_library("c") or "libc.so.6")
        libc.mallopt(_M_MMAP_MAX, 0)
        libc.mallopt(_M_TRIM_THRESHOLD, 2**31 - 1)
    except (OSError, AttributeError):
        return False
    _allocator_pinned = True
    return True


class BenchMode(enum.Enum):
    EXACT = "exact"
    PROJECTED = "projected"
    PROJECTED_SHARDED = "sharded"


@dataclass(frozen=True)
class CostModel:
    b: int
    n_plus: int
    n_minus: int
    d: int
    r: int
    mode: BenchMode
    shard_sizes: tuple = ()

    def __post_init__(self):
        for name in ("b", "n_plus", "n_minus", "d", "r"):
            if getattr(self, name) < 1:
                raise ValueError(f"{name} must be >= 1")
        sizes = tuple(int(s) for s in self.shard_sizes)
        object.__setattr__(self, "shard_sizes", sizes)
        if self.mode == BenchMode.PROJECTED_SHARDED:
            if not sizes or any(s < 1 for s in sizes):
                raise ValueError("sharded mode needs positive shard sizes")
            if sum(sizes) != self.r:
                raise ValueError(f"shard sizes sum to {sum(sizes)}, expected r={self.r}")

    @property
    def num_shards(self) -> int:
        return len(self.shard_sizes) if self.mode == BenchMode.PROJECTED_SHARDED else 1


def predict_cost(model: CostModel) -> int:
    """Leading-order unit operations per field-estimation step."""
    repel = model.b * model.n_minus * model.d
    if model.mode == BenchMode.EXACT:
        return model.b * model.n_plus * model.d + repel
    if model.mode == BenchMode.PROJECTED:
        return model.b * (model.r * model.d + model.r**2) + repel
    quad = sum(s**2 for s in model.shard_sizes)
    return model.b * (model.r * model.d + quad) + repel


def account_memory(model: CostModel) -> int:
    """Accounted peak bytes for the estimator's own buffers."""
    repel = model.b * model.n_minus
    if model.mode == BenchMode.EXACT:
        units = model.b * model.n_plus + repel
    elif model.mode == BenchMode.PROJECTED:
        units = model.r * model.d + model.r**2 + model.b * model.r + repel
    else:
        quad = sum(s**2 for s in model.shard_sizes)
        workspace = max(model.b * s for s in model.shard_sizes)
        units = model.r * model.d + quad + workspace + repel
    return units * BYTES_PER_REAL


@dataclass(frozen=True)
class BenchReport:
    model: CostModel
    predicted_unit_ops: int
    peak_summary_bytes: int
    attraction_median_ns: int
    attraction_p10_ns: int
    attraction_p90_ns: int
    total_median_ns: int
    repeats: int
    warmups: int


def _time_ns(fn, repeats, warmups):
    for _ in range(warmups):
        fn()
    samples = []
    for _ in range(repeats):
        t0 = time.perf_counter_ns()
        fn()
        samples.append(time.perf_counter_ns() - t0)
    return np.array(samples, dtype=np.float64)


def measure_field_cost(model: CostModel, seed, repeats: int = 5, warmups: int = 2,
                       tau: float = 0.5, lam: float = 1e-6) -> BenchReport:
    """Time the configured attraction estimator and the total field.

    Data is synthesized at the model's sizes; summary banks are built
    offline before timing starts, so projected timings exclude the one-time
    preprocessing by construction.
    """
    if repeats < 5 or warmups < 2:
        raise ValueError("need >= 5 repeats after >= 2 warmups")
    rng = prng_stream(seed)
    span = 2.0
    positives = rng.uniform(-span, span, size=(model.n_plus, model.d))
    negatives = rng.uniform(-span, span, size=(model.n_minus, model.d))
    queries = rng.uniform(-span, span, size=(model.b, model.d))

    if model.mode == BenchMode.EXACT:
        def attraction():
            return exact_attractive_mean(queries, positives, tau, 1e-12)
    else:
        bank = _build_bench_bank(model, positives, rng, tau, lam)

        def attraction():
            return projected_attractive_mean(queries, bank)

    def total():
        attraction()
        exact_repulsive_mean(queries, negatives, tau, 1e-12)

    att = _time_ns(attraction, repeats, warmups)
    tot = _time_ns(total, repeats, warmups)
    return BenchReport(
        model=model,
        predicted_unit_ops=predict_cost(model),
        peak_summary_bytes=account_memory(model),
        attraction_median_ns=int(np.median(att)),
        attraction_p10_ns=int(np.percentile(att, 10)),
        attraction_p90_ns=int(np.percentile(att, 90)),
        total_median_ns=int(np.median(tot)),
        repeats=repeats,
        warmups=warmups,
    )


def _build_bench_bank(model: CostModel, positives, rng, tau, lam) -> ShardedSummaryBank:
    landmark_rows = rng.choice(model.n_plus, size=model.r, replace=False)
    sizes = model.shard_sizes if model.mode == BenchMode.PROJECTED_SHARDED else (model.r,)
    bounds = np.cumsum((0,) + tuple(sizes))
    split_points = np.array_split(np.arange(model.n_plus), len(sizes))
    shards = []
    for s in range(len(sizes)):
        basis = build_basis(positives[landmark_rows[bounds[s]:bounds[s + 1]]], tau, lam)
        shards.append((basis, build_summary(basis, positives[split_points[s]])))
    return ShardedSummaryBank(shards)


def fit_loglog_slope(sizes, times_ns) -> float:
    """Least-squares slope of log(time) against log(size)."""
    sizes = np.asarray(sizes, dtype=np.float64)
    times = np.asarray(times_ns, dtype=np.float64)
    if sizes.shape != times.shape or sizes.size < 2:
        raise ValueError("need matching sweeps of at least two sizes")
    if np.any(sizes <= 0) or np.any(times <= 0):
        raise ValueError("sizes and times must be positive")
    return float(np.polyfit(np.log(sizes), np.log(times), 1)[0])


def sweep_attraction(n_plus_values, b, r, d, mode: BenchMode, seed,
                     n_minus=None, shards=None, repeats=5, warmups=2):
    """Measure one BenchReport per positive-support size."""
    reports = []
    for i, n_plus in enumerate(n_plus_values):
        if mode == BenchMode.PROJECTED_SHARDED:
            count = shards or 10
            sizes = _even_shards(r, count)
        else:
            sizes = ()
        model = CostModel(b=b, n_plus=int(n_plus), n_minus=n_minus or b, d=d,
                          r=r, mode=mode, shard_sizes=sizes)
        reports.append(measure_field_cost(model, seed + i, repeats=repeats,
                                          warmups=warmups))
    return reports


def _even_shards(r: int, count: int) -> tuple:
    base, extra = divmod(r, count)
    if base == 0:
        raise ValueError(f"cannot split {r} landmarks into {count} shards")
    return tuple(base + (1 if i < extra else 0) for i in range(count))
