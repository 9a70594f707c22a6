import numpy as np
import pytest

from driftx import (CostModel, account_memory, exact_attractive_mean,
                    exact_repulsive_mean, fit_loglog_slope, measure_field_cost,
                    predict_cost, projected_attractive_mean, build_basis,
                    build_summary)
from driftx.bench import BenchMode, _even_shards, pin_allocator, sweep_attraction
from driftx.instrument import track_buffers
from driftx.nystrom import ShardedSummaryBank
from driftx.parallel import thread_cap
from driftx.rng import prng_stream


def test_predict_cost_exact_example():
    model = CostModel(b=100, n_plus=10_000, n_minus=100, d=2, r=1,
                      mode=BenchMode.EXACT)
    assert predict_cost(model) == 2_020_000


def test_predict_cost_projected_example():
    model = CostModel(b=100, n_plus=10_000, n_minus=100, d=2, r=50,
                      mode=BenchMode.PROJECTED)
    assert predict_cost(model) == 280_000


def test_predicted_costs_coincide_at_full_rank_high_dim():
    # r == N+ and D >> r: both formulas are dominated by B*r*D
    b, n, d = 10, 50, 5000
    exact = predict_cost(CostModel(b=b, n_plus=n, n_minus=1, d=d, r=n,
                                   mode=BenchMode.EXACT))
    proj = predict_cost(CostModel(b=b, n_plus=n, n_minus=1, d=d, r=n,
                                  mode=BenchMode.PROJECTED))
    lead = b * n * d
    assert abs(exact - proj) / lead <= n / d + 1e-12


def test_account_memory_unsharded_example():
    model = CostModel(b=50, n_plus=1, n_minus=50, d=2, r=100,
                      mode=BenchMode.PROJECTED)
    assert account_memory(model) == 141_600


def test_account_memory_sharding_shrinks_terms():
    unsharded = CostModel(b=50, n_plus=1, n_minus=50, d=2, r=100,
                          mode=BenchMode.PROJECTED)
    sharded = CostModel(b=50, n_plus=1, n_minus=50, d=2, r=100,
                        mode=BenchMode.PROJECTED_SHARDED, shard_sizes=(10,) * 10)
    # quadratic 10000 -> 1000 units, workspace 5000 -> 500 units
    assert account_memory(sharded) == (200 + 1000 + 500 + 2500) * 8
    assert account_memory(sharded) < account_memory(unsharded)


def test_single_shard_equals_unsharded_accounting():
    a = CostModel(b=8, n_plus=1, n_minus=8, d=3, r=12, mode=BenchMode.PROJECTED)
    b = CostModel(b=8, n_plus=1, n_minus=8, d=3, r=12,
                  mode=BenchMode.PROJECTED_SHARDED, shard_sizes=(12,))
    assert account_memory(a) == account_memory(b)
    assert predict_cost(a) == predict_cost(b)


def test_cost_model_validation():
    with pytest.raises(ValueError):
        CostModel(b=0, n_plus=1, n_minus=1, d=1, r=1, mode=BenchMode.EXACT)
    with pytest.raises(ValueError):
        CostModel(b=1, n_plus=1, n_minus=1, d=1, r=10,
                  mode=BenchMode.PROJECTED_SHARDED, shard_sizes=(3, 3))


def test_even_shards():
    assert _even_shards(100, 10) == (10,) * 10
    assert _even_shards(102, 10) == (11, 11) + (10,) * 8
    with pytest.raises(ValueError):
        _even_shards(5, 10)


def test_instrumented_buffers_match_formula_terms():
    b, n_plus, n_minus, d, r = 16, 64, 16, 2, 10
    rng = prng_stream(0)
    positives = rng.uniform(-2, 2, size=(n_plus, d))
    negatives = rng.uniform(-2, 2, size=(n_minus, d))
    queries = rng.uniform(-2, 2, size=(b, d))
    basis = build_basis(positives[:r], 0.5)
    bank = ShardedSummaryBank([(basis, build_summary(basis, positives))])

    with track_buffers() as tracker:
        projected_attractive_mean(queries, bank)
        exact_repulsive_mean(queries, negatives, 0.5, 1e-12)
    assert tracker.peak("query_features") == b * r * 8
    assert tracker.peak("repulsion_kernel") == b * n_minus * 8
    assert bank.resident_bytes() == (r * d + r * r) * 8

    with track_buffers() as tracker:
        exact_attractive_mean(queries, positives, 0.5, 1e-12)
    assert tracker.peak("attraction_kernel") == b * n_plus * 8


def test_sharded_workspace_is_per_shard():
    b, r = 16, 12
    rng = prng_stream(1)
    positives = rng.uniform(-2, 2, size=(60, 2))
    shards = []
    for block in np.array_split(np.arange(60), 3):
        basis = build_basis(positives[block[:4]], 0.5)
        shards.append((basis, build_summary(basis, positives[block])))
    bank = ShardedSummaryBank(shards)
    with track_buffers() as tracker:
        projected_attractive_mean(rng.uniform(size=(b, 2)), bank)
    assert tracker.peak("query_features") == b * 4 * 8  # one shard block at a time
    assert tracker.total("query_features") == b * r * 8


def test_fit_loglog_slope_on_exact_powers():
    sizes = np.array([10.0, 100.0, 1000.0])
    assert fit_loglog_slope(sizes, sizes**2) == pytest.approx(2.0)
    assert fit_loglog_slope(sizes, np.full(3, 7.0)) == pytest.approx(0.0)
    with pytest.raises(ValueError):
        fit_loglog_slope(sizes, sizes[:2])


def test_measure_field_cost_reports():
    model = CostModel(b=16, n_plus=200, n_minus=16, d=2, r=8,
                      mode=BenchMode.PROJECTED)
    with thread_cap(1):
        report = measure_field_cost(model, seed=3)
    assert report.repeats == 5 and report.warmups == 2
    assert report.attraction_p10_ns <= report.attraction_median_ns <= report.attraction_p90_ns
    assert report.total_median_ns > 0
    assert report.peak_summary_bytes == account_memory(model)
    with pytest.raises(ValueError):
        measure_field_cost(model, seed=3, repeats=2)


def test_predicted_ordering_matches_measured_ordering():
    # instance where the model says projected is >= 4x cheaper
    pin_allocator()
    exact = CostModel(b=64, n_plus=100_000, n_minus=64, d=2, r=50,
                      mode=BenchMode.EXACT)
    proj = CostModel(b=64, n_plus=100_000, n_minus=64, d=2, r=50,
                     mode=BenchMode.PROJECTED)
    assert predict_cost(proj) <= predict_cost(exact) / 4
    with thread_cap(1):
        t_exact = measure_field_cost(exact, seed=1).attraction_median_ns
        t_proj = measure_field_cost(proj, seed=1).attraction_median_ns
    assert t_proj < t_exact


def test_sweep_attraction_shapes():
    with thread_cap(1):
        reports = sweep_attraction([100, 200], b=8, r=4, d=2,
                                   mode=BenchMode.EXACT, seed=5)
    assert [r.model.n_plus for r in reports] == [100, 200]
