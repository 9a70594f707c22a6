import numpy as np
import pytest

from driftx import AdamOptimizer, init_mlp, mlp_backward, mlp_forward
from driftx.mlp import PARAM_NAMES, mlp_forward_cached
from driftx.rng import prng_stream


def test_zero_weights_give_zero_output():
    gen = init_mlp(2, 2, seed=0)
    for name in PARAM_NAMES:
        getattr(gen, name)[...] = 0.0
    out = mlp_forward(gen, prng_stream(1).standard_normal((5, 2)))
    assert not out.any()


def test_small_hidden_weights_expose_output_bias():
    gen = init_mlp(2, 2, seed=1)
    gen.w1[...] = 0.0
    gen.b1[...] = 0.0  # tanh(0) = 0 kills the hidden path
    gen.b3[...] = np.array([0.7, -0.2])
    out = mlp_forward(gen, prng_stream(2).standard_normal((4, 2)))
    assert np.allclose(out, [0.7, -0.2], atol=1e-12)


def test_forward_matches_per_neuron_loop():
    gen = init_mlp(3, 2, seed=3)
    noise = prng_stream(4).standard_normal((4, 3))
    out = mlp_forward(gen, noise)
    for b in range(4):
        h1 = np.array([np.tanh(noise[b] @ gen.w1[:, j] + gen.b1[j]) for j in range(64)])
        h2 = np.array([np.tanh(h1 @ gen.w2[:, j] + gen.b2[j]) for j in range(64)])
        o = np.array([h2 @ gen.w3[:, j] + gen.b3[j] for j in range(2)])
        assert np.abs(out[b] - o).max() <= 1e-12


def test_shape_validation():
    gen = init_mlp(2, 2, seed=5)
    with pytest.raises(ValueError):
        mlp_forward(gen, np.zeros((3, 5)))
    with pytest.raises(ValueError):
        mlp_backward(gen, np.zeros((3, 2)), np.zeros((4, 2)))


def test_zero_upstream_gradient():
    gen = init_mlp(2, 2, seed=6)
    grads = mlp_backward(gen, prng_stream(7).standard_normal((4, 2)), np.zeros((4, 2)))
    assert all(not grads[name].any() for name in PARAM_NAMES)


def test_gradient_linearity():
    gen = init_mlp(2, 2, seed=8)
    noise = prng_stream(9).standard_normal((4, 2))
    g = prng_stream(10).standard_normal((4, 2))
    g1 = mlp_backward(gen, noise, g)
    g2 = mlp_backward(gen, noise, 2.0 * g)
    for name in PARAM_NAMES:
        assert np.allclose(2.0 * g1[name], g2[name], rtol=1e-12, atol=1e-14)


def finite_difference_grads(gen, noise, grad_out, h=1e-5):
    grads = {}
    for name in PARAM_NAMES:
        param = getattr(gen, name)
        grad = np.zeros_like(param)
        it = np.nditer(param, flags=["multi_index"])
        for _ in it:
            idx = it.multi_index
            orig = param[idx]
            param[idx] = orig + h
            up = np.sum(mlp_forward(gen, noise) * grad_out)
            param[idx] = orig - h
            down = np.sum(mlp_forward(gen, noise) * grad_out)
            param[idx] = orig
            grad[idx] = (up - down) / (2 * h)
        grads[name] = grad
    return grads


def test_gradients_match_central_differences():
    # 5 random instances; every parameter within 1e-6 relative
    for seed in range(5):
        gen = init_mlp(2, 2, seed=100 + seed)
        rng = prng_stream(200 + seed)
        noise = rng.standard_normal((4, 2))
        grad_out = rng.standard_normal((4, 2))
        exact = mlp_backward(gen, noise, grad_out)
        numeric = finite_difference_grads(gen, noise, grad_out)
        for name in PARAM_NAMES:
            scale = np.maximum(np.abs(numeric[name]), 1e-4)
            rel = np.abs(exact[name] - numeric[name]) / scale
            assert rel.max() <= 1e-6, f"{name} gradient off by {rel.max():.2e}"


def test_forward_cache_consistency():
    gen = init_mlp(2, 2, seed=11)
    noise = prng_stream(12).standard_normal((3, 2))
    out, (n, h1, h2) = mlp_forward_cached(gen, noise)
    assert np.array_equal(out, mlp_forward(gen, noise))
    assert np.array_equal(np.tanh(n @ gen.w1 + gen.b1), h1)


def test_adam_zero_gradient_leaves_parameters():
    gen = init_mlp(2, 2, seed=13)
    before = {n: getattr(gen, n).copy() for n in PARAM_NAMES}
    opt = AdamOptimizer(gen)
    opt.step(gen, {n: np.zeros_like(getattr(gen, n)) for n in PARAM_NAMES})
    for name in PARAM_NAMES:
        assert np.array_equal(before[name], getattr(gen, name))


def test_adam_descends_a_quadratic():
    gen = init_mlp(2, 2, seed=14)
    opt = AdamOptimizer(gen, lr=0.05)
    noise = prng_stream(15).standard_normal((8, 2))
    target = np.ones((8, 2))

    def loss():
        return float(np.sum((mlp_forward(gen, noise) - target) ** 2))

    start = loss()
    for _ in range(50):
        diff = mlp_forward(gen, noise) - target
        opt.step(gen, mlp_backward(gen, noise, 2.0 * diff))
    assert loss() < 0.1 * start
