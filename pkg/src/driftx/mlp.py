"""Small generator network with hand-written forward/backward passes.

Fixed architecture: noise_dim -> 64 -> 64 -> out_dim, tanh on the hidden
layers, identity output. Gradients are computed by reverse accumulation and
are exact; the training loop never needs an autodiff framework at this
scale. The Adam update follows the standard biased-moment/bias-correction
form.
"""

from dataclasses import dataclass

import numpy as np

from .rng import prng_stream

HIDDEN = 64

# Toy-scale optimizer defaults.
ADAM_LR = 1e-3
ADAM_BETA1 = 0.9
ADAM_BETA2 = 0.999
ADAM_EPS = 1e-8

PARAM_NAMES = ("w1", "b1", "w2", "b2", "w3", "b3")


@dataclass
class MlpGenerator:
    w1: np.ndarray  # (noise_dim, HIDDEN)
    b1: np.ndarray  # (HIDDEN,)
    w2: np.ndarray  # (HIDDEN, HIDDEN)
    b2: np.ndarray  # (HIDDEN,)
    w3: np.ndarray  # (HIDDEN, out_dim)
    b3: np.ndarray  # (out_dim,)

    @property
    def noise_dim(self) -> int:
        return self.w1.shape[0]

    @property
    def out_dim(self) -> int:
        return self.w3.shape[1]

    def parameters(self):
        return {name: getattr(self, name) for name in PARAM_NAMES}

    def copy(self) -> "MlpGenerator":
        return MlpGenerator(*(getattr(self, n).copy() for n in PARAM_NAMES))


def init_mlp(noise_dim: int, out_dim: int, seed) -> MlpGenerator:
    """Xavier-scaled random init from the seed stream, zero biases."""
    rng = prng_stream(seed)

    def layer(fan_in, fan_out):
        scale = np.sqrt(2.0 / (fan_in + fan_out))
        return scale * rng.standard_normal((fan_in, fan_out))

    return MlpGenerator(layer(noise_dim, HIDDEN), np.zeros(HIDDEN),
                        layer(HIDDEN, HIDDEN), np.zeros(HIDDEN),
                        layer(HIDDEN, out_dim), np.zeros(out_dim))


def _check_noise(gen, noise):
    noise = np.asarray(noise, dtype=np.float64)
    if noise.ndim != 2 or noise.shape[1] != gen.noise_dim:
        raise ValueError(f"noise must be (B, {gen.noise_dim}), got {noise.shape}")
    return noise


def mlp_forward(gen: MlpGenerator, noise) -> np.ndarray:
    out, _ = mlp_forward_cached(gen, noise)
    return out


def mlp_forward_cached(gen: MlpGenerator, noise):
    """Forward pass returning the output and hidden activations."""
    noise = _check_noise(gen, noise)
    h1 = np.tanh(noise @ gen.w1 + gen.b1)
    h2 = np.tanh(h1 @ gen.w2 + gen.b2)
    out = h2 @ gen.w3 + gen.b3
    return out, (noise, h1, h2)


def mlp_backward(gen: MlpGenerator, noise, grad_out) -> dict:
    """Parameter gradients of sum(out * grad_out) via reverse accumulation."""
    noise = _check_noise(gen, noise)
    grad_out = np.asarray(grad_out, dtype=np.float64)
    if grad_out.shape != (noise.shape[0], gen.out_dim):
        raise ValueError(
            f"grad_out must be ({noise.shape[0]}, {gen.out_dim}), got {grad_out.shape}")
    _, (noise, h1, h2) = mlp_forward_cached(gen, noise)
    grads = {}
    grads["w3"] = h2.T @ grad_out
    grads["b3"] = grad_out.sum(axis=0)
    d_h2 = (grad_out @ gen.w3.T) * (1.0 - h2**2)
    grads["w2"] = h1.T @ d_h2
    grads["b2"] = d_h2.sum(axis=0)
    d_h1 = (d_h2 @ gen.w2.T) * (1.0 - h1**2)
    grads["w1"] = noise.T @ d_h1
    grads["b1"] = d_h1.sum(axis=0)
    return grads


class AdamOptimizer:
    """Adam with bias correction over the generator's named parameters."""

    def __init__(self, gen: MlpGenerator, lr=ADAM_LR, beta1=ADAM_BETA1,
                 beta2=ADAM_BETA2, eps=ADAM_EPS):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.step_count = 0
        self.m = {n: np.zeros_like(p) for n, p in gen.parameters().items()}
        self.v = {n: np.zeros_like(p) for n, p in gen.parameters().items()}

    def step(self, gen: MlpGenerator, grads: dict) -> None:
        self.step_count += 1
        c1 = 1.0 - self.beta1**self.step_count
        c2 = 1.0 - self.beta2**self.step_count
        for name in PARAM_NAMES:
            g = grads[name]
            self.m[name] = self.beta1 * self.m[name] + (1.0 - self.beta1) * g
            self.v[name] = self.beta2 * self.v[name] + (1.0 - self.beta2) * g**2
            update = (self.m[name] / c1) / (np.sqrt(self.v[name] / c2) + self.eps)
            getattr(gen, name)[...] -= self.lr * update
