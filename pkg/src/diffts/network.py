"""A small fully connected network with hand-written backpropagation and Adam.

Parameters live in a single flat float64 vector; layer weights and biases are
views into it so the optimiser and the serialiser only ever see one array.
"""

import numpy as np
from scipy.special import expit


def silu(x):
    return x * expit(x)


def silu_grad(x):
    s = expit(x)
    return s * (1.0 + x * (1.0 - s))


def step_embedding(steps, dim, max_period=10000.0):
    """Sinusoidal embedding of integer diffusion steps, shape ``(n, dim)``."""
    steps = np.asarray(steps, dtype=np.float64).reshape(-1)
    half = dim // 2
    freqs = np.exp(-np.log(max_period) * np.arange(half) / max(half, 1))
    args = steps[:, None] * freqs[None, :]
    emb = np.concatenate([np.sin(args), np.cos(args)], axis=1)
    if dim % 2:
        emb = np.concatenate([emb, np.zeros((len(steps), 1))], axis=1)
    return emb


class MLP:
    """Multilayer perceptron ``in_dim -> widths... -> out_dim`` with SiLU hidden units."""

    def __init__(self, in_dim, widths, out_dim, params=None, rng=None):
        self.sizes = [int(in_dim), *[int(w) for w in widths], int(out_dim)]
        self._shapes = []
        for fan_in, fan_out in zip(self.sizes[:-1], self.sizes[1:]):
            self._shapes.append(((fan_in, fan_out), (fan_out,)))
        n = sum(w[0] * w[1] + b[0] for w, b in self._shapes)
        self.params = np.zeros(n)
        self._bind()
        if params is not None:
            params = np.asarray(params, dtype=np.float64)
            if params.shape != (n,):
                raise ValueError(f"expected {n} parameters, got {params.shape}")
            self.params[:] = params
        else:
            self.init_params(np.random.default_rng(rng))

    def _bind(self):
        self.weights, self.biases = [], []
        offset = 0
        for (wshape, bshape) in self._shapes:
            nw = wshape[0] * wshape[1]
            self.weights.append(self.params[offset:offset + nw].reshape(wshape))
            offset += nw
            self.biases.append(self.params[offset:offset + bshape[0]])
            offset += bshape[0]

    def init_params(self, rng):
        # fan-in scaled uniform, as in common deep learning defaults
        for w, b in zip(self.weights, self.biases):
            bound = 1.0 / np.sqrt(w.shape[0])
            w[...] = rng.uniform(-bound, bound, size=w.shape)
            b[...] = rng.uniform(-bound, bound, size=b.shape)

    @property
    def n_params(self):
        return self.params.size

    @property
    def widths(self):
        return tuple(self.sizes[1:-1])

    def forward(self, x, keep=False):
        """Evaluate the network; with ``keep`` also return the activations for backprop."""
        cache = [x] if keep else None
        h = x
        last = len(self.weights) - 1
        for i, (w, b) in enumerate(zip(self.weights, self.biases)):
            z = h @ w + b
            if i == last:
                h = z
            else:
                if keep:
                    cache.append(z)
                h = silu(z)
                if keep:
                    cache.append(h)
        return (h, cache) if keep else h

    def backward(self, cache, grad_out, grad_input=False):
        """Gradient of ``sum(grad_out * output)`` with respect to the flat parameters."""
        grad = np.empty_like(self.params)
        gw_views, gb_views = [], []
        offset = 0
        for (wshape, bshape) in self._shapes:
            nw = wshape[0] * wshape[1]
            gw_views.append(grad[offset:offset + nw].reshape(wshape))
            offset += nw
            gb_views.append(grad[offset:offset + bshape[0]])
            offset += bshape[0]

        g = grad_out
        n_layers = len(self.weights)
        for i in range(n_layers - 1, -1, -1):
            h_in = cache[0] if i == 0 else cache[2 * i]
            gw_views[i][...] = h_in.T @ g
            gb_views[i][...] = g.sum(axis=0)
            if i > 0 or grad_input:
                g = g @ self.weights[i].T
                if i > 0:
                    g = g * silu_grad(cache[2 * i - 1])
        if grad_input:
            return grad, g
        return grad


class Adam:
    """Bias-corrected Adam acting on a flat parameter vector in place."""

    def __init__(self, n_params, lr=5e-4, beta1=0.9, beta2=0.99, eps=1e-8):
        self.lr, self.beta1, self.beta2, self.eps = lr, beta1, beta2, eps
        self.m = np.zeros(n_params)
        self.v = np.zeros(n_params)
        self.t = 0

    def step(self, params, grad):
        self.t += 1
        self.m *= self.beta1
        self.m += (1.0 - self.beta1) * grad
        self.v *= self.beta2
        self.v += (1.0 - self.beta2) * grad * grad
        m_hat = self.m / (1.0 - self.beta1 ** self.t)
        v_hat = self.v / (1.0 - self.beta2 ** self.t)
        params -= self.lr * m_hat / (np.sqrt(v_hat) + self.eps)
