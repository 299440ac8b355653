"""Dense-network core: float64 MLPs with exact reverse-mode gradients and Adam.

Everything downstream (discriminators, actor, critic, behavior cloning) runs on
the primitives in this file. Networks are plain dataclasses holding numpy
arrays; treat them as immutable once shared -- `adam_step` returns a fresh
Network instead of mutating, so actor threads can keep stale snapshots safely.

Hidden layers are ReLU. The output head is one of:

    identity        raw affine output
    sigmoid         elementwise logistic, for discriminators
    tanh            elementwise tanh, for bounded policies
    softmax_logits  numerically identical to identity; marks outputs meant to
                    be fed through a softmax inside the loss (distributional
                    critic), so the cross-entropy can use a stable log-softmax

Initialization is uniform in [-1/sqrt(fan_in), +1/sqrt(fan_in)] per layer, for
weights and biases alike, drawn from a seeded generator so construction is
bit-deterministic.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from .errors import NumericalError

HEADS = ("identity", "sigmoid", "tanh", "softmax_logits")

CHECKPOINT_FORMAT_VERSION = 1


@dataclass(frozen=True)
class Network:
    layer_sizes: tuple
    head: str
    weights: tuple  # per layer, shape (fan_in, fan_out), float64
    biases: tuple   # per layer, shape (fan_out,), float64

    @property
    def n_layers(self):
        return len(self.weights)

    @property
    def in_dim(self):
        return self.layer_sizes[0]

    @property
    def out_dim(self):
        return self.layer_sizes[-1]


@dataclass
class Gradients:
    """Parameter gradients with the same layout as a Network."""

    weights: list
    biases: list

    def scaled(self, c):
        return Gradients([c * w for w in self.weights], [c * b for b in self.biases])

    def added(self, other):
        return Gradients(
            [a + b for a, b in zip(self.weights, other.weights)],
            [a + b for a, b in zip(self.biases, other.biases)],
        )

    def max_abs(self):
        vals = [np.max(np.abs(a)) if a.size else 0.0 for a in self.weights + self.biases]
        return max(vals)


def init_network(layer_sizes, head="identity", seed=0):
    if head not in HEADS:
        raise ValueError(f"unknown head {head!r}, expected one of {HEADS}")
    sizes = tuple(int(s) for s in layer_sizes)
    if len(sizes) < 2 or any(s < 1 for s in sizes):
        raise ValueError(f"layer_sizes must be >= 2 positive entries, got {sizes}")
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = 1.0 / np.sqrt(fan_in)
        weights.append(rng.uniform(-bound, bound, size=(fan_in, fan_out)))
        biases.append(rng.uniform(-bound, bound, size=fan_out))
    return Network(sizes, head, tuple(weights), tuple(biases))


def parameter_count(net):
    return sum(w.size for w in net.weights) + sum(b.size for b in net.biases)


def _as_batch(x, in_dim):
    x = np.asarray(x, dtype=np.float64)
    single = x.ndim == 1
    if single:
        x = x[None, :]
    if x.ndim != 2 or x.shape[1] != in_dim:
        raise ValueError(f"input shape {x.shape} incompatible with in_dim {in_dim}")
    return x, single


def _apply_head(head, z):
    if head == "sigmoid":
        # stable logistic: never overflows in either tail
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if head == "tanh":
        return np.tanh(z)
    return z  # identity, softmax_logits


def forward(net, x):
    y, _ = forward_cache(net, x)
    return y


def forward_cache(net, x):
    """Run the network, returning (output, cache) for a later backward pass."""
    x2, single = _as_batch(x, net.in_dim)
    acts = [x2]      # input to each layer
    pres = []        # pre-activation of each hidden layer
    h = x2
    last = net.n_layers - 1
    for i, (w, b) in enumerate(zip(net.weights, net.biases)):
        z = h @ w + b
        if i < last:
            pres.append(z)
            h = np.maximum(z, 0.0)
            acts.append(h)
        else:
            y = _apply_head(net.head, z)
    cache = (acts, pres, y, single)
    return (y[0] if single else y), cache


def backward(net, cache, dy):
    """Exact reverse-mode pass.

    `dy` is the gradient of a scalar loss with respect to the network *output*
    (post-head), matching the shape returned by forward_cache. Returns
    (Gradients, dx) where dx is the loss gradient with respect to the input.
    """
    acts, pres, y, single = cache
    dy = np.asarray(dy, dtype=np.float64)
    if single:
        dy = dy[None, :]
    if dy.shape != y.shape:
        raise ValueError(f"dy shape {dy.shape} != output shape {y.shape}")

    if net.head == "sigmoid":
        dz = dy * y * (1.0 - y)
    elif net.head == "tanh":
        dz = dy * (1.0 - y * y)
    else:
        dz = dy

    n = net.n_layers
    dws = [None] * n
    dbs = [None] * n
    for i in range(n - 1, -1, -1):
        a_in = acts[i]
        dws[i] = a_in.T @ dz
        dbs[i] = dz.sum(axis=0)
        da = dz @ net.weights[i].T
        if i > 0:
            dz = da * (pres[i - 1] > 0)  # ReLU gate
    dx = da
    return Gradients(dws, dbs), (dx[0] if single else dx)


def zeros_like_gradients(net):
    return Gradients(
        [np.zeros_like(w) for w in net.weights],
        [np.zeros_like(b) for b in net.biases],
    )


@dataclass
class AdamState:
    m_w: list
    v_w: list
    m_b: list
    v_b: list
    step: int = 0
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8


def init_adam(net, beta1=0.9, beta2=0.999, eps=1e-8):
    return AdamState(
        m_w=[np.zeros_like(w) for w in net.weights],
        v_w=[np.zeros_like(w) for w in net.weights],
        m_b=[np.zeros_like(b) for b in net.biases],
        v_b=[np.zeros_like(b) for b in net.biases],
        step=0,
        beta1=beta1,
        beta2=beta2,
        eps=eps,
    )


def adam_step(net, grads, state, lr):
    """One Adam descent step. Returns (new_net, new_state); inputs untouched."""
    t = state.step + 1
    b1, b2, eps = state.beta1, state.beta2, state.eps
    c1 = 1.0 - b1 ** t
    c2 = 1.0 - b2 ** t

    def upd(param, g, m, v):
        m2 = b1 * m + (1.0 - b1) * g
        v2 = b2 * v + (1.0 - b2) * g * g
        p2 = param - lr * (m2 / c1) / (np.sqrt(v2 / c2) + eps)
        return p2, m2, v2

    new_w, new_b = [], []
    m_w, v_w, m_b, v_b = [], [], [], []
    for i in range(net.n_layers):
        w2, mw2, vw2 = upd(net.weights[i], grads.weights[i], state.m_w[i], state.v_w[i])
        b2_, mb2, vb2 = upd(net.biases[i], grads.biases[i], state.m_b[i], state.v_b[i])
        new_w.append(w2)
        new_b.append(b2_)
        m_w.append(mw2)
        v_w.append(vw2)
        m_b.append(mb2)
        v_b.append(vb2)
    for arr in new_w + new_b:
        if not np.all(np.isfinite(arr)):
            raise NumericalError("non-finite parameter after Adam step")
    net2 = Network(net.layer_sizes, net.head, tuple(new_w), tuple(new_b))
    state2 = AdamState(m_w, v_w, m_b, v_b, t, b1, b2, eps)
    return net2, state2


def network_to_dict(net):
    return {
        "format_version": CHECKPOINT_FORMAT_VERSION,
        "layer_sizes": list(net.layer_sizes),
        "head": net.head,
        "weights": [w.ravel().tolist() for w in net.weights],  # row-major
        "biases": [b.tolist() for b in net.biases],
    }


def network_from_dict(d):
    from .errors import DataFormatError

    if d.get("format_version") != CHECKPOINT_FORMAT_VERSION:
        raise DataFormatError(
            f"unsupported checkpoint format_version {d.get('format_version')!r}"
        )
    sizes = tuple(int(s) for s in d["layer_sizes"])
    head = d["head"]
    if head not in HEADS:
        raise DataFormatError(f"unknown head {head!r} in checkpoint")
    weights, biases = [], []
    for fan_in, fan_out, wflat, b in zip(sizes[:-1], sizes[1:], d["weights"], d["biases"]):
        w = np.asarray(wflat, dtype=np.float64)
        if w.size != fan_in * fan_out:
            raise DataFormatError("weight array size does not match layer_sizes")
        weights.append(w.reshape(fan_in, fan_out))
        b = np.asarray(b, dtype=np.float64)
        if b.size != fan_out:
            raise DataFormatError("bias array size does not match layer_sizes")
        biases.append(b)
    return Network(sizes, head, tuple(weights), tuple(biases))


def save_network(net, path):
    with open(path, "w") as f:
        json.dump(network_to_dict(net), f)


def load_network(path):
    with open(path) as f:
        return network_from_dict(json.load(f))
