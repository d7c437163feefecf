"""Score-based channel learning for gradient-flow decoding.

A channel with segment-wise i.i.d. additive errors, y' = x' + e' (or
y' = A x' + e' for the linear vector variant), has a conditional score that
decomposes into copies of the segmented score varsigma(e') = grad ln q(e').
A small feedforward net is trained to approximate varsigma by denoising
score matching: disturb clean error samples with N(0, sigma^2 I) noise and
regress the model output against -(disturbed - clean)/sigma^2. The trained
model then supplies grad L(x;y) = -score for the decoder.
"""

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .optim import Adam


class TrainingDivergence(RuntimeError):
    def __init__(self, iteration, message=""):
        self.iteration = iteration
        super().__init__(message or f"training loss became NaN at iteration {iteration}")


class ScoreNet:
    """Feedforward net mapping a segment to its score, same width in and out.

    Affine layers with ReLU activations and a linear output; weights and
    biases are plain numpy arrays so forward/backward passes stay explicit.
    """

    def __init__(self, weights, biases, activations):
        if not (len(weights) == len(biases) == len(activations)):
            raise ValueError("layer lists must have equal length")
        self.weights = [np.asarray(W, dtype=np.float64) for W in weights]
        self.biases = [np.asarray(b, dtype=np.float64) for b in biases]
        self.activations = list(activations)
        for act in self.activations:
            if act not in ("relu", "linear"):
                raise ValueError(f"unknown activation {act!r}")
        self.width = self.weights[0].shape[1]
        if self.weights[-1].shape[0] != self.width:
            raise ValueError("net must map width -> width")

    @classmethod
    def init(cls, width, hidden=64, hidden_layers=2, rng=None):
        """Fan-in-scaled symmetric uniform initialization, zero biases."""
        rng = rng if rng is not None else np.random.default_rng(0)
        dims = [width] + [hidden] * hidden_layers + [width]
        weights, biases, acts = [], [], []
        for i in range(len(dims) - 1):
            fan_in = dims[i]
            bound = 1.0 / np.sqrt(fan_in)
            weights.append(rng.uniform(-bound, bound, size=(dims[i + 1], dims[i])))
            biases.append(np.zeros(dims[i + 1]))
            acts.append("relu" if i < len(dims) - 2 else "linear")
        return cls(weights, biases, acts)

    def parameters(self):
        return self.weights + self.biases

    def copy(self):
        return ScoreNet(
            [W.copy() for W in self.weights],
            [b.copy() for b in self.biases],
            list(self.activations),
        )

    def forward(self, E):
        """Apply the net to one segment (width,) or a batch (D, width)."""
        E = np.asarray(E, dtype=np.float64)
        single = E.ndim == 1
        h = E[None, :] if single else E
        for W, b, act in zip(self.weights, self.biases, self.activations):
            h = h @ W.T + b
            if act == "relu":
                h = np.maximum(h, 0.0)
        return h[0] if single else h

    def _forward_cached(self, E):
        h = np.asarray(E, dtype=np.float64)
        inputs, pre = [], []
        for W, b, act in zip(self.weights, self.biases, self.activations):
            inputs.append(h)
            z = h @ W.T + b
            pre.append(z)
            h = np.maximum(z, 0.0) if act == "relu" else z
        return h, inputs, pre

    def vjp(self, E, cotangent):
        """Backprop `cotangent` (same shape as the output batch) through the net.

        Returns (weight_grads, bias_grads, input_grad); gradients of
        <cotangent, net(E)> with respect to parameters and input.
        """
        _, inputs, pre = self._forward_cached(E)
        dW = [None] * len(self.weights)
        db = [None] * len(self.biases)
        d = np.asarray(cotangent, dtype=np.float64)
        for i in range(len(self.weights) - 1, -1, -1):
            if self.activations[i] == "relu":
                d = d * (pre[i] > 0)
            dW[i] = d.T @ inputs[i]
            db[i] = d.sum(axis=0)
            d = d @ self.weights[i]
        return dW, db, d

    def input_vjp(self, E, cotangent):
        """Gradient of <cotangent, net(E)> with respect to the input only."""
        return self.vjp(E, cotangent)[2]


def scorenet_forward(net, e_seg):
    return net.forward(e_seg)


@dataclass
class SegmentedChannelSpec:
    """Segmentation of a length-n word into K segments of width nu.

    `error_sampler(rng, count)` draws clean error segments from the channel
    law q; `A_seg`, when present, is the per-segment linear map of the
    segmented linear vector channel (errors then live in its output space).
    """

    nu: int
    K: int
    error_sampler: Callable | None = None
    A_seg: np.ndarray | None = None

    def __post_init__(self):
        if self.nu < 1 or self.K < 1:
            raise ValueError("nu and K must be positive")
        if self.A_seg is not None:
            self.A_seg = np.asarray(self.A_seg, dtype=np.float64)
            if self.A_seg.shape[1] != self.nu:
                raise ValueError("A_seg must have nu columns")

    @property
    def n(self):
        return self.nu * self.K

    @property
    def segment_out(self):
        return self.nu if self.A_seg is None else self.A_seg.shape[0]


@dataclass
class TrainConfig:
    batch: int = 100
    iterations: int = 10_000
    sigma: float = 0.3
    lr: float = 0.005

    def __post_init__(self):
        if self.batch < 1:
            raise ValueError("batch must be >= 1")
        if self.sigma <= 0:
            raise ValueError("sigma must be positive")


def dsm_loss(net, clean, disturbed, sigma):
    """Denoising score-matching loss
    (1/D) sum_d || net(e~_d) + (e~_d - e_d)/sigma^2 ||^2."""
    clean = np.atleast_2d(np.asarray(clean, dtype=np.float64))
    disturbed = np.atleast_2d(np.asarray(disturbed, dtype=np.float64))
    if clean.shape != disturbed.shape:
        raise ValueError("clean/disturbed shape mismatch")
    resid = net.forward(disturbed) + (disturbed - clean) / sigma ** 2
    return float((resid * resid).sum(axis=1).mean())


def _dsm_loss_and_grads(net, clean, disturbed, sigma):
    out, inputs, pre = net._forward_cached(disturbed)
    resid = out + (disturbed - clean) / sigma ** 2
    D = clean.shape[0]
    loss = float((resid * resid).sum(axis=1).mean())
    dW, db, _ = net.vjp(disturbed, 2.0 * resid / D)
    return loss, dW + db


class TrainReport(NamedTuple):
    net: ScoreNet
    losses: np.ndarray


def train_score(net, spec, cfg, rng):
    """Denoising score-matching training loop.

    Each iteration draws a fresh mini-batch from the channel's error
    sampler, disturbs it with N(0, sigma^2 I) noise, and takes one Adam
    step on the DSM loss. Returns the trained net with the loss history.
    """
    if spec.error_sampler is None:
        raise ValueError("spec has no error sampler")
    opt = Adam(lr=cfg.lr)
    losses = np.zeros(cfg.iterations)
    params = net.parameters()
    for it in range(cfg.iterations):
        clean = np.atleast_2d(spec.error_sampler(rng, cfg.batch))
        disturbed = clean + rng.normal(0.0, cfg.sigma, size=clean.shape)
        loss, grads = _dsm_loss_and_grads(net, clean, disturbed, cfg.sigma)
        if not np.isfinite(loss):
            raise TrainingDivergence(it)
        losses[it] = loss
        opt.step(params, grads)
    return TrainReport(net=net, losses=losses)


def learned_grad(net, spec, x, y):
    """Channel gradient grad L(x;y) assembled from the trained score model:
    the stacked -score(x'_k - y'_k) per segment, or -A^T score(A x'_k - y'_k)
    for the segmented linear vector channel."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape[0] != spec.n:
        raise ValueError(f"state length {x.shape[0]} != nu*K={spec.n}")
    if y.shape[0] != spec.segment_out * spec.K:
        raise ValueError("observation length does not match segmentation")
    X = x.reshape(spec.K, spec.nu)
    Y = y.reshape(spec.K, spec.segment_out)
    if spec.A_seg is None:
        return -net.forward(X - Y).reshape(spec.n)
    E = X @ spec.A_seg.T - Y
    return -(net.forward(E) @ spec.A_seg).reshape(spec.n)


class LearnedChannel:
    """Channel-gradient provider backed by a trained segmented score model.

    No likelihood value is available, so `value` returns None and objective
    traces built on it are penalty-only.
    """

    def __init__(self, net, spec):
        self.net = net
        self.spec = spec

    def grad(self, x, y):
        return learned_grad(self.net, self.spec, x, y)

    def value(self, x, y):
        return None

    def hvp(self, x, y, v):
        """Transposed-Jacobian product of grad L, for reverse-mode unrolling."""
        spec = self.spec
        X = np.asarray(x, dtype=np.float64).reshape(spec.K, spec.nu)
        Y = np.asarray(y, dtype=np.float64).reshape(spec.K, spec.segment_out)
        Vs = np.asarray(v, dtype=np.float64).reshape(spec.K, spec.nu)
        if spec.A_seg is None:
            dE = self.net.input_vjp(X - Y, Vs)
            return -dE.reshape(spec.n)
        E = X @ spec.A_seg.T - Y
        dE = self.net.input_vjp(E, Vs @ spec.A_seg.T)
        return -(dE @ spec.A_seg).reshape(spec.n)

    def grad_param_vjp(self, x, y, cotangent):
        """Parameter cotangents of <cotangent, grad L(x;y)> through the net.

        Fine-tuning hook: feeding the unrolled decoder's per-layer state
        adjoint through this accumulates score-model parameter gradients,
        enabling joint schedule + score training on top of serial training.
        Returns (weight_grads, bias_grads).
        """
        spec = self.spec
        X = np.asarray(x, dtype=np.float64).reshape(spec.K, spec.nu)
        Y = np.asarray(y, dtype=np.float64).reshape(spec.K, spec.segment_out)
        C = np.asarray(cotangent, dtype=np.float64).reshape(spec.K, spec.nu)
        if spec.A_seg is None:
            dW, db, _ = self.net.vjp(X - Y, -C)
        else:
            E = X @ spec.A_seg.T - Y
            dW, db, _ = self.net.vjp(E, -(C @ spec.A_seg.T))
        return dW, db

    def transmit(self, x, rng):
        """Draw y = A x' + e' per segment with e' from the error sampler."""
        spec = self.spec
        if spec.error_sampler is None:
            raise ValueError("spec has no error sampler")
        X = np.asarray(x, dtype=np.float64).reshape(spec.K, spec.nu)
        E = np.atleast_2d(spec.error_sampler(rng, spec.K))
        if spec.A_seg is None:
            return (X + E).reshape(spec.n)
        return (X @ spec.A_seg.T + E).reshape(spec.K * spec.segment_out)


def correlated2d_sampler(points):
    """Error sampler drawing uniformly from a fixed list of candidate points."""
    points = np.atleast_2d(np.asarray(points, dtype=np.float64))
    if points.shape[0] == 0:
        raise ValueError("candidate list is empty")

    def sampler(rng, count):
        return points[rng.integers(0, points.shape[0], size=count)]

    return sampler


def load_candidates(path):
    """Candidate points from a two-column CSV (one 2D point per row)."""
    pts = np.loadtxt(path, delimiter=",", ndmin=2)
    if pts.shape[1] != 2:
        raise ValueError(f"expected two columns, got {pts.shape[1]}")
    return pts


_SCORENET_MAGIC = "scorenet v1"


def save_scorenet(net, path):
    """Versioned text checkpoint: layer shapes plus row-major parameters."""
    with open(path, "w") as f:
        f.write(_SCORENET_MAGIC + "\n")
        f.write(f"layers {len(net.weights)}\n")
        for W, b, act in zip(net.weights, net.biases, net.activations):
            f.write(f"layer {act} {W.shape[0]} {W.shape[1]}\n")
            for row in W:
                f.write(",".join(repr(float(v)) for v in row) + "\n")
            f.write(",".join(repr(float(v)) for v in b) + "\n")


def load_scorenet(path):
    with open(path) as f:
        if f.readline().strip() != _SCORENET_MAGIC:
            raise ValueError("not a scorenet checkpoint")
        n_layers = int(f.readline().split()[1])
        weights, biases, acts = [], [], []
        for _ in range(n_layers):
            _, act, rows, cols = f.readline().split()
            rows, cols = int(rows), int(cols)
            W = np.array(
                [[float(v) for v in f.readline().split(",")] for _ in range(rows)]
            )
            if W.shape != (rows, cols):
                raise ValueError("weight block shape mismatch")
            b = np.array([float(v) for v in f.readline().split(",")])
            weights.append(W)
            biases.append(b)
            acts.append(act)
    return ScoreNet(weights, biases, acts)
