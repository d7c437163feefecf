"""Deep unfolding: train the per-iteration schedule of the discretized decoder.

Each decoder iteration is treated as a layer with its own (eta, gamma,
alpha, beta); gradients of the mean-squared-error loss between the final
state and the transmitted word are accumulated by the exact adjoint
recursion of the unrolled update, so no autodiff framework is needed. All
constituent pieces have closed-form derivatives: the channel term via the
provider's Hessian product and the potential via its Hessian-vector product.

Positivity of the trained parameters is kept by a softplus
reparameterization; the box projection is disabled while training (its
clamp zeroes gradients) and re-enabled for inference schedules.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .decoder import DecoderSchedule
from .optim import Adam
from .potential import potential_grad_parts, potential_hvp_parts

FAMILIES = ("eta", "gamma", "alpha", "beta")


def softplus(t):
    return np.logaddexp(0.0, t)


def softplus_inv(p):
    p = np.asarray(p, dtype=np.float64)
    if np.any(p <= 0):
        raise ValueError("softplus inverse needs positive values")
    small = p < 1e-8
    with np.errstate(divide="ignore", invalid="ignore"):
        big_branch = p + np.log1p(-np.exp(-np.where(small, 1.0, p)))
        small_branch = np.log(np.expm1(np.where(small, p, 1.0)))
    return np.where(small, small_branch, big_branch)


def _sigmoid(t):
    return 0.5 * (1.0 + np.tanh(0.5 * t))


@dataclass
class UnfoldedModel:
    """Trainable schedule: raw parameters theta, mapped through softplus.

    `theta` has shape (4, U) with rows ordered (eta, gamma, alpha, beta).
    Families not listed in `trainable` keep their initial values. With
    `soft_project`, training unrolls pass each update through the smooth
    box surrogate xi*tanh(./xi) (the hard clamp would zero gradients);
    inference schedules always use the hard projection.
    """

    theta: np.ndarray
    xi: float = 1.5
    trainable: tuple = FAMILIES
    soft_project: bool = False

    def __post_init__(self):
        self.theta = np.asarray(self.theta, dtype=np.float64)
        if self.theta.ndim != 2 or self.theta.shape[0] != 4:
            raise ValueError("theta must have shape (4, U)")
        for fam in self.trainable:
            if fam not in FAMILIES:
                raise ValueError(f"unknown family {fam!r}")

    @property
    def depth(self):
        return self.theta.shape[1]

    @property
    def train_xi(self):
        return self.xi if self.soft_project else None

    @classmethod
    def from_schedule(cls, schedule, trainable=FAMILIES, soft_project=False):
        theta = np.stack(
            [
                softplus_inv(schedule.etas),
                softplus_inv(schedule.gammas),
                softplus_inv(schedule.alphas),
                softplus_inv(schedule.betas),
            ]
        )
        return cls(theta=theta, xi=schedule.xi, trainable=trainable,
                   soft_project=soft_project)

    def params(self, depth=None):
        """Positive schedule arrays (etas, gammas, alphas, betas)."""
        U = self.depth if depth is None else depth
        p = softplus(self.theta[:, :U])
        return p[0], p[1], p[2], p[3]

    def schedule(self, project=True, depth=None):
        etas, gammas, alphas, betas = self.params(depth)
        return DecoderSchedule(
            etas=etas, gammas=gammas, alphas=alphas, betas=betas,
            xi=self.xi, project=project,
        )


SOFTCLIP_P = 16.0


def _softclip(u, xi):
    """Smooth box surrogate f(u) = u (1 + |u/xi|^p)^(-1/p) and its slope.

    Near-identity inside [-xi, xi], saturating at +-xi outside, so trained
    dynamics transfer to the hard projection used at inference. The slope
    (1 + t)^(-(p+1)/p) is exact; the pre-clip only touches the region where
    it already vanishes numerically.
    """
    uc = np.clip(u, -100.0 * xi, 100.0 * xi)
    t = np.abs(uc / xi) ** SOFTCLIP_P
    f = uc * (1.0 + t) ** (-1.0 / SOFTCLIP_P)
    slope = (1.0 + t) ** (-(SOFTCLIP_P + 1.0) / SOFTCLIP_P)
    return f, slope


def _unroll(etas, gammas, alphas, betas, y, provider, H, x0, soft_xi=None):
    """Forward pass; returns (states s_0..s_U, surrogate slopes or None)."""
    s = np.array(x0, dtype=np.float64)
    states = [s.copy()]
    slopes = [] if soft_xi is not None else None
    for k in range(len(etas)):
        g_bip, g_par = potential_grad_parts(s, H)
        gh = alphas[k] * g_bip + betas[k] * g_par
        s = s - etas[k] * (provider.grad(s, y) + gammas[k] * gh)
        if soft_xi is not None:
            s, slope = _softclip(s, soft_xi)
            slopes.append(slope)
        if not np.all(np.isfinite(s)):
            raise FloatingPointError(f"unrolled state diverged at layer {k + 1}")
        states.append(s.copy())
    return states, slopes


def schedule_loss_and_grads(etas, gammas, alphas, betas, batch, H, x0=None,
                            soft_xi=None):
    """MSE loss over the batch and its exact gradients per schedule entry.

    `batch` is a list of (x, y, provider) samples. The backward sweep walks
    the stored states with the adjoint vector a_k = dLoss/ds_k:

        a_U = 2 (s_U - x) / D
        a_k = a~_{k+1} - eta_k (H_L a~_{k+1} + gamma_k H_h a~_{k+1})

    where a~ = a when unrolling is unprojected; under the smooth box
    surrogate the adjoint first picks up the stored surrogate slope.
    """
    U = len(etas)
    D = len(batch)
    d_eta = np.zeros(U)
    d_gamma = np.zeros(U)
    d_alpha = np.zeros(U)
    d_beta = np.zeros(U)
    loss = 0.0
    for x, y, provider in batch:
        if x0 is None:
            start = np.zeros_like(np.asarray(x, dtype=np.float64))
        else:
            start = x0
        states, slopes = _unroll(etas, gammas, alphas, betas, y, provider, H,
                                 start, soft_xi)
        diff = states[-1] - x
        loss += float(diff @ diff) / D
        a = 2.0 * diff / D
        for k in range(U - 1, -1, -1):
            s = states[k]
            if soft_xi is not None:
                a = a * slopes[k]
            g_bip, g_par = potential_grad_parts(s, H)
            gh = alphas[k] * g_bip + betas[k] * g_par
            step_dir = provider.grad(s, y) + gammas[k] * gh
            d_eta[k] -= a @ step_dir
            d_gamma[k] -= etas[k] * (a @ gh)
            d_alpha[k] -= etas[k] * gammas[k] * (a @ g_bip)
            d_beta[k] -= etas[k] * gammas[k] * (a @ g_par)
            h_bip, h_par = potential_hvp_parts(s, a, H)
            hh = alphas[k] * h_bip + betas[k] * h_par
            a = a - etas[k] * (provider.hvp(s, y, a) + gammas[k] * hh)
    return loss, (d_eta, d_gamma, d_alpha, d_beta)


def unfolded_loss(model, batch, H, x0=None, depth=None):
    """(1/D) sum_d ||s_U(y_d) - x_d||^2 for the model's current schedule."""
    etas, gammas, alphas, betas = model.params(depth)
    loss = 0.0
    for x, y, provider in batch:
        start = np.zeros_like(np.asarray(x, dtype=np.float64)) if x0 is None else x0
        states, _ = _unroll(etas, gammas, alphas, betas, y, provider, H, start,
                            model.train_xi)
        diff = states[-1] - x
        loss += float(diff @ diff) / len(batch)
    return loss


def model_loss_and_grads(model, batch, H, x0=None, depth=None):
    """Loss plus gradient in raw theta coordinates (softplus chain applied)."""
    U = model.depth if depth is None else depth
    etas, gammas, alphas, betas = model.params(depth)
    loss, grads = schedule_loss_and_grads(etas, gammas, alphas, betas, batch, H,
                                          x0, model.train_xi)
    dtheta = np.zeros_like(model.theta)
    for row, fam, g in zip(range(4), FAMILIES, grads):
        if fam in model.trainable:
            dtheta[row, :U] = g * _sigmoid(model.theta[row, :U])
    return loss, dtheta


class TrainingCollapse(RuntimeError):
    pass


@dataclass
class UnfoldTrainConfig:
    iterations: int = 200
    batch: int = 16
    lr: float = 0.02


class UnfoldReport(NamedTuple):
    model: "UnfoldedModel"
    losses: np.ndarray
    lr_reductions: int


def train_unfolded(model, sample_gen, cfg, rng, incremental=True):
    """Train the unfolded schedule on freshly generated (x, y, provider) batches.

    With `incremental`, depth stages 1..U are trained progressively (the
    loss is taken at the stage depth; deeper layers stay untouched), then a
    final full-depth stage runs; this follows the usual unfolding practice
    of growing the trained prefix. A non-finite loss restores the previous
    parameters and halves the learning rate instead of aborting.
    """
    U = model.depth
    if incremental:
        stages = list(range(1, U + 1)) + [U]
        per_stage = max(1, cfg.iterations // len(stages))
        plan = [(d, per_stage) for d in stages]
    else:
        plan = [(U, cfg.iterations)]

    losses = []
    reductions = 0
    lr = cfg.lr
    for depth, iters in plan:
        opt = Adam(lr=lr)
        for _ in range(iters):
            batch = sample_gen(rng, cfg.batch)
            saved = model.theta.copy()
            try:
                loss, dtheta = model_loss_and_grads(model, batch, H=sample_gen.H,
                                                    x0=None, depth=depth)
            except FloatingPointError:
                loss = np.nan
                dtheta = None
            if not np.isfinite(loss):
                model.theta = saved
                lr /= 2.0
                reductions += 1
                if lr < 1e-8:
                    raise TrainingCollapse(
                        f"learning rate underflowed after {reductions} reductions"
                    )
                opt = Adam(lr=lr)
                continue
            losses.append(loss)
            params = [model.theta]
            opt.step(params, [dtheta])
    return UnfoldReport(model=model, losses=np.array(losses), lr_reductions=reductions)


class SampleGenerator:
    """Callable batch source carrying the code it generates for.

    `draw(rng)` must return one (x, y, provider) triple; the object is used
    as `gen(rng, batch_size)`.
    """

    def __init__(self, H, draw):
        self.H = H
        self._draw = draw

    def __call__(self, rng, batch_size):
        return [self._draw(rng) for _ in range(batch_size)]
