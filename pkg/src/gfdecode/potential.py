"""Code potential energy, its direct/tensor gradients, and Hessian products.

The potential is  h(x) = alpha * sum_j (x_j^2 - 1)^2
                       + beta  * sum_i (Q_i - 1)^2,   Q_i = prod_{j in A(i)} x_j.

It is nonnegative everywhere and vanishes exactly on the bipolar codewords.
All functions accept a single state vector of shape (n,) or a batch of D
states as an (n, D) matrix and apply the same formulas column-wise; results
per column are bit-identical to the single-vector path because every
reduction runs in a fixed slot order.
"""

from dataclasses import dataclass

import numpy as np

SINGULAR_TOL = 1e-12


@dataclass(frozen=True)
class PotentialParams:
    """Weights of the bipolar and parity penalty terms."""

    alpha: float = 1.0
    beta: float = 1.0

    def __post_init__(self):
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be nonnegative")


def _exclusive_products(xp):
    """Leave-one-out products along axis 1 via prefix/suffix accumulation."""
    d = xp.shape[1]
    left = np.empty_like(xp)
    right = np.empty_like(xp)
    left[:, 0] = 1.0
    right[:, d - 1] = 1.0
    for t in range(1, d):
        np.multiply(left[:, t - 1], xp[:, t - 1], out=left[:, t])
    for t in range(d - 2, -1, -1):
        np.multiply(right[:, t + 1], xp[:, t + 1], out=right[:, t])
    left *= right
    return left


def _exclusive_products_dual(xp, vp):
    """Leave-one-out products plus their directional derivatives.

    Propagates (value, derivative) pairs through the prefix/suffix sweeps,
    so dR[:, t] = sum_{u != t} (prod over remaining slots) * vp[:, u].
    """
    d = xp.shape[1]
    lp = np.ones_like(xp)
    ld = np.zeros_like(xp)
    rp = np.ones_like(xp)
    rd = np.zeros_like(xp)
    for t in range(1, d):
        lp[:, t] = lp[:, t - 1] * xp[:, t - 1]
        ld[:, t] = ld[:, t - 1] * xp[:, t - 1] + lp[:, t - 1] * vp[:, t - 1]
    for t in range(d - 2, -1, -1):
        rp[:, t] = rp[:, t + 1] * xp[:, t + 1]
        rd[:, t] = rd[:, t + 1] * xp[:, t + 1] + rp[:, t + 1] * vp[:, t + 1]
    return lp * rp, lp * rd + ld * rp


def syndrome_products(x, H):
    """Per-check products Q_i = prod_{j in A(i)} x_j, shape (m,) or (m, D)."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != H.n:
        raise ValueError(f"state length {x.shape[0]} != n={H.n}")
    xp = H.gather_rows(x, pad_value=1.0)
    Q = xp[:, 0]
    for t in range(1, xp.shape[1]):
        Q = Q * xp[:, t]
    return Q


def code_energy(x, H, params):
    """Potential energy value; >= 0, zero exactly on bipolar codewords."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != H.n:
        raise ValueError(f"state length {x.shape[0]} != n={H.n}")
    Q = syndrome_products(x, H)
    bip = ((x * x - 1.0) ** 2).sum(axis=0)
    par = ((Q - 1.0) ** 2).sum(axis=0)
    return params.alpha * bip + params.beta * par


def potential_grad_parts(x, H):
    """Unweighted gradient pieces (g_bip, g_par); grad = alpha*g_bip + beta*g_par."""
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != H.n:
        raise ValueError(f"state length {x.shape[0]} != n={H.n}")
    g_bip = 4.0 * x * (x * x - 1.0)
    xp = H.gather_rows(x, pad_value=1.0)
    R = _exclusive_products(xp)
    Q = R[:, 0] * xp[:, 0]
    contrib = 2.0 * (Q - 1.0)[:, None] * R
    g_par = H.scatter_to_vars(contrib)
    return g_bip, g_par


def grad_direct(x, H, params):
    """Analytic gradient of the potential: component k is
    4*alpha*(x_k-1)(x_k+1)x_k + 2*beta*sum_{i in B(k)} (Q_i-1) prod_{j in A(i)\\{k}} x_j.
    """
    g_bip, g_par = potential_grad_parts(x, H)
    return params.alpha * g_bip + params.beta * g_par


def potential_hvp_parts(x, v, H):
    """Unweighted Hessian-vector products of the two penalty terms."""
    x = np.asarray(x, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    h_bip = 4.0 * (3.0 * x * x - 1.0) * v
    xp = H.gather_rows(x, pad_value=1.0)
    vp = H.gather_rows(v, pad_value=0.0)
    R, dR = _exclusive_products_dual(xp, vp)
    Q = R[:, 0] * xp[:, 0]
    dQ = dR[:, 0] * xp[:, 0] + R[:, 0] * vp[:, 0]
    contrib = 2.0 * (dQ[:, None] * R + (Q - 1.0)[:, None] * dR)
    h_par = H.scatter_to_vars(contrib)
    return h_bip, h_par


def potential_hvp(x, v, H, params):
    """Hessian-vector product of the potential at x applied to v."""
    h_bip, h_par = potential_hvp_parts(x, v, H)
    return params.alpha * h_bip + params.beta * h_par


def grad_tensor(x, H, params):
    """
    Tensor-form gradient evaluated with component-wise log/exp over C:

        4*alpha*exp(z_-1 + z + z_+1) + 2*beta*exp(w - z)
        z = ln x, z_-1 = ln(x - 1), z_+1 = ln(x + 1),
        w = ln(H^T (exp(2 H z) - exp(H z)))

    using the principal branch for logs of negative reals and the dense H
    embedded in the reals for the matrix products. Returns (grad, fallback):
    any component within 1e-12 of {0, +1, -1} sits on a log singularity, in
    which case the direct formula is used and fallback is True.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.shape[0] != H.n:
        raise ValueError(f"state length {x.shape[0]} != n={H.n}")
    singular = min(
        np.abs(x).min(), np.abs(x - 1.0).min(), np.abs(x + 1.0).min()
    )
    if singular < SINGULAR_TOL:
        return grad_direct(x, H, params), True

    Hd = H.to_dense(dtype=np.float64)
    xc = x.astype(np.complex128)
    z = np.log(xc)
    zm = np.log(xc - 1.0)
    zp = np.log(xc + 1.0)
    Hz = Hd @ z
    with np.errstate(divide="ignore", invalid="ignore"):
        w = np.log(Hd.T @ (np.exp(2.0 * Hz) - np.exp(Hz)))
        g = 4.0 * params.alpha * np.exp(zm + z + zp) + 2.0 * params.beta * np.exp(
            w - z
        )
    imag_max = np.abs(g.imag).max()
    real_max = np.abs(g.real).max()
    if not imag_max < 1e-8 * (1.0 + real_max):
        raise ArithmeticError(
            f"imaginary residue {imag_max:.3e} exceeds tolerance; input too close "
            "to a log singularity"
        )
    return g.real, False
