"""Baseline decoders: log-domain sum-product BP, its tensor formulation with
edge-incidence matrices, and the MMSE + BP pipeline for MIMO channels.

Both BP variants share the edge numbering of the ParityCheckMatrix and the
same numerical guards (message clamp at 30, tanh magnitudes kept inside
[1e-12, 1 - 1e-12] before the log), so their per-iteration messages agree
to rounding.
"""

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .ldpc import check_parity, sign_decision

MSG_CLAMP = 30.0
TANH_FLOOR = 1e-12


class BpResult(NamedTuple):
    word: np.ndarray
    iterations: int
    parity_ok: bool
    message_history: list | None = None


@dataclass(frozen=True)
class EdgeIncidence:
    """Edge-incidence matrices U (n x e) and V (m x e) plus cached Grams.

    U_{jk} = 1 iff edge k touches variable j; V_{ik} = 1 iff edge k touches
    check i. U^T U - I and V^T V - I aggregate messages over edges sharing a
    variable (resp. check), excluding the edge itself.
    """

    U: np.ndarray
    V: np.ndarray
    UtU_I: np.ndarray
    VtV_I: np.ndarray


def build_uv(H):
    e = H.e
    U = np.zeros((H.n, e))
    V = np.zeros((H.m, e))
    U[H.edge_var, np.arange(e)] = 1.0
    V[H.edge_check, np.arange(e)] = 1.0
    eye = np.eye(e)
    return EdgeIncidence(U=U, V=V, UtU_I=U.T @ U - eye, VtV_I=V.T @ V - eye)


def bmod(x):
    """Real remainder modulo 2: x - 2*floor(x/2)."""
    x = np.asarray(x, dtype=np.float64)
    return x - 2.0 * np.floor(x / 2.0)


def llr_awgn(y, sigma2):
    """BPSK/AWGN channel LLRs: lambda = 2 y / sigma2."""
    if sigma2 <= 0:
        raise ValueError("sigma2 must be positive")
    return 2.0 * np.asarray(y, dtype=np.float64) / sigma2


def _edge_sum_per_var(H, vals):
    ext = np.concatenate([vals, [0.0]])
    g = ext[H.var_edges]
    acc = g[:, 0]
    for t in range(1, H.dc_max):
        acc = acc + g[:, t]
    return acc


def _edge_sum_per_check(H, vals):
    ext = np.concatenate([vals, [0.0]])
    g = ext[H.check_edges]
    acc = g[:, 0]
    for t in range(1, H.dr_max):
        acc = acc + g[:, t]
    return acc


def _edge_prod_per_check(H, vals):
    ext = np.concatenate([vals, [1.0]])
    g = ext[H.check_edges]
    acc = g[:, 0]
    for t in range(1, H.dr_max):
        acc = acc * g[:, t]
    return acc


def _clamped_log_tanh(beta):
    b = np.clip(beta, -MSG_CLAMP, MSG_CLAMP)
    mag = np.clip(np.abs(np.tanh(0.5 * b)), TANH_FLOOR, 1.0 - TANH_FLOOR)
    return np.log(mag)


def bp_decode(lam, H, max_iter, early_stop=True, record_messages=False):
    """Log-domain sum-product decoding with a flooding schedule.

    Stops early once the hard decision satisfies every parity check;
    otherwise runs max_iter iterations and reports parity_ok=False.
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    lam = np.asarray(lam, dtype=np.float64)
    alpha = np.zeros(H.e)
    history = [] if record_messages else None
    word = sign_decision(lam)
    for it in range(1, max_iter + 1):
        var_tot = _edge_sum_per_var(H, alpha)
        beta = lam[H.edge_var] + var_tot[H.edge_var] - alpha

        logmag = _clamped_log_tanh(beta)
        chk_log = _edge_sum_per_check(H, logmag)
        sgn = np.sign(beta)
        chk_sgn = _edge_prod_per_check(H, sgn)
        alpha = (chk_sgn[H.edge_check] * sgn) * (
            2.0 * np.arctanh(np.exp(chk_log[H.edge_check] - logmag))
        )
        if record_messages:
            history.append((beta.copy(), alpha.copy()))

        posterior = lam + _edge_sum_per_var(H, alpha)
        word = sign_decision(posterior)
        if early_stop and check_parity(word, H):
            return BpResult(word, it, True, history)
    return BpResult(word, max_iter, check_parity(word, H), history)


def bp_tensor_decode(lam, ei, max_iter, early_stop=True, record_messages=False):
    """Tensor-form BP: every update is a matrix product or component-wise map.

        variable step:  beta = (U^T U - I) alpha + U^T lambda
        check step:     alpha_abs  = 2 atanh{exp((V^T V - I) log|tanh(beta/2)|)}
                        alpha_sign = {1 - 2 V^T bmod(V (1 - sign beta)/2)} sign beta
                        alpha      = alpha_sign * alpha_abs
        posterior:      gamma = U alpha + lambda
    """
    if max_iter < 1:
        raise ValueError("max_iter must be >= 1")
    lam = np.asarray(lam, dtype=np.float64)
    U, V = ei.U, ei.V
    e = U.shape[1]
    alpha = np.zeros(e)
    history = [] if record_messages else None
    Ut_lam = U.T @ lam
    word = sign_decision(lam)
    for it in range(1, max_iter + 1):
        beta = ei.UtU_I @ alpha + Ut_lam

        logmag = _clamped_log_tanh(beta)
        alpha_abs = 2.0 * np.arctanh(np.exp(ei.VtV_I @ logmag))
        s = np.sign(beta)
        alpha_sign = (1.0 - 2.0 * (V.T @ bmod(V @ ((1.0 - s) / 2.0)))) * s
        alpha = alpha_sign * alpha_abs
        if record_messages:
            history.append((beta.copy(), alpha.copy()))

        gamma = U @ alpha + lam
        word = sign_decision(gamma)
        if early_stop:
            bits = (1.0 - word) / 2.0
            syndrome = bmod(V @ (U.T @ bits))
            if not np.any(syndrome):
                return BpResult(word, it, True, history)
    parity_ok = not np.any(bmod(V @ (U.T @ ((1.0 - word) / 2.0))))
    return BpResult(word, max_iter, parity_ok, history)


def mmse_bp_pipeline(channel, y, H, max_iter, early_stop=True):
    """MMSE detection followed by BP on the post-detection effective LLRs."""
    return bp_decode(channel.mmse_llr(y), H, max_iter, early_stop=early_stop)
