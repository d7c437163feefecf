"""Channel models supplying the negative-log-likelihood gradient grad L(x;y).

A channel-gradient provider is any object with

    grad(x, y)    -> gradient of L at x, same length as x
    value(x, y)   -> L(x;y) as a float, or None when unknown
    hvp(x, y, v)  -> Hessian of L applied to v (used by the unfolding trainer)

AwgnChannel and MimoChannel below implement it in closed form; the learned
channel in `score` implements the same protocol from a trained score model.
Channel objects are immutable after sampling and safe to share; RNG state
is always passed in by the caller.
"""

from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class AwgnChannel:
    """y = x + n with n ~ N(0, sigma2 I); L(x;y) = ||x - y||^2 / 2."""

    sigma2: float

    def __post_init__(self):
        if self.sigma2 <= 0:
            raise ValueError("sigma2 must be positive")

    def transmit(self, x, rng):
        x = np.asarray(x, dtype=np.float64)
        return x + rng.normal(0.0, np.sqrt(self.sigma2), size=x.shape)

    def grad(self, x, y):
        return x - y

    def value(self, x, y):
        d = np.asarray(x) - np.asarray(y)
        return 0.5 * (d * d).sum(axis=0)

    def hvp(self, x, y, v):
        return v

    def llr(self, y):
        return 2.0 * np.asarray(y) / self.sigma2


def awgn_transmit(x, sigma2, rng):
    """Send x through the AWGN channel; sigma2 = 0 is allowed for tests."""
    if sigma2 < 0:
        raise ValueError("sigma2 must be nonnegative")
    x = np.asarray(x, dtype=np.float64)
    return x + np.sqrt(sigma2) * rng.normal(size=x.shape)


def awgn_grad(x, y):
    """Gradient of ||x - y||^2 / 2, the AWGN negative log-likelihood."""
    x = np.asarray(x, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError("shape mismatch")
    return x - y


class MimoChannel:
    """Equivalent real-valued MIMO channel y = A x + w.

    Built from a mu x nu complex matrix A' with i.i.d. CN(0,1) entries as

        A = [[Re A', -Im A'], [Im A', Re A']],  N = 2 mu, n = 2 nu,

    so QPSK over A' becomes BPSK over A. Noise components are i.i.d.
    N(0, sigma_w2/2) with sigma_w2 = N / SNR. `omega` is the recommended
    gradient step 2 / (lmin + lmax) from the extreme eigenvalues of A^T A.
    """

    def __init__(self, A_complex, sigma_w2):
        if sigma_w2 <= 0:
            raise ValueError("sigma_w2 must be positive")
        self.A_complex = np.asarray(A_complex, dtype=np.complex128)
        mu, nu = self.A_complex.shape
        self.mu, self.nu = mu, nu
        self.N, self.n = 2 * mu, 2 * nu
        re, im = self.A_complex.real, self.A_complex.imag
        self.A = np.block([[re, -im], [im, re]])
        self.sigma_w2 = float(sigma_w2)
        self._omega = None
        self._W_cache = None
        self._gains_cache = None

    @property
    def omega(self):
        if self._omega is None:
            evals = np.linalg.eigvalsh(self.A.T @ self.A)
            self._omega = 2.0 / (evals[0] + evals[-1])
        return self._omega

    @property
    def _W(self):
        """MMSE kernel (A A^T + (sigma_w2/2) I)^{-1}, computed on demand."""
        if self._W_cache is None:
            self._W_cache = np.linalg.inv(
                self.A @ self.A.T + 0.5 * self.sigma_w2 * np.eye(self.N)
            )
        return self._W_cache

    @property
    def _gains(self):
        if self._gains_cache is None:
            self._gains_cache = np.einsum("kj,kj->j", self.A, self._W @ self.A)
        return self._gains_cache

    @classmethod
    def sample(cls, mu, nu, snr_linear, rng):
        if mu < 1 or nu < 1:
            raise ValueError("mu and nu must be >= 1")
        if snr_linear <= 0:
            raise ValueError("snr must be positive")
        A_complex = (
            rng.normal(size=(mu, nu)) + 1j * rng.normal(size=(mu, nu))
        ) / np.sqrt(2.0)
        return cls(A_complex, sigma_w2=2.0 * mu / snr_linear)

    def transmit(self, x, rng):
        w = rng.normal(0.0, np.sqrt(self.sigma_w2 / 2.0), size=self.N)
        return self.A @ np.asarray(x, dtype=np.float64) + w

    def grad(self, x, y):
        return self.A.T @ (self.A @ x - y)

    def value(self, x, y):
        r = y - self.A @ x
        return 0.5 * (r * r).sum(axis=0)

    def hvp(self, x, y, v):
        return self.A.T @ (self.A @ v)

    def mmse_detect(self, y):
        """MMSE estimate A^T (A A^T + (sigma_w2/2) I)^{-1} y."""
        return self.A.T @ (self._W @ y)

    def mmse_llr(self, y):
        """Per-symbol LLR after MMSE detection.

        Models x_hat_j = g_j x_j + noise of variance g_j (1 - g_j), the
        usual post-MMSE effective-Gaussian demapper, giving
        LLR_j = 2 g_j x_hat_j / (g_j (1 - g_j)).
        """
        xhat = self.mmse_detect(y)
        g = self._gains
        return 2.0 * g * xhat / np.maximum(g * (1.0 - g), 1e-300)


def sample_mimo(mu, nu, snr_linear, rng):
    return MimoChannel.sample(mu, nu, snr_linear, rng)


def mimo_grad(channel, x, y):
    return channel.grad(x, y)


def mmse_detect(channel, y):
    return channel.mmse_detect(y)


def snr_convert(mode, value, rate=0.5, N=None):
    """Translate an SNR figure into a noise variance.

    mode "awgn": value is Eb/N0 in dB for unit-energy BPSK at code rate
    `rate`; returns sigma2 = 1 / (2 * rate * 10^(value/10)).
    mode "mimo": value is the linear SNR; returns sigma_w2 = N / value.
    """
    if mode == "awgn":
        if rate <= 0:
            raise ValueError("rate must be positive")
        return 1.0 / (2.0 * rate * 10.0 ** (value / 10.0))
    if mode == "mimo":
        if N is None or N <= 0:
            raise ValueError("mimo conversion needs positive N")
        if value <= 0:
            raise ValueError("snr must be positive")
        return N / value
    raise ValueError(f"unknown snr mode {mode!r}")


_CHANNEL_MAGIC = b"gfdecode-mimo v1\n"


def save_channel(channel, path):
    """Dump a MimoChannel: header, dims, then row-major little-endian f64."""
    with open(path, "wb") as f:
        f.write(_CHANNEL_MAGIC)
        f.write(f"{channel.mu} {channel.nu}\n".encode())
        f.write(np.float64(channel.sigma_w2).astype("<f8").tobytes())
        f.write(np.ascontiguousarray(channel.A, dtype="<f8").tobytes())


def load_channel(path):
    with open(path, "rb") as f:
        magic = f.readline()
        if magic != _CHANNEL_MAGIC:
            raise ValueError(f"not a channel dump: {magic!r}")
        mu, nu = (int(v) for v in f.readline().split())
        sigma_w2 = float(np.frombuffer(f.read(8), dtype="<f8")[0])
        A = np.frombuffer(f.read(8 * 4 * mu * nu), dtype="<f8")
        A = A.reshape(2 * mu, 2 * nu)
    A_complex = A[:mu, :nu] + 1j * A[mu:, :nu]
    return MimoChannel(A_complex, sigma_w2)
