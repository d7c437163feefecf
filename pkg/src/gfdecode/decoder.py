"""Gradient-flow decoding: Euler ODE integration and the discretized recursion.

The continuous dynamics are dx/dt = -(grad L(x;y) + gamma * grad h(x)); the
discretized decoder iterates

    s_{k+1} = Proj_xi( s_k - eta_k * (grad L(s_k;y) + gamma_k * grad h_k(s_k)) )

with a per-iteration schedule of (eta, gamma, alpha, beta) and an optional
box projection that clamps the state to [-xi, xi]^n for stability.
"""

from dataclasses import dataclass

import numpy as np

from .ldpc import check_parity, hamming_distance, sign_decision
from .potential import PotentialParams, code_energy, potential_grad_parts

DIVERGENCE_LIMIT = 1e6


class DecodingDivergence(RuntimeError):
    """State became non-finite or unbounded at `iteration`."""

    def __init__(self, iteration, message=""):
        self.iteration = iteration
        super().__init__(message or f"state diverged at iteration {iteration}")


@dataclass
class DecoderSchedule:
    """Per-iteration decoder parameters plus the projection setting."""

    etas: np.ndarray
    gammas: np.ndarray
    alphas: np.ndarray
    betas: np.ndarray
    xi: float = 1.5
    project: bool = True

    def __post_init__(self):
        self.etas = np.atleast_1d(np.asarray(self.etas, dtype=np.float64))
        U = len(self.etas)
        self.gammas = np.broadcast_to(
            np.asarray(self.gammas, dtype=np.float64), (U,)
        ).copy()
        self.alphas = np.broadcast_to(
            np.asarray(self.alphas, dtype=np.float64), (U,)
        ).copy()
        self.betas = np.broadcast_to(
            np.asarray(self.betas, dtype=np.float64), (U,)
        ).copy()
        if U < 1:
            raise ValueError("schedule needs at least one iteration")
        if np.any(self.etas <= 0):
            raise ValueError("all step sizes must be positive")
        if np.any(self.gammas < 0):
            raise ValueError("gamma must be nonnegative")
        if self.project and not self.xi > 1.0:
            raise ValueError("projection bound xi must exceed 1")

    @property
    def iterations(self):
        return len(self.etas)

    @classmethod
    def constant(cls, iterations, eta, gamma=1.0, alpha=1.0, beta=1.0,
                 xi=1.5, project=True):
        U = int(iterations)
        return cls(
            etas=np.full(U, float(eta)),
            gammas=np.full(U, float(gamma)),
            alphas=np.full(U, float(alpha)),
            betas=np.full(U, float(beta)),
            xi=float(xi),
            project=project,
        )

    def to_csv(self, path):
        with open(path, "w") as f:
            f.write("k,eta,gamma,alpha,beta\n")
            for k in range(self.iterations):
                f.write(
                    f"{k},{float(self.etas[k])!r},{float(self.gammas[k])!r},"
                    f"{float(self.alphas[k])!r},{float(self.betas[k])!r}\n"
                )

    @classmethod
    def from_csv(cls, path, xi=1.5, project=True):
        rows = []
        with open(path) as f:
            header = f.readline().strip()
            if header != "k,eta,gamma,alpha,beta":
                raise ValueError(f"unexpected schedule header: {header!r}")
            for line in f:
                if line.strip():
                    rows.append([float(v) for v in line.split(",")])
        rows.sort(key=lambda r: r[0])
        arr = np.array(rows)
        return cls(etas=arr[:, 1], gammas=arr[:, 2], alphas=arr[:, 3],
                   betas=arr[:, 4], xi=xi, project=project)


@dataclass(frozen=True)
class EulerConfig:
    """Euler integration horizon T split into N bins of width eta = T/N."""

    T: float
    N: int

    def __post_init__(self):
        if self.T <= 0 or self.N < 1:
            raise ValueError("need T > 0 and N >= 1")

    @property
    def eta(self):
        return self.T / self.N


@dataclass
class Trajectory:
    """Recorded decode run: states s_0..s_U and the objective along the way."""

    states: np.ndarray  # (U+1, n)
    objective: np.ndarray  # (U+1,)
    objective_is_partial: bool = False
    errors_vs_reference: np.ndarray | None = None
    times: np.ndarray | None = None

    @property
    def final_state(self):
        return self.states[-1]

    @property
    def decision(self):
        return sign_decision(self.states[-1])

    def export_csv(self, path, include_states=False):
        """Write iter, t, objective, bit_errors[, s_1..s_n] rows."""
        n = self.states.shape[1]
        with open(path, "w") as f:
            head = "iter,t,objective,bit_errors"
            if include_states:
                head += "," + ",".join(f"s_{j + 1}" for j in range(n))
            f.write(head + "\n")
            for k in range(self.states.shape[0]):
                t = float(self.times[k]) if self.times is not None else float(k)
                err = (
                    int(self.errors_vs_reference[k])
                    if self.errors_vs_reference is not None
                    else ""
                )
                line = f"{k},{t!r},{float(self.objective[k])!r},{err}"
                if include_states:
                    line += "," + ",".join(repr(float(v)) for v in self.states[k])
                f.write(line + "\n")


def project_box(x, xi):
    """Euclidean projection onto [-xi, xi]^n (component-wise clamp)."""
    if xi <= 0:
        raise ValueError("xi must be positive")
    return np.clip(x, -xi, xi)


def evaluate_objective(x, y, grad_provider, H, gamma, params):
    """Objective F(x) = L(x;y) + gamma*h(x).

    Returns (value, partial): when the channel cannot report a likelihood
    value (learned gradients), only the penalty term is returned and
    partial is True.
    """
    pen = gamma * code_energy(x, H, params)
    L = grad_provider.value(x, y)
    if L is None:
        return pen, True
    return L + pen, False


def _check_finite(s, iteration):
    if not np.all(np.isfinite(s)) or np.max(np.abs(s)) > DIVERGENCE_LIMIT:
        raise DecodingDivergence(iteration)


def gf_step(s, y, grad_provider, H, eta, gamma, params, xi=None):
    """One discretized gradient-flow update; clamps to the box when xi given."""
    g_bip, g_par = potential_grad_parts(s, H)
    grad_h = params.alpha * g_bip + params.beta * g_par
    step = grad_provider.grad(s, y) + gamma * grad_h
    s_next = s - eta * step
    if xi is not None:
        s_next = np.clip(s_next, -xi, xi)
    return s_next


def euler_decode(y, grad_provider, H, schedule, x0, reference=None,
                 early_stop=False):
    """Run the discretized decoder, recording the full trajectory.

    Raises DecodingDivergence if the state leaves the finite range; with
    early_stop the run ends at the first iterate whose sign decision
    satisfies all parity checks.
    """
    s = np.array(x0, dtype=np.float64)
    xi = schedule.xi if schedule.project else None
    states = [s.copy()]
    objs = []
    errs = [] if reference is not None else None
    partial = False

    def record(sk, gamma_k, params_k):
        nonlocal partial
        val, p = evaluate_objective(sk, y, grad_provider, H, gamma_k, params_k)
        partial = partial or p
        objs.append(val)
        if errs is not None:
            errs.append(hamming_distance(sign_decision(sk), reference))

    params0 = PotentialParams(schedule.alphas[0], schedule.betas[0])
    record(s, schedule.gammas[0], params0)
    times = [0.0]
    for k in range(schedule.iterations):
        params_k = PotentialParams(schedule.alphas[k], schedule.betas[k])
        s = gf_step(s, y, grad_provider, H, schedule.etas[k],
                    schedule.gammas[k], params_k, xi)
        _check_finite(s, k + 1)
        states.append(s.copy())
        times.append(times[-1] + schedule.etas[k])
        record(s, schedule.gammas[k], params_k)
        if early_stop and check_parity(sign_decision(s), H):
            break

    return Trajectory(
        states=np.array(states),
        objective=np.array(objs),
        objective_is_partial=partial,
        errors_vs_reference=np.array(errs) if errs is not None else None,
        times=np.array(times),
    )


def dgf_decode(y, grad_provider, H, schedule, x0, raise_on_divergence=True):
    """Lean decode path: returns (final_state, diverged_mask).

    Accepts a batch of states/observations as (n, D) matrices; columns
    evolve independently and bit-identically to single-vector calls. When
    raise_on_divergence is False, blown-up columns are reported in the mask
    instead of aborting (their states are garbage and must not be trusted).
    """
    s = np.array(x0, dtype=np.float64)
    xi = schedule.xi if schedule.project else None
    with np.errstate(over="ignore", invalid="ignore"):
        for k in range(schedule.iterations):
            params_k = PotentialParams(schedule.alphas[k], schedule.betas[k])
            s = gf_step(s, y, grad_provider, H, schedule.etas[k],
                        schedule.gammas[k], params_k, xi)
            if raise_on_divergence:
                _check_finite(s, k + 1)
    with np.errstate(invalid="ignore"):
        bad = ~np.isfinite(s) | (np.abs(s) > DIVERGENCE_LIMIT)
    return s, bad.any(axis=0)


def continuous_solve(y, grad_provider, H, params, econfig, x0, sample_times,
                     gamma=1.0):
    """Euler-integrate the gradient-flow ODE and sample the trajectory.

    Uniform step eta = T/N, no projection. Returns the states at the
    discrete ticks nearest to each requested sample time, as an array of
    shape (len(sample_times), n).
    """
    sample_times = np.asarray(sample_times, dtype=np.float64)
    if np.any(sample_times < 0) or np.any(sample_times > econfig.T):
        raise ValueError("sample times must lie in [0, T]")
    eta = econfig.eta
    ticks = np.clip(np.rint(sample_times / eta).astype(int), 0, econfig.N)
    want = set(int(t) for t in ticks)

    s = np.array(x0, dtype=np.float64)
    saved = {}
    if 0 in want:
        saved[0] = s.copy()
    for k in range(econfig.N):
        s = gf_step(s, y, grad_provider, H, eta, gamma, params, xi=None)
        _check_finite(s, k + 1)
        if (k + 1) in want:
            saved[k + 1] = s.copy()
    return np.array([saved[int(t)] for t in ticks])
