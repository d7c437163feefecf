"""Seeded Monte-Carlo BER experiment driver.

Config files are flat `key = value` text with dotted keys; `#` starts a
comment and unknown keys are rejected. Schema:

    code.path           alist file (required)
    channel.kind        awgn | mimo | learned          (default awgn)
    channel.mu          MIMO receive antennas          (mimo)
    channel.nu          MIMO transmit antennas         (mimo)
    channel.model       scorenet checkpoint            (learned)
    channel.candidates  two-column CSV of error points (learned)
    decoder.kind        gf | dgf | du-dgf | bp | bp-tensor | mmse | mmse+bp
    decoder.T           gf horizon                     (default 10.0)
    decoder.N           gf Euler bins                  (default 1000)
    decoder.iters       dgf/du-dgf iterations          (default 100)
    decoder.eta         dgf step; omit on MIMO to use the per-instance omega
    decoder.gamma       penalty weight                 (default 1.0)
    decoder.alpha       potential alpha                (default 1.0)
    decoder.beta        potential beta                 (default 1.0)
    decoder.xi          projection bound               (default 1.5)
    decoder.project     true | false  (default: false for gf, true for dgf)
    decoder.schedule    trained schedule CSV           (du-dgf)
    decoder.max_iter    BP iteration cap               (default 100)
    decoder.x0          zero | random:<std>            (default zero)
    snr.points          comma-separated dB values (required)
    snr.mode            ebn0_db (awgn) | snr_db (mimo); defaults per channel
    budget.max_blocks   block cap per point            (default 20000)
    budget.target_errors  stop once this many bit errors (default 200)
    seed                RNG seed                       (default 0)
    output.path         CSV destination (optional; CLI --out overrides)
    output.timing       true | false (default false). Timing off writes
                        wall_time_s as 0.0 so identical (config, seed) runs
                        emit byte-identical CSVs.
    threads             worker threads for per-trial decoders (default 1)

Every trial draws from its own substream keyed by (seed, point, trial), so
results are independent of chunking and thread count. A decode that
diverges is counted as a fully-errored block and the sweep continues.

Cost model (thread parallelism on accelerator-style hardware): one
gradient-decoder iteration over a batch of D states is dominated by the
check-product pass, m*D independent O(n) reductions, so it occupies m*D
threads of O(n) work. The tensor-form BP baseline multiplies by the e x e
edge Grams instead: e*D threads of O(e) work. With e > n > m for any LDPC
code, the gradient decoder is the lighter kernel per iteration; the batched
numpy paths here mirror that structure (everything vectorizes across the
batch axis, nothing reduces over it).
"""

import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from . import bp as bp_mod
from .channels import AwgnChannel, MimoChannel, snr_convert
from .decoder import DecoderSchedule, dgf_decode
from .ldpc import gf2_nullspace, parse_alist, random_codeword, sign_decision
from .score import (
    LearnedChannel,
    SegmentedChannelSpec,
    correlated2d_sampler,
    load_candidates,
    load_scorenet,
)


class ConfigError(ValueError):
    def __init__(self, key, message):
        self.key = key
        super().__init__(f"config '{key}': {message}")


def _parse_bool(s):
    if s.lower() in ("true", "1", "yes"):
        return True
    if s.lower() in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {s!r}")


def _parse_float_list(s):
    return [float(v) for v in s.split(",") if v.strip()]


# key -> (attribute, parser)
_SCHEMA = {
    "code.path": ("code_path", str),
    "channel.kind": ("channel_kind", str),
    "channel.mu": ("channel_mu", int),
    "channel.nu": ("channel_nu", int),
    "channel.model": ("channel_model", str),
    "channel.candidates": ("channel_candidates", str),
    "decoder.kind": ("decoder_kind", str),
    "decoder.T": ("decoder_T", float),
    "decoder.N": ("decoder_N", int),
    "decoder.iters": ("decoder_iters", int),
    "decoder.eta": ("decoder_eta", float),
    "decoder.gamma": ("decoder_gamma", float),
    "decoder.alpha": ("decoder_alpha", float),
    "decoder.beta": ("decoder_beta", float),
    "decoder.xi": ("decoder_xi", float),
    "decoder.project": ("decoder_project", _parse_bool),
    "decoder.schedule": ("decoder_schedule", str),
    "decoder.max_iter": ("decoder_max_iter", int),
    "decoder.x0": ("decoder_x0", str),
    "snr.points": ("snr_points", _parse_float_list),
    "snr.mode": ("snr_mode", str),
    "budget.max_blocks": ("max_blocks", int),
    "budget.target_errors": ("target_errors", int),
    "seed": ("seed", int),
    "output.path": ("out_path", str),
    "output.timing": ("timing", _parse_bool),
    "threads": ("threads", int),
    # train-score / train-unfold keys (used by the CLI trainers)
    "channel.dump": ("channel_dump", str),
    "score.candidates": ("score_candidates", str),
    "score.width": ("score_width", int),
    "score.hidden": ("score_hidden", int),
    "score.batch": ("score_batch", int),
    "score.iters": ("score_iters", int),
    "score.lr": ("score_lr", float),
    "score.sigma": ("score_sigma", float),
    "unfold.depth": ("unfold_depth", int),
    "unfold.batch": ("unfold_batch", int),
    "unfold.iters": ("unfold_iters", int),
    "unfold.lr": ("unfold_lr", float),
    "unfold.incremental": ("unfold_incremental", _parse_bool),
    "unfold.trainable": ("unfold_trainable", str),
    "unfold.soft_project": ("unfold_soft_project", _parse_bool),
}

_CHANNEL_KINDS = ("awgn", "mimo", "learned")
_DECODER_KINDS = ("gf", "dgf", "du-dgf", "bp", "bp-tensor", "mmse", "mmse+bp")


@dataclass
class ExperimentConfig:
    code_path: str = ""
    channel_kind: str = "awgn"
    channel_mu: int | None = None
    channel_nu: int | None = None
    channel_model: str | None = None
    channel_candidates: str | None = None
    decoder_kind: str = "dgf"
    decoder_T: float = 10.0
    decoder_N: int = 1000
    decoder_iters: int = 100
    decoder_eta: float | None = None
    decoder_gamma: float = 1.0
    decoder_alpha: float = 1.0
    decoder_beta: float = 1.0
    decoder_xi: float = 1.5
    decoder_project: bool | None = None
    decoder_schedule: str | None = None
    decoder_max_iter: int = 100
    decoder_x0: str = "zero"
    snr_points: list = field(default_factory=list)
    snr_mode: str | None = None
    max_blocks: int = 20000
    target_errors: int = 200
    seed: int = 0
    out_path: str | None = None
    timing: bool = False
    threads: int = 1
    channel_dump: str | None = None
    score_candidates: str | None = None
    score_width: int = 2
    score_hidden: int = 64
    score_batch: int = 100
    score_iters: int = 10_000
    score_lr: float = 0.005
    score_sigma: float = 0.3
    unfold_depth: int = 50
    unfold_batch: int = 16
    unfold_iters: int = 200
    unfold_lr: float = 0.02
    unfold_incremental: bool = True
    unfold_trainable: str = "eta,gamma,alpha,beta"
    unfold_soft_project: bool = False

    def validate(self, purpose="ber"):
        if self.channel_kind not in _CHANNEL_KINDS:
            raise ConfigError("channel.kind", f"must be one of {_CHANNEL_KINDS}")
        if self.decoder_kind not in _DECODER_KINDS:
            raise ConfigError("decoder.kind", f"must be one of {_DECODER_KINDS}")
        if purpose == "train-score":
            if not self.score_candidates:
                raise ConfigError("score.candidates", "required for train-score")
            if self.score_sigma <= 0 or self.score_batch < 1:
                raise ConfigError("score.sigma", "need sigma > 0 and batch >= 1")
            return self
        if not self.code_path:
            raise ConfigError("code.path", "required")
        if purpose == "inspect":
            return self
        if not self.snr_points:
            raise ConfigError("snr.points", "required and nonempty")
        if purpose == "train-unfold":
            if self.channel_kind == "mimo" and (
                self.channel_mu is None or self.channel_nu is None
            ):
                raise ConfigError("channel.mu", "mimo needs channel.mu and channel.nu")
            return self
        if self.max_blocks < 1 or self.target_errors < 1:
            raise ConfigError("budget.max_blocks", "budgets must be positive")
        if self.channel_kind == "mimo":
            if self.channel_mu is None or self.channel_nu is None:
                raise ConfigError("channel.mu", "mimo needs channel.mu and channel.nu")
        if self.channel_kind == "learned":
            if not self.channel_model or not self.channel_candidates:
                raise ConfigError(
                    "channel.model", "learned channel needs model and candidates"
                )
            if self.decoder_kind not in ("gf", "dgf", "du-dgf"):
                raise ConfigError(
                    "decoder.kind", "learned channel supports gradient decoders only"
                )
        if self.decoder_kind in ("bp", "bp-tensor") and self.channel_kind != "awgn":
            raise ConfigError("decoder.kind", f"{self.decoder_kind} requires awgn")
        if self.decoder_kind in ("mmse", "mmse+bp") and self.channel_kind != "mimo":
            raise ConfigError("decoder.kind", f"{self.decoder_kind} requires mimo")
        if self.decoder_kind == "du-dgf" and not self.decoder_schedule:
            raise ConfigError("decoder.schedule", "du-dgf needs a schedule checkpoint")
        if self.decoder_kind in ("gf", "dgf") and self.channel_kind == "awgn":
            if self.decoder_kind == "dgf" and self.decoder_eta is None:
                raise ConfigError("decoder.eta", "dgf on awgn needs a step size")
        mode = self.effective_snr_mode()
        if self.channel_kind == "awgn" and mode != "ebn0_db":
            raise ConfigError("snr.mode", "awgn uses ebn0_db")
        if self.channel_kind == "mimo" and mode != "snr_db":
            raise ConfigError("snr.mode", "mimo uses snr_db")
        if not self.decoder_x0.startswith(("zero", "random:")):
            raise ConfigError("decoder.x0", "must be 'zero' or 'random:<std>'")
        return self

    def effective_snr_mode(self):
        if self.snr_mode is not None:
            return self.snr_mode
        return "snr_db" if self.channel_kind == "mimo" else "ebn0_db"

    def effective_project(self):
        if self.decoder_project is not None:
            return self.decoder_project
        return self.decoder_kind != "gf"


def parse_config(text, purpose="ber"):
    cfg = ExperimentConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigError(f"line {line_no}", f"expected 'key = value': {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in _SCHEMA:
            raise ConfigError(key, "unknown key")
        attr, parser = _SCHEMA[key]
        try:
            setattr(cfg, attr, parser(value))
        except (ValueError, TypeError) as exc:
            raise ConfigError(key, str(exc)) from None
    return cfg.validate(purpose)


def load_config(path, purpose="ber"):
    with open(path) as f:
        return parse_config(f.read(), purpose)


@dataclass
class BerRecord:
    snr_db: float
    blocks: int
    bits: int
    bit_errors: int
    block_errors: int
    ber: float
    bler: float
    decoder: str
    seed: int
    wall_time_s: float


CSV_HEADER = "snr_db,blocks,bits,bit_errors,block_errors,ber,bler,decoder,seed,wall_time_s"


def emit_csv(records, path):
    """Write records sorted by SNR with the fixed header; floats use repr
    so a CSV reader recovers the exact values."""
    rows = sorted(records, key=lambda r: r.snr_db)
    with open(path, "w") as f:
        f.write(CSV_HEADER + "\n")
        for r in rows:
            f.write(
                f"{float(r.snr_db)!r},{r.blocks},{r.bits},{r.bit_errors},"
                f"{r.block_errors},{float(r.ber)!r},{float(r.bler)!r},{r.decoder},"
                f"{r.seed},{float(r.wall_time_s)!r}\n"
            )


def trial_rng(seed, point_idx, trial_idx):
    """Independent substream for one (SNR point, trial) pair."""
    ss = np.random.SeedSequence(seed, spawn_key=(point_idx, trial_idx))
    return np.random.default_rng(ss)


def _x0_drawer(spec, n):
    if spec == "zero":
        return lambda rng: np.zeros(n)
    std = float(spec.split(":", 1)[1])
    return lambda rng: rng.normal(0.0, std, size=n)


def _gf_schedule(cfg, eta=None):
    if cfg.decoder_kind == "gf":
        return DecoderSchedule.constant(
            cfg.decoder_N, eta=cfg.decoder_T / cfg.decoder_N,
            gamma=cfg.decoder_gamma, alpha=cfg.decoder_alpha,
            beta=cfg.decoder_beta, xi=cfg.decoder_xi,
            project=cfg.effective_project(),
        )
    if cfg.decoder_kind == "du-dgf":
        return DecoderSchedule.from_csv(
            cfg.decoder_schedule, xi=cfg.decoder_xi, project=cfg.effective_project()
        )
    step = cfg.decoder_eta if eta is None else eta
    return DecoderSchedule.constant(
        cfg.decoder_iters, eta=step, gamma=cfg.decoder_gamma,
        alpha=cfg.decoder_alpha, beta=cfg.decoder_beta, xi=cfg.decoder_xi,
        project=cfg.effective_project(),
    )


def _learned_channel(cfg):
    net = load_scorenet(cfg.channel_model)
    points = load_candidates(cfg.channel_candidates)
    return net, points


def _point_runner(cfg, H, basis, point_idx, snr_db):
    """Build a callable mapping an array of trial indices to per-trial bit
    error counts. Gradient decoders on AWGN run as one batched decode; the
    rest decode trial by trial (optionally on a thread pool)."""
    n = H.n
    draw_x0 = _x0_drawer(cfg.decoder_x0, n)
    kind = cfg.decoder_kind

    if cfg.channel_kind == "awgn":
        rate = (H.n - H.m) / H.n
        sigma2 = snr_convert("awgn", snr_db, rate=rate)
        ch = AwgnChannel(sigma2)

        if kind in ("gf", "dgf", "du-dgf"):
            sched = _gf_schedule(cfg)

            def run(trial_indices):
                B = len(trial_indices)
                X = np.empty((n, B))
                Y = np.empty((n, B))
                X0 = np.empty((n, B))
                for t, ti in enumerate(trial_indices):
                    rng = trial_rng(cfg.seed, point_idx, int(ti))
                    X[:, t] = random_codeword(basis, rng)
                    Y[:, t] = ch.transmit(X[:, t], rng)
                    X0[:, t] = draw_x0(rng)
                S, bad = dgf_decode(Y, ch, H, sched, X0, raise_on_divergence=False)
                errs = (sign_decision(S) != X).sum(axis=0)
                errs[bad] = n
                return errs.astype(np.int64)

            return run, 256

        if kind in ("bp", "bp-tensor"):
            ei = bp_mod.build_uv(H) if kind == "bp-tensor" else None

            def one(ti):
                rng = trial_rng(cfg.seed, point_idx, int(ti))
                x = random_codeword(basis, rng)
                y = ch.transmit(x, rng)
                lam = bp_mod.llr_awgn(y, sigma2)
                if kind == "bp":
                    res = bp_mod.bp_decode(lam, H, cfg.decoder_max_iter)
                else:
                    res = bp_mod.bp_tensor_decode(lam, ei, cfg.decoder_max_iter)
                return int((res.word != x).sum())

            return _per_trial(one, cfg.threads), 64
        raise ConfigError("decoder.kind", f"{kind} unsupported on awgn")

    if cfg.channel_kind == "mimo":
        snr_linear = 10.0 ** (snr_db / 10.0)
        mu, nu = cfg.channel_mu, cfg.channel_nu
        sched_fixed = (
            _gf_schedule(cfg) if kind == "du-dgf"
            else (_gf_schedule(cfg) if kind in ("gf", "dgf") and cfg.decoder_eta is not None
                  else None)
        )

        def one(ti):
            rng = trial_rng(cfg.seed, point_idx, int(ti))
            x = random_codeword(basis, rng)
            ch = MimoChannel.sample(mu, nu, snr_linear, rng)
            y = ch.transmit(x, rng)
            if kind == "mmse":
                word = sign_decision(ch.mmse_detect(y))
                return int((word != x).sum())
            if kind == "mmse+bp":
                res = bp_mod.mmse_bp_pipeline(ch, y, H, cfg.decoder_max_iter)
                return int((res.word != x).sum())
            sched = sched_fixed if sched_fixed is not None else _gf_schedule(cfg, eta=ch.omega)
            s, bad = dgf_decode(y, ch, H, sched, draw_x0(rng),
                                raise_on_divergence=False)
            if bad.any():
                return n
            return int((sign_decision(s) != x).sum())

        return _per_trial(one, cfg.threads), 16

    # learned channel
    net, points = _learned_channel(cfg)
    nu = net.width
    if n % nu:
        raise ConfigError("channel.model", f"segment width {nu} does not divide n={n}")
    spec = SegmentedChannelSpec(nu=nu, K=n // nu,
                                error_sampler=correlated2d_sampler(points))
    provider = LearnedChannel(net, spec)
    sched = _gf_schedule(cfg)

    def one(ti):
        rng = trial_rng(cfg.seed, point_idx, int(ti))
        x = random_codeword(basis, rng)
        y = provider.transmit(x, rng)
        s, bad = dgf_decode(y, provider, H, sched, draw_x0(rng),
                            raise_on_divergence=False)
        if bad.any():
            return n
        return int((sign_decision(s) != x).sum())

    return _per_trial(one, cfg.threads), 16


def _per_trial(one, threads):
    if threads <= 1:
        def run(trial_indices):
            return np.array([one(ti) for ti in trial_indices], dtype=np.int64)
    else:
        def run(trial_indices):
            with ThreadPoolExecutor(max_workers=threads) as pool:
                return np.array(list(pool.map(one, trial_indices)), dtype=np.int64)
    return run


def run_point(cfg, H, basis, point_idx, snr_db):
    """Simulate one SNR point under the stopping rule.

    Trials are evaluated in index order and counting stops at the first
    trial where the cumulative bit errors reach the target, so the record
    is independent of chunk size and thread count.
    """
    runner, chunk = _point_runner(cfg, H, basis, point_idx, snr_db)
    n = H.n
    blocks = bit_errors = block_errors = 0
    start = time.perf_counter()
    next_trial = 0
    while blocks < cfg.max_blocks and bit_errors < cfg.target_errors:
        take = min(chunk, cfg.max_blocks - next_trial)
        if take <= 0:
            break
        errs = runner(np.arange(next_trial, next_trial + take))
        next_trial += take
        for e in errs:
            blocks += 1
            bit_errors += int(e)
            block_errors += int(e > 0)
            if bit_errors >= cfg.target_errors or blocks >= cfg.max_blocks:
                break
        else:
            continue
        break
    wall = time.perf_counter() - start if cfg.timing else 0.0
    bits = blocks * n
    return BerRecord(
        snr_db=snr_db, blocks=blocks, bits=bits, bit_errors=bit_errors,
        block_errors=block_errors, ber=bit_errors / bits,
        bler=block_errors / blocks, decoder=cfg.decoder_kind,
        seed=cfg.seed, wall_time_s=wall,
    )


def run_experiment(cfg, quiet=False):
    """Sweep every SNR point, emit CSV when configured, return the records."""
    with open(cfg.code_path) as f:
        H = parse_alist(f.read())
    basis = gf2_nullspace(H)
    records = []
    for point_idx, snr_db in enumerate(cfg.snr_points):
        rec = run_point(cfg, H, basis, point_idx, snr_db)
        records.append(rec)
        if not quiet:
            print(
                f"{cfg.decoder_kind} @ {snr_db:g} dB: ber={rec.ber:.3e} "
                f"bler={rec.bler:.3e} ({rec.bit_errors} errs / {rec.blocks} blocks)"
            )
    if cfg.out_path:
        emit_csv(records, cfg.out_path)
    return records


def batch_decode(decoder, observations, threads=1):
    """Decode a batch of observations; results match per-item decodes exactly.

    `decoder` is any callable y -> decision; items run independently (in a
    thread pool when threads > 1) and results keep the input order.
    """
    items = list(observations)
    if threads <= 1:
        return [decoder(y) for y in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(decoder, items))


def snr_at_ber(records, target_ber):
    """Interpolate the SNR (dB) where a sweep crosses `target_ber`.

    Linear interpolation in (snr, log10 ber) between the bracketing grid
    points; returns None when the sweep never crosses the target.
    """
    pts = sorted(((r.snr_db, r.ber) for r in records), key=lambda p: p[0])
    for (s0, b0), (s1, b1) in zip(pts, pts[1:]):
        if b0 <= 0 or b1 <= 0:
            if b0 > target_ber and b1 <= target_ber:
                return s1
            continue
        if (b0 - target_ber) * (b1 - target_ber) <= 0 and b0 != b1:
            t = (np.log10(target_ber) - np.log10(b0)) / (np.log10(b1) - np.log10(b0))
            return s0 + t * (s1 - s0)
    return None
