"""Command-line front end.

Subcommands:
    ber           run a Monte-Carlo BER sweep from a config file
    decode        decode one received word read from a text file
    train-score   denoising score-matching training -> model checkpoint
    train-unfold  deep-unfolding schedule training -> schedule CSV
    inspect-code  print n, m, edge count and degree profile of a code

Exit codes: 0 success, 2 configuration error, 3 I/O error.
"""

import argparse
import sys

import numpy as np

from . import bp as bp_mod
from .channels import AwgnChannel, MimoChannel, load_channel, snr_convert
from .decoder import dgf_decode
from .harness import (
    ConfigError,
    _gf_schedule,
    _x0_drawer,
    load_config,
    run_experiment,
)
from .ldpc import AlistParseError, bipolar_to_bits, parse_alist, sign_decision
from .score import (
    LearnedChannel,
    ScoreNet,
    SegmentedChannelSpec,
    TrainConfig,
    correlated2d_sampler,
    load_candidates,
    load_scorenet,
    save_scorenet,
    train_score,
)
from .unfolding import (
    SampleGenerator,
    UnfoldedModel,
    UnfoldTrainConfig,
    train_unfolded,
)
from .decoder import DecoderSchedule
from .ldpc import gf2_nullspace, random_codeword


def _load_code(path):
    with open(path) as f:
        return parse_alist(f.read())


def cmd_ber(args):
    cfg = load_config(args.config)
    if args.seed is not None:
        cfg.seed = args.seed
    if args.out is not None:
        cfg.out_path = args.out
    if args.threads is not None:
        cfg.threads = args.threads
    run_experiment(cfg)
    return 0


def cmd_decode(args):
    cfg = load_config(args.config, purpose="decode")
    H = _load_code(cfg.code_path)
    y = np.loadtxt(args.received).ravel()
    snr = cfg.snr_points[0]
    kind = cfg.decoder_kind

    if cfg.channel_kind == "awgn":
        rate = (H.n - H.m) / H.n
        provider = AwgnChannel(snr_convert("awgn", snr, rate=rate))
    elif cfg.channel_kind == "mimo":
        if not cfg.channel_dump:
            raise ConfigError("channel.dump", "mimo decode needs a saved channel")
        provider = load_channel(cfg.channel_dump)
    else:
        net = load_scorenet(cfg.channel_model)
        spec = SegmentedChannelSpec(
            nu=net.width, K=H.n // net.width,
            error_sampler=correlated2d_sampler(load_candidates(cfg.channel_candidates)),
        )
        provider = LearnedChannel(net, spec)

    if kind in ("gf", "dgf", "du-dgf"):
        eta = None
        if cfg.channel_kind == "mimo" and cfg.decoder_eta is None and kind == "dgf":
            eta = provider.omega
        sched = _gf_schedule(cfg, eta=eta)
        x0 = _x0_drawer(cfg.decoder_x0, H.n)(np.random.default_rng(cfg.seed))
        s, bad = dgf_decode(y, provider, H, sched, x0, raise_on_divergence=False)
        if bad.any():
            print("decode diverged", file=sys.stderr)
            return 1
        word = sign_decision(s)
    elif kind == "bp":
        word = bp_mod.bp_decode(provider.llr(y), H, cfg.decoder_max_iter).word
    elif kind == "bp-tensor":
        ei = bp_mod.build_uv(H)
        word = bp_mod.bp_tensor_decode(provider.llr(y), ei, cfg.decoder_max_iter).word
    elif kind == "mmse":
        word = sign_decision(provider.mmse_detect(y))
    elif kind == "mmse+bp":
        word = bp_mod.mmse_bp_pipeline(provider, y, H, cfg.decoder_max_iter).word
    else:
        raise ConfigError("decoder.kind", f"unsupported decoder {kind}")

    bits = " ".join(str(int(b)) for b in bipolar_to_bits(word))
    if args.out:
        with open(args.out, "w") as f:
            f.write(bits + "\n")
    else:
        print(bits)
    return 0


def cmd_train_score(args):
    cfg = load_config(args.config, purpose="train-score")
    if args.seed is not None:
        cfg.seed = args.seed
    points = load_candidates(cfg.score_candidates)
    rng = np.random.default_rng(cfg.seed)
    net = ScoreNet.init(cfg.score_width, hidden=cfg.score_hidden, rng=rng)
    spec = SegmentedChannelSpec(nu=cfg.score_width, K=1,
                                error_sampler=correlated2d_sampler(points))
    tc = TrainConfig(batch=cfg.score_batch, iterations=cfg.score_iters,
                     sigma=cfg.score_sigma, lr=cfg.score_lr)
    report = train_score(net, spec, tc, rng)
    save_scorenet(report.net, args.out)
    print(f"trained {cfg.score_iters} iterations, "
          f"final loss {report.losses[-1]:.4f}, checkpoint -> {args.out}")
    return 0


def cmd_train_unfold(args):
    cfg = load_config(args.config, purpose="train-unfold")
    if args.seed is not None:
        cfg.seed = args.seed
    H = _load_code(cfg.code_path)
    basis = gf2_nullspace(H)
    rng = np.random.default_rng(cfg.seed)
    snr = cfg.snr_points[0]

    if cfg.channel_kind == "awgn":
        rate = (H.n - H.m) / H.n
        ch = AwgnChannel(snr_convert("awgn", snr, rate=rate))

        def draw(r):
            x = random_codeword(basis, r)
            return x, ch.transmit(x, r), ch

        init_eta = cfg.decoder_eta if cfg.decoder_eta is not None else 0.05
    elif cfg.channel_kind == "mimo":
        snr_linear = 10.0 ** (snr / 10.0)

        def draw(r):
            x = random_codeword(basis, r)
            ch = MimoChannel.sample(cfg.channel_mu, cfg.channel_nu, snr_linear, r)
            return x, ch.transmit(x, r), ch

        if cfg.decoder_eta is not None:
            init_eta = cfg.decoder_eta
        else:
            probe = MimoChannel.sample(cfg.channel_mu, cfg.channel_nu, snr_linear,
                                       np.random.default_rng(cfg.seed + 1))
            init_eta = probe.omega
    else:
        raise ConfigError("channel.kind", "train-unfold supports awgn and mimo")

    base = DecoderSchedule.constant(
        cfg.unfold_depth, eta=init_eta, gamma=cfg.decoder_gamma,
        alpha=cfg.decoder_alpha, beta=cfg.decoder_beta, xi=cfg.decoder_xi,
        project=False,
    )
    trainable = tuple(f.strip() for f in cfg.unfold_trainable.split(",") if f.strip())
    model = UnfoldedModel.from_schedule(base, trainable=trainable,
                                        soft_project=cfg.unfold_soft_project)
    gen = SampleGenerator(H, draw)
    tc = UnfoldTrainConfig(iterations=cfg.unfold_iters, batch=cfg.unfold_batch,
                           lr=cfg.unfold_lr)
    report = train_unfolded(model, gen, tc, rng, incremental=cfg.unfold_incremental)
    report.model.schedule(project=True).to_csv(args.out)
    print(f"trained schedule depth {cfg.unfold_depth}, "
          f"final loss {report.losses[-1]:.4f}, checkpoint -> {args.out}")
    return 0


def cmd_inspect_code(args):
    if args.code:
        path = args.code
    elif args.config:
        path = load_config(args.config, purpose="inspect").code_path
    else:
        raise ConfigError("code.path", "give a code file or --config")
    H = _load_code(path)
    print(f"n = {H.n}")
    print(f"m = {H.m}")
    print(f"e = {H.e}")
    rd = np.bincount(H.row_deg)
    cd = np.bincount(H.col_deg)
    row_prof = ", ".join(f"deg {d}: {c}" for d, c in enumerate(rd) if c)
    col_prof = ", ".join(f"deg {d}: {c}" for d, c in enumerate(cd) if c)
    print(f"row degrees: {row_prof}")
    print(f"col degrees: {col_prof}")
    return 0


def build_parser():
    p = argparse.ArgumentParser(prog="gfdecode",
                                description="gradient-flow LDPC decoding toolkit")
    sub = p.add_subparsers(dest="command", required=True)

    ber = sub.add_parser("ber", help="run a BER sweep")
    ber.add_argument("--config", required=True)
    ber.add_argument("--seed", type=int)
    ber.add_argument("--out")
    ber.add_argument("--threads", type=int)
    ber.set_defaults(func=cmd_ber)

    dec = sub.add_parser("decode", help="decode one received word from a file")
    dec.add_argument("received", help="text file of received samples")
    dec.add_argument("--config", required=True)
    dec.add_argument("--seed", type=int, default=0)
    dec.add_argument("--out")
    dec.set_defaults(func=cmd_decode)

    ts = sub.add_parser("train-score", help="train the segmented score model")
    ts.add_argument("--config", required=True)
    ts.add_argument("--seed", type=int)
    ts.add_argument("--out", required=True)
    ts.set_defaults(func=cmd_train_score)

    tu = sub.add_parser("train-unfold", help="train a deep-unfolded schedule")
    tu.add_argument("--config", required=True)
    tu.add_argument("--seed", type=int)
    tu.add_argument("--out", required=True)
    tu.set_defaults(func=cmd_train_unfold)

    ic = sub.add_parser("inspect-code", help="print code dimensions and degrees")
    ic.add_argument("code", nargs="?")
    ic.add_argument("--config")
    ic.set_defaults(func=cmd_inspect_code)
    return p


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, AlistParseError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return 3


if __name__ == "__main__":
    sys.exit(main())
