"""Joint MIMO detection and decoding with the discretized gradient flow.

One 102x102-antenna channel per block (equivalent real model, QPSK ->
BPSK), comparing three receivers at a couple of SNR points:

  mmse     plain MMSE detection, no coding gain
  mmse+bp  MMSE detection followed by 100 BP iterations
  dgf      gradient-flow decoding directly on the channel objective,
           step size 2/(lmin+lmax) per instance, 100 iterations

The gradient decoder beats the detect-then-decode pipeline because the
channel term and the code penalty descend together.
"""

from pathlib import Path

from gfdecode.harness import parse_config, run_experiment

CODE = Path(__file__).resolve().parent.parent / "src/gfdecode/codes/reg_3_6_n204.alist"

BASE = f"""
code.path = {CODE}
channel.kind = mimo
channel.mu = 102
channel.nu = 102
snr.points = 6,8
budget.max_blocks = 400
budget.target_errors = 100
seed = 2
"""

for kind, extra in (
    ("mmse", ""),
    ("mmse+bp", "decoder.max_iter = 100\n"),
    ("dgf", "decoder.iters = 100\ndecoder.gamma = 6.0\ndecoder.beta = 2.0\n"
            "decoder.xi = 1.1\n"),
):
    cfg = parse_config(BASE + f"decoder.kind = {kind}\n" + extra)
    print(f"== {kind} ==")
    run_experiment(cfg)
    print()
