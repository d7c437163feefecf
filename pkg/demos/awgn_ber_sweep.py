"""Small AWGN BER sweep: gradient-flow decoding vs belief propagation.

A scaled-down version of the rate-1/2 (3,6)-regular experiment: both
decoders sweep the same Eb/N0 grid under the same seeds and the CSVs land
next to this script. Expect the GF curve to trail BP by roughly 2 dB.
Runtime is a couple of minutes; raise the budgets for smoother curves.
"""

from pathlib import Path

from gfdecode.harness import parse_config, run_experiment, snr_at_ber

CODE = Path(__file__).resolve().parent.parent / "src/gfdecode/codes/reg_3_6_n204.alist"
OUT = Path(__file__).resolve().parent

BASE = f"""
code.path = {CODE}
snr.points = 2,3,4,5
budget.max_blocks = 2000
budget.target_errors = 100
seed = 1
"""

gf_cfg = parse_config(BASE + """
decoder.kind = gf
decoder.T = 10.0
decoder.N = 1000
decoder.gamma = 1.0
decoder.alpha = 1.0
decoder.beta = 2.0
output.path = %s
""" % (OUT / "awgn_gf.csv"))

bp_cfg = parse_config(BASE + """
decoder.kind = bp
decoder.max_iter = 100
output.path = %s
""" % (OUT / "awgn_bp.csv"))

print("== gradient-flow decoding (Euler T=10, N=1000, alpha=1, beta=2) ==")
gf = run_experiment(gf_cfg)
print("\n== belief propagation (100 iterations) ==")
bp = run_experiment(bp_cfg)

gf_at = snr_at_ber(gf, 1e-2)
bp_at = snr_at_ber(bp, 1e-2)
if gf_at and bp_at:
    print(f"\nEb/N0 at BER 1e-2: GF {gf_at:.2f} dB, BP {bp_at:.2f} dB "
          f"(gap {gf_at - bp_at:.2f} dB)")
print(f"CSV written to {OUT / 'awgn_gf.csv'} and {OUT / 'awgn_bp.csv'}")
