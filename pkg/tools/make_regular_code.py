"""Generate the (dv, dc)-regular LDPC fixture codes shipped under codes/.

Progressive column filling with pair-reuse rejection keeps the girth at 6
or above (no two checks share two variables); seeds are retried until the
parity-check matrix also has full GF(2) row rank, so the design rate is
exactly (n - m)/n.

Run from the repo root:  python tools/make_regular_code.py
"""

import sys
from pathlib import Path

import numpy as np

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

from gfdecode.ldpc import ParityCheckMatrix, gf2_rank, write_alist


def make_regular(m, n, dv, dc, seed, max_tries=400):
    assert n * dv == m * dc, "degree bookkeeping must balance"
    rng = np.random.default_rng(seed)
    for _ in range(max_tries):
        capacity = np.full(m, dc)
        used_pairs = set()
        cols = []
        ok = True
        for _ in range(n):
            placed = None
            for _ in range(200):
                avail = np.flatnonzero(capacity > 0)
                if len(avail) < dv:
                    break
                p = capacity[avail] / capacity[avail].sum()
                pick = rng.choice(avail, size=dv, replace=False, p=p)
                pairs = {(a, b) for i, a in enumerate(pick) for b in pick[i + 1:]}
                pairs = {(min(a, b), max(a, b)) for a, b in pairs}
                if pairs & used_pairs:
                    continue
                placed = np.sort(pick)
                used_pairs |= pairs
                capacity[pick] -= 1
                break
            if placed is None:
                ok = False
                break
            cols.append(placed)
        if not ok:
            continue
        rows = [[] for _ in range(m)]
        for j, picks in enumerate(cols):
            for i in picks:
                rows[i].append(j)
        H = ParityCheckMatrix(m, n, rows)
        if gf2_rank(H) == m:
            return H
    raise RuntimeError("could not build a full-rank girth-6 code; try more seeds")


def main():
    out_dir = Path(__file__).resolve().parent.parent / "src" / "gfdecode" / "codes"
    out_dir.mkdir(parents=True, exist_ok=True)

    H = make_regular(m=102, n=204, dv=3, dc=6, seed=20240913)
    (out_dir / "reg_3_6_n204.alist").write_text(write_alist(H))
    print(f"reg_3_6_n204: {H}, rank full, girth>=6")

    H2 = make_regular(m=24, n=48, dv=3, dc=6, seed=7)
    (out_dir / "reg_3_6_n48.alist").write_text(write_alist(H2))
    print(f"reg_3_6_n48: {H2}, rank full, girth>=6")


if __name__ == "__main__":
    main()
