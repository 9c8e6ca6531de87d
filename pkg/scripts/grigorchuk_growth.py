"""Ball sizes, growth ratios and Folner ratios of balls for the catalog groups.

    python3 scripts/grigorchuk_growth.py [--N 9]
"""

from __future__ import annotations

import argparse
import math

from selfsim.catalog import basilica, grigorchuk
from selfsim.lab import ElementSet, ball, folner_ratio


def table(P, N):
    B = ball(P, N)
    print(f"{P.name}: n, |B_n|, |B_n|/|B_(n-1)|, log|B_n|/n, |dB_n|/|B_n|")
    prev = None
    for n in range(N + 1):
        A = ElementSet(tuple(g for g, r in zip(B.members, B.radii) if r <= n), P, n)
        ratio = f"{len(A) / prev:.4f}" if prev else ""
        lg = f"{math.log(len(A)) / n:.4f}" if n else ""
        print(f"  {n:<3} {len(A):<7} {ratio:<8} {lg:<8} {float(folner_ratio(A, P)):.4f}")
        prev = len(A)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=9)
    args = ap.parse_args()
    table(grigorchuk(), args.N)
    table(basilica(), min(args.N, 8))


if __name__ == "__main__":
    main()
