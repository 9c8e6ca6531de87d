"""Lift m_A * m_B on the Mother group, check the row structure and the projection.

    python3 scripts/mother_group.py [--d 3] [--N 3]
"""

from __future__ import annotations

import argparse
import time
from fractions import Fraction

from selfsim.catalog import mother_group
from selfsim.lab import entropy_sequence, expected_b_blocks
from selfsim.measures import convolve, uniform
from selfsim.rwidf import augment, lift_measure, row_projection


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--d", type=int, default=3)
    ap.add_argument("--N", type=int, default=3)
    args = ap.parse_args()
    d = args.d
    t0 = time.perf_counter()
    P = mother_group(d)
    A, B = P.family("A"), P.family("B")
    mA, mB = uniform(A, P.identity), uniform(B, P.identity)
    mu = convolve(mA, mB)
    M = lift_measure(mu)
    print(f"d = {d}: |A| = {len(A)}, |B| = {len(B)}, |supp mA*mB| = {len(mu)}")
    same = all(M.row(x) == M.row(0) for x in range(d))
    print(f"all rows identical: {same}")
    for y in range(d):
        target = (mB if y == 0 else mA).scale(Fraction(1, d))
        print(f"  column {y}: equals {'mB' if y == 0 else 'mA'}/{d}: {M[0, y] == target}")
    proj = row_projection(M)
    mix = mA.scale(Fraction(d - 1, d)) + mB.scale(Fraction(1, d))
    print(f"row projection = ({d - 1}/{d}) mA + (1/{d}) mB: {proj == mix}")
    print(f"quotient chain doubly stochastic: {augment(M).is_doubly_stochastic()}")
    print(f"({time.perf_counter() - t0:.2f}s)")
    print()
    ent = entropy_sequence(proj, args.N, cap=2_000_000)
    print("n  support  H(proj^n)   E[surviving mB factors]")
    for n, (h, s) in enumerate(zip(ent.entropies, ent.support_sizes)):
        print(f"{n:<2} {s:<8} {h:<11.6f} {expected_b_blocks(d, n)}")
    print(f"status: {ent.status}")


if __name__ == "__main__":
    main()
