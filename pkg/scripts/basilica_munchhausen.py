"""Scan Basilica measures alpha(a + a^-1) + beta(b + b^-1) and test self-similarity.

Prints the exact trace at the first letter for a few rational alphas, then the
quadratic-field fixed point alpha = (sqrt2 - 1)/2 with its contraction
coefficient, and the entropy sequence of that measure.

    python3 scripts/basilica_munchhausen.py [--N 7]
"""

from __future__ import annotations

import argparse
from fractions import Fraction

from selfsim.catalog import basilica
from selfsim.lab import entropy_sequence
from selfsim.measures import Measure
from selfsim.rwidf import munchhausen_check
from selfsim.weights import Weight


def measure(P, alpha, beta) -> Measure:
    return Measure({P["a"]: alpha, P["a^-1"]: alpha, P["b"]: beta, P["b^-1"]: beta}, P.identity)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--N", type=int, default=7)
    args = ap.parse_args()
    P = basilica()
    names = {P.identity: "e", **{g: n for n, g in P.generators.items()}}
    print("alpha      trace weights (e, a, a^-1, b, b^-1)            self-similar")
    for alpha in [Fraction(k, 20) for k in range(1, 10)]:
        beta = Fraction(1, 2) - alpha
        rep = munchhausen_check(measure(P, alpha, beta))
        w = [str(rep.trace[P.word(x)]) for x in ("e", "a", "a^-1", "b", "b^-1")]
        print(f"{str(alpha):<10} {', '.join(w):<46} {rep.coefficient if rep.self_similar else 'no'}")

    r = Weight.sqrt(2)
    alpha, beta = (r - 1) / 2, (2 - r) / 2
    rep = munchhausen_check(measure(P, alpha, beta))
    print()
    print(f"alpha = {alpha}, beta = {beta}")
    print("trace:", ", ".join(f"{names.get(g, g.code())}: {w}" for g, w in rep.trace.items()))
    print(f"self-similar: {rep.self_similar}, coefficient {rep.coefficient} = {float(rep.coefficient):.12f}")

    ent = entropy_sequence(measure(P, alpha, beta), args.N)
    print()
    print("n  support  H_n        H_n/n      H_n - H_{n-1}")
    for n, (h, s) in enumerate(zip(ent.entropies, ent.support_sizes)):
        per = f"{h / n:.6f}" if n else ""
        diff = f"{h - ent.entropies[n - 1]:.6f}" if n else ""
        print(f"{n:<2} {s:<8} {h:<10.6f} {per:<10} {diff}")
    print(f"subadditive on computed pairs: {ent.subadditive}")


if __name__ == "__main__":
    main()
