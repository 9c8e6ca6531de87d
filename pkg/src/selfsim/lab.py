"""Finite-range amenability diagnostics: balls, growth, Folner sets, Reiter and
tail deficits, entropy of convolution powers, and sampled walks.

Conventions: balls and walks multiply on the right (``g -> g*k``); Folner
boundaries use left Cayley adjacency (``g ~ k*g``).  Nothing here claims a
limit; every report carries only the finite data it computed.

Group arguments follow a small protocol: ``identity`` and
``symmetric_generators()`` returning ``(name, element)`` pairs.  Both
:class:`~selfsim.catalog.GroupPresentation` and :class:`FreeGroup` qualify.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
import numpy as np

from .automata import ElementSet
from .errors import CapExceeded
from .measures import (
    SUPPORT_CAP,
    Measure,
    convolution_power,
    convolution_powers,
    entropy,
    total_variation,
    translate,
)

__all__ = [
    "ElementSet",
    "GrowthReport",
    "EntropyReport",
    "WalkSample",
    "FreeGroup",
    "FreeWord",
    "ball",
    "growth_sequence",
    "interval",
    "boundary",
    "folner_ratio",
    "translation_ratio",
    "reiter_deficit",
    "tail_deficit",
    "entropy_sequence",
    "sample_walk",
    "sample_endpoints",
    "expected_b_blocks",
    "BALL_CAP",
]

BALL_CAP = 1_000_000


# -- a synthetic group with no automata involved ---------------------------------


@dataclass(frozen=True)
class FreeWord:
    """Reduced word in a free group; letters are +-1, +-2, ..."""

    letters: tuple[int, ...] = ()

    def __mul__(self, other: FreeWord) -> FreeWord:
        a, b = list(self.letters), other.letters
        i = 0
        while a and i < len(b) and a[-1] == -b[i]:
            a.pop()
            i += 1
        return FreeWord(tuple(a) + b[i:])

    def inverse(self) -> FreeWord:
        return FreeWord(tuple(-x for x in reversed(self.letters)))

    def __len__(self):
        return len(self.letters)


@dataclass(frozen=True)
class FreeGroup:
    rank: int

    @property
    def identity(self) -> FreeWord:
        return FreeWord()

    def symmetric_generators(self) -> list[tuple[str, FreeWord]]:
        out = []
        for i in range(1, self.rank + 1):
            out.append((f"x{i}", FreeWord((i,))))
            out.append((f"x{i}^-1", FreeWord((-i,))))
        return out


# -- balls and growth --------------------------------------------------------


def ball(P, n: int, cap: int = BALL_CAP) -> ElementSet:
    """Elements of word length at most n, by breadth-first right multiplication."""
    gens = [g for _, g in P.symmetric_generators()]
    e = P.identity
    members, radii = [e], [0]
    seen = {e}
    frontier = [e]
    for r in range(1, n + 1):
        nxt = []
        for g in frontier:
            for k in gens:
                h = g * k
                if h not in seen:
                    seen.add(h)
                    nxt.append(h)
                    members.append(h)
                    radii.append(r)
                    if len(members) > cap:
                        raise CapExceeded(f"ball of radius {r} exceeds {cap} elements")
        frontier = nxt
    return ElementSet(tuple(members), P, n, tuple(radii))


@dataclass(frozen=True)
class GrowthReport:
    sizes: tuple[int, ...]

    @property
    def radii(self) -> range:
        return range(len(self.sizes))

    @property
    def ratios(self) -> list[float]:
        return [b / a for a, b in zip(self.sizes, self.sizes[1:])]

    @property
    def log_growth(self) -> list[float]:
        """log|B_n| / n for n >= 1."""
        return [math.log(s) / n for n, s in enumerate(self.sizes) if n > 0]


def growth_sequence(P, N: int, cap: int = BALL_CAP) -> GrowthReport:
    B = ball(P, N, cap)
    counts = Counter(B.radii)
    sizes, total = [], 0
    for r in range(N + 1):
        total += counts.get(r, 0)
        sizes.append(total)
    return GrowthReport(tuple(sizes))


# -- Folner and Reiter ---------------------------------------------------------


def interval(g, n: int, identity=None) -> ElementSet:
    """{e, g, g^2, ..., g^n}."""
    cur = identity if identity is not None else g * g.inverse()
    members = [cur]
    for _ in range(n):
        cur = cur * g
        members.append(cur)
    return ElementSet(tuple(members), radius=n)


def boundary(A: ElementSet, P) -> ElementSet:
    """Members g of A with some generator k such that k*g lies outside A."""
    gens = [k for _, k in P.symmetric_generators()]
    inside = A.as_set()
    return ElementSet(tuple(g for g in A if any(k * g not in inside for k in gens)), P)


def folner_ratio(A: ElementSet, P) -> Fraction:
    return Fraction(len(boundary(A, P)), len(A))


def translation_ratio(A: ElementSet, g) -> Fraction:
    """|gA symmetric-difference A| / |A|."""
    inside = A.as_set()
    moved = {g * h for h in A}
    return Fraction(len(moved ^ inside), len(A))


def reiter_deficit(mu: Measure, n: int, g, exact: bool = False, cap: int = SUPPORT_CAP):
    """||g mu^{*n} - mu^{*n}||."""
    p = convolution_power(mu, n, cap)
    return total_variation(translate(g, p), p, exact=exact)


def tail_deficit(mu: Measure, n: int, g, exact: bool = False, cap: int = SUPPORT_CAP):
    """||g mu^{*n} - mu^{*(n+1)}||, the quantity in the 0-2 law (g in supp mu)."""
    powers = list(convolution_powers(mu, n + 1, cap))
    return total_variation(translate(g, powers[n]), powers[n + 1], exact=exact)


# -- entropy -----------------------------------------------------------------


@dataclass
class EntropyReport:
    entropies: list[float]
    support_sizes: list[int]
    truncated: bool = False
    tolerance: float = 1e-9
    violations: list[tuple[int, int]] = field(default_factory=list)

    @property
    def differences(self) -> list[float]:
        """H_n - H_{n-1} for n >= 1."""
        h = self.entropies
        return [b - a for a, b in zip(h, h[1:])]

    @property
    def normalized(self) -> list[float]:
        """H_n / n for n >= 1."""
        return [h / n for n, h in enumerate(self.entropies) if n > 0]

    @property
    def subadditive(self) -> bool:
        return not self.violations

    @property
    def status(self) -> str:
        return "inconclusive (support cap reached)" if self.truncated else "complete"


def entropy_sequence(mu: Measure, N: int, cap: int = SUPPORT_CAP, tol: float = 1e-9) -> EntropyReport:
    """H(mu^{*n}) for n = 0..N; stops early (truncated) if the support cap is hit."""
    ent, sizes = [], []
    truncated = False
    try:
        for p in convolution_powers(mu, N, cap):
            ent.append(entropy(p))
            sizes.append(len(p))
    except CapExceeded:
        truncated = True
    violations = [
        (n, m)
        for n in range(1, len(ent))
        for m in range(n, len(ent) - n)
        if ent[n + m] > ent[n] + ent[m] + tol
    ]
    return EntropyReport(ent, sizes, truncated, tol, violations)


# -- sampling ------------------------------------------------------------------

RNG_NAME = "numpy.random.Philox"


def _atoms(mu: Measure):
    def key(item):
        g = item[0]
        return g.code() if hasattr(g, "code") else repr(g)

    items = sorted(mu.items(), key=key)
    elems = [g for g, _ in items]
    probs = np.array([float(w) for _, w in items])
    return elems, np.cumsum(probs / probs.sum())


def _draw(rng, cum: np.ndarray, size) -> np.ndarray:
    idx = np.searchsorted(cum, rng.random(size), side="right")
    return np.minimum(idx, len(cum) - 1)


@dataclass(frozen=True)
class WalkSample:
    seed: int
    increments: tuple
    positions: tuple
    rng: str = RNG_NAME

    @property
    def steps(self) -> int:
        return len(self.increments)


def sample_walk(mu: Measure, steps: int, seed: int) -> WalkSample:
    """One path g_0 = e, g_n = g_{n-1} h_n with h_n ~ mu i.i.d."""
    elems, cum = _atoms(mu)
    rng = np.random.Generator(np.random.Philox(seed))
    draws = _draw(rng, cum, steps)
    incs = tuple(elems[i] for i in draws)
    pos = [mu.identity]
    for h in incs:
        pos.append(pos[-1] * h)
    return WalkSample(seed, incs, tuple(pos))


def sample_endpoints(mu: Measure, steps: int, samples: int, seed: int) -> Counter:
    """Empirical distribution (counts) of g_steps over independent walks."""
    elems, cum = _atoms(mu)
    rng = np.random.Generator(np.random.Philox(seed))
    draws = _draw(rng, cum, (samples, steps))
    # positions are interned as small integers so each product is formed once
    table = [mu.identity]
    index = {mu.identity: 0}
    pos = np.zeros(samples, dtype=np.int64)
    for n in range(steps):
        pairs = pos * len(elems) + draws[:, n]
        uniq, inv = np.unique(pairs, return_inverse=True)
        new_ids = np.empty(len(uniq), dtype=np.int64)
        for j, code in enumerate(uniq):
            g = table[code // len(elems)] * elems[code % len(elems)]
            if g not in index:
                index[g] = len(table)
                table.append(g)
            new_ids[j] = index[g]
        pos = new_ids[inv]
    ids, counts = np.unique(pos, return_counts=True)
    return Counter({table[i]: int(c) for i, c in zip(ids, counts)})


# -- Mother-group bookkeeping ------------------------------------------------------


def expected_b_blocks(d: int, n: int) -> Fraction:
    """Expected number of maximal runs of B in an i.i.d. A/B word of length n, P(B) = 1/d.

    In the n-th power of ((d-1)/d) m_A + (1/d) m_B each such run collapses to
    one m_B factor (m_B is idempotent), so this counts the surviving copies.
    """
    if n == 0:
        return Fraction(0)
    p = Fraction(1, d)
    return p + (n - 1) * p * (1 - p)
