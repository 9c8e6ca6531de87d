"""Finitely supported measures with exact weights on a group.

Atoms are hashable group elements supporting ``g * h`` and ``g.inverse()``;
canonical :class:`~selfsim.automata.Element` objects are the main case, but
any group with hashable normal forms works (see :mod:`selfsim.lab` for a
free group used in tests).  Each measure remembers the identity of its group.
"""

from __future__ import annotations

import math
from math import comb
from typing import Iterable, Sequence

from .errors import AlphabetMismatch, CapExceeded, PreconditionError
from .weights import Weight

__all__ = [
    "Measure",
    "delta",
    "uniform",
    "convolve",
    "convolution_power",
    "convolution_powers",
    "convex_combine",
    "total_variation",
    "translate",
    "entropy",
    "self_similar_decomposition",
    "binomial_mixture",
    "SUPPORT_CAP",
]

SUPPORT_CAP = 5_000_000


class Measure:
    """A map from group elements to positive exact weights.

    Zero weights are dropped; negative weights are rejected.  The total mass
    is not bounded here (the Green kernel of a substochastic block has mass
    above one); probability is checked where it matters.
    """

    __slots__ = ("weights", "identity")

    def __init__(self, weights: dict, identity):
        clean = {}
        for g, w in weights.items():
            w = Weight.coerce(w)
            s = w.sign()
            if s < 0:
                raise ValueError(f"negative weight {w} at {g!r}")
            if s > 0:
                clean[g] = w
        self.weights = clean
        self.identity = identity

    @classmethod
    def zero(cls, identity) -> Measure:
        return cls({}, identity)

    # -- mapping protocol ----------------------------------------------------

    def __getitem__(self, g) -> Weight:
        return self.weights.get(g, Weight(0))

    def __contains__(self, g):
        return g in self.weights

    def __iter__(self):
        return iter(self.weights)

    def __len__(self):
        return len(self.weights)

    def items(self):
        return self.weights.items()

    @property
    def support(self) -> frozenset:
        return frozenset(self.weights)

    @property
    def alphabet(self):
        return getattr(self.identity, "alphabet", None)

    def mass(self) -> Weight:
        return sum(self.weights.values(), Weight(0))

    def is_probability(self) -> bool:
        return self.mass() == 1

    # -- linear structure --------------------------------------------------------

    def _same_group(self, other: Measure):
        if self.identity != other.identity:
            raise AlphabetMismatch("measures live on different groups")

    def __add__(self, other: Measure) -> Measure:
        if not isinstance(other, Measure):
            return NotImplemented
        self._same_group(other)
        out = dict(self.weights)
        for g, w in other.weights.items():
            out[g] = out[g] + w if g in out else w
        return Measure(out, self.identity)

    def scale(self, c) -> Measure:
        c = Weight.coerce(c)
        return Measure({g: c * w for g, w in self.weights.items()}, self.identity)

    def __rmul__(self, c):
        if isinstance(c, Measure):
            return NotImplemented
        return self.scale(c)

    def __eq__(self, other):
        if not isinstance(other, Measure):
            return NotImplemented
        return self.identity == other.identity and self.weights == other.weights

    def __hash__(self):
        return hash(frozenset(self.weights.items()))

    def __repr__(self):
        return f"Measure({len(self.weights)} atoms, mass={self.mass()})"


def delta(g, identity=None) -> Measure:
    if identity is None:
        identity = _identity_of(g)
    return Measure({g: Weight(1)}, identity)


def uniform(elements: Iterable, identity=None) -> Measure:
    elements = list(dict.fromkeys(elements))
    if not elements:
        raise ValueError("uniform measure on an empty set")
    if identity is None:
        identity = _identity_of(elements[0])
    w = Weight(1) / len(elements)
    return Measure({g: w for g in elements}, identity)


def _identity_of(g):
    from .automata import Element, identity

    if isinstance(g, Element):
        return identity(g.alphabet)
    ident = getattr(g, "identity", None)
    if ident is None:
        raise TypeError(f"cannot infer the identity for {g!r}; pass identity=")
    return ident() if callable(ident) else ident


def convolve(mu: Measure, nu: Measure, cap: int = SUPPORT_CAP) -> Measure:
    """(mu * nu)(k) = sum over g*h = k of mu(g) nu(h)."""
    mu._same_group(nu)
    out: dict = {}
    for g, wg in mu.weights.items():
        for h, wh in nu.weights.items():
            k = g * h
            w = wg * wh
            if k in out:
                out[k] = out[k] + w
            else:
                out[k] = w
                if len(out) > cap:
                    raise CapExceeded(f"convolution support exceeds the cap of {cap} atoms")
    return Measure(out, mu.identity)


def convolution_powers(mu: Measure, n_max: int, cap: int = SUPPORT_CAP):
    """Yield mu^{*0} = delta_e, mu^{*1}, ..., mu^{*n_max}."""
    current = delta(mu.identity, mu.identity)
    yield current
    for _ in range(n_max):
        current = convolve(current, mu, cap)
        yield current


def convolution_power(mu: Measure, n: int, cap: int = SUPPORT_CAP) -> Measure:
    if n < 0:
        raise ValueError("negative convolution power")
    for current in convolution_powers(mu, n, cap):
        pass
    return current


def convex_combine(weights: Sequence, measures: Sequence[Measure]) -> Measure:
    weights = [Weight.coerce(w) for w in weights]
    if len(weights) != len(measures) or not measures:
        raise ValueError("need one weight per measure")
    if any(w.sign() < 0 for w in weights):
        raise ValueError("convex weights must be non-negative")
    if sum(weights, Weight(0)) != 1:
        raise ValueError("convex weights must sum to 1 exactly")
    out = Measure.zero(measures[0].identity)
    for w, m in zip(weights, measures):
        out = out + m.scale(w)
    return out


def total_variation(mu: Measure, nu: Measure, exact: bool = False):
    """Sum of |mu(k) - nu(k)| over all atoms; a float unless ``exact``."""
    mu._same_group(nu)
    total = Weight(0)
    for k in mu.support | nu.support:
        total = total + abs(mu[k] - nu[k])
    return total if exact else float(total)


def translate(g, mu: Measure) -> Measure:
    """Left translate: (g mu)(k) = mu(g^-1 k)."""
    return Measure({g * h: w for h, w in mu.weights.items()}, mu.identity)


def entropy(mu: Measure) -> float:
    """Shannon entropy in nats."""
    if not mu.is_probability():
        raise PreconditionError(f"entropy needs a probability measure, mass is {mu.mass()}")
    h = 0.0
    for w in mu.weights.values():
        p = float(w)
        h -= p * math.log(p)
    return h


def self_similar_decomposition(mu_prime: Measure, mu: Measure) -> Weight | None:
    """The alpha in (0, 1) with mu' = (1 - alpha) delta_e + alpha mu, if any."""
    mu._same_group(mu_prime)
    e = mu.identity
    k = next((g for g in mu.weights if g != e), None)
    if k is None:
        return None
    alpha = mu_prime[k] / mu[k]
    if not (0 < alpha < 1):
        return None
    target = delta(e, e).scale(1 - alpha) + mu.scale(alpha)
    return alpha if target == mu_prime else None


def binomial_mixture(mu: Measure, alpha, n: int, cap: int = SUPPORT_CAP) -> Measure:
    """sum_k C(n,k) (1-alpha)^(n-k) alpha^k mu^{*k}."""
    alpha = Weight.coerce(alpha)
    out = Measure.zero(mu.identity)
    for k, power in enumerate(convolution_powers(mu, n, cap)):
        c = comb(n, k) * (1 - alpha) ** (n - k) * alpha**k
        out = out + power.scale(c)
    return out
