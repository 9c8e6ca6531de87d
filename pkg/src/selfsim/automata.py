"""Finite-state automorphisms of the rooted tree X*.

An :class:`Element` is an initial state of a finite automaton whose states
carry a root permutation of the alphabet and one section per letter.  The
wreath-recursion conventions are fixed once here and used everywhere:

* ``g`` maps the word ``x w`` to ``perm[x] . g_x(w)``;
* products act on the right, ``apply(g*h, w) == apply(h, apply(g, w))``;
* hence ``perm(g*h) = perm(h) o perm(g)`` and ``(g*h)_x = g_x * h_{perm_g(x)}``,
  which makes ``g -> M^g`` (generalized permutation matrix) a homomorphism
  for the ordinary matrix product.

Canonical elements are trimmed, bisimulation-minimal and numbered breadth
first from the initial state, so structural equality of canonical elements
is equality of automorphisms.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Sequence

import networkx as nx
import numpy as np

from .errors import AlphabetMismatch, LevelSizeError

__all__ = [
    "Alphabet",
    "Automaton",
    "Element",
    "ElementSet",
    "ActivityClass",
    "identity",
    "rooted",
    "from_table",
    "compose",
    "inverse",
    "section",
    "apply",
    "level_permutation",
    "minimize",
    "is_identity",
    "equal",
    "state_set",
    "activity",
    "classify_activity",
    "LEVEL_LIMIT",
]

LEVEL_LIMIT = 2**20


@dataclass(frozen=True)
class Alphabet:
    letters: tuple[str, ...]

    def __post_init__(self):
        if len(self.letters) < 2:
            raise ValueError("an alphabet needs at least two letters")
        if len(set(self.letters)) != len(self.letters):
            raise ValueError(f"repeated letters in {self.letters}")

    @classmethod
    def of_size(cls, d: int, start: int = 0) -> Alphabet:
        return cls(tuple(str(i) for i in range(start, start + d)))

    @property
    def size(self) -> int:
        return len(self.letters)

    def index(self, letter) -> int:
        if isinstance(letter, (int, np.integer)) and not isinstance(letter, bool):
            if not 0 <= letter < self.size:
                raise ValueError(f"letter index {letter} out of range for d = {self.size}")
            return int(letter)
        try:
            return self.letters.index(letter)
        except ValueError:
            raise ValueError(f"unknown letter {letter!r}; alphabet is {self.letters}") from None

    def word(self, w) -> tuple[int, ...]:
        """Letter indices of ``w``: a string of one-character letters or a sequence."""
        if isinstance(w, str):
            if all(len(x) == 1 for x in self.letters):
                return tuple(self.index(c) for c in w)
            return tuple(self.index(c) for c in w.split())
        return tuple(self.index(x) for x in w)

    def format(self, word: Sequence[int]) -> str:
        sep = "" if all(len(x) == 1 for x in self.letters) else " "
        return sep.join(self.letters[i] for i in word)

    def words(self, n: int):
        """All words of length n in lexicographic order (first letter most significant)."""
        if n == 0:
            yield ()
            return
        for head in range(self.size):
            for tail in self.words(n - 1):
                yield (head,) + tail


@dataclass(frozen=True)
class Automaton:
    alphabet: Alphabet
    perms: tuple[tuple[int, ...], ...]
    sections: tuple[tuple[int, ...], ...]
    identity_state: int | None = None

    def __post_init__(self):
        d, n = self.alphabet.size, len(self.perms)
        if len(self.sections) != n:
            raise ValueError("perms and sections must list the same states")
        for s in range(n):
            if sorted(self.perms[s]) != list(range(d)):
                raise ValueError(f"state {s}: {self.perms[s]} is not a permutation of 0..{d - 1}")
            if len(self.sections[s]) != d or not all(0 <= t < n for t in self.sections[s]):
                raise ValueError(f"state {s}: bad section list {self.sections[s]}")
        i = self.identity_state
        if i is not None:
            if self.perms[i] != tuple(range(d)) or any(t != i for t in self.sections[i]):
                raise ValueError(f"declared identity state {i} is not the identity")

    @property
    def num_states(self) -> int:
        return len(self.perms)

    def reachable(self, start: int) -> list[int]:
        """States reachable from ``start``, breadth first in letter order."""
        order, seen = [start], {start}
        queue = deque(order)
        while queue:
            s = queue.popleft()
            for t in self.sections[s]:
                if t not in seen:
                    seen.add(t)
                    order.append(t)
                    queue.append(t)
        return order

    def nontrivial_states(self) -> set[int]:
        """States that are not the identity (some reachable root permutation moves a letter)."""
        ident = tuple(range(self.alphabet.size))
        preds: dict[int, set[int]] = {s: set() for s in range(self.num_states)}
        for s, secs in enumerate(self.sections):
            for t in secs:
                preds[t].add(s)
        bad = {s for s, p in enumerate(self.perms) if p != ident}
        queue = deque(bad)
        while queue:
            t = queue.popleft()
            for s in preds[t]:
                if s not in bad:
                    bad.add(s)
                    queue.append(s)
        return bad


class Element:
    """A tree automorphism: an automaton together with an initial state.

    Equality and hashing are structural.  For canonical elements (the only
    kind produced by the public operations) this is equality of automorphisms.
    """

    __slots__ = ("automaton", "initial", "canonical", "_key", "_hash")

    def __init__(self, automaton: Automaton, initial: int = 0, canonical: bool = False):
        if not 0 <= initial < automaton.num_states:
            raise ValueError(f"initial state {initial} out of range")
        self.automaton = automaton
        self.initial = initial
        self.canonical = canonical
        self._key = (automaton.alphabet.letters, automaton.perms, automaton.sections, initial)
        self._hash = hash(self._key)

    def __eq__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return self._hash == other._hash and self._key == other._key

    def __hash__(self):
        return self._hash

    def __mul__(self, other):
        if not isinstance(other, Element):
            return NotImplemented
        return compose(self, other)

    def __pow__(self, k: int):
        if k < 0:
            return inverse(self) ** (-k)
        result = identity(self.alphabet)
        base = self
        while k:
            if k & 1:
                result = compose(result, base)
            base = compose(base, base)
            k >>= 1
        return result

    def inverse(self) -> Element:
        return inverse(self)

    @property
    def alphabet(self) -> Alphabet:
        return self.automaton.alphabet

    @property
    def degree(self) -> int:
        return self.automaton.alphabet.size

    @property
    def root(self) -> tuple[int, ...]:
        """The permutation of the first level, as an image list."""
        return self.automaton.perms[self.initial]

    @property
    def num_states(self) -> int:
        return len(self.automaton.reachable(self.initial))

    def sections(self) -> tuple[Element, ...]:
        return tuple(section(self, (x,)) for x in range(self.degree))

    def code(self) -> str:
        """Compact structural string, stable across runs (canonical elements only)."""
        g = self if self.canonical else minimize(self)
        a = g.automaton
        return ";".join(
            "".join(map(str, p)) + ":" + ",".join(map(str, s)) for p, s in zip(a.perms, a.sections)
        )

    def __repr__(self):
        tag = "" if self.canonical else ", raw"
        if self.canonical and is_identity(self):
            return f"Element(e, d={self.degree})"
        return f"Element(d={self.degree}, states={self.num_states}, root={self.root}{tag})"


@dataclass(frozen=True)
class ElementSet:
    """A finite set of canonical elements, kept in discovery order.

    ``radii`` optionally records the word length at which each member was
    first reached (ball computations).
    """

    members: tuple[Element, ...]
    presentation: object = None
    radius: int | None = None
    radii: tuple[int, ...] | None = None
    _lookup: frozenset = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "_lookup", frozenset(self.members))
        if len(self._lookup) != len(self.members):
            raise ValueError("ElementSet members must be pairwise distinct")

    def __len__(self):
        return len(self.members)

    def __iter__(self):
        return iter(self.members)

    def __contains__(self, g):
        return g in self._lookup

    def as_set(self) -> frozenset:
        return self._lookup

    def sphere(self, n: int) -> list[Element]:
        if self.radii is None:
            raise ValueError("this set carries no radius data")
        return [g for g, r in zip(self.members, self.radii) if r == n]


# -- constructors ------------------------------------------------------------


def _identity_automaton(alphabet: Alphabet) -> Automaton:
    d = alphabet.size
    return Automaton(alphabet, (tuple(range(d)),), ((0,) * d,), identity_state=0)


@lru_cache(maxsize=None)
def identity(alphabet: Alphabet) -> Element:
    return Element(_identity_automaton(alphabet), 0, canonical=True)


def rooted(alphabet: Alphabet, perm: Sequence[int]) -> Element:
    """The automorphism acting by ``perm`` on the first letter and trivially below."""
    d = alphabet.size
    perm = tuple(int(x) for x in perm)
    if perm == tuple(range(d)):
        return identity(alphabet)
    a = Automaton(alphabet, (perm, tuple(range(d))), ((1,) * d, (1,) * d), identity_state=1)
    return canonicalize(a, 0)


def from_table(alphabet: Alphabet, perms, sections, initial: int = 0) -> Element:
    a = Automaton(
        alphabet,
        tuple(tuple(int(x) for x in p) for p in perms),
        tuple(tuple(int(x) for x in s) for s in sections),
    )
    return canonicalize(a, initial)


# -- canonical form ------------------------------------------------------------


def canonicalize(a: Automaton, initial: int) -> Element:
    """Trim, merge bisimilar states (Moore refinement), renumber breadth first."""
    states = a.reachable(initial)
    perms, secs = a.perms, a.sections
    # Moore partition refinement on the reachable part
    block = {}
    keys: dict = {}
    for s in states:
        block[s] = keys.setdefault(perms[s], len(keys))
    count = len(keys)
    while True:
        keys = {}
        new = {}
        for s in states:
            sig = (block[s], tuple(block[t] for t in secs[s]))
            new[s] = keys.setdefault(sig, len(keys))
        block = new
        if len(keys) == count:
            break
        count = len(keys)
    # breadth-first renumbering of blocks from the initial block
    rep: dict[int, int] = {}
    for s in states:
        rep.setdefault(block[s], s)
    number = {block[initial]: 0}
    order = [block[initial]]
    i = 0
    while i < len(order):
        b = order[i]
        i += 1
        for t in secs[rep[b]]:
            bt = block[t]
            if bt not in number:
                number[bt] = len(order)
                order.append(bt)
    new_perms = tuple(perms[rep[b]] for b in order)
    new_secs = tuple(tuple(number[block[t]] for t in secs[rep[b]]) for b in order)
    ident = tuple(range(a.alphabet.size))
    identity_state = None
    for k, (p, s) in enumerate(zip(new_perms, new_secs)):
        if p == ident and all(t == k for t in s):
            identity_state = k
            break
    aut = Automaton(a.alphabet, new_perms, new_secs, identity_state)
    return Element(aut, 0, canonical=True)


def minimize(g: Element) -> Element:
    if g.canonical:
        return g
    return canonicalize(g.automaton, g.initial)


def _check_alphabets(g: Element, h: Element):
    if g.automaton.alphabet != h.automaton.alphabet:
        raise AlphabetMismatch(
            f"alphabets differ: {g.automaton.alphabet.letters} vs {h.automaton.alphabet.letters}"
        )


# -- group operations ---------------------------------------------------------


def is_identity(g: Element) -> bool:
    a = g.automaton
    if g.canonical:
        return a.identity_state == 0
    ident = tuple(range(a.alphabet.size))
    return all(a.perms[s] == ident for s in a.reachable(g.initial))


def compose(g: Element, h: Element) -> Element:
    """The product ``g*h`` (first ``g``, then ``h``), canonical."""
    _check_alphabets(g, h)
    g, h = minimize(g), minimize(h)
    return _compose(g, h)


@lru_cache(maxsize=1 << 18)
def _compose(g: Element, h: Element) -> Element:
    if g.automaton.identity_state == 0:
        return h
    if h.automaton.identity_state == 0:
        return g
    gp, gs = g.automaton.perms, g.automaton.sections
    hp, hs = h.automaton.perms, h.automaton.sections
    d = g.degree
    index = {(0, 0): 0}
    pairs = [(0, 0)]
    perms, secs = [], []
    i = 0
    while i < len(pairs):
        p, q = pairs[i]
        i += 1
        pp, hq = gp[p], hp[q]
        perms.append(tuple(hq[pp[x]] for x in range(d)))
        row = []
        for x in range(d):
            pair = (gs[p][x], hs[q][pp[x]])
            k = index.get(pair)
            if k is None:
                k = index[pair] = len(pairs)
                pairs.append(pair)
            row.append(k)
        secs.append(tuple(row))
    return canonicalize(Automaton(g.automaton.alphabet, tuple(perms), tuple(secs)), 0)


def inverse(g: Element) -> Element:
    return _inverse(minimize(g))


@lru_cache(maxsize=1 << 16)
def _inverse(g: Element) -> Element:
    a = g.automaton
    d = a.alphabet.size
    perms, secs = [], []
    for p, s in zip(a.perms, a.sections):
        inv = [0] * d
        row = [0] * d
        for x in range(d):
            inv[p[x]] = x
            row[p[x]] = s[x]
        perms.append(tuple(inv))
        secs.append(tuple(row))
    return canonicalize(Automaton(a.alphabet, tuple(perms), tuple(secs)), 0)


def equal(g: Element, h: Element) -> bool:
    _check_alphabets(g, h)
    return is_identity(compose(g, inverse(h)))


def section(g: Element, w) -> Element:
    """The state ``g_w``, via ``g_{xw'} = (g_x)_{w'}``."""
    a = g.automaton
    if isinstance(w, Element):
        raise TypeError("section expects a word")
    s = g.initial
    for x in a.alphabet.word(w):
        s = a.sections[s][x]
    return canonicalize(a, s)


def apply(g: Element, w) -> tuple[int, ...]:
    """Image of the word ``w`` under ``g``, as letter indices."""
    a = g.automaton
    s = g.initial
    out = []
    for x in a.alphabet.word(w):
        out.append(a.perms[s][x])
        s = a.sections[s][x]
    return tuple(out)


def level_permutation(g: Element, n: int, limit: int = LEVEL_LIMIT) -> np.ndarray:
    """Permutation of the level X^n induced by ``g``.

    Returned as an array ``p`` with ``p[i]`` the index of the image of the
    i-th word in lexicographic order (first letter most significant).
    """
    a = g.automaton
    d = a.alphabet.size
    if n < 0:
        raise ValueError("level must be non-negative")
    if d**n > limit:
        raise LevelSizeError(f"level {n} has {d}**{n} points, above the limit {limit}")
    states = a.reachable(g.initial)
    cur = {s: np.zeros(1, dtype=np.int64) for s in states}
    for k in range(1, n + 1):
        block = d ** (k - 1)
        nxt = {}
        for s in states:
            out = np.empty(d * block, dtype=np.int64)
            for x in range(d):
                out[x * block : (x + 1) * block] = a.perms[s][x] * block + cur[a.sections[s][x]]
            nxt[s] = out
        cur = nxt
    return cur[g.initial]


def state_set(g: Element) -> ElementSet:
    """All sections ``g_w``; the reachable states of the canonical automaton."""
    g = minimize(g)
    return ElementSet(tuple(canonicalize(g.automaton, s) for s in range(g.automaton.num_states)))


def activity(g: Element, n: int) -> int:
    """Number of words w of length n with ``g_w`` nontrivial (path counting)."""
    a = g.automaton
    bad = a.nontrivial_states()
    counts = {g.initial: 1}
    for _ in range(n):
        nxt: dict[int, int] = {}
        for s, c in counts.items():
            if s not in bad:
                continue
            for t in a.sections[s]:
                nxt[t] = nxt.get(t, 0) + c
        counts = nxt
    return sum(c for s, c in counts.items() if s in bad)


@dataclass(frozen=True)
class ActivityClass:
    """Growth type of ``n -> activity(g, n)``; ``degree`` is set for bounded/polynomial."""

    kind: str
    degree: int | None = None

    @property
    def is_bounded(self) -> bool:
        return self.kind in ("finitary", "bounded")

    def __str__(self):
        if self.kind == "polynomial":
            return f"polynomial({self.degree})"
        return self.kind


def classify_activity(g: Element) -> ActivityClass:
    """Decide the activity growth from the cycle structure of the automaton.

    Only states that are nontrivial and reachable from the initial state
    matter.  Two distinct cycles through one state give exponential growth;
    otherwise the degree is the largest number of cycles a path from the
    initial state can pass through, minus one.
    """
    a = g.automaton
    bad = a.nontrivial_states()
    if g.initial not in bad:
        return ActivityClass("finitary")
    graph = nx.MultiDiGraph()
    for s in a.reachable(g.initial):
        if s in bad:
            graph.add_node(s)
            for t in a.sections[s]:
                if t in bad:
                    graph.add_edge(s, t)
    cond = nx.condensation(graph)
    cyclic = {}
    for c in cond.nodes:
        members = cond.nodes[c]["members"]
        inner = graph.subgraph(members).number_of_edges()
        if inner > len(members):
            return ActivityClass("exponential")
        cyclic[c] = 1 if inner == len(members) else 0
    start = cond.graph["mapping"][g.initial]
    best: dict = {}
    for c in reversed(list(nx.topological_sort(cond))):
        best[c] = cyclic[c] + max((best[t] for t in cond.successors(c)), default=0)
    cycles = best[start]
    if cycles == 0:
        return ActivityClass("finitary")
    if cycles == 1:
        return ActivityClass("bounded", 0)
    return ActivityClass("polynomial", cycles - 1)
