"""Named self-similar groups and a plain-text automaton presentation format.

Presentation files are line oriented::

    # Basilica group
    alphabet: 2
    letters: 1, 2
    state a: perm=1,2 sections=b,e
    state b: perm=2,1 sections=a,e
    state e: perm=1,2 sections=e,e
    generators: a, b

``perm`` lists the images of the letters (in letter order) and ``sections``
the state reached after each letter.  ``generators`` names initial states;
``name=state`` renames.  Optional lines: ``letters:`` (default ``0..d-1``),
``family <name>: gen, gen, ...`` for named generator subsets, and
``closed-under-inverses: yes|no`` (computed when absent).  ``#`` starts a
comment.
"""

from __future__ import annotations

import itertools
import math
import re
from dataclasses import dataclass, field

from .automata import (
    Alphabet,
    Automaton,
    Element,
    canonicalize,
    equal,
    identity,
    inverse,
    is_identity,
    rooted,
)
from .errors import CapExceeded, ConfigError

__all__ = [
    "GroupPresentation",
    "from_recursion",
    "adding_machine",
    "basilica",
    "grigorchuk",
    "mother_group",
    "cycle_notation",
    "parse_presentation",
    "format_presentation",
    "BUILTINS",
    "builtin",
]


@dataclass
class GroupPresentation:
    alphabet: Alphabet
    generators: dict[str, Element]
    closed_under_inverses: bool = False
    families: dict[str, tuple[str, ...]] = field(default_factory=dict)
    name: str = ""

    def __post_init__(self):
        for n, g in self.generators.items():
            if g.alphabet != self.alphabet:
                raise ValueError(f"generator {n} lives on a different alphabet")
        for fam, names in self.families.items():
            missing = [n for n in names if n not in self.generators]
            if missing:
                raise ValueError(f"family {fam} names unknown generators {missing}")

    @property
    def identity(self) -> Element:
        return identity(self.alphabet)

    def __getitem__(self, name: str) -> Element:
        return self.generators[name]

    def symmetric_generators(self) -> list[tuple[str, Element]]:
        """Generators plus the inverses not already present, in a fixed order."""
        gens = list(self.generators.items())
        if self.closed_under_inverses:
            return gens
        have = {g for _, g in gens}
        out = list(gens)
        for n, g in gens:
            gi = inverse(g)
            if gi not in have:
                have.add(gi)
                out.append((f"{n}^-1", gi))
        return out

    def family(self, name: str) -> list[Element]:
        return [self.generators[n] for n in self.families[name]]

    def word(self, text: str) -> Element:
        """Evaluate a product of generator names, e.g. ``"a*b^-1*a"``; ``e`` is the identity."""
        g = self.identity
        for token in _split_word(text):
            g = g * self.letter(token)
        return g

    def letter(self, token: str) -> Element:
        if token in self.generators:
            return self.generators[token]
        if token in ("e", "1"):
            return self.identity
        if token.endswith("^-1") and token[:-3] in self.generators:
            return inverse(self.generators[token[:-3]])
        raise KeyError(f"unknown generator {token!r}; have {sorted(self.generators)}")

    def check_closed_under_inverses(self) -> bool:
        gens = set(self.generators.values())
        return all(inverse(g) in gens for g in gens)


def _split_word(text: str) -> list[str]:
    text = text.strip()
    if not text:
        return []
    return [t for t in re.split(r"\s*\*\s*|\s+", text) if t]


def from_recursion(alphabet: Alphabet, table: dict) -> dict[str, Element]:
    """Build elements from a wreath recursion.

    ``table[name] = (perm, sections)`` with ``perm`` a list of letter images
    (indices) and ``sections`` a list of names from the table, or ``"e"``.
    """
    names = list(table)
    index = {n: i for i, n in enumerate(names)}
    e_state = len(names)
    d = alphabet.size
    perms, secs = [], []
    for n in names:
        perm, sec = table[n]
        perms.append(tuple(perm))
        secs.append(tuple(e_state if s in ("e", "1") else index[s] for s in sec))
    perms.append(tuple(range(d)))
    secs.append((e_state,) * d)
    aut = Automaton(alphabet, tuple(perms), tuple(secs), identity_state=e_state)
    return {n: canonicalize(aut, index[n]) for n in names}


def _with_inverses(gens: dict[str, Element]) -> dict[str, Element]:
    out = dict(gens)
    for n, g in gens.items():
        out[f"{n}^-1"] = inverse(g)
    return out


def adding_machine() -> GroupPresentation:
    """The binary odometer ``a = (0 1; a 0)``: ``a_0 = e``, ``a_1 = a``."""
    alpha = Alphabet(("0", "1"))
    gens = from_recursion(alpha, {"a": ((1, 0), ("e", "a"))})
    return GroupPresentation(alpha, gens, closed_under_inverses=False, name="adding-machine")


def basilica() -> GroupPresentation:
    alpha = Alphabet(("1", "2"))
    gens = from_recursion(alpha, {"a": ((0, 1), ("b", "e")), "b": ((1, 0), ("a", "e"))})
    return GroupPresentation(alpha, _with_inverses(gens), closed_under_inverses=True, name="basilica")


def grigorchuk() -> GroupPresentation:
    alpha = Alphabet(("0", "1"))
    gens = from_recursion(
        alpha,
        {
            "a": ((1, 0), ("e", "e")),
            "b": ((0, 1), ("a", "c")),
            "c": ((0, 1), ("a", "d")),
            "d": ((0, 1), ("e", "b")),
        },
    )
    return GroupPresentation(alpha, gens, closed_under_inverses=True, name="grigorchuk")


def cycle_notation(perm, letters) -> str:
    """``(012)(34)`` style; ``()`` for the identity.  Letters are joined without spaces."""
    seen, parts = set(), []
    for start in range(len(perm)):
        if start in seen or perm[start] == start:
            continue
        cyc, x = [], start
        while x not in seen:
            seen.add(x)
            cyc.append(letters[x])
            x = perm[x]
        parts.append("(" + "".join(cyc) + ")")
    return "".join(parts) or "()"


MOTHER_MAX_DEGREE = 4


def mother_group(d: int, o: int = 0) -> GroupPresentation:
    """Generators: all of A = Sym(X) as rooted elements, and all of B = Sym(X-o; A).

    An element of B is a pair (tau, (a_x)) with tau a permutation of X-o and
    a_x in A; it fixes o with section itself there, and sends x to tau(x)
    with section a_x.  Families ``A`` and ``B`` list the generator names.
    """
    if d < 2:
        raise ValueError("the alphabet needs at least two letters")
    if d > MOTHER_MAX_DEGREE:
        raise CapExceeded(
            f"d = {d}: |B| = {math.factorial(d - 1) * math.factorial(d) ** (d - 1)} generators "
            f"is beyond exhaustive enumeration (limit d <= {MOTHER_MAX_DEGREE})"
        )
    alpha = Alphabet.of_size(d)
    if not 0 <= o < d:
        raise ValueError(f"distinguished letter {o} out of range")
    letters = alpha.letters
    sym = list(itertools.permutations(range(d)))
    gens: dict[str, Element] = {}
    a_names = []
    for p in sym:
        name = cycle_notation(p, letters)
        gens[name] = rooted(alpha, p)
        a_names.append(name)
    rest = [x for x in range(d) if x != o]
    b_names = []
    ident = tuple(range(d))
    for tau in itertools.permutations(rest):
        root = list(range(d))
        for x, y in zip(rest, tau):
            root[x] = y
        tau_name = cycle_notation(root, letters)
        for family in itertools.product(sym, repeat=d - 1):
            # state 0 is b; state 1 + i is the rooted a_{rest[i]}; last state is e
            e_state = d
            perms = [tuple(root)] + [tuple(p) for p in family] + [ident]
            secs = [[0] * d]
            for i, x in enumerate(rest):
                secs[0][x] = 1 + i
            secs[0] = tuple(secs[0])
            secs += [(e_state,) * d] * (d - 1) + [(e_state,) * d]
            b = canonicalize(Automaton(alpha, tuple(perms), tuple(secs)), 0)
            name = "B(" + ";".join([tau_name] + [cycle_notation(p, letters) for p in family]) + ")"
            gens[name] = b
            b_names.append(name)
    return GroupPresentation(
        alpha,
        gens,
        closed_under_inverses=True,
        families={"A": tuple(a_names), "B": tuple(b_names)},
        name=f"mother-{d}",
    )


BUILTINS = {
    "adding-machine": adding_machine,
    "basilica": basilica,
    "grigorchuk": grigorchuk,
    "mother-2": lambda: mother_group(2),
    "mother-3": lambda: mother_group(3),
}


def builtin(name: str) -> GroupPresentation:
    try:
        return BUILTINS[name]()
    except KeyError:
        raise KeyError(f"unknown builtin {name!r}; available: {', '.join(sorted(BUILTINS))}") from None


# -- text format -----------------------------------------------------------------

_NAME = r"[^\s,:=#]+"
_STATE_RE = re.compile(rf"^state\s+({_NAME})\s*:\s*perm\s*=\s*(\S+)\s+sections\s*=\s*(\S+)\s*$")


def _items(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def parse_presentation(text: str) -> GroupPresentation:
    d = None
    letters = None
    states: dict[str, tuple[int, list[str], list[str]]] = {}
    generators: list[tuple[str, str, int]] = []
    families: dict[str, tuple[list[str], int]] = {}
    closed = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("state"):
            m = _STATE_RE.match(line)
            if not m:
                raise ConfigError("expected 'state <name>: perm=<images> sections=<names>'", lineno)
            name = m[1]
            if name in states:
                raise ConfigError(f"state {name!r} defined twice", lineno)
            states[name] = (lineno, _items(m[2]), _items(m[3]))
            continue
        key, sep, value = line.partition(":")
        if not sep:
            raise ConfigError(f"cannot parse {line!r}", lineno)
        key, value = key.strip(), value.strip()
        if key == "alphabet":
            try:
                d = int(value)
            except ValueError:
                raise ConfigError(f"alphabet size must be an integer, got {value!r}", lineno) from None
            if d < 2:
                raise ConfigError("alphabet size must be at least 2", lineno)
        elif key == "letters":
            letters = tuple(_items(value))
            letters_line = lineno
        elif key == "generators":
            for item in _items(value):
                gname, _, target = item.partition("=")
                generators.append((gname.strip(), (target or gname).strip(), lineno))
        elif key.startswith("family "):
            families[key[len("family ") :].strip()] = (_items(value), lineno)
        elif key == "closed-under-inverses":
            if value not in ("yes", "no"):
                raise ConfigError("closed-under-inverses must be yes or no", lineno)
            closed = value == "yes"
        else:
            raise ConfigError(f"unknown key {key!r}", lineno)
    if d is None:
        raise ConfigError("missing 'alphabet: <d>' header", 1)
    if letters is None:
        letters = tuple(str(i) for i in range(d))
    elif len(letters) != d:
        raise ConfigError(f"{len(letters)} letters listed for alphabet of size {d}", letters_line)
    try:
        alpha = Alphabet(letters)
    except ValueError as exc:
        raise ConfigError(str(exc), letters_line) from None
    if not generators:
        raise ConfigError("no generators declared", len(text.splitlines()) or 1)
    names = list(states)
    index = {n: i for i, n in enumerate(names)}
    perms, secs = [], []
    for n in names:
        lineno, perm, sec = states[n]
        if len(perm) != d or len(sec) != d:
            raise ConfigError(f"state {n}: need {d} images and {d} sections", lineno)
        try:
            perms.append(tuple(alpha.index(x) for x in perm))
        except ValueError as exc:
            raise ConfigError(f"state {n}: {exc}", lineno) from None
        if sorted(perms[-1]) != list(range(d)):
            raise ConfigError(f"state {n}: perm {perm} is not a permutation", lineno)
        for s in sec:
            if s not in index:
                raise ConfigError(f"state {n}: section {s!r} is not a defined state", lineno)
        secs.append(tuple(index[s] for s in sec))
    aut = Automaton(alpha, tuple(perms), tuple(secs))
    gens: dict[str, Element] = {}
    for gname, target, lineno in generators:
        if target not in index:
            raise ConfigError(f"generator {gname!r} refers to undefined state {target!r}", lineno)
        if gname in gens:
            raise ConfigError(f"generator {gname!r} declared twice", lineno)
        gens[gname] = canonicalize(aut, index[target])
    fams = {}
    for fam, (items, lineno) in families.items():
        bad = [x for x in items if x not in gens]
        if bad:
            raise ConfigError(f"family {fam} lists unknown generators {bad}", lineno)
        fams[fam] = tuple(items)
    pres = GroupPresentation(alpha, gens, False, fams)
    pres.closed_under_inverses = pres.check_closed_under_inverses() if closed is None else closed
    return pres


def format_presentation(p: GroupPresentation, title: str = "") -> str:
    """Serialize ``p``; states shared between generators are written once."""
    alpha = p.alphabet
    names: dict[Element, str] = {}
    for n, g in p.generators.items():
        names.setdefault(g, n)
    order: list[Element] = []
    table: dict[Element, tuple[tuple[int, ...], tuple[Element, ...]]] = {}
    stack = list(p.generators.values())
    while stack:
        g = stack.pop(0)
        if g in table:
            continue
        secs = g.sections()
        table[g] = (g.root, secs)
        order.append(g)
        stack.extend(s for s in secs if s not in table)
    taken = set(names.values())
    k = 0
    for g in order:
        if g in names:
            continue
        if is_identity(g) and "e" not in taken:
            names[g] = "e"
        else:
            k += 1
            while f"s{k}" in taken:
                k += 1
            names[g] = f"s{k}"
        taken.add(names[g])
    lines = []
    if title or p.name:
        lines.append(f"# {title or p.name}")
    lines.append(f"alphabet: {alpha.size}")
    lines.append("letters: " + ", ".join(alpha.letters))
    for g in order:
        perm, secs = table[g]
        lines.append(
            f"state {names[g]}: perm=" + ",".join(alpha.letters[i] for i in perm)
            + " sections=" + ",".join(names[s] for s in secs)
        )
    gl = []
    for n, g in p.generators.items():
        gl.append(n if names[g] == n else f"{n}={names[g]}")
    lines.append("generators: " + ", ".join(gl))
    for fam, members in p.families.items():
        lines.append(f"family {fam}: " + ", ".join(members))
    lines.append("closed-under-inverses: " + ("yes" if p.closed_under_inverses else "no"))
    return "\n".join(lines) + "\n"


def generators_equal(p: GroupPresentation, q: GroupPresentation) -> bool:
    if p.generators.keys() != q.generators.keys():
        return False
    return all(equal(p.generators[n], q.generators[n]) for n in p.generators)
