from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from selfsim.automata import (
    Alphabet,
    Automaton,
    apply,
    canonicalize,
    classify_activity,
    activity,
    compose,
    equal,
    from_table,
    identity,
    inverse,
    is_identity,
    level_permutation,
    minimize,
    rooted,
    section,
    state_set,
)
from selfsim.errors import AlphabetMismatch, LevelSizeError
from strategies import BASILICA, GRIGORCHUK, basilica_letters, grigorchuk_letters, word_text, words


# -- alphabet -------------------------------------------------------------------


def test_alphabet_indices_and_words():
    X = Alphabet(("x", "y", "z"))
    assert X.size == 3
    assert [X.index(s) for s in "xyz"] == [0, 1, 2]
    assert X.word("zyx") == (2, 1, 0)
    assert list(X.words(2))[:4] == [(0, 0), (0, 1), (0, 2), (1, 0)]
    with pytest.raises(ValueError):
        Alphabet(("x",))
    with pytest.raises(ValueError):
        Alphabet(("x", "x"))


# -- composition and inversion ----------------------------------------------------


def test_identity_is_unit(basil):
    e = basil.identity
    for g in basil.generators.values():
        assert compose(e, g) == g
        assert compose(g, e) == g


def test_adding_machine_square(adding):
    a = adding["a"]
    a2 = compose(a, a)
    assert a2.root == (0, 1)
    assert a2.sections() == (a, a)
    # the square adds 2, so it fixes the first letter; oracle: 2-adic addition
    for w in itertools.product(range(2), repeat=6):
        image = oracles.adding_machine_int(apply(a2, w))
        assert image == (oracles.adding_machine_int(w) + 2) % 64


def test_basilica_b_squared(basil):
    b2 = compose(basil["b"], basil["b"])
    assert b2.root == (0, 1)
    assert b2.sections() == (basil["a"], basil["a"])


def test_inverse_of_adding_machine(adding):
    a = adding["a"]
    ai = inverse(a)
    assert ai.root == (1, 0)
    # (a^-1)_{sigma(x)} = (a_x)^-1: section at 1 is e^-1, at 0 is a^-1
    assert ai.sections() == (ai, identity(adding.alphabet))
    assert inverse(identity(adding.alphabet)) == identity(adding.alphabet)


@given(words(basilica_letters))
def test_inverse_cancels(word):
    g = BASILICA.word(word_text(word))
    assert is_identity(compose(g, inverse(g)))
    assert np.array_equal(level_permutation(g * g.inverse(), 6), np.arange(64))


@given(words(basilica_letters, 6), words(basilica_letters, 6))
def test_level_action_is_a_right_action(u, v):
    g, h = BASILICA.word(word_text(u)), BASILICA.word(word_text(v))
    pg, ph, pgh = (level_permutation(x, 6) for x in (g, h, g * h))
    assert np.array_equal(pgh, ph[pg])


@given(words(basilica_letters, 6), words(basilica_letters, 6))
def test_section_rule_of_products(u, v):
    g, h = BASILICA.word(word_text(u)), BASILICA.word(word_text(v))
    gh = g * h
    for x in range(2):
        assert gh.sections()[x] == g.sections()[x] * h.sections()[g.root[x]]


@given(words(basilica_letters, 6), words(basilica_letters, 6), words(basilica_letters, 6))
def test_associativity(u, v, w):
    f, g, h = (BASILICA.word(word_text(x)) for x in (u, v, w))
    assert (f * g) * h == f * (g * h)


@given(words(basilica_letters))
def test_inverse_is_an_involution(word):
    g = BASILICA.word(word_text(word))
    assert inverse(inverse(g)) == g


@given(words(basilica_letters))
def test_canonicalization_is_idempotent(word):
    g = BASILICA.word(word_text(word))
    again = canonicalize(g.automaton, g.initial)
    assert again == g and again.code() == g.code()
    assert minimize(g) == g


def test_alphabet_mismatch(basil, mother3):
    with pytest.raises(AlphabetMismatch):
        compose(basil["a"], mother3["(01)"])


# -- word problem against the naive oracle ------------------------------------------


@given(words(basilica_letters, 10), words(basilica_letters, 10))
def test_equal_agrees_with_word_oracle_basilica(u, v):
    g, h = BASILICA.word(word_text(u)), BASILICA.word(word_text(v))
    assert equal(g, h) == oracles.words_equal(oracles.BASILICA, u, v, 2)


@given(words(grigorchuk_letters, 10), words(grigorchuk_letters, 10))
def test_equal_agrees_with_word_oracle_grigorchuk(u, v):
    g, h = GRIGORCHUK.word(word_text(u)), GRIGORCHUK.word(word_text(v))
    assert equal(g, h) == oracles.words_equal(oracles.GRIGORCHUK, u, v, 2)


@given(words(basilica_letters, 6))
def test_level_permutation_matches_brute_force(word):
    g = BASILICA.word(word_text(word))
    assert np.array_equal(level_permutation(g, 5), oracles.level_images(oracles.BASILICA, word, 2, 5))


@given(words(basilica_letters, 6), st.lists(st.integers(0, 1), max_size=5))
def test_apply_matches_oracle_action(word, w):
    g = BASILICA.word(word_text(word))
    assert apply(g, w) == oracles.act(oracles.BASILICA, word, w)


def test_level_size_guard(basil):
    with pytest.raises(LevelSizeError):
        level_permutation(basil["a"], 21)
    assert level_permutation(basil["a"], 3, limit=8).shape == (8,)


# -- sections and state sets --------------------------------------------------------


def test_sections(adding, basil):
    a = adding["a"]
    assert section(a, "") == a
    assert section(a, "1") == a
    assert section(a, "0") == identity(adding.alphabet)
    assert section(basil["b"], "1") == basil["a"]
    assert section(basil["b"], "11") == basil["b"]


@given(words(basilica_letters, 6), st.lists(st.integers(0, 1), max_size=3), st.lists(st.integers(0, 1), max_size=3))
def test_section_of_section(word, u, v):
    g = BASILICA.word(word_text(word))
    assert section(section(g, u), v) == section(g, tuple(u) + tuple(v))


def test_state_sets(adding, grig):
    assert len(state_set(adding["a"])) == 2
    assert len(state_set(grig["b"])) == 5


@given(words(basilica_letters, 5), words(basilica_letters, 5))
def test_state_count_of_products_matches_naive_search(u, v):
    """Distinct sections of u*v, found by walking words to depth 12 and comparing actions."""
    word = oracles.reduce_word(u + v)
    g = BASILICA.word(word_text(word))
    found = {}
    frontier = {word}
    seen = {word}
    for _ in range(12):
        nxt = set()
        for w in frontier:
            for x in range(2):
                s = oracles.word_section(oracles.BASILICA, w, x)
                if s not in seen:
                    seen.add(s)
                    nxt.add(s)
        frontier = nxt
    for w in seen:
        key = oracles.level_images(oracles.BASILICA, w, 2, 8).tobytes()
        found.setdefault(key, w)
    assert g.num_states == len(found)


# -- activity ---------------------------------------------------------------------


def _brute_activity(g, n):
    return sum(1 for w in g.alphabet.words(n) if not is_identity(section(g, w)))


@pytest.mark.parametrize("name", ["adding-machine", "basilica", "grigorchuk"])
def test_activity_counts_match_enumeration(name):
    from selfsim.catalog import builtin

    P = builtin(name)
    for g in P.generators.values():
        for n in range(7):
            assert activity(g, n) == _brute_activity(g, n)


def test_activity_classes(adding, basil, grig, mother3):
    assert classify_activity(adding["a"]).kind == "bounded"
    assert all(classify_activity(g).is_bounded for g in basil.generators.values())
    assert str(classify_activity(grig["a"])) == "finitary"
    assert all(classify_activity(g).is_bounded for g in mother3.generators.values())
    assert classify_activity(identity(basil.alphabet)).kind == "finitary"


def test_polynomial_and_exponential_activity():
    X = Alphabet.of_size(2)
    # state 0 -> (0, 1), state 1 -> (1, 2): two nested cycles give linear activity
    g = from_table(X, [(0, 1), (1, 0), (0, 1)], [(0, 1), (1, 2), (2, 2)])
    cls = classify_activity(g)
    assert (cls.kind, cls.degree) == ("polynomial", 1)
    assert [activity(g, n) for n in range(5)] == [1, 2, 3, 4, 5]
    # both sections back to itself: every vertex active
    h = from_table(X, [(1, 0)], [(0, 0)])
    assert classify_activity(h).kind == "exponential"
    assert [activity(h, n) for n in range(4)] == [1, 2, 4, 8]


def test_rooted_elements():
    X = Alphabet.of_size(3)
    r = rooted(X, (1, 2, 0))
    assert r.sections() == (identity(X),) * 3
    assert r**3 == identity(X)
    with pytest.raises(ValueError):
        rooted(X, (0, 0, 1))


def test_automaton_validation():
    X = Alphabet.of_size(2)
    with pytest.raises(ValueError):
        Automaton(X, ((0, 1),), ((0, 5),))
