from __future__ import annotations

import math
from fractions import Fraction
from statistics import NormalDist

import pytest
from hypothesis import given
from hypothesis import strategies as st

import oracles
from selfsim.errors import CapExceeded
from selfsim.lab import (
    FreeGroup,
    ball,
    boundary,
    entropy_sequence,
    expected_b_blocks,
    folner_ratio,
    growth_sequence,
    interval,
    reiter_deficit,
    sample_endpoints,
    sample_walk,
    tail_deficit,
    translation_ratio,
)
from selfsim.measures import Measure, convolution_power, delta, total_variation, translate, uniform
from selfsim.weights import Weight


def _lazy(adding):
    a = adding["a"]
    return Measure({adding.identity: Fraction(1, 2), a: Fraction(1, 4), a.inverse(): Fraction(1, 4)}, adding.identity)


def _uniform(P):
    return uniform([g for _, g in P.symmetric_generators()], P.identity)


# -- balls and growth --------------------------------------------------------------


def test_adding_machine_growth(adding):
    assert growth_sequence(adding, 10).sizes == tuple(2 * n + 1 for n in range(11))


def test_free_group_growth():
    F = FreeGroup(2)
    assert growth_sequence(F, 6).sizes == tuple(oracles.free_ball_size(2, n) for n in range(7))


def test_grigorchuk_growth(grig):
    sizes = growth_sequence(grig, 8).sizes
    assert sizes[:5] == (1, 5, 11, 23, 40)
    # strictly below both the free-group count and 5 * 4^(n-1) for 2 <= n <= 8
    for n in range(2, 9):
        assert sizes[n] < 2 * 3**n - 1 and sizes[n] < 5 * 4 ** (n - 1)


def test_ball_sizes_match_word_oracle():
    steps = [((n, s),) for n in "ab" for s in (1, -1)]
    from selfsim.catalog import basilica

    P = basilica()
    sizes = growth_sequence(P, 4).sizes
    for n in range(5):
        words = set()
        for k in range(n + 1):
            for w in __import__("itertools").product(steps, repeat=k):
                words.add(oracles.reduce_word(sum(w, ())))
        assert sizes[n] == len(oracles.distinct_elements(oracles.BASILICA, words, 2))


def test_ball_closure(basil):
    B4, B5 = ball(basil, 4), ball(basil, 5)
    inner = B5.as_set()
    assert all(g * k in inner for g in B4 for _, k in basil.symmetric_generators())
    assert B5.sphere(0) == [basil.identity]


def test_ball_cap(grig):
    with pytest.raises(CapExceeded):
        ball(grig, 8, cap=100)


# -- Folner and Reiter --------------------------------------------------------------


@pytest.mark.parametrize("n", [1, 2, 5, 13])
def test_interval_folner_ratio(adding, n):
    A = interval(adding["a"], n, adding.identity)
    assert len(A) == n + 1
    assert len(boundary(A, adding)) == 2
    assert folner_ratio(A, adding) == Fraction(2, n + 1)


def test_single_point_interval(adding):
    # both ends of {e} coincide, so the boundary has one point while |aA - A| = 2
    A = interval(adding["a"], 0, adding.identity)
    assert folner_ratio(A, adding) == 1
    assert translation_ratio(A, adding["a"]) == 2


@given(st.integers(0, 6), st.sampled_from(["a", "b", "a^-1", "b^-1"]))
def test_translation_ratio_equals_tv_of_uniform_measures(n, name):
    from strategies import BASILICA

    A = ball(BASILICA, n) if n <= 4 else interval(BASILICA["a"], n, BASILICA.identity)
    g = BASILICA.word(name)
    lam = uniform(A, BASILICA.identity)
    assert total_variation(translate(g, lam), lam, exact=True) == translation_ratio(A, g)


def test_reiter_and_tail_deficits_decrease_for_lazy_walk(adding):
    mu = _lazy(adding)
    a = adding["a"]
    reiter = [reiter_deficit(mu, n, a, exact=True) for n in range(13)]
    tail = [tail_deficit(mu, n, adding.identity, exact=True) for n in range(13)]
    assert reiter[0] == 2
    assert all(x > y for x, y in zip(reiter, reiter[1:]))
    assert all(x > y for x, y in zip(tail, tail[1:]))
    # oracle: the lazy walk law on Z
    for n in (3, 7):
        law = oracles.lazy_walk_law(n)
        expected = sum(abs(law.get(k - 1, 0) - law.get(k, 0)) for k in range(-n - 1, n + 2))
        assert reiter[n] == expected


def test_deficits_of_the_trivial_walk(basil):
    mu = delta(basil.identity)
    assert reiter_deficit(mu, 0, basil.identity) == 0
    assert all(tail_deficit(mu, n, basil.identity) == 0 for n in range(4))


# -- entropy -------------------------------------------------------------------------


def test_entropy_of_free_group_walk_grows_linearly():
    F = FreeGroup(2)
    rep = entropy_sequence(uniform([g for _, g in F.symmetric_generators()], F.identity), 6)
    assert rep.entropies[0] == 0 and rep.subadditive
    per = rep.normalized
    assert per[-1] > 0.7 and abs(per[-1] - per[-2]) < 0.1


def test_entropy_report_on_delta(basil):
    rep = entropy_sequence(delta(basil["a"], basil.identity), 5)
    assert rep.entropies == [0.0] * 6 and rep.status == "complete"


def test_entropy_truncates_at_cap(basil):
    rep = entropy_sequence(_uniform(basil), 8, cap=200)
    assert rep.truncated and rep.status.startswith("inconclusive")
    assert len(rep.entropies) < 9


# -- sampling --------------------------------------------------------------------------


def test_walk_is_reproducible_and_consistent(basil):
    mu = _uniform(basil)
    s1, s2 = sample_walk(mu, 30, seed=11), sample_walk(mu, 30, seed=11)
    assert s1 == s2 and s1.steps == 30
    for n in range(1, 31):
        assert s1.positions[n] == s1.positions[n - 1] * s1.increments[n - 1]
    assert sample_walk(mu, 0, seed=1).positions == (basil.identity,)


def test_sampled_endpoints_fit_exact_law(basil):
    """Bonferroni-corrected per-atom bound and a chi-square statistic at n = 4."""
    mu = _uniform(basil)
    n, samples = 4, 40_000
    exact = convolution_power(mu, n)
    counts = sample_endpoints(mu, n, samples, seed=5)
    assert set(counts) <= exact.support
    bound = NormalDist().inv_cdf(1 - 0.001 / (2 * len(exact)))
    chi2 = 0.0
    for g, w in exact.items():
        p = float(w)
        z = (counts[g] / samples - p) / math.sqrt(p * (1 - p) / samples)
        assert abs(z) < bound
        chi2 += (counts[g] - samples * p) ** 2 / (samples * p)
    k = len(exact) - 1
    # Wilson-Hilferty upper 0.1% point of chi-square with k degrees of freedom
    upper = k * (1 - 2 / (9 * k) + NormalDist().inv_cdf(0.999) * math.sqrt(2 / (9 * k))) ** 3
    assert chi2 < upper


def test_endpoints_agree_with_single_walks(basil):
    mu = _uniform(basil)
    assert sum(sample_endpoints(mu, 3, 100, seed=2).values()) == 100
    assert sample_endpoints(mu, 3, 100, seed=2) == sample_endpoints(mu, 3, 100, seed=2)


def test_sampling_with_irrational_weights(basil):
    r = Weight.sqrt(2)
    alpha, beta = (r - 1) / 2, (2 - r) / 2
    mu = Measure({basil["a"]: alpha, basil["a^-1"]: alpha, basil["b"]: beta, basil["b^-1"]: beta}, basil.identity)
    counts = sample_endpoints(mu, 1, 20_000, seed=4)
    assert abs(counts[basil["b"]] / 20_000 - float(beta)) < 0.02


# -- Mother-group bookkeeping ----------------------------------------------------------------


def test_expected_b_blocks_against_enumeration():
    import itertools

    for d in (2, 3):
        p = Fraction(1, d)
        for n in range(6):
            total = Fraction(0)
            for word in itertools.product("AB", repeat=n):
                prob = Fraction(1)
                for c in word:
                    prob *= p if c == "B" else 1 - p
                runs = sum(1 for i, c in enumerate(word) if c == "B" and (i == 0 or word[i - 1] == "A"))
                total += prob * runs
            assert expected_b_blocks(d, n) == total
