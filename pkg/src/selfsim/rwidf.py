"""Random walks with internal degrees of freedom coming from self-similarity.

A measure mu on a self-similar group lifts to the |X| x |X| matrix of
sub-measures ``M^mu = sum_g mu(g) M^g``.  Observing the lifted chain only on
``G x {x}`` gives a random walk on G whose law is the Schur complement

    mu^x = mu_xx + M_{x,~x} (I - M_{~x,~x})^{-1} M_{~x,x}.

The Neumann series for the inverse is summed exactly when the row vectors
``M_{x,~x} M_{~x,~x}^k`` become proportional with a scalar ratio c < 1 (then
the tail is a geometric series), or vanish.  Otherwise a truncation
tolerance must be supplied.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

import numpy as np

from .automata import Element, identity as identity_element
from .errors import ClosureNotDetected, PreconditionError, RecurrenceFailure, RowsDiffer
from .measures import SUPPORT_CAP, Measure, convolve, delta, self_similar_decomposition
from .weights import Weight

__all__ = [
    "MeasureMatrix",
    "QuotientChain",
    "TraceResult",
    "MunchhausenReport",
    "element_matrix",
    "lift_measure",
    "augment",
    "schur_trace",
    "row_projection",
    "munchhausen_check",
    "sample_trace",
]

CLOSURE_SUPPORT = 10_000
EXACT_TERMS = 64
TRUNCATED_TERMS = 10_000


@dataclass(frozen=True)
class MeasureMatrix:
    entries: tuple[tuple[Measure, ...], ...]
    identity: object

    @classmethod
    def build(cls, rows: Sequence[Sequence[Measure]], identity) -> MeasureMatrix:
        return cls(tuple(tuple(r) for r in rows), identity)

    @classmethod
    def zeros(cls, d: int, identity) -> MeasureMatrix:
        z = Measure.zero(identity)
        return cls(tuple((z,) * d for _ in range(d)), identity)

    @property
    def size(self) -> int:
        return len(self.entries)

    def __getitem__(self, xy) -> Measure:
        x, y = xy
        return self.entries[x][y]

    def row(self, x: int) -> tuple[Measure, ...]:
        return self.entries[x]

    def row_masses(self) -> list[Weight]:
        return [sum((m.mass() for m in row), Weight(0)) for row in self.entries]

    def is_stochastic(self) -> bool:
        return all(s == 1 for s in self.row_masses())

    def __add__(self, other: MeasureMatrix) -> MeasureMatrix:
        return MeasureMatrix.build(
            [[a + b for a, b in zip(r, s)] for r, s in zip(self.entries, other.entries)],
            self.identity,
        )

    def __matmul__(self, other: MeasureMatrix) -> MeasureMatrix:
        d = self.size
        rows = []
        for x in range(d):
            row = []
            for z in range(d):
                acc = Measure.zero(self.identity)
                for y in range(d):
                    a, b = self.entries[x][y], other.entries[y][z]
                    if len(a) and len(b):
                        acc = acc + convolve(a, b)
                row.append(acc)
            rows.append(row)
        return MeasureMatrix.build(rows, self.identity)


@dataclass(frozen=True)
class QuotientChain:
    """The scalar transition matrix p_xy = mass of the (x, y) entry."""

    p: tuple[tuple[Weight, ...], ...]

    def row_sums(self) -> list[Weight]:
        return [sum(r, Weight(0)) for r in self.p]

    def column_sums(self) -> list[Weight]:
        return [sum(c, Weight(0)) for c in zip(*self.p)]

    def is_stochastic(self) -> bool:
        return all(s == 1 for s in self.row_sums())

    def is_doubly_stochastic(self) -> bool:
        return self.is_stochastic() and all(s == 1 for s in self.column_sums())

    def to_numpy(self) -> np.ndarray:
        return np.array([[float(w) for w in r] for r in self.p])


def element_matrix(g: Element) -> MeasureMatrix:
    """M^g: entry (x, perm(x)) is delta at the section g_x."""
    d = g.degree
    e = identity_element(g.alphabet)
    rows = [[Measure.zero(e) for _ in range(d)] for _ in range(d)]
    for x, gx in enumerate(g.sections()):
        rows[x][g.root[x]] = delta(gx, e)
    return MeasureMatrix.build(rows, e)


def lift_measure(mu: Measure) -> MeasureMatrix:
    if not mu.is_probability():
        raise PreconditionError(f"lift needs a probability measure, mass is {mu.mass()}")
    e = mu.identity
    d = e.degree
    acc: list[list[dict]] = [[{} for _ in range(d)] for _ in range(d)]
    for g, w in mu.items():
        for x, gx in enumerate(g.sections()):
            cell = acc[x][g.root[x]]
            cell[gx] = cell[gx] + w if gx in cell else w
    return MeasureMatrix.build([[Measure(c, e) for c in row] for row in acc], e)


def augment(M: MeasureMatrix) -> QuotientChain:
    return QuotientChain(tuple(tuple(m.mass() for m in row) for row in M.entries))


@dataclass(frozen=True)
class TraceResult:
    measure: Measure
    deficit: Weight
    terms: int
    closed_form: bool


def _row_times(v: list[Measure], Q: list[list[Measure]], e, cap) -> list[Measure]:
    out = []
    for j in range(len(Q)):
        acc = Measure.zero(e)
        for i, vi in enumerate(v):
            if len(vi) and len(Q[i][j]):
                acc = acc + convolve(vi, Q[i][j], cap)
        out.append(acc)
    return out


def _row_dot(v: list[Measure], col: list[Measure], e, cap) -> Measure:
    acc = Measure.zero(e)
    for a, b in zip(v, col):
        if len(a) and len(b):
            acc = acc + convolve(a, b, cap)
    return acc


def _ratio(v: list[Measure], u: list[Measure]) -> Weight | None:
    """The scalar c with v == c*u, if one exists."""
    for ui, vi in zip(u, v):
        for g, w in ui.items():
            c = vi[g] / w
            if all(a == b.scale(c) for a, b in zip(v, u)):
                return c
            return None
    return None


def _spectral_radius(P: np.ndarray) -> float:
    if P.size == 0:
        return 0.0
    return float(max(abs(np.linalg.eigvals(P))))


def schur_trace(
    M: MeasureMatrix,
    x: int,
    epsilon=None,
    max_terms: int | None = None,
    cap: int = SUPPORT_CAP,
    closure_support: int = CLOSURE_SUPPORT,
) -> TraceResult:
    """Law of the walk induced on ``G x {x}``.

    With ``epsilon=None`` the answer is exact (or :class:`ClosureNotDetected`
    is raised).  With a tolerance, the Neumann series is truncated once the
    unassigned mass is at most ``epsilon``; that mass is returned as the
    deficit.  Exact mode gives up after ``max_terms`` (default 64) terms or
    once a term spreads over more than ``closure_support`` atoms; a series
    that closes does so within its first few terms.
    """
    d = M.size
    if not 0 <= x < d:
        raise ValueError(f"letter index {x} out of range")
    if not M.is_stochastic():
        raise PreconditionError("rows of the measure matrix must have total mass 1")
    e = M.identity
    others = [y for y in range(d) if y != x]
    P = augment(M).to_numpy()
    rho = _spectral_radius(P[np.ix_(others, others)])
    if rho >= 1 - 1e-12:
        raise RecurrenceFailure(
            f"quotient chain restricted to the complement of {x} has spectral radius {rho:.12g}"
        )
    row = [M[x, y] for y in others]
    col = [M[y, x] for y in others]
    Q = [[M[i, j] for j in others] for i in others]
    trace = M[x, x]
    if max_terms is None:
        max_terms = TRUNCATED_TERMS if epsilon is not None else EXACT_TERMS
    if epsilon is not None:
        eps = Weight(Fraction(epsilon)) if isinstance(epsilon, float) else Weight.coerce(epsilon)
        v = row
        for k in range(max_terms):
            trace = trace + _row_dot(v, col, e, cap)
            deficit = 1 - trace.mass()
            if deficit <= eps:
                return TraceResult(trace, deficit, k + 1, False)
            v = _row_times(v, Q, e, cap)
        raise ClosureNotDetected(f"deficit still above {epsilon} after {max_terms} terms")
    # exact: S = sum_{j<k} v_j, stop when v_k vanishes or v_k = c v_{k-1}
    S = list(row)
    prev = row
    for k in range(1, max_terms + 1):
        v = _row_times(prev, Q, e, cap)
        if all(len(m) == 0 for m in v):
            break
        if sum(len(m) for m in v) > closure_support:
            raise ClosureNotDetected(
                f"Neumann series term {k} has more than {closure_support} atoms; pass a truncation epsilon"
            )
        c = _ratio(v, prev)
        if c is not None:
            if c >= 1:
                raise RecurrenceFailure(f"geometric ratio {c} is not below 1")
            tail = c / (1 - c)
            S = [s + p.scale(tail) for s, p in zip(S, prev)]
            break
        S = [s + vi for s, vi in zip(S, v)]
        prev = v
    else:
        raise ClosureNotDetected(
            f"Neumann series did not close within {max_terms} terms; pass a truncation epsilon"
        )
    trace = trace + _row_dot(S, col, e, cap)
    deficit = 1 - trace.mass()
    if deficit != 0:
        raise ClosureNotDetected(f"exact trace has mass {trace.mass()}")
    return TraceResult(trace, deficit, k, True)


def row_projection(M: MeasureMatrix) -> Measure:
    """sum_y M[x, y], valid when every row is the same vector of measures."""
    first = M.row(0)
    for x in range(1, M.size):
        if M.row(x) != first:
            raise RowsDiffer(f"row {x} differs from row 0")
    out = Measure.zero(M.identity)
    for m in first:
        out = out + m
    return out


@dataclass(frozen=True)
class MunchhausenReport:
    coefficient: Weight | None
    trace: Measure
    deficit: Weight
    closed_form: bool

    @property
    def self_similar(self) -> bool:
        return self.coefficient is not None


def munchhausen_check(mu: Measure, x: int = 0, epsilon=None) -> MunchhausenReport:
    """Is the trace of the lifted walk at ``x`` of the form (1-a) delta_e + a mu?"""
    result = schur_trace(lift_measure(mu), x, epsilon=epsilon)
    alpha = None
    if result.deficit == 0:
        alpha = self_similar_decomposition(result.measure, mu)
    return MunchhausenReport(alpha, result.measure, result.deficit, result.closed_form)


def sample_trace(M: MeasureMatrix, x: int, samples: int, seed: int) -> Counter:
    """Monte Carlo for the induced walk: run the lifted chain from x until it returns.

    Returns counts of the group increment accumulated over each excursion.
    """
    rng = np.random.Generator(np.random.Philox(seed))
    e = M.identity
    table = []
    for r in range(M.size):
        moves = [(y, g, float(w)) for y in range(M.size) for g, w in M[r, y].items()]
        probs = np.array([p for _, _, p in moves])
        table.append((moves, np.cumsum(probs / probs.sum())))
    counts: Counter = Counter()
    for _ in range(samples):
        state, g = x, e
        while True:
            moves, cum = table[state]
            i = min(int(np.searchsorted(cum, rng.random(), side="right")), len(moves) - 1)
            state, h, _ = moves[i]
            g = g * h
            if state == x:
                break
        counts[g] += 1
    return counts
