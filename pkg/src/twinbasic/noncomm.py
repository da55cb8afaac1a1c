"""Noncommutative polynomials and normal ordering by scalar-factor rewriting.

A :class:`RelationSet` fixes an ordered alphabet and, for every adjacent pair
``g_j g_i`` with ``g_i`` before ``g_j``, a rule
``g_j g_i -> lam * g_i g_j + extra`` where ``extra`` is a polynomial whose
words have the same length and fewer inversions.  Exhaustive rewriting
therefore terminates, and canonical forms contain only sorted words.

Two alphabets are prebuilt: the quantum 2x2 matrix ``a < b < c < d`` with
the two-parameter relations, and the binomial alphabet ``a < b < y < x``
with ``ab = p**-1 ba`` and ``xy = q yx``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Mapping

from .numkernel import (
    DomainError,
    Scalar,
    TwinBasicError,
    ToleranceSpec,
    approx_equal,
    decimal_context,
    exact_sqrt,
    format_scalar,
    is_exact,
    sdiv,
    sqrt,
    to_scalar,
)
from .pqcore import BasePair, pq_binomial

Word = tuple


class NonterminationError(TwinBasicError):
    """Rewriting exceeded its step budget."""


class NCPoly:
    """A finite linear combination of words with scalar coefficients."""

    __slots__ = ("terms",)

    def __init__(self, terms: Mapping | None = None):
        clean = {}
        for w, c in (terms or {}).items():
            c = to_scalar(c)
            if c != 0:
                clean[tuple(w)] = clean.get(tuple(w), Fraction(0)) + c
                if clean[tuple(w)] == 0:
                    del clean[tuple(w)]
        self.terms = clean

    @classmethod
    def word(cls, *letters: str, coef: object = 1) -> "NCPoly":
        return cls({tuple(letters): coef})

    @classmethod
    def scalar(cls, c: object) -> "NCPoly":
        return cls({(): c})

    def __add__(self, other) -> "NCPoly":
        other = _lift(other)
        out = dict(self.terms)
        for w, c in other.terms.items():
            out[w] = out.get(w, Fraction(0)) + c
        return NCPoly(out)

    __radd__ = __add__

    def __neg__(self) -> "NCPoly":
        return NCPoly({w: -c for w, c in self.terms.items()})

    def __sub__(self, other) -> "NCPoly":
        return self + (-_lift(other))

    def __rsub__(self, other) -> "NCPoly":
        return _lift(other) - self

    def __mul__(self, other) -> "NCPoly":
        if not isinstance(other, NCPoly):
            c = to_scalar(other)
            return NCPoly({w: c * v for w, v in self.terms.items()})
        out: dict = {}
        for (w1, c1), (w2, c2) in itertools.product(self.terms.items(), other.terms.items()):
            w = w1 + w2
            out[w] = out.get(w, Fraction(0)) + c1 * c2
        return NCPoly(out)

    def __rmul__(self, other) -> "NCPoly":
        c = to_scalar(other)
        return NCPoly({w: c * v for w, v in self.terms.items()})

    def __pow__(self, n: int) -> "NCPoly":
        out = NCPoly.scalar(1)
        for _ in range(n):
            out = out * self
        return out

    def __eq__(self, other) -> bool:
        if not isinstance(other, NCPoly):
            other = _lift(other)
        return self.terms == other.terms

    def __hash__(self):
        return hash(frozenset(self.terms.items()))

    def is_zero(self) -> bool:
        return not self.terms

    def close_to(self, other: "NCPoly", tol: ToleranceSpec) -> bool:
        words = set(self.terms) | set(other.terms)
        return all(approx_equal(self.terms.get(w, 0), other.terms.get(w, 0), tol) for w in words)

    def __repr__(self) -> str:
        return f"NCPoly({self})"

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        parts = []
        for w in sorted(self.terms, key=lambda w: (len(w), w)):
            c = self.terms[w]
            word = "".join(w) if w else "1"
            parts.append(f"{format_scalar(c, 20)}·{word}")
        return " + ".join(parts)


def _lift(x) -> NCPoly:
    return x if isinstance(x, NCPoly) else NCPoly.scalar(x)


@dataclass(frozen=True)
class RelationSet:
    """Ordered alphabet plus one rewrite per out-of-order adjacent pair.

    ``rules`` maps ``(g_j, g_i)`` (``g_i`` earlier in the order) to
    ``(lam, extra)``.  Pairs without a rule commute.
    """

    generators: tuple
    rules: Mapping = field(default_factory=dict)

    def __post_init__(self) -> None:
        rank = {g: i for i, g in enumerate(self.generators)}
        if len(rank) != len(self.generators):
            raise ValueError("duplicate generator")
        fixed = {}
        for (hi, lo), (lam, extra) in dict(self.rules).items():
            if rank[hi] <= rank[lo]:
                raise ValueError(f"rule {hi}{lo} is not an out-of-order pair")
            extra = _lift(extra) if extra is not None else NCPoly()
            for w in extra.terms:
                if len(w) != 2 or _inversions(w, rank) >= 1:
                    raise ValueError(f"inhomogeneous term {''.join(w)} does not reduce the disorder")
            fixed[(hi, lo)] = (to_scalar(lam), extra)
        object.__setattr__(self, "rules", fixed)
        object.__setattr__(self, "_rank", rank)

    def __hash__(self):
        return hash((self.generators, tuple(sorted((k, str(v)) for k, v in self.rules.items()))))

    def rank(self, g: str) -> int:
        return self._rank[g]

    def rule(self, hi: str, lo: str):
        return self.rules.get((hi, lo), (Fraction(1), NCPoly()))

    def gen(self, g: str) -> NCPoly:
        if g not in self._rank:
            raise KeyError(g)
        return NCPoly.word(g)


def _inversions(word: Word, rank: Mapping) -> int:
    return sum(1 for i, j in itertools.combinations(range(len(word)), 2) if rank[word[i]] > rank[word[j]])


def _find_inversion(word: Word, rank: Mapping, strategy: str) -> int | None:
    idx = range(len(word) - 1)
    if strategy == "rightmost":
        idx = reversed(idx)
    for i in idx:
        if rank[word[i]] > rank[word[i + 1]]:
            return i
    return None


def normal_order(poly: NCPoly, rels: RelationSet, strategy: str = "leftmost",
                 max_steps: int = 2_000_000) -> NCPoly:
    """Rewrite until every word is sorted.

    ``strategy`` picks which adjacent inversion is rewritten first
    (``"leftmost"`` or ``"rightmost"``); the result must not depend on it.
    """
    if strategy not in ("leftmost", "rightmost"):
        raise ValueError("strategy must be 'leftmost' or 'rightmost'")
    rank = rels._rank
    done: dict = {}
    work: dict = dict(_lift(poly).terms)
    steps = 0
    while work:
        w, c = work.popitem()
        if c == 0:
            continue
        i = _find_inversion(w, rank, strategy)
        if i is None:
            done[w] = done.get(w, Fraction(0)) + c
            continue
        steps += 1
        if steps > max_steps:
            raise NonterminationError(f"rewrite budget of {max_steps} steps exceeded")
        lam, extra = rels.rule(w[i], w[i + 1])
        head, tail = w[:i], w[i + 2:]
        swapped = head + (w[i + 1], w[i]) + tail
        work[swapped] = work.get(swapped, Fraction(0)) + lam * c
        for ew, ec in extra.terms.items():
            nw = head + ew + tail
            work[nw] = work.get(nw, Fraction(0)) + ec * c
    return NCPoly(done)


def product_normal(factors: Iterable[NCPoly], rels: RelationSet) -> NCPoly:
    """Normal-ordered product, reducing after every factor."""
    out = NCPoly.scalar(1)
    for f in factors:
        out = normal_order(out * f, rels)
    return out


# -- prebuilt alphabets ------------------------------------------------------

def quantum_matrix_relations(p: object, q: object) -> RelationSet:
    """``ab = p^-1 ba, cd = p^-1 dc, ac = q^-1 ca, bd = q^-1 db,
    bc = q^-1 p cb, ad - da = (p^-1 - q) bc``, ordered ``a < b < c < d``."""
    p, q = to_scalar(p), to_scalar(q)
    if p == 0 or q == 0:
        raise DomainError("quantum matrix relations need nonzero p and q")
    bc = NCPoly.word("b", "c")
    return RelationSet(("a", "b", "c", "d"), {
        ("b", "a"): (p, None),
        ("d", "c"): (p, None),
        ("c", "a"): (q, None),
        ("d", "b"): (q, None),
        ("c", "b"): (q / p, None),
        ("d", "a"): (Fraction(1), bc * (-(1 / p - q))),
    })


def binomial_relations(p: object, q: object, with_ab: bool = True) -> RelationSet:
    """``xy = q yx`` and (optionally) ``ab = p^-1 ba``; all else commutes."""
    p, q = to_scalar(p), to_scalar(q)
    if with_ab:
        if p == 0:
            raise DomainError("ab = p^-1 ba needs p != 0")
        return RelationSet(("a", "b", "y", "x"), {("b", "a"): (p, None), ("x", "y"): (q, None)})
    return RelationSet(("y", "x"), {("x", "y"): (q, None)})


def nc_binomial_power(n: int, p: object, q: object, with_ab: bool) -> tuple[NCPoly, NCPoly, NCPoly]:
    """``(x + y)**n`` (or ``(ax + by)**n``) and both binomial expansions.

    Classical: ``sum [n k]_q y^k x^(n-k)`` and ``sum [n k]_(1/q) x^k y^(n-k)``.
    Two-parameter: ``sum [n k]_(p,q) a^(n-k) b^k y^k x^(n-k)`` and
    ``sum [n k]_(1/p,1/q) b^(n-k) a^k x^k y^(n-k)``.  All three are returned
    normal-ordered.
    """
    if n < 0:
        raise DomainError("power must be nonnegative")
    p, q = to_scalar(p), to_scalar(q)
    if q == 0 or (with_ab and p == 0):
        raise DomainError("binomial forms need nonzero parameters")
    rels = binomial_relations(p, q, with_ab)
    x, y = NCPoly.word("x"), NCPoly.word("y")
    if with_ab:
        a, b = NCPoly.word("a"), NCPoly.word("b")
        step = a * x + b * y
        base, inv = BasePair(p, q), BasePair(1 / p, 1 / q)
        first = NCPoly()
        second = NCPoly()
        for k in range(n + 1):
            first = first + pq_binomial(n, k, base) * (a ** (n - k) * b**k * y**k * x ** (n - k))
            second = second + pq_binomial(n, k, inv) * (b ** (n - k) * a**k * x**k * y ** (n - k))
    else:
        step = x + y
        base, inv = BasePair.classical(q), BasePair.classical(1 / q)
        first = NCPoly()
        second = NCPoly()
        for k in range(n + 1):
            first = first + pq_binomial(n, k, base) * (y**k * x ** (n - k))
            second = second + pq_binomial(n, k, inv) * (x**k * y ** (n - k))
    lhs = product_normal([step] * n, rels)
    return lhs, normal_order(first, rels), normal_order(second, rels)


def _matrix_entry_products(left, right, rels):
    """Normal-ordered ``left @ right`` for 4x4 matrices of NCPoly."""
    out = []
    for i in range(4):
        row = []
        for j in range(4):
            acc = NCPoly()
            for k in range(4):
                if left[i][k].is_zero() or right[k][j].is_zero():
                    continue
                acc = acc + left[i][k] * right[k][j]
            row.append(normal_order(acc, rels))
        out.append(row)
    return out


def r_matrix(p: object, q: object) -> list[list[Scalar]]:
    """The R-matrix with the overall ``(pq)**(1/4)`` factor removed.

    Rows and columns are ordered ``11, 12, 21, 22``.
    """
    p, q = to_scalar(p), to_scalar(q)
    s_pq = sqrt(p * q)
    s_pq_over = sqrt(p / q)
    zero = Fraction(0)
    inv_pq = 1 / s_pq
    return [
        [inv_pq, zero, zero, zero],
        [zero, 1 / s_pq_over, zero, zero],
        [zero, inv_pq - s_pq, s_pq_over, zero],
        [zero, zero, zero, inv_pq],
    ]


def rtt_sides(p: object, q: object) -> tuple[list, list, RelationSet]:
    """``R (T x I)(I x T)`` and ``(I x T)(T x I) R`` with normal-ordered entries."""
    rels = quantum_matrix_relations(p, q)
    T = [[NCPoly.word("a"), NCPoly.word("b")], [NCPoly.word("c"), NCPoly.word("d")]]
    idx = [(0, 0), (0, 1), (1, 0), (1, 1)]
    t1t2 = [[T[i][j] * T[k][l] for (j, l) in idx] for (i, k) in idx]
    t2t1 = [[T[k][l] * T[i][j] for (j, l) in idx] for (i, k) in idx]
    R = [[NCPoly.scalar(c) for c in row] for row in r_matrix(p, q)]
    return _matrix_entry_products(R, t1t2, rels), _matrix_entry_products(t2t1, R, rels), rels


def verify_rtt(p: object, q: object, tol: ToleranceSpec | None = None) -> bool:
    """Check the RTT relation entry by entry.

    Exact when ``pq`` and ``p/q`` are rational squares; otherwise compared in
    decimal mode at ``tol`` (relative ``1e-30`` by default).
    """
    p, q = to_scalar(p), to_scalar(q)
    if p <= 0 or q <= 0:
        raise DomainError("RTT check needs p, q > 0")
    exact = is_exact(p) and is_exact(q) and exact_sqrt(p * q) is not None and exact_sqrt(p / q) is not None
    with decimal_context():
        lhs, rhs, _ = rtt_sides(p, q)
    if exact:
        return all(lhs[i][j] == rhs[i][j] for i in range(4) for j in range(4))
    tol = tol or ToleranceSpec(Fraction(1, 10**40), Fraction(1, 10**30))
    return all(lhs[i][j].close_to(rhs[i][j], tol) for i in range(4) for j in range(4))


def oscillator_number(N: int, p: object, q: object) -> Scalar:
    """``(p**-N - q**N)/(p**-1 - q)``, the value of ``a† a`` on level ``N``."""
    p, q = to_scalar(p), to_scalar(q)
    return sdiv(p ** (-N) - q**N, 1 / p - q)


def verify_oscillator_realization(p: object, q: object, N_max: int) -> bool:
    """``f(N+1) - q f(N) == p**-N`` for ``N = 0 .. N_max``."""
    p, q = to_scalar(p), to_scalar(q)
    if p == 0:
        raise DomainError("p must be nonzero")
    if 1 / p == q:
        raise DomainError("realization denominator p^-1 - q vanishes")
    return all(
        oscillator_number(N + 1, p, q) - q * oscillator_number(N, p, q) == p ** (-N)
        for N in range(N_max + 1)
    )
