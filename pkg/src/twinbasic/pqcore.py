"""Twin-basic primitives: numbers, factorials, binomials, shifted factorials.

Notation follows the usual q-series conventions.  A base pair ``(p, q)``
deforms the Heine number ``(1 - q**n)/(1 - q)`` into
``[n]_{p,q} = (p**n - q**n)/(p - q)`` and the shifted factorial
``(a; q)_n`` into ``((a, b); (p, q))_n = prod_k (a p**k - b q**k)``.
Setting ``p = 1`` and ``a = 1`` gives back the one-base objects.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import mpmath

from .numkernel import (
    DivergenceError,
    DomainError,
    PoleError,
    Scalar,
    SeriesValue,
    TruncationPolicy,
    decimal_context,
    is_exact,
    is_negligible,
    lt,
    promote,
    scalars_match,
    sdiv,
    spow,
    sum_by_ratio,
    to_decimal,
    to_scalar,
)


@dataclass(frozen=True)
class BasePair:
    """The twin base ``(p, q)``; series converge for ``|q/p| < 1``."""

    p: Scalar
    q: Scalar

    def __post_init__(self) -> None:
        p, q = promote(self.p, self.q)
        object.__setattr__(self, "p", p)
        object.__setattr__(self, "q", q)

    @property
    def rho(self) -> Scalar:
        return sdiv(self.q, self.p)

    def contracting(self) -> bool:
        return self.p != 0 and lt(abs(self.q), abs(self.p))

    def inverted(self) -> "BasePair":
        return BasePair(sdiv(Fraction(1), self.p), sdiv(Fraction(1), self.q))

    def swapped(self) -> "BasePair":
        return BasePair(self.q, self.p)

    @classmethod
    def classical(cls, q: object) -> "BasePair":
        return cls(Fraction(1), to_scalar(q))


@dataclass(frozen=True)
class ParamDoublet:
    """A parameter pair ``(a_p, a_q)``; its one-base image is ``a_q/a_p``."""

    a_p: Scalar
    a_q: Scalar

    def __post_init__(self) -> None:
        a_p, a_q = promote(self.a_p, self.a_q)
        object.__setattr__(self, "a_p", a_p)
        object.__setattr__(self, "a_q", a_q)

    def __iter__(self):
        yield self.a_p
        yield self.a_q

    def scaled(self, lam: object) -> "ParamDoublet":
        lam = to_scalar(lam)
        return ParamDoublet(lam * self.a_p, lam * self.a_q)

    @property
    def classical(self) -> Scalar:
        return sdiv(self.a_q, self.a_p)


def as_doublet(d) -> ParamDoublet:
    if isinstance(d, ParamDoublet):
        return d
    a, b = d
    return ParamDoublet(a, b)


def as_base(base) -> BasePair:
    if isinstance(base, BasePair):
        return base
    p, q = base
    return BasePair(p, q)


def twin_basic_number(n: int, base) -> Scalar:
    """``[n]_{p,q}``, with the limit ``n p**(n-1)`` when ``p == q``."""
    base = as_base(base)
    p, q = base.p, base.q
    if p == q:
        if p == 0:
            # the base (0, 0) is excluded outright; only n = 1 would have a limit value
            raise DomainError("twin-basic numbers are undefined at p = q = 0")
        return n * spow(p, n - 1)
    if n < 0 and (p == 0 or q == 0):
        raise DomainError("negative twin-basic number with a zero base")
    return (spow(p, n) - spow(q, n)) / (p - q)


def pq_factorial(n: int, base) -> Scalar:
    if n < 0:
        raise DomainError("factorial of a negative integer")
    base = as_base(base)
    out: Scalar = Fraction(1)
    for k in range(1, n + 1):
        out = out * twin_basic_number(k, base)
    return out


def pq_binomial(n: int, k: int, base) -> Scalar:
    """``[n k]_{p,q}``; zero outside ``0 <= k <= n``.

    Normally ``[n][n-1]...[n-k+1] / [k]!``.  When some ``[j]`` with
    ``j <= k`` vanishes (e.g. ``q = -p``) that quotient is 0/0, and the Pascal
    rule ``[m j] = p**j [m-1 j] + q**(m-j) [m-1 j-1]`` gives the polynomial
    value instead.
    """
    if n < 0:
        raise DomainError("binomial with negative n")
    if k < 0 or k > n:
        return Fraction(0)
    base = as_base(base)
    k = min(k, n - k)
    num: Scalar = Fraction(1)
    den: Scalar = Fraction(1)
    for j in range(k):
        num = num * twin_basic_number(n - j, base)
        den = den * twin_basic_number(j + 1, base)
    if den != 0:
        return sdiv(num, den)
    p, q = base.p, base.q
    row: list = [Fraction(1)] + [Fraction(0)] * k
    for m in range(1, n + 1):
        for j in range(min(m, k), 0, -1):
            row[j] = spow(p, j) * row[j] + spow(q, m - j) * row[j - 1]
    return row[k]


def pq_pochhammer(d, base, n: int) -> Scalar:
    """``((a, b); (p, q))_n`` for any integer ``n``.

    Negative ``n`` uses ``1/((a p**-|n|, b q**-|n|); (p, q))_{|n|}``.
    """
    a, b = as_doublet(d)
    base = as_base(base)
    p, q = base.p, base.q
    if n >= 0:
        out: Scalar = Fraction(1)
        pk: Scalar = Fraction(1)
        qk: Scalar = Fraction(1)
        for _ in range(n):
            out = out * (a * pk - b * qk)
            pk = pk * p
            qk = qk * q
        return out
    m = -n
    if p == 0 or q == 0:
        raise DomainError("negative-index shifted factorial needs nonzero p and q")
    den: Scalar = Fraction(1)
    for k in range(1, m + 1):
        factor = a * spow(p, -k) - b * spow(q, -k)
        if factor == 0:
            raise DomainError(f"zero factor at k = {k} in negative-index shifted factorial")
        den = den * factor
    return sdiv(Fraction(1), den)


def qpochhammer(x: object, q: object, n: int) -> Scalar:
    """Classical ``(x; q)_n`` for ``n >= 0``."""
    x, q = to_scalar(x), to_scalar(q)
    out: Scalar = Fraction(1)
    qk: Scalar = Fraction(1)
    for _ in range(n):
        out = out * (1 - x * qk)
        qk = qk * q
    return out


def reduce_to_single_base(d, base, n: int) -> tuple[Scalar, Scalar, Scalar]:
    """Return ``(b/a, a**n p**(n(n-1)/2), q/p)`` so that
    ``((a, b); (p, q))_n = prefactor * (b/a; q/p)_n``."""
    a, b = as_doublet(d)
    base = as_base(base)
    if a == 0 or base.p == 0:
        raise DomainError("reduction undefined; use direct product")
    if n < 0:
        raise DomainError("reduction is defined for n >= 0")
    prefactor = spow(a, n) * spow(base.p, n * (n - 1) // 2)
    return b / a, prefactor, base.q / base.p


def qpochhammer_infinite(x: object, q: object, trunc: TruncationPolicy | None = None) -> Scalar:
    """Classical ``(x; q)_inf`` for ``|q| < 1``."""
    return _product_ratio([to_scalar(x)], [], to_scalar(q), trunc or TruncationPolicy())


def _product_ratio(num: list, den: list, rho: Scalar, trunc: TruncationPolicy) -> Scalar:
    """``prod (x_i; rho)_inf / prod (y_j; rho)_inf`` with a relative tail bound.

    Once every ``|x rho**k| <= 1/2`` the remaining factors multiply the
    partial product by ``exp(u)`` with ``|u| <= 2 sum |x| |rho|**k/(1-|rho|)``;
    iteration stops when ``2|u|`` is below ``trunc.tail_target``.
    """
    num, den = _cancel(list(num), list(den))
    if not num and not den:
        return Fraction(1)
    if not lt(abs(rho), 1):
        raise DomainError("infinite product needs |base| < 1")
    if all(v == 0 for v in num + den):
        return Fraction(1)
    with decimal_context():
        r = to_decimal(rho)
        xs = [to_decimal(v) for v in num]
        ys = [to_decimal(v) for v in den]
        mass = sum(abs(v) for v in xs) + sum(abs(v) for v in ys)
        one_minus = 1 - abs(r)
        value = mpmath.mpf(1)
        rk = mpmath.mpf(1)
        for k in range(trunc.max_terms):
            for x in xs:
                f = 1 - x * rk
                if is_negligible(f, 1):
                    return Fraction(0)
                value *= f
            for y in ys:
                f = 1 - y * rk
                if is_negligible(f, 1):
                    raise PoleError(f"zero denominator factor at k = {k}")
                value /= f
            rk *= r
            head = mass * abs(rk)
            if max((abs(v * rk) for v in xs + ys), default=0) <= 0.5:
                u = 2 * head / one_minus
                if 2 * u <= to_decimal(trunc.tail_target):
                    return value
    raise DivergenceError(f"product not converged within {trunc.max_terms} factors")


def _cancel(num: list, den: list) -> tuple[list, list]:
    rest = []
    for x in num:
        for i, y in enumerate(den):
            if scalars_match(x, y):
                del den[i]
                break
        else:
            rest.append(x)
    return rest, den


def poch_ratio_infinite(num: Sequence, den: Sequence, base, trunc: TruncationPolicy | None = None) -> Scalar:
    """``lim_N prod ((a_i, b_i); (p, q))_N / prod ((c_j, d_j); (p, q))_N``.

    Each doublet is reduced to a one-base factor at ``rho = q/p``; the
    prefactors ``a**N p**(N(N-1)/2)`` cancel because the lists have equal
    length and equal products of p-components.
    """
    trunc = trunc or TruncationPolicy()
    base = as_base(base)
    num = [as_doublet(d) for d in num]
    den = [as_doublet(d) for d in den]
    if len(num) != len(den):
        raise DomainError("numerator and denominator need the same number of doublets")
    if base.p == 0:
        raise DomainError("p = 0 has no single-base reduction")
    if any(d.a_p == 0 for d in num + den):
        raise DomainError("zero p-component; reduction undefined")
    pnum = math.prod((d.a_p for d in num), start=Fraction(1))
    pden = math.prod((d.a_p for d in den), start=Fraction(1))
    if not scalars_match(pnum, pden):
        raise DomainError("divergent prefactor: p-component products differ")
    if not base.contracting():
        raise DomainError("infinite product needs |q/p| < 1")
    xs = [d.a_q / d.a_p for d in num]
    ys = [d.a_q / d.a_p for d in den]
    return _product_ratio(xs, ys, base.q / base.p, trunc)


def pq_exponential(kind: str, z: object, base, trunc: TruncationPolicy | None = None) -> Scalar:
    """``e_{p,q}(z)`` (``kind='small_e'``) or ``E_{p,q}(z)`` (``'big_E'``).

    Both share the denominator ``((p, q); (p, q))_n``; the numerators are
    ``p**(n(n-1)/2)`` and ``q**(n(n-1)/2)``.
    """
    return pq_exponential_value(kind, z, base, trunc).value


def pq_exponential_value(kind: str, z: object, base, trunc: TruncationPolicy | None = None) -> SeriesValue:
    trunc = trunc or TruncationPolicy()
    base = as_base(base)
    if kind not in ("small_e", "big_E"):
        raise ValueError(f"unknown exponential kind {kind!r}")
    if not base.contracting():
        raise DomainError("exponentials need |q/p| < 1")
    z = to_scalar(z)
    if z == 0:
        return SeriesValue(Fraction(1), 1, Fraction(0), True)
    with decimal_context():
        p, q, zz = to_decimal(base.p), to_decimal(base.q), to_decimal(z)
        grow = p if kind == "small_e" else q
        state = {"g": mpmath.mpf(1), "p": p, "q": q}

        def ratio(n: int):
            # t_{n+1}/t_n = g**n z / (p**(n+1) - q**(n+1))
            g = state["g"]
            state["g"] = g * grow
            val = g * zz / (state["p"] - state["q"])
            state["p"] *= p
            state["q"] *= q
            return val

        return sum_by_ratio(ratio, trunc)


def gbin_expand(n: int, base) -> list[Scalar]:
    """Coefficients ``c_k`` of ``a**(n-k) b**k`` in ``((a, b); (p, q))_n``."""
    if n < 0:
        raise DomainError("expansion order must be nonnegative")
    base = as_base(base)
    p, q = base.p, base.q
    return [
        pq_binomial(n, k, base) * (-1) ** k * spow(p, (n - k) * (n - k - 1) // 2) * spow(q, k * (k - 1) // 2)
        for k in range(n + 1)
    ]


def gbin_evaluate(coeffs: Iterable[Scalar], a: object, b: object) -> Scalar:
    coeffs = list(coeffs)
    n = len(coeffs) - 1
    a, b = to_scalar(a), to_scalar(b)
    return sum((c * spow(a, n - k) * spow(b, k) for k, c in enumerate(coeffs)), Fraction(0))


def pochhammer_zero_index(d, base, limit: int) -> int | None:
    """Smallest ``k < limit`` with ``a p**k == b q**k``, if any.

    Exact for rational inputs; decimal inputs use a rounding-level test.
    """
    a, b = as_doublet(d)
    base = as_base(base)
    p, q = base.p, base.q

    def vanishes(k: int) -> bool:
        lhs, rhs = a * spow(p, k), b * spow(q, k)
        if is_exact(lhs) and is_exact(rhs):
            return lhs == rhs
        with decimal_context():
            return is_negligible(lhs - rhs, abs(lhs) + abs(rhs))

    for k in (0, 1):
        if k < limit and vanishes(k):
            return k
    if limit <= 2 or 0 in (a, b, p, q) or abs(p) == abs(q):
        # a zero factor, or |p| = |q|, makes the factor sequence periodic
        # (or zero) from k = 1 on, so checking k = 0, 1 suffices
        return None
    # a p**k = b q**k  =>  k = log|b/a| / log|p/q|
    with decimal_context():
        est = mpmath.log(abs(to_decimal(b) / to_decimal(a))) / mpmath.log(abs(to_decimal(p) / to_decimal(q)))
    if not mpmath.isfinite(est):
        return None
    centre = int(mpmath.nint(est))
    for k in (centre - 1, centre, centre + 1):
        if 2 <= k < limit and vanishes(k):
            return k
    return None
