"""(p,q)-difference operators acting on truncated power series.

All operators here are diagonal on monomials up to a shift, so they are
implemented on coefficient lists: ``f(pz)`` multiplies the ``z**n``
coefficient by ``p**n``.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable

from .numkernel import DomainError, PoleError, Scalar, sdiv, smax, spow, to_scalar
from .pqcore import as_base, twin_basic_number
from .series import SeriesSpec


@dataclass(frozen=True)
class FormalSeries:
    """Coefficients ``c_0 .. c_N`` of a power series truncated at ``z**N``."""

    coefficients: tuple

    def __post_init__(self) -> None:
        coeffs = tuple(to_scalar(c) for c in self.coefficients)
        if not coeffs:
            raise ValueError("a formal series needs at least one coefficient")
        object.__setattr__(self, "coefficients", coeffs)

    @property
    def order(self) -> int:
        return len(self.coefficients) - 1

    @classmethod
    def monomial(cls, n: int, order: int | None = None) -> "FormalSeries":
        order = n if order is None else order
        return cls(tuple(Fraction(1) if k == n else Fraction(0) for k in range(order + 1)))

    def __getitem__(self, n: int) -> Scalar:
        return self.coefficients[n]

    def __add__(self, other: "FormalSeries") -> "FormalSeries":
        n = min(self.order, other.order)
        return FormalSeries(tuple(self[k] + other[k] for k in range(n + 1)))

    def __sub__(self, other: "FormalSeries") -> "FormalSeries":
        n = min(self.order, other.order)
        return FormalSeries(tuple(self[k] - other[k] for k in range(n + 1)))

    def scale(self, c: object) -> "FormalSeries":
        c = to_scalar(c)
        return FormalSeries(tuple(c * x for x in self.coefficients))

    def rescale_argument(self, lam: object) -> "FormalSeries":
        """``f(z) -> f(lam z)``."""
        lam = to_scalar(lam)
        return FormalSeries(tuple(c * spow(lam, n) for n, c in enumerate(self.coefficients)))

    def times_z(self) -> "FormalSeries":
        """Multiply by ``z``; the order is kept, dropping the top coefficient."""
        return FormalSeries((Fraction(0),) + self.coefficients[:-1])


@dataclass(frozen=True)
class WeightFunction:
    """Degree weight ``u(n)`` for the u-derivative ``z**n -> u(n) z**(n-1)``."""

    weight: Callable[[int], object]

    def __call__(self, n: int) -> Scalar:
        return to_scalar(self.weight(n))

    @classmethod
    def twin_basic(cls, base) -> "WeightFunction":
        base = as_base(base)
        return cls(lambda n: twin_basic_number(n, base))


def u_derivative(f: FormalSeries, u: WeightFunction) -> FormalSeries:
    if f.order == 0:
        return FormalSeries((Fraction(0),))
    return FormalSeries(tuple(u(n) * f[n] for n in range(1, f.order + 1)))


def pq_derivative(f: FormalSeries, base) -> FormalSeries:
    """``(f(pz) - f(qz))/((p - q) z)`` coefficientwise: ``c_n -> [n] c_n``."""
    return u_derivative(f, WeightFunction.twin_basic(base))


def delta_op(f: FormalSeries, alpha: object, beta: object, base) -> FormalSeries:
    """``alpha f(qz) - beta f(pz)``."""
    base = as_base(base)
    alpha, beta = to_scalar(alpha), to_scalar(beta)
    return FormalSeries(tuple((alpha * spow(base.q, n) - beta * spow(base.p, n)) * c
                              for n, c in enumerate(f.coefficients)))


def divide_by_delta_z(f: FormalSeries, base) -> FormalSeries:
    """Divide a series with zero constant term by ``Delta z = (q - p) z``."""
    base = as_base(base)
    if f[0] != 0:
        raise DomainError("series has a constant term; not divisible by z")
    width = base.q - base.p
    if f.order == 0:
        return FormalSeries((Fraction(0),))
    return FormalSeries(tuple(sdiv(c, width) for c in f.coefficients[1:]))


def phi_coefficients(spec: SeriesSpec, order: int) -> FormalSeries:
    """Coefficients of ``z**n`` in ``_r Phi_s``, ``n = 0 .. order``."""
    if spec.kind != "Phi":
        raise ValueError("needs a Phi spec")
    p, q = spec.base.p, spec.base.q
    k = spec.sign_power
    rho = sdiv(q, p) if k else None
    coeffs = [Fraction(1)]
    c: Scalar = Fraction(1)
    pn: Scalar = Fraction(1)
    qn: Scalar = Fraction(1)
    for n in range(order):
        top: Scalar = Fraction(1)
        for d in spec.numerator:
            top = top * (d.a_p * pn - d.a_q * qn)
        bottom: Scalar = p * pn - q * qn
        for d in spec.denominator:
            bottom = bottom * (d.a_p * pn - d.a_q * qn)
        if bottom == 0:
            raise PoleError(f"denominator vanishes at degree {n + 1}")
        c = c * top / bottom
        if k:
            c = c * spow(-spow(rho, n), k)
        coeffs.append(c)
        pn, qn = pn * p, qn * q
    return FormalSeries(tuple(coeffs))


def phi_difference_sides(spec: SeriesSpec, order: int) -> tuple[FormalSeries, FormalSeries]:
    """Both sides of the difference equation satisfied by ``_r Phi_s``.

    Left: ``Delta prod_i Delta_(b_iq/q, b_ip/p)`` applied to the series.
    Right: ``z prod_i Delta_(a_iq, a_ip)`` applied to the series at
    ``(q/p)**(1+s-r) z``.  The operators are diagonal on monomials, so the
    order of scaling and differencing does not matter.
    """
    base = spec.base
    f = phi_coefficients(spec, order)
    lhs = delta_op(f, 1, 1, base)
    for d in spec.denominator:
        lhs = delta_op(lhs, sdiv(d.a_q, base.q), sdiv(d.a_p, base.p), base)
    rhs = f.rescale_argument(spow(sdiv(base.q, base.p), spec.sign_power))
    for d in spec.numerator:
        rhs = delta_op(rhs, d.a_q, d.a_p, base)
    return lhs, rhs.times_z()


def phi_difference_residual(spec: SeriesSpec, N: int) -> Scalar:
    """Largest ``|lhs_n - rhs_n|`` over degrees ``0..N``; zero when the
    difference equation holds."""
    if N < 1:
        raise ValueError("N must be positive")
    lhs, rhs = phi_difference_sides(spec, N)
    return smax(*(abs(x - y) for x, y in zip(lhs.coefficients, rhs.coefficients)))


def classical_q_derivative_weight(n: int, q: object) -> Scalar:
    q = to_scalar(q)
    return sdiv(1 - spow(q, n), 1 - q)
