"""Numeric substrate shared by every other module.

A *scalar* is either an exact :class:`fractions.Fraction` or an
:class:`mpmath.mpf` carrying a working precision.  Integers are promoted to
``Fraction`` on entry.  Arithmetic between the two kinds is delegated to
mpmath, which promotes the rational side, so mixed expressions come out in
decimal mode automatically.

The declared precision (decimal digits) is held in a context variable and
set with :func:`precision`.  Evaluators that produce decimals run inside
:func:`decimal_context`, which adds guard digits on top of the declared
precision.
"""

from __future__ import annotations

import contextlib
import contextvars
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterator, Union

import mpmath
from mpmath import mpf

Scalar = Union[Fraction, mpf]

DEFAULT_DIGITS = 50
GUARD_DIGITS = 12

_digits: contextvars.ContextVar[int] = contextvars.ContextVar("twinbasic_digits", default=DEFAULT_DIGITS)


class TwinBasicError(ArithmeticError):
    """Base class for every error raised by the package."""


class DomainError(TwinBasicError, ValueError):
    """Input outside the domain of an operation (zero divisors, bad bases)."""


class PoleError(DomainError):
    """A denominator factor of a series vanished before the sum terminated."""


class DivergenceError(TwinBasicError):
    """A series or product did not converge within its truncation policy."""


def get_precision() -> int:
    return _digits.get()


@contextlib.contextmanager
def precision(digits: int) -> Iterator[int]:
    """Declare the working precision (decimal digits) for a block."""
    if digits < 1:
        raise ValueError("precision must be positive")
    token = _digits.set(int(digits))
    try:
        with decimal_context():
            yield digits
    finally:
        _digits.reset(token)


@contextlib.contextmanager
def decimal_context() -> Iterator[None]:
    """Run mpmath at the declared precision plus guard digits."""
    with mpmath.workdps(_digits.get() + GUARD_DIGITS):
        yield


def is_exact(x: object) -> bool:
    return isinstance(x, (int, Fraction))


def to_scalar(x: object) -> Scalar:
    """Coerce ints, Fractions, floats, mpf values and strings to a scalar.

    Strings of the form ``"22/7"`` or ``"-3"`` stay exact; anything with a
    decimal point or exponent is read in decimal mode.
    """
    if isinstance(x, bool):
        raise TypeError("booleans are not scalars")
    if isinstance(x, Fraction):
        return x
    if isinstance(x, int):
        return Fraction(x)
    if isinstance(x, mpf):
        return x
    if isinstance(x, float):
        return mpf(x)
    if isinstance(x, str):
        return parse_scalar(x)
    if isinstance(x, mpmath.mpc):
        if x.imag != 0:
            raise DomainError("complex scalars are not supported")
        return x.real
    raise TypeError(f"cannot interpret {x!r} as a scalar")


def to_decimal(x: object) -> mpf:
    """Convert to mpf; rationals are rounded at no less than working precision."""
    x = to_scalar(x)
    if isinstance(x, Fraction):
        with mpmath.workdps(max(mpmath.mp.dps, _digits.get() + GUARD_DIGITS)):
            return mpf(x.numerator) / x.denominator
    return x


def promote(*values: object) -> tuple:
    """Coerce to scalars; if any is decimal, make them all decimal."""
    xs = tuple(to_scalar(v) for v in values)
    if all(isinstance(x, Fraction) for x in xs):
        return xs
    return tuple(to_decimal(x) for x in xs)


def _comparable(a, b):
    if isinstance(a, Fraction) and isinstance(b, mpf):
        return to_decimal(a), b
    if isinstance(a, mpf) and isinstance(b, Fraction):
        return a, to_decimal(b)
    return a, b


def lt(a, b) -> bool:
    """``a < b`` across exact and decimal scalars."""
    a, b = _comparable(a, b)
    return bool(a < b)


def le(a, b) -> bool:
    a, b = _comparable(a, b)
    return bool(a <= b)


def smax(*values):
    best = values[0]
    for v in values[1:]:
        if lt(best, v):
            best = v
    return best


def parse_scalar(text: str) -> Scalar:
    s = text.strip()
    if not s:
        raise ValueError("empty scalar string")
    if "/" in s:
        num, den = s.split("/", 1)
        return Fraction(int(num), int(den))
    try:
        return Fraction(int(s))
    except ValueError:
        pass
    with decimal_context():
        try:
            return mpf(s)
        except (ValueError, TypeError) as exc:
            raise ValueError(f"not a scalar: {text!r}") from exc


def format_scalar(x: object, digits: int | None = None) -> str:
    """Rational strings for exact values, decimal strings otherwise."""
    x = to_scalar(x)
    if isinstance(x, Fraction):
        if x.denominator == 1:
            return str(x.numerator)
        return f"{x.numerator}/{x.denominator}"
    if digits is None:
        digits = get_precision()
    if x == 0:
        return "0.0"
    return mpmath.nstr(x, digits, min_fixed=-5, max_fixed=digits)


def sqrt(x: object) -> Scalar:
    """Square root, exact when ``x`` is the square of a rational."""
    x = to_scalar(x)
    if isinstance(x, Fraction):
        r = exact_sqrt(x)
        if r is not None:
            return r
    if x < 0:
        raise DomainError("square root of a negative scalar")
    with decimal_context():
        return mpmath.sqrt(to_decimal(x))


def exact_sqrt(x: Fraction) -> Fraction | None:
    if x < 0:
        return None
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def sdiv(a: Scalar, b: Scalar) -> Scalar:
    """Division that raises :class:`DomainError` instead of returning inf."""
    if b == 0:
        raise DomainError("division by zero")
    if isinstance(a, Fraction) and isinstance(b, mpf):
        a = to_decimal(a)
    return a / b


def spow(x: Scalar, n: int) -> Scalar:
    """Integer power; ``0**0 == 1`` and negative powers of zero are errors."""
    if n < 0 and x == 0:
        raise DomainError("negative power of zero")
    if isinstance(x, int):
        x = Fraction(x)  # int ** -n would be a float
    return x**n


@dataclass(frozen=True)
class ToleranceSpec:
    abs_tol: Scalar = Fraction(0)
    rel_tol: Scalar = Fraction(1, 10**30)

    def __post_init__(self) -> None:
        object.__setattr__(self, "abs_tol", to_scalar(self.abs_tol))
        object.__setattr__(self, "rel_tol", to_scalar(self.rel_tol))
        if self.abs_tol < 0 or self.rel_tol < 0:
            raise ValueError("tolerances must be nonnegative")

    @classmethod
    def exact(cls) -> "ToleranceSpec":
        return cls(Fraction(0), Fraction(0))

    @property
    def is_exact(self) -> bool:
        return self.abs_tol == 0 and self.rel_tol == 0


@dataclass(frozen=True)
class TruncationPolicy:
    max_terms: int = 100_000
    tail_target: Scalar = Fraction(1, 10**42)
    consecutive_small: int = 3

    def __post_init__(self) -> None:
        object.__setattr__(self, "tail_target", to_scalar(self.tail_target))
        if self.max_terms < 1:
            raise ValueError("max_terms must be at least 1")
        if self.tail_target <= 0:
            raise ValueError("tail_target must be positive")
        if self.consecutive_small < 1:
            raise ValueError("consecutive_small must be at least 1")


def approx_equal(a: object, b: object, tol: ToleranceSpec) -> bool:
    """``|a-b| <= abs_tol`` or ``|a-b| <= rel_tol*max(|a|,|b|)``.

    Two exact rationals under a zero tolerance compare exactly.
    """
    a, b = to_scalar(a), to_scalar(b)
    if tol.is_exact:
        return a == b
    with decimal_context():
        a, b = to_decimal(a), to_decimal(b)
        diff = abs(a - b)
        if diff <= to_decimal(tol.abs_tol):
            return True
        return bool(diff <= to_decimal(tol.rel_tol) * max(abs(a), abs(b)))


def geometric_tail_bound(last_term: object, ratio: object) -> Scalar:
    """Bound ``|t| r/(1-r)`` on the tail after a term ``t`` when later
    term ratios stay below ``r``."""
    t, r = abs(to_scalar(last_term)), abs(to_scalar(ratio))
    if le(1, r):
        raise DomainError("non-contracting tail")
    if t == 0 or r == 0:
        return Fraction(0)
    return t * r / (1 - r)


def is_negligible(x: Scalar, scale: Scalar) -> bool:
    """True when ``x`` is zero, or below rounding noise relative to ``scale``."""
    if x == 0:
        return True
    if isinstance(x, Fraction):
        return False
    eps = mpmath.mpf(2) ** (-(mpmath.mp.prec - 16))
    return bool(abs(x) <= eps * abs(to_decimal(scale)))


def scalars_match(a: Scalar, b: Scalar) -> bool:
    """Exact equality for rationals, rounding-level equality for decimals."""
    if is_exact(a) and is_exact(b):
        return a == b
    with decimal_context():
        a, b = to_decimal(a), to_decimal(b)
        return is_negligible(a - b, max(abs(a), abs(b)))


@dataclass(frozen=True)
class SeriesValue:
    value: Scalar
    terms_used: int
    tail_bound: Scalar
    terminated: bool

    def __post_init__(self) -> None:
        if self.tail_bound < 0:
            raise ValueError("tail_bound must be nonnegative")
        if self.terminated and self.tail_bound != 0:
            raise ValueError("a terminated sum has no tail")


def sum_by_ratio(ratio, trunc: TruncationPolicy, *, terminate_at: int | None = None,
                 first_term: Scalar = Fraction(1)) -> SeriesValue:
    """Sum ``t_0 + t_1 + ...`` given ``ratio(n) = t_{n+1}/t_n``.

    ``ratio`` returns ``0`` when a numerator factor vanishes, which ends the
    sum.  With ``terminate_at = m`` the sum is known to stop after ``t_m`` and
    is accumulated in whatever arithmetic ``ratio`` produces (exact for
    rational inputs).  Otherwise terms are added until the geometric tail
    bound over the last ``consecutive_small`` ratios drops below
    ``trunc.tail_target``.
    """
    t = first_term
    total = t
    if terminate_at is not None:
        for n in range(terminate_at):
            t = t * ratio(n)
            total += t
        return SeriesValue(total, terminate_at + 1, Fraction(0), True)

    window: list = []
    run_small = 0
    run_large = 0
    for n in range(trunc.max_terms):
        r = ratio(n)
        if r == 0:
            return SeriesValue(total, n + 1, Fraction(0), True)
        t = t * r
        total += t
        size = abs(r)
        if size < 1:
            run_small += 1
            run_large = 0
            window.append(size)
            if len(window) > trunc.consecutive_small:
                window.pop(0)
        else:
            run_small = 0
            run_large += 1
            window.clear()
            # ratios that stay above 1 this long never come back down for
            # the geometric-type series handled here
            if n > 200 and run_large > 100:
                raise DivergenceError(f"terms growing after {n + 1} terms")
        if run_small >= trunc.consecutive_small:
            # widen the observed ratio so slowly increasing ratios stay covered
            bound = geometric_tail_bound(t, mpmath.sqrt(to_decimal(max(window))))
            if le(bound, trunc.tail_target):
                return SeriesValue(total, n + 2, bound, False)
    raise DivergenceError(f"series not converged within {trunc.max_terms} terms")
