"""Registry of named identities with independent left and right evaluators.

Each :class:`IdentityCase` knows its parameter names, an admissibility
predicate, a sampler for admissible points and an evaluator that returns a
list of comparisons.  The first comparison is the headline ``lhs = rhs``;
the rest are additional routes (other closed forms, classical reductions,
exact coefficient checks).  A report passes only if every comparison does.
"""

from __future__ import annotations

import itertools
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Mapping

import mpmath

from .noncomm import NCPoly, nc_binomial_power, oscillator_number, rtt_sides
from .numkernel import (
    DivergenceError,
    DomainError,
    Scalar,
    ToleranceSpec,
    TruncationPolicy,
    decimal_context,
    get_precision,
    is_exact,
    lt,
    sqrt,
    sum_by_ratio,
    to_decimal,
    to_scalar,
)
from .operators import phi_coefficients
from .pqcore import (
    BasePair,
    as_base,
    gbin_evaluate,
    gbin_expand,
    pochhammer_zero_index,
    poch_ratio_infinite,
    pq_binomial,
    pq_exponential,
    pq_pochhammer,
    qpochhammer,
    qpochhammer_infinite,
)
from .series import Phi, Psi11, eval_Phi, eval_phi_classical, eval_Psi11, phi

RAMANUJAN_NOTE = "base typo corrected"
EULER_TRUNCATION = TruncationPolicy(max_terms=200, tail_target=Fraction(1, 10**33))


# -- reports -------------------------------------------------------------------

@dataclass
class VerificationReport:
    identity: str
    params: dict
    base: BasePair
    precision_digits: int
    truncation_terms: int
    lhs: str
    rhs: str
    abs_residual: str
    rel_residual: str
    tolerance: str
    passed: bool
    notes: list = field(default_factory=list)

    def to_json(self) -> dict:
        return {
            "identity": self.identity,
            "params": {k: _dec(v) for k, v in self.params.items()},
            "base": {"p": _dec(self.base.p), "q": _dec(self.base.q)},
            "precision_digits": self.precision_digits,
            "truncation_terms": self.truncation_terms,
            "lhs": self.lhs,
            "rhs": self.rhs,
            "abs_residual": self.abs_residual,
            "rel_residual": self.rel_residual,
            "tolerance": self.tolerance,
            "pass": self.passed,
            "notes": list(self.notes),
        }


def _dec(x) -> str:
    """Decimal string at the declared precision; integers print as such."""
    x = to_scalar(x)
    if x == 0:
        return "0"
    if is_exact(x) and x.denominator == 1:
        return str(x.numerator)
    with decimal_context():
        return mpmath.nstr(to_decimal(x), get_precision())


def _display(v) -> str:
    if isinstance(v, NCPoly):
        return str(v)
    if isinstance(v, (list, tuple)):
        return "[" + "; ".join(_display(x) for x in v) + "]"
    return _dec(v)


@dataclass
class _Check:
    label: str
    lhs: object
    rhs: object
    mode: str = "tol"  # "tol", "exact" or "differ"


def _residual(lhs, rhs) -> tuple[Scalar, Scalar]:
    """``(|lhs - rhs|, scale)`` for scalars, NCPolys and nested lists."""
    if isinstance(lhs, NCPoly):
        words = set(lhs.terms) | set(rhs.terms)
        parts = [_residual(lhs.terms.get(w, 0), rhs.terms.get(w, 0)) for w in words]
        return _max([d for d, _ in parts]), _max([s for _, s in parts])
    if isinstance(lhs, (list, tuple)):
        if len(lhs) != len(rhs):
            raise ValueError("compared sequences differ in length")
        parts = [_residual(a, b) for a, b in zip(lhs, rhs)]
        return _max([d for d, _ in parts]), _max([s for _, s in parts])
    lhs, rhs = to_scalar(lhs), to_scalar(rhs)
    if not (is_exact(lhs) and is_exact(rhs)):
        # an exact zero against a rounded value: no relative scale exists,
        # so compare at unit scale
        unit = (is_exact(lhs) and lhs == 0) or (is_exact(rhs) and rhs == 0)
        lhs, rhs = to_decimal(lhs), to_decimal(rhs)
        if unit:
            return abs(lhs - rhs), _max([abs(lhs), abs(rhs), Fraction(1)])
    return abs(lhs - rhs), _max([abs(lhs), abs(rhs)])


def _max(values) -> Scalar:
    best: Scalar = Fraction(0)
    for v in values:
        if lt(best, v):
            best = v
    return best


def _within(diff, scale, tol: ToleranceSpec) -> bool:
    with decimal_context():
        d = to_decimal(diff)
        return bool(d <= to_decimal(tol.abs_tol) or d <= to_decimal(tol.rel_tol) * to_decimal(scale))


class _Tally:
    """Records the deepest truncation used by any series on either side."""

    def __init__(self) -> None:
        self.terms = 0

    def __call__(self, sv):
        self.terms = max(self.terms, sv.terms_used)
        return sv.value


# -- registry ------------------------------------------------------------------

Params = Mapping[str, Scalar]


@dataclass(frozen=True)
class IdentityCase:
    name: str
    summary: str
    parameters: tuple
    exactness: str
    admissible: Callable[[Params, BasePair], str | None]
    evaluate: Callable[[Params, BasePair, TruncationPolicy, _Tally], list]
    sample: Callable[[random.Random], tuple[dict, BasePair]]
    example: tuple
    notes: tuple = ()

    def __str__(self) -> str:
        return self.name


_REGISTRY: dict[str, IdentityCase] = {}


def _register(case: IdentityCase) -> None:
    if case.name in _REGISTRY:
        raise ValueError(f"duplicate identity {case.name}")
    _REGISTRY[case.name] = case


def list_identities() -> list[IdentityCase]:
    return list(_REGISTRY.values())


def get_identity(name: str) -> IdentityCase:
    try:
        return _REGISTRY[name]
    except KeyError:
        raise KeyError(f"unknown identity {name!r}") from None


# -- sampling helpers ----------------------------------------------------------

def _rat(rng: random.Random, lo, hi, den: int = 12) -> Fraction:
    lo, hi = Fraction(lo), Fraction(hi)
    d = rng.randint(2, den)
    a, b = math.ceil(lo * d), math.floor(hi * d)
    return Fraction(rng.randint(a, b), d)


def _nz(rng: random.Random, lo, hi, den: int = 12) -> Fraction:
    while True:
        x = _rat(rng, lo, hi, den)
        if x != 0:
            return x


def _signed(rng: random.Random, lo, hi, den: int = 12) -> Fraction:
    """Magnitude in ``[lo, hi]`` with a random sign."""
    x = _rat(rng, lo, hi, den)
    return x if rng.random() < 0.5 else -x


def _twin_base(rng: random.Random) -> BasePair:
    p = _rat(rng, Fraction(1, 2), 2)
    while p == 0:
        p = _rat(rng, Fraction(1, 2), 2)
    rho = _rat(rng, Fraction(1, 10), Fraction(7, 10), 20)
    while rho == 0:
        rho = _rat(rng, Fraction(1, 10), Fraction(7, 10), 20)
    return BasePair(p, p * rho)


def _classical_base(rng: random.Random, lo=Fraction(1, 10), hi=Fraction(7, 10)) -> BasePair:
    q = _nz(rng, lo, hi, 20)
    return BasePair(1, q)


# -- admissibility helpers -----------------------------------------------------

def _contracting(base: BasePair) -> str | None:
    if base.p == 0 or not base.contracting():
        return "needs |q/p| < 1"
    return None


def _poles(doublets, base: BasePair, limit: int = 400) -> str | None:
    for d in doublets:
        if tuple(d)[0] == 0 and tuple(d)[1] == 0:
            return f"zero doublet {tuple(d)}"
        k = pochhammer_zero_index(d, base, limit)
        if k is not None:
            return f"denominator doublet {tuple(map(_dec, d))} vanishes at index {k}"
    return None


def _nonzero(params: Params, *names: str) -> str | None:
    for n in names:
        if params[n] == 0:
            return f"{n} must be nonzero"
    return None


def _first(*reasons) -> str | None:
    for r in reasons:
        if r:
            return r
    return None


def _int(params: Params, name: str) -> int:
    v = params[name]
    if not is_exact(v) or v.denominator != 1:
        raise DomainError(f"{name} must be an integer")
    return int(v)


def _mode(*values) -> str:
    return "exact" if all(is_exact(v) for v in values) else "tol"


# -- one-sided helpers shared by several cases -----------------------------------

def _bilateral(pos_ratio, neg_ratio, trunc: TruncationPolicy, T: _Tally) -> Scalar:
    """``t_0 + sum_{n>0} t_n + sum_{n>0} t_-n`` from the two term ratios."""
    right = T(sum_by_ratio(pos_ratio, trunc))
    first_left = neg_ratio(0)
    if first_left == 0:
        return right
    left = T(sum_by_ratio(neg_ratio, trunc, first_term=first_left))
    return right + left


def _infinite_product(factor, rho: Scalar, trunc: TruncationPolicy) -> Scalar:
    """``prod_{n>=1} factor(n)`` where ``|factor(n) - 1|`` decays like ``rho**n``."""
    value = mpmath.mpf(1)
    r = abs(to_decimal(rho))
    target = to_decimal(trunc.tail_target)
    for n in range(1, trunc.max_terms + 1):
        f = factor(n)
        value *= f
        dev = abs(f - 1)
        if dev <= mpmath.mpf(1) / 2 and 4 * dev * r / (1 - r) <= target:
            return value
    raise DivergenceError(f"product not converged within {trunc.max_terms} factors")


# -- cases ---------------------------------------------------------------------

def _binom_adm(P, B):
    return _first(_contracting(B), None if lt(abs(P["a"] * P["z"]), abs(B.p)) else "needs |a z/p| < 1")


def _binom_eval(P, B, trunc, T):
    a, b, z = P["a"], P["b"], P["z"]
    lhs = T(eval_Phi(Phi([(a, b)], [], B, z), trunc))
    rhs = poch_ratio_infinite([(B.p, b * z)], [(B.p, a * z)], B, trunc)
    checks = [_Check("series = product ratio", lhs, rhs)]
    if lt(abs(b * z), abs(B.p)):
        other = T(eval_Phi(Phi([(b, a)], [], B, z), trunc))
        checks.append(_Check("reciprocity with swapped doublet", lhs * other, 1))
    return checks


def _binom_sample(rng):
    B = _twin_base(rng)
    a, b = _rat(rng, -3, 3), _rat(rng, -3, 3)
    m = max(abs(a), abs(b), 1)
    z = _rat(rng, Fraction(-9, 10), Fraction(9, 10), 20) * B.p / m
    return {"a": a, "b": b, "z": z}, B


_register(IdentityCase(
    "pq_binomial_theorem", "1Phi0((a,b);-;(p,q),z) = ((p,bz))_inf/((p,az))_inf",
    ("a", "b", "z"), "numeric", _binom_adm, _binom_eval, _binom_sample,
    ({"a": Fraction(1, 2), "b": Fraction(1, 3), "z": Fraction(1, 2)}, BasePair(1, Fraction(1, 2))),
))


_PERM_NAMES = ("a1p", "a2p", "a3p", "a1q", "a2q", "a3q", "z")


def _perm_adm(P, B):
    r = _contracting(B)
    if r:
        return r
    for n in ("a1p", "a2p", "a3p"):
        if not lt(abs(P[n] * P["z"]), abs(B.p)):
            return f"needs |{n} z/p| < 1"
    return None


def _perm_eval(P, B, trunc, T):
    ap = [P["a1p"], P["a2p"], P["a3p"]]
    aq = [P["a1q"], P["a2q"], P["a3q"]]
    z = P["z"]
    cache = {}

    def series(u, v):
        key = (u, v)
        if key not in cache:
            cache[key] = T(eval_Phi(Phi([(u, v)], [], B, z), trunc))
        return cache[key]

    lhs = series(ap[0], aq[0]) * series(ap[1], aq[1]) * series(ap[2], aq[2])
    rhs = poch_ratio_infinite([(B.p, x * z) for x in aq], [(B.p, x * z) for x in ap], B, trunc)
    checks = [_Check("product of series = product ratio", lhs, rhs)]
    perms = list(itertools.permutations(range(3)))
    for s, t in itertools.product(perms, perms):
        if s == t == (0, 1, 2):
            continue
        val = series(ap[s[0]], aq[t[0]]) * series(ap[s[1]], aq[t[1]]) * series(ap[s[2]], aq[t[2]])
        checks.append(_Check(f"permutation p{s} q{t}", val, lhs))
    matched = series(ap[0], ap[1]) * series(ap[1], ap[2]) * series(ap[2], ap[0])
    checks.append(_Check("matched components give 1", matched, 1))
    u, v, w = ap
    checks.append(_Check("uv * vw = uw", series(u, v) * series(v, w), series(u, w)))
    return checks


def _perm_sample(rng):
    B = _twin_base(rng)
    vals = [_rat(rng, -3, 3) for _ in range(6)]
    m = max([abs(x) for x in vals[:3]] + [1])
    z = _nz(rng, Fraction(-9, 10), Fraction(9, 10), 20) * B.p / m
    return dict(zip(_PERM_NAMES, vals + [z])), B


_register(IdentityCase(
    "permutation_product_law", "prod_i 1Phi0((a_ip,a_iq)) depends only on the multisets of components",
    _PERM_NAMES, "numeric", _perm_adm, _perm_eval, _perm_sample,
    ({"a1p": Fraction(1), "a2p": Fraction(1, 2), "a3p": Fraction(-1, 3), "a1q": Fraction(2, 3),
      "a2q": Fraction(-1, 4), "a3q": Fraction(1, 5), "z": Fraction(1, 2)}, BasePair(1, Fraction(1, 3))),
))


def _exp_adm(P, B):
    return _first(_contracting(B), None if lt(abs(P["z"]), abs(B.p)) else "needs |z| < |p|")


def _exp_eval(P, B, trunc, T):
    z = P["z"]
    e = pq_exponential("small_e", z, B, trunc)
    E_minus = pq_exponential("big_E", -z, B, trunc)
    E_plus = pq_exponential("big_E", z, B, trunc)
    rho, w = B.q / B.p, z / B.p
    return [
        _Check("e(z) E(-z) = 1", e * E_minus, 1),
        _Check("e(z) = 1/(z/p; q/p)_inf", e, 1 / qpochhammer_infinite(w, rho, trunc)),
        _Check("E(z) = (-z/p; q/p)_inf", E_plus, qpochhammer_infinite(-w, rho, trunc)),
    ]


def _exp_sample(rng):
    B = _twin_base(rng)
    return {"z": _rat(rng, Fraction(-9, 10), Fraction(9, 10), 20) * B.p}, B


_register(IdentityCase(
    "exp_product", "e_{p,q}(z) E_{p,q}(-z) = 1", ("z",), "numeric",
    _exp_adm, _exp_eval, _exp_sample, ({"z": Fraction(1, 3)}, BasePair(1, Fraction(1, 2))),
))


def _prod_adm(P, B):
    if B.p != 1:
        return "classical identity needs p = 1"
    if B.q == 0 or not lt(abs(B.q), 1):
        return "needs 0 < |q| < 1"
    if not lt(abs(P["z"]), 1) or not lt(abs(P["a"] * P["z"]), 1):
        return "needs |z| < 1 and |a z| < 1"
    return None


def _prod_eval(P, B, trunc, T):
    a, b, z, q = P["a"], P["b"], P["z"], B.q
    lhs = T(eval_phi_classical(phi([a], [], q, z), trunc)) * T(eval_phi_classical(phi([b], [], q, a * z), trunc))
    rhs = T(eval_phi_classical(phi([a * b], [], q, z), trunc))
    closed = poch_ratio_infinite([(1, a * b * z)], [(1, z)], (1, q), trunc)
    return [_Check("product formula", lhs, rhs), _Check("product = (abz;q)/(z;q)", lhs, closed)]


def _prod_sample(rng):
    B = _classical_base(rng)
    a, b = _rat(rng, -2, 2), _rat(rng, -2, 2)
    z = _rat(rng, Fraction(-9, 10), Fraction(9, 10), 20) / max(abs(a), 1)
    return {"a": a, "b": b, "z": z}, B


_register(IdentityCase(
    "product_formula_1phi0", "1phi0(a;q,z) 1phi0(b;q,az) = 1phi0(ab;q,z)", ("a", "b", "z"), "numeric",
    _prod_adm, _prod_eval, _prod_sample,
    ({"a": Fraction(1, 2), "b": Fraction(3, 2), "z": Fraction(1, 3)}, BasePair(1, Fraction(1, 2))),
))


def _pqbin_adm(P, B):
    try:
        n = _int(P, "n")
    except DomainError as exc:
        return str(exc)
    if n < 1:
        return "needs n >= 1"
    r = _contracting(B)
    if r:
        return r
    if B.q == 0:
        return "needs q != 0"
    z = P["z"]
    if not lt(abs(z * B.p ** (n - 1)), 1) or not lt(abs(z * B.q ** (n - 1)), 1):
        return "needs |p^(n-1) z| < 1 and |q^(n-1) z| < 1"
    return None


def _coefficient_series(coef, z, trunc, T):
    """``sum_k coef(k) z**k`` for positive, slowly varying coefficients."""
    with decimal_context():
        zd = to_decimal(z)

        def ratio(k):
            return to_decimal(coef(k + 1) / coef(k)) * zd

        return T(sum_by_ratio(ratio, trunc, first_term=to_decimal(coef(0))))


def _pqbin_eval(P, B, trunc, T):
    n, z = _int(P, "n"), P["z"]
    p, q = B.p, B.q
    mode = _mode(p, q, z)
    checks = []

    # main branch
    closed = p ** (n * (n + 1) // 2) / pq_pochhammer((p, p**n * z), B, n)
    series = T(eval_Phi(Phi([(p**n, q**n)], [], B, z), trunc))
    checks.append(_Check("series = p^(n(n+1)/2)/((p,p^n z))_n", series, closed))
    coeffs = _coefficient_series(lambda k: pq_binomial(n - 1 + k, k, B), z, trunc, T)
    checks.append(_Check("binomial-coefficient sum = closed form", coeffs, closed))
    recip_series = T(eval_Phi(Phi([(q**n, p**n)], [], B, z), trunc))
    finite = sum((pq_binomial(n, k, B) * (p * q) ** (k * (k - 1) // 2) * (-z) ** k for k in range(n + 1)),
                 Fraction(0))
    checks.append(_Check("terminating reciprocal series = finite sum", recip_series, finite, mode))
    checks.append(_Check("finite sum = ((p,p^n z))_n/p^(n(n+1)/2)", finite,
                         pq_pochhammer((p, p**n * z), B, n) / p ** (n * (n + 1) // 2), mode))

    # p = 0
    zero = BasePair(0, q)
    g = q ** (n - 1)
    coeff_list = list(phi_coefficients(Phi([(0, q**n)], [], zero, z), 30).coefficients)
    checks.append(_Check("p=0 coefficients are (q^(n-1))^k", coeff_list, [g**k for k in range(31)],
                         _mode(q)))
    checks.append(_Check("p=0 terminating reciprocal = 1 - q^(n-1) z",
                         T(eval_Phi(Phi([(q**n, 0)], [], zero, z), trunc)), 1 - g * z, mode))
    checks.append(_Check("p=0 series = 1/(1 - q^(n-1) z)",
                         T(eval_Phi(Phi([(0, q**n)], [], zero, z), trunc)), 1 / (1 - g * z)))

    # p -> q
    equal = BasePair(q, q)
    checks.append(_Check("[n k]_{q,q} = C(n,k) q^(k(n-k))",
                         [pq_binomial(n, k, equal) for k in range(n + 1)],
                         [math.comb(n, k) * q ** (k * (n - k)) for k in range(n + 1)], _mode(q)))
    lim = _coefficient_series(lambda k: pq_binomial(n - 1 + k, k, equal), z, trunc, T)
    checks.append(_Check("p=q series = (1 - q^(n-1) z)^(-n)", lim, (1 - g * z) ** (-n)))
    finite_eq = sum((pq_binomial(n, k, equal) * (q * q) ** (k * (k - 1) // 2) * (-z) ** k for k in range(n + 1)),
                    Fraction(0))
    checks.append(_Check("p=q finite sum = (1 - q^(n-1) z)^n", finite_eq, (1 - g * z) ** n, mode))

    # (1/q, q)
    inv = BasePair(1 / q, q)
    left = q ** (n * (n + 1) // 2) * pq_pochhammer((1 / q, z * q ** (-n)), inv, n)
    right = sum((pq_binomial(n, k, inv) * (-z) ** k for k in range(n + 1)), Fraction(0))
    checks.append(_Check("(1/q,q) product = sum [n k] (-z)^k", left, right, mode))
    return checks


def _pqbin_sample(rng):
    B = _twin_base(rng)
    n = rng.randint(1, 10)
    m = max(abs(B.p) ** (n - 1), abs(B.q) ** (n - 1), 1)
    z = _rat(rng, Fraction(-9, 10), Fraction(9, 10), 20) / m
    return {"n": Fraction(n), "z": z}, B


_register(IdentityCase(
    "pqbin_family", "1Phi0((p^n,q^n)) closed forms with the p=0, p->q and (1/q,q) branches",
    ("n", "z"), "exact", _pqbin_adm, _pqbin_eval, _pqbin_sample,
    ({"n": Fraction(3), "z": Fraction(1, 4)}, BasePair(Fraction(3, 2), Fraction(1, 2))),
))


def _gbin_adm(P, B):
    try:
        n = _int(P, "n")
    except DomainError as exc:
        return str(exc)
    return None if n >= 0 else "needs n >= 0"


def _gbin_eval(P, B, trunc, T):
    n, a, b = _int(P, "n"), P["a"], P["b"]
    lhs = pq_pochhammer((a, b), B, n)
    rhs = gbin_evaluate(gbin_expand(n, B), a, b)
    return [_Check("product = expansion", lhs, rhs, _mode(a, b, B.p, B.q))]


def _gbin_sample(rng):
    B = BasePair(_rat(rng, -3, 3), _rat(rng, -3, 3))
    return {"n": Fraction(rng.randint(0, 12)), "a": _rat(rng, -3, 3), "b": _rat(rng, -3, 3)}, B


_register(IdentityCase(
    "gbin_equality", "((a,b);(p,q))_n = sum [n k] (-1)^k p^C(n-k,2) q^C(k,2) a^(n-k) b^k",
    ("n", "a", "b"), "exact", _gbin_adm, _gbin_eval, _gbin_sample,
    ({"n": Fraction(5), "a": Fraction(7), "b": Fraction(5)}, BasePair(2, 3)),
))


_HEINE = ("a", "b", "c", "d", "e", "f", "z")


def _heine_adm(P, B):
    a, b, c, d, e, f, z = (P[k] for k in _HEINE)
    p = B.p
    return _first(
        _contracting(B),
        _nonzero(P, "c", "e"),
        None if lt(abs(a * c * z), abs(e * p)) else "needs |acz/(ep)| < 1",
        None if lt(abs(d), abs(c)) else "needs |d/c| < 1",
        _poles([(e, f), (p * e, b * c * z), (c * e, c * f), (p * e, a * c * z)], B),
    )


def _heine_eval(P, B, trunc, T):
    a, b, c, d, e, f, z = (P[k] for k in _HEINE)
    p = B.p
    lhs = T(eval_Phi(Phi([(a, b), (c, d)], [(e, f)], B, z), trunc))
    factor = poch_ratio_infinite([(c * e, d * e), (p * e, b * c * z)], [(c * e, c * f), (p * e, a * c * z)], B, trunc)
    with decimal_context():
        arg = to_decimal(p) / to_decimal(c * e)
    inner = T(eval_Phi(Phi([(d * e, c * f), (p * e, a * c * z)], [(p * e, b * c * z)], B, arg), trunc))
    return [_Check("Heine transformation", lhs, factor * inner)]


def _heine_sample(rng):
    B = _twin_base(rng)
    a, b, c, e, f = (_nz(rng, -2, 2) for _ in range(5))
    d = c * _rat(rng, Fraction(-9, 10), Fraction(9, 10), 20)
    z = _nz(rng, Fraction(-9, 10), Fraction(9, 10), 20) * abs(e * B.p / (a * c))
    return dict(zip(_HEINE, (a, b, c, d, e, f, z))), B


_register(IdentityCase(
    "heine_transformation", "(p,q)-Heine transformation of 2Phi1", _HEINE, "numeric",
    _heine_adm, _heine_eval, _heine_sample,
    (dict(zip(_HEINE, map(Fraction, ("1/2", "1/3", "1", "1/4", "1", "1/5", "1/2")))), BasePair(1, Fraction(1, 2))),
))


def _classical_adm(B: BasePair) -> str | None:
    if B.p != 1:
        return "classical identity needs p = 1"
    if B.q == 0 or not lt(abs(B.q), 1):
        return "needs 0 < |q| < 1"
    return None


def _phi11t_adm(P, B):
    a, b, z = P["a"], P["b"], P["z"]
    return _first(
        _classical_adm(B),
        _nonzero(P, "a"),
        None if lt(abs(a), 1) else "needs |a| < 1",
        _poles([(1, b), (1, z)], B),
    )


def _phi11t_eval(P, B, trunc, T):
    a, b, z, q = P["a"], P["b"], P["z"], B.q
    lhs = T(eval_phi_classical(phi([a], [b], q, z), trunc))
    factor = poch_ratio_infinite([(1, a), (1, z)], [(1, b), (1, 0)], B, trunc)
    inner = T(eval_phi_classical(phi([0, b / a], [z], q, a), trunc))
    return [_Check("1phi1 transformation", lhs, factor * inner)]


def _phi11t_sample(rng):
    B = _classical_base(rng)
    return {"a": _nz(rng, Fraction(-9, 10), Fraction(9, 10), 20), "b": _nz(rng, -2, 2),
            "z": _nz(rng, -2, 2)}, B


_register(IdentityCase(
    "phi11_transformation", "1phi1(a;b;q,z) = (a,z;q)_inf/(b;q)_inf 2phi1(0,b/a;z;q,a)", ("a", "b", "z"),
    "numeric", _phi11t_adm, _phi11t_eval, _phi11t_sample,
    ({"a": Fraction(1, 2), "b": Fraction(1, 3), "z": Fraction(3, 2)}, BasePair(1, Fraction(1, 2))),
))


def _phi11s_adm(P, B):
    return _first(_classical_adm(B), _nonzero(P, "a"), _poles([(1, P["b"])], B))


def _phi11s_eval(P, B, trunc, T):
    a, b, q = P["a"], P["b"], B.q
    lhs = T(eval_phi_classical(phi([a], [b], q, b / a), trunc))
    rhs = poch_ratio_infinite([(1, b / a)], [(1, b)], B, trunc)
    return [_Check("1phi1 summation", lhs, rhs)]


def _phi11s_sample(rng):
    return {"a": _nz(rng, -2, 2), "b": _nz(rng, -2, 2)}, _classical_base(rng)


_register(IdentityCase(
    "phi11_summation", "1phi1(a;b;q,b/a) = (b/a;q)_inf/(b;q)_inf", ("a", "b"), "numeric",
    _phi11s_adm, _phi11s_eval, _phi11s_sample,
    ({"a": Fraction(2), "b": Fraction(1, 3)}, BasePair(1, Fraction(1, 2))),
))


_GAUSS = ("a", "b", "c", "d", "e", "f")


def _gauss_adm(P, B):
    a, b, c, d, e, f = (P[k] for k in _GAUSS)
    r = _first(_contracting(B), _nonzero(P, "b", "d", "e"))
    if r:
        return r
    if not lt(abs(a * c * f), abs(b * d * e)):
        return "inadmissible: needs |acf/bde| < 1"
    return _poles([(e, f), (b * d * e, a * c * f)], B)


def _gauss_eval(P, B, trunc, T):
    a, b, c, d, e, f = (P[k] for k in _GAUSS)
    p = B.p
    lhs = T(eval_Phi(Phi([(a, b), (c, d)], [(e, f)], B, p * f / (b * d)), trunc))
    rhs = poch_ratio_infinite([(b * e, a * f), (d * e, c * f)], [(e, f), (b * d * e, a * c * f)], B, trunc)
    return [_Check("Gauss sum", lhs, rhs)]


def _gauss_sample(rng):
    B = _twin_base(rng)
    a, b, c, d, e = (_nz(rng, -2, 2) for _ in range(5))
    f = _nz(rng, Fraction(-9, 10), Fraction(9, 10), 20) * b * d * e / (a * c)
    return dict(zip(_GAUSS, (a, b, c, d, e, f))), B


_register(IdentityCase(
    "gauss_sum", "2Phi1((a,b),(c,d);(e,f);(p,q),pf/bd) = ((be,af),(de,cf))_inf/((e,f),(bde,acf))_inf",
    _GAUSS, "numeric", _gauss_adm, _gauss_eval, _gauss_sample,
    (dict(zip(_GAUSS, map(Fraction, ("1", "3", "1", "5", "1", "1/7")))), BasePair(1, Fraction(1, 2))),
))


_SIGMA = ("a", "b", "c", "d", "sigma")


def _sigma_adm(P, B):
    a, b, c, d, s = (P[k] for k in _SIGMA)
    return _first(
        _contracting(B),
        _nonzero(P, "d"),
        None if lt(abs(s * a * b), abs(d)) else "needs |sigma ab/d| < 1",
        _poles([(d, s * c), (d, s * a * b)], B),
    )


def _sigma_eval(P, B, trunc, T):
    a, b, c, d, s = (P[k] for k in _SIGMA)
    lhs = T(eval_Phi(Phi([(a, 1), (b, c)], [(d, s * c)], B, s * B.p), trunc))
    rhs = poch_ratio_infinite([(d, s * a * c), (d, s * b)], [(d, s * c), (d, s * a * b)], B, trunc)
    return [_Check("sigma form", lhs, rhs)]


def _sigma_sample(rng):
    B = _twin_base(rng)
    a, b, c, d = (_nz(rng, -2, 2) for _ in range(4))
    s = _nz(rng, Fraction(-9, 10), Fraction(9, 10), 20) * d / (a * b)
    return dict(zip(_SIGMA, (a, b, c, d, s))), B


_register(IdentityCase(
    "sigma_form", "2Phi1((a,1),(b,c);(d,sc);(p,q),sp) = ((d,sac),(d,sb))_inf/((d,sc),(d,sab))_inf",
    _SIGMA, "numeric", _sigma_adm, _sigma_eval, _sigma_sample,
    (dict(zip(_SIGMA, map(Fraction, ("1/2", "1/3", "3", "1", "1")))), BasePair(1, Fraction(1, 2))),
))


def _corq_adm(P, B):
    return _first(_classical_adm(B), _poles([(1, B.q * P["z"])], B))


def _corq_eval(P, B, trunc, T):
    q, z = B.q, P["z"]
    with decimal_context():
        qd, zd = to_decimal(q), to_decimal(z)
        state = {"qn": qd}

        def ratio(n):
            # q^(2n+1) z / ((1 - q^(n+1)) (1 - q^(n+1) z))
            qn1 = state["qn"]
            state["qn"] = qn1 * qd
            return qn1 * qn1 / qd * zd / ((1 - qn1) * (1 - qn1 * zd))

        lhs = T(sum_by_ratio(ratio, trunc))
    rhs = 1 / qpochhammer_infinite(q * z, q, trunc)
    alt = T(eval_Phi(Phi([(0, 1), (0, 1)], [(1, q * z)], B, q * z), trunc))
    return [_Check("sum q^(n^2) z^n/(q,qz;q)_n = 1/(qz;q)_inf", lhs, rhs),
            _Check("2Phi1 form", alt, rhs)]


def _corq_sample(rng):
    return {"z": _rat(rng, Fraction(-1, 2), Fraction(1, 2), 20)}, _classical_base(rng)


_register(IdentityCase(
    "gauss_corollary_qsquare", "sum q^(n^2) z^n/((q;q)_n (qz;q)_n) = 1/(qz;q)_inf", ("z",), "numeric",
    _corq_adm, _corq_eval, _corq_sample, ({"z": Fraction(1, 2)}, BasePair(1, Fraction(1, 2))),
))


def _cors_adm(P, B):
    r = _classical_adm(B)
    if r:
        return r
    return None if B.q > 0 else "needs q > 0"


def _cors_eval(P, B, trunc, T):
    q, z = B.q, P["z"]
    with decimal_context():
        qd, zd = to_decimal(q), to_decimal(z)
        rq = sqrt(q)
        state = {"qn": mpmath.mpf(1)}

        def ratio(n):
            # -q^(n+1/2) z / (1 - q^(n+1))
            qn = state["qn"]
            state["qn"] = qn * qd
            return -qn * to_decimal(rq) * zd / (1 - qn * qd)

        lhs = T(sum_by_ratio(ratio, trunc))
        rhs = qpochhammer_infinite(rq * zd, q, trunc)
        alt = T(eval_Phi(Phi([(0, 1), (1, 0)], [(1, 0)], B, rq * zd), trunc))
    return [_Check("sum (-1)^n q^(n^2/2) z^n/(q;q)_n = (sqrt(q) z;q)_inf", lhs, rhs),
            _Check("2Phi1 form", alt, rhs)]


def _cors_sample(rng):
    return {"z": _rat(rng, Fraction(-1, 2), Fraction(1, 2), 20)}, _classical_base(rng)


_register(IdentityCase(
    "gauss_corollary_sqrtq", "sum (-1)^n q^(n^2/2) z^n/(q;q)_n = (sqrt(q) z;q)_inf", ("z",), "numeric",
    _cors_adm, _cors_eval, _cors_sample, ({"z": Fraction(1, 2)}, BasePair(1, Fraction(1, 3))),
))


_RAM = ("a", "b", "c", "d", "z")


def _ram_adm(P, B):
    a, b, c, d, z = (P[k] for k in _RAM)
    r = _first(_contracting(B), _nonzero(P, "a", "b", "c", "d", "z"))
    if r:
        return r
    if B.q == 0:
        return "needs q != 0"
    if not (lt(abs(d / b), abs(z)) and lt(abs(z), abs(c / a))):
        return "needs |d/b| < |z| < |c/a|"
    return _poles([(c, d), (B.p * b, B.q * a), (c, a * z), (B.p * b * z, B.p * d)], B)


def _classical_psi11(A, Bc, R, Z, trunc, T) -> Scalar:
    """``sum_{n in Z} (A;R)_n/(Bc;R)_n Z**n`` from the classical two halves."""
    with decimal_context():
        A, Bc, R, Z = (to_decimal(v) for v in (A, Bc, R, Z))
        pos = {"r": mpmath.mpf(1)}
        neg = {"r": R}

        def pos_ratio(n):
            rn = pos["r"]
            pos["r"] = rn * R
            return (1 - A * rn) / (1 - Bc * rn) * Z

        def neg_ratio(n):
            # t_{-(n+1)}/t_{-n} = (1 - R^(n+1)/Bc)/(1 - R^(n+1)/A) * Bc/(A Z)
            rn = neg["r"]
            neg["r"] = rn * R
            return (1 - rn / Bc) / (1 - rn / A) * Bc / (A * Z)

        return _bilateral(pos_ratio, neg_ratio, trunc, T)


def _ram_eval(P, B, trunc, T):
    a, b, c, d, z = (P[k] for k in _RAM)
    p, q = B.p, B.q
    bilateral = T(eval_Psi11(Psi11((a, b), (c, d), B, z), trunc))
    product = poch_ratio_infinite(
        [(p, q), (b * c, a * d), (c, b * z), (p * b * z, q * c)],
        [(c, d), (p * b, q * a), (c, a * z), (p * b * z, p * d)], B, trunc)
    classical = _classical_psi11(b / a, d / c, q / p, z * a / c, trunc, T)
    return [_Check("bilateral sum = product", bilateral, product),
            _Check("classical reduction = product", classical, product),
            _Check("bilateral sum = classical reduction", bilateral, classical)]


def _ram_sample(rng):
    B = _twin_base(rng)
    while True:
        a, b, c, d = (_nz(rng, -2, 2) for _ in range(4))
        lo, hi = Fraction(11, 10) * abs(d / b), Fraction(9, 10) * abs(c / a)
        if lo < hi:
            break
    mag = lo + (hi - lo) * Fraction(rng.randint(0, 20), 20)
    z = mag if rng.random() < 0.5 else -mag
    return dict(zip(_RAM, (a, b, c, d, z))), B


_register(IdentityCase(
    "ramanujan_sum", "1Psi1((a,b);(c,d);(p,q),z) as a ratio of eight infinite products", _RAM, "numeric",
    _ram_adm, _ram_eval, _ram_sample,
    (dict(zip(_RAM, map(Fraction, ("1", "2", "3", "1", "1")))), BasePair(1, Fraction(1, 2))),
    (RAMANUJAN_NOTE,),
))


_JTP = ("a", "c", "z")


def _jtp_adm(P, B):
    r = _first(_contracting(B), _nonzero(P, "a", "c", "z"))
    if r:
        return r
    if not (B.p > 0 and B.q > 0):
        return "needs p, q > 0"
    return None


def _jtp_eval(P, B, trunc, T):
    a, c, z = P["a"], P["c"], P["z"]
    p, q = B.p, B.q
    rho = q / p
    with decimal_context():
        rd, w = to_decimal(rho), to_decimal(z) / to_decimal(a * c)
        sr = mpmath.sqrt(rd)
        pos = {"r": sr}
        neg = {"r": sr}

        def pos_ratio(n):
            # t_{n+1}/t_n = -rho^(n+1/2) w
            rn = pos["r"]
            pos["r"] = rn * rd
            return -rn * w

        def neg_ratio(n):
            rn = neg["r"]
            neg["r"] = rn * rd
            return -rn / w

        lhs = _bilateral(pos_ratio, neg_ratio, trunc, T)
        sp, sq = sqrt(p), sqrt(q)
        ca = c * a
        rhs = poch_ratio_infinite(
            [(p, q), (sp * ca, sq * z), (sp * z, sq * ca)], [(p, 0), (sp * ca, 0), (sp * z, 0)], B, trunc)
        classical = (qpochhammer_infinite(rd, rd, trunc) * qpochhammer_infinite(sr * w, rd, trunc)
                     * qpochhammer_infinite(sr / w, rd, trunc))
        bilateral = T(eval_Psi11(Psi11((0, 1), (1, 0), (1, rd), w * sr), trunc))
        checks = [_Check("bilateral sum = doublet product", lhs, rhs),
                  _Check("doublet product = classical product", rhs, classical),
                  _Check("1Psi1 form = bilateral sum", bilateral, lhs)]
        if ca == 1:
            pd_, qd_, zd = to_decimal(p), to_decimal(q), to_decimal(z)
            sp_, sq_ = mpmath.sqrt(pd_), mpmath.sqrt(qd_)

            def factor(n):
                ph, qh = pd_ ** (n - 1) * sp_, qd_ ** (n - 1) * sq_
                return ((pd_**n - qd_**n) * (ph - qh * zd) * (ph * zd - qh)) / (pd_ ** (3 * n - 1) * zd)

            explicit = _infinite_product(factor, rd, trunc)
            checks.append(_Check("explicit product = doublet product", explicit, rhs))
    return checks


def _jtp_sample(rng):
    rho = Fraction(rng.randint(1, 6), 10)
    p = _rat(rng, Fraction(1, 2), 2)
    a = _nz(rng, -2, 2)
    z = _signed(rng, Fraction(1, 5), Fraction(9, 10), 20)
    while z == 0:
        z = _signed(rng, Fraction(1, 5), Fraction(9, 10), 20)
    return {"a": a, "c": 1 / a, "z": z}, BasePair(p, p * rho)


_register(IdentityCase(
    "jacobi_triple_product", "sum (-1)^n rho^(n^2/2) (z/ac)^n as doublet, explicit and classical products",
    _JTP, "numeric", _jtp_adm, _jtp_eval, _jtp_sample,
    ({"a": Fraction(1), "c": Fraction(1), "z": Fraction(1, 2)}, BasePair(1, Fraction(1, 3))),
))


def _euler_adm(P, B):
    r = _classical_adm(B)
    if r:
        return r
    return None if 0 < B.q else "needs 0 < q < 1"


def _euler_eval(P, B, trunc, T):
    q = B.q
    with decimal_context():
        qd = to_decimal(q)
        # exponent (3n^2 - n)/2 steps by 3n + 1 going up and 3n + 2 going down
        pos = {"r": qd}
        neg = {"r": qd * qd}

        def pos_ratio(n):
            rn = pos["r"]
            pos["r"] = rn * qd**3
            return -rn

        def neg_ratio(n):
            rn = neg["r"]
            neg["r"] = rn * qd**3
            return -rn

        lhs = _bilateral(pos_ratio, neg_ratio, trunc, T)
    rhs = qpochhammer_infinite(q, q, EULER_TRUNCATION)
    alt = T(eval_Psi11(Psi11((0, 1), (1, 0), (1, q**3), q), trunc))
    return [_Check("pentagonal sum = (q;q)_inf", lhs, rhs), _Check("1Psi1 form = (q;q)_inf", alt, rhs)]


def _euler_sample(rng):
    return {}, BasePair(1, _nz(rng, Fraction(1, 10), Fraction(2, 3), 30))


_register(IdentityCase(
    "euler_identity", "sum_{n in Z} (-1)^n q^((3n^2-n)/2) = (q;q)_inf", (), "numeric",
    _euler_adm, _euler_eval, _euler_sample, ({}, BasePair(1, Fraction(1, 2))),
))


def _osc_adm(P, B):
    try:
        N = _int(P, "N_max")
    except DomainError as exc:
        return str(exc)
    if N < 0:
        return "needs N_max >= 0"
    if B.p == 0:
        return "needs p != 0"
    if 1 / B.p == B.q:
        return "realization denominator p^-1 - q vanishes"
    return None


def _osc_eval(P, B, trunc, T):
    N = _int(P, "N_max")
    p, q = B.p, B.q
    mode = _mode(p, q)
    checks = []
    for k in range(N, -1, -1):
        lhs = oscillator_number(k + 1, p, q) - q * oscillator_number(k, p, q)
        checks.append(_Check(f"N={k}", lhs, p ** (-k), mode))
    return checks


def _osc_sample(rng):
    while True:
        p, q = _nz(rng, -3, 3), _nz(rng, -3, 3)
        if 1 / p != q:
            return {"N_max": Fraction(20)}, BasePair(p, q)


_register(IdentityCase(
    "oscillator_realization", "f(N+1) - q f(N) = p^-N for f(N) = (p^-N - q^N)/(p^-1 - q)", ("N_max",),
    "exact", _osc_adm, _osc_eval, _osc_sample, ({"N_max": Fraction(20)}, BasePair(2, 3)),
))


def _opb_adm(P, B):
    try:
        n = _int(P, "n")
    except DomainError as exc:
        return str(exc)
    if n < 0:
        return "needs n >= 0"
    if B.p == 0 or B.q == 0:
        return "needs p, q != 0"
    return None


def _opb_eval(P, B, trunc, T):
    n = _int(P, "n")
    mode = _mode(B.p, B.q)
    lhs, qform, qinv = nc_binomial_power(n, B.p, B.q, True)
    clhs, cq, cqinv = nc_binomial_power(n, B.p, B.q, False)
    return [_Check("(ax+by)^n = sum [n k]_{p,q} a^(n-k) b^k y^k x^(n-k)", lhs, qform, mode),
            _Check("(ax+by)^n = sum [n k]_{1/p,1/q} b^(n-k) a^k x^k y^(n-k)", lhs, qinv, mode),
            _Check("(x+y)^n = sum [n k]_q y^k x^(n-k)", clhs, cq, mode),
            _Check("(x+y)^n = sum [n k]_{1/q} x^k y^(n-k)", clhs, cqinv, mode)]


def _opb_sample(rng):
    return {"n": Fraction(rng.randint(0, 8))}, BasePair(_nz(rng, -3, 3), _nz(rng, -3, 3))


_register(IdentityCase(
    "operator_binomials", "noncommutative binomial expansions under xy = q yx, ab = p^-1 ba", ("n",),
    "exact", _opb_adm, _opb_eval, _opb_sample, ({"n": Fraction(4)}, BasePair(2, 3)),
))


def _rtt_adm(P, B):
    return None if B.p > 0 and B.q > 0 else "needs p, q > 0"


def _rtt_eval(P, B, trunc, T):
    with decimal_context():
        lhs, rhs, _ = rtt_sides(B.p, B.q)
    exact = (_mode(B.p, B.q) == "exact" and is_exact(sqrt(B.p * B.q)) and is_exact(sqrt(B.p / B.q)))
    mode = "exact" if exact else "tol"
    return [_Check("R T1 T2 = T2 T1 R", lhs, rhs, mode)]


def _rtt_sample(rng):
    u = _nz(rng, Fraction(1, 4), 3)
    k, m = _nz(rng, Fraction(1, 3), 2), _nz(rng, Fraction(1, 3), 2)
    return {}, BasePair(abs(u * k * k), abs(u * m * m))


_register(IdentityCase(
    "rtt", "GL_{p,q}(2) relations satisfy the RTT relation", (), "exact",
    _rtt_adm, _rtt_eval, _rtt_sample, ({}, BasePair(Fraction(9, 4), Fraction(1, 4))),
))


# -- Hermite -----------------------------------------------------------------------

def hermite_coefficients(n: int, base) -> list[Scalar]:
    """``[n k]_{p,q}`` for ``k = 0..n``: the weight of ``exp(i(n-2k)theta)``."""
    if n < 0:
        raise DomainError("degree must be nonnegative")
    base = as_base(base)
    return [pq_binomial(n, k, base) for k in range(n + 1)]


def hermite_pq(n: int, theta: object, base) -> Scalar:
    """Continuous two-parameter Hermite polynomial at ``x = cos(theta)``.

    The sum over ``exp(i(n-2k)theta)`` is real by the symmetry of the
    binomials, so it is evaluated as ``sum [n k] cos((n-2k)theta)``.
    """
    coeffs = hermite_coefficients(n, base)
    with decimal_context():
        t = to_decimal(theta)
        return sum((to_decimal(c) * mpmath.cos((n - 2 * k) * t) for k, c in enumerate(coeffs)), mpmath.mpf(0))


def _classical_gaussian(n: int, k: int, q: Scalar) -> Scalar:
    return qpochhammer(q, q, n) / (qpochhammer(q, q, k) * qpochhammer(q, q, n - k))


def _classical_hermite_recurrence(n: int, theta, q) -> Scalar:
    """``H_{m+1} = 2x H_m - (1 - q^m) H_{m-1}`` from ``H_0 = 1``, ``H_1 = 2x``."""
    with decimal_context():
        x = mpmath.cos(to_decimal(theta))
        qd = to_decimal(q)
        prev, cur = mpmath.mpf(1), 2 * x
        if n == 0:
            return prev
        for m in range(1, n):
            prev, cur = cur, 2 * x * cur - (1 - qd**m) * prev
        return cur


def _herm_adm(P, B, classical):
    try:
        n = _int(P, "n")
    except DomainError as exc:
        return str(exc)
    if n < 0:
        return "needs n >= 0"
    if classical:
        if B.p != 1:
            return "specialization needs p = 1"
        if abs(B.q) == 1:
            return "needs |q| != 1"
    elif B.p == 0 or B.p == B.q:
        return "needs p != 0 and p != q"
    return None


def _herm_spec_eval(P, B, trunc, T):
    n, theta, q = _int(P, "n"), P["theta"], B.q
    coeffs = hermite_coefficients(n, B)
    classical = [_classical_gaussian(n, k, q) for k in range(n + 1)]
    value = hermite_pq(n, theta, B)
    with decimal_context():
        t = to_decimal(theta)
        direct = sum((to_decimal(c) * mpmath.cos((n - 2 * k) * t) for k, c in enumerate(classical)),
                     mpmath.mpf(0))
    return [_Check("H_n(x|1,q) = H_n(x|q)", value, direct),
            _Check("coefficients [n k]_{1,q} = (q;q)_n/((q;q)_k (q;q)_(n-k))", coeffs, classical, _mode(q)),
            _Check("three-term recurrence", _classical_hermite_recurrence(n, theta, q), value)]


def _herm_rescale_eval(P, B, trunc, T):
    n, theta = _int(P, "n"), P["theta"]
    p, q = B.p, B.q
    rho = q / p
    coeffs = hermite_coefficients(n, B)
    rescaled = [p ** (k * (n - k)) * pq_binomial(n, k, BasePair(1, rho)) for k in range(n + 1)]
    value = hermite_pq(n, theta, B)
    with decimal_context():
        t = to_decimal(theta)
        via_classical = sum((to_decimal(p ** (k * (n - k)) * _classical_gaussian(n, k, rho))
                             * mpmath.cos((n - 2 * k) * t) for k in range(n + 1)), mpmath.mpf(0))
    checks = [_Check("[n k]_{p,q} = p^(k(n-k)) [n k]_{1,q/p}", coeffs, rescaled, _mode(p, q)),
              _Check("H_n(x|p,q) = sum p^(k(n-k)) [n k]_{q/p} e^(i(n-2k)theta)", value, via_classical)]
    if p not in (1, -1):
        checks.append(_Check("H_3(x|p,q) differs from H_3(x|q/p)",
                             hermite_pq(3, theta, B), hermite_pq(3, theta, BasePair(1, rho)), "differ"))
    return checks


def _herm_spec_sample(rng):
    q = _nz(rng, Fraction(-9, 10), Fraction(9, 10), 20)
    return {"n": Fraction(rng.randint(0, 10)), "theta": _rat(rng, 0, 3, 20)}, BasePair(1, q)


def _herm_rescale_sample(rng):
    B = _twin_base(rng)
    while B.p == 1:
        B = _twin_base(rng)
    return {"n": Fraction(rng.randint(0, 12)), "theta": _rat(rng, Fraction(1, 10), Fraction(3, 2), 20)}, B


_register(IdentityCase(
    "hermite_specialization", "H_n(x|1,q) equals the continuous q-Hermite polynomial", ("n", "theta"),
    "exact", lambda P, B: _herm_adm(P, B, True), _herm_spec_eval, _herm_spec_sample,
    ({"n": Fraction(4), "theta": Fraction(1, 2)}, BasePair(1, Fraction(1, 2))),
))

_register(IdentityCase(
    "hermite_rescale", "[n k]_{p,q} = p^(k(n-k)) [n k]_{1,q/p}; H_n(x|p,q) is not H_n(x|q/p)", ("n", "theta"),
    "exact", lambda P, B: _herm_adm(P, B, False), _herm_rescale_eval, _herm_rescale_sample,
    ({"n": Fraction(3), "theta": Fraction(1, 2)}, BasePair(2, Fraction(1, 2))),
))


# -- verification ----------------------------------------------------------------

def _coerce_params(case: IdentityCase, params: Mapping | None) -> dict:
    defaults, _ = case.example
    merged = dict(defaults)
    for k, v in (params or {}).items():
        if k not in case.parameters:
            raise ValueError(f"{case.name} has no parameter {k!r}; expected {list(case.parameters)}")
        merged[k] = v
    missing = [k for k in case.parameters if k not in merged]
    if missing:
        raise ValueError(f"{case.name} is missing parameters {missing}")
    return {k: to_scalar(merged[k]) for k in case.parameters}


def verify_identity(name: str, params: Mapping | None = None, base=None, tol: ToleranceSpec | None = None,
                    trunc: TruncationPolicy | None = None, notes: tuple = ()) -> VerificationReport:
    """Evaluate every route of the named identity and compare them.

    Missing parameters and base fall back to the case's example point.
    Inadmissible points give a failing report with an ``inadmissible`` note.
    """
    case = get_identity(name)
    P = _coerce_params(case, params)
    B = as_base(base) if base is not None else case.example[1]
    tol = tol or ToleranceSpec()
    trunc = trunc or TruncationPolicy()
    all_notes = list(case.notes) + list(notes)
    if tol.abs_tol != 0:
        all_notes.append(f"abs_tol={_dec(tol.abs_tol)}")

    def failed(reason: str) -> VerificationReport:
        return VerificationReport(name, P, B, get_precision(), 0, "", "", "", "", _dec(tol.rel_tol), False,
                                  all_notes + [reason])

    reason = case.admissible(P, B)
    if reason:
        return failed(reason if reason.startswith("inadmissible") else f"inadmissible: {reason}")
    T = _Tally()
    try:
        with decimal_context():
            checks = case.evaluate(P, B, trunc, T)
    except DivergenceError:
        raise
    except DomainError as exc:
        return failed(f"inadmissible: {exc}")

    ok = True
    worst_abs: Scalar = Fraction(0)
    worst_rel: Scalar = Fraction(0)
    exact_all = all(c.mode == "exact" for c in checks)
    for c in checks:
        with decimal_context():
            diff, scale = _residual(c.lhs, c.rhs)
        if c.mode == "exact":
            good = diff == 0
        elif c.mode == "differ":
            good = not _within(diff, scale, tol)
            if good:
                continue
        else:
            good = _within(diff, scale, tol)
        with decimal_context():
            rel = Fraction(0) if scale == 0 else diff / scale
        worst_abs = _max([worst_abs, diff])
        worst_rel = _max([worst_rel, rel])
        if not good:
            ok = False
            all_notes.append(f"failed: {c.label} (rel residual {_dec(rel)})")
    main = checks[0]
    all_notes.append(f"checks={len(checks)}")
    return VerificationReport(
        name, P, B, get_precision(), T.terms, _display(main.lhs), _display(main.rhs),
        _dec(worst_abs), _dec(worst_rel), "0" if exact_all else _dec(tol.rel_tol), ok, all_notes)


def sample_params(name: str, rng: random.Random, attempts: int = 1000) -> tuple[dict, BasePair]:
    """Rejection-sample an admissible point for the named identity."""
    case = get_identity(name)
    for _ in range(attempts):
        P, B = case.sample(rng)
        P = {k: to_scalar(v) for k, v in P.items()}
        if case.admissible(P, B) is None:
            return P, B
    raise DomainError(f"no admissible sample for {name} after {attempts} attempts")


def run_suite(seed: int = 0, samples: int = 10, names=None, tol: ToleranceSpec | None = None,
              trunc: TruncationPolicy | None = None) -> list[VerificationReport]:
    """``samples`` reports per identity, drawn from a per-identity RNG.

    Evaluation errors become failing reports rather than exceptions.
    """
    if samples < 0:
        raise ValueError("samples must be nonnegative")
    names = list(names) if names is not None else [c.name for c in list_identities()]
    for n in names:
        get_identity(n)
    reports = []
    for name in names:
        rng = random.Random(f"{seed}:{name}")
        for i in range(samples):
            tag = (f"seed={seed}", f"sample={i}")
            P, B = sample_params(name, rng)
            try:
                reports.append(verify_identity(name, P, B, tol, trunc, tag))
            except DivergenceError as exc:
                case = get_identity(name)
                reports.append(VerificationReport(
                    name, P, B, get_precision(), 0, "", "", "", "", _dec((tol or ToleranceSpec()).rel_tol),
                    False, list(case.notes) + list(tag) + [f"divergence: {exc}"]))
    return reports


def summarize(reports) -> dict:
    """Per-identity pass/fail counts and the worst relative residual."""
    out: dict = {}
    for r in reports:
        s = out.setdefault(r.identity, {"passed": 0, "failed": 0, "worst_rel_residual": "0"})
        s["passed" if r.passed else "failed"] += 1
        if r.rel_residual:
            with decimal_context():
                if mpmath.mpf(r.rel_residual) > mpmath.mpf(s["worst_rel_residual"]):
                    s["worst_rel_residual"] = r.rel_residual
    return out
