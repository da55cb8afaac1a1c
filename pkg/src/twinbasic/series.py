"""Evaluators for twin-basic, classical, bilateral and bibasic series.

Every evaluator works by term recurrence: ``t_{n+1} = t_n * R(n)`` where
``R`` is a rational function of ``p**n`` and ``q**n``.  A sum that
terminates (some numerator factor vanishes) is accumulated exactly when all
inputs are rational; otherwise it is summed in decimal mode until the
geometric tail bound falls below the truncation target.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from fractions import Fraction
from typing import Sequence

from .numkernel import (
    DivergenceError,
    DomainError,
    PoleError,
    Scalar,
    SeriesValue,
    TruncationPolicy,
    decimal_context,
    format_scalar,
    is_exact,
    is_negligible,
    le,
    lt,
    parse_scalar,
    sdiv,
    spow,
    sum_by_ratio,
    to_decimal,
    to_scalar,
)
from .pqcore import BasePair, ParamDoublet, as_base, as_doublet, pochhammer_zero_index

KINDS = ("Phi", "phi", "Psi11", "psi11", "Bibasic")


class StructuralError(DomainError):
    """A conversion between series classes that does not exist."""


@dataclass(frozen=True)
class SeriesSpec:
    """A full description of one series.

    ``Phi`` and ``Psi11`` carry :class:`ParamDoublet` slots and a twin base.
    ``phi``, ``psi11`` and ``Bibasic`` carry plain scalars and a classical
    base stored as ``BasePair(1, q)``; ``Bibasic`` adds a second parameter
    group on the base ``base1``.
    """

    kind: str
    numerator: tuple
    denominator: tuple
    base: BasePair
    argument: Scalar
    numerator1: tuple = ()
    denominator1: tuple = ()
    base1: Scalar | None = None

    def __post_init__(self) -> None:
        if self.kind not in KINDS:
            raise ValueError(f"unknown series kind {self.kind!r}")
        conv = as_doublet if self.kind in ("Phi", "Psi11") else to_scalar
        object.__setattr__(self, "numerator", tuple(conv(x) for x in self.numerator))
        object.__setattr__(self, "denominator", tuple(conv(x) for x in self.denominator))
        object.__setattr__(self, "numerator1", tuple(to_scalar(x) for x in self.numerator1))
        object.__setattr__(self, "denominator1", tuple(to_scalar(x) for x in self.denominator1))
        object.__setattr__(self, "base", as_base(self.base))
        object.__setattr__(self, "argument", to_scalar(self.argument))
        if self.base1 is not None:
            object.__setattr__(self, "base1", to_scalar(self.base1))
        if self.kind in ("Psi11", "psi11") and (len(self.numerator) != 1 or len(self.denominator) != 1):
            raise ValueError("bilateral 1Psi1 takes exactly one numerator and one denominator slot")
        if self.kind == "Bibasic" and self.base1 is None:
            raise ValueError("bibasic series needs a second base")
        if self.kind != "Bibasic" and (self.numerator1 or self.denominator1):
            raise ValueError("only bibasic series carry a second parameter group")

    @property
    def r(self) -> int:
        return len(self.numerator)

    @property
    def s(self) -> int:
        return len(self.denominator)

    @property
    def sign_power(self) -> int:
        """Exponent ``1 + s - r`` of the ``(-1)**n base**(n(n-1)/2)`` factor."""
        return 1 + self.s - self.r

    def with_argument(self, z: object) -> "SeriesSpec":
        return replace(self, argument=to_scalar(z))

    def to_json(self) -> dict:
        def enc(x):
            if isinstance(x, ParamDoublet):
                return [format_scalar(x.a_p), format_scalar(x.a_q)]
            return format_scalar(x)

        out = {
            "kind": self.kind,
            "numerator": [enc(x) for x in self.numerator],
            "denominator": [enc(x) for x in self.denominator],
            "base": {"p": format_scalar(self.base.p), "q": format_scalar(self.base.q)},
            "argument": format_scalar(self.argument),
            "r": self.r,
            "s": self.s,
        }
        if self.kind == "Bibasic":
            out["numerator1"] = [enc(x) for x in self.numerator1]
            out["denominator1"] = [enc(x) for x in self.denominator1]
            out["base1"] = format_scalar(self.base1)
        return out

    @classmethod
    def from_json(cls, data: dict | str) -> "SeriesSpec":
        if isinstance(data, str):
            data = json.loads(data)

        def dec(x):
            if isinstance(x, list):
                return ParamDoublet(parse_scalar(x[0]), parse_scalar(x[1]))
            return parse_scalar(x)

        return cls(
            kind=data["kind"],
            numerator=tuple(dec(x) for x in data["numerator"]),
            denominator=tuple(dec(x) for x in data["denominator"]),
            base=BasePair(parse_scalar(data["base"]["p"]), parse_scalar(data["base"]["q"])),
            argument=parse_scalar(data["argument"]),
            numerator1=tuple(dec(x) for x in data.get("numerator1", ())),
            denominator1=tuple(dec(x) for x in data.get("denominator1", ())),
            base1=parse_scalar(data["base1"]) if "base1" in data else None,
        )


def Phi(numerator: Sequence, denominator: Sequence, base, z) -> SeriesSpec:
    return SeriesSpec("Phi", tuple(numerator), tuple(denominator), as_base(base), z)


def phi(numerator: Sequence, denominator: Sequence, q, z) -> SeriesSpec:
    return SeriesSpec("phi", tuple(numerator), tuple(denominator), BasePair.classical(q), z)


def Psi11(a, c, base, z) -> SeriesSpec:
    return SeriesSpec("Psi11", (a,), (c,), as_base(base), z)


def psi11(a, b, q, z) -> SeriesSpec:
    return SeriesSpec("psi11", (a,), (b,), BasePair.classical(q), z)


def bibasic(a: Sequence, b: Sequence, c: Sequence, d: Sequence, q, q1, z) -> SeriesSpec:
    return SeriesSpec("Bibasic", tuple(a), tuple(b), BasePair.classical(q), z,
                      numerator1=tuple(c), denominator1=tuple(d), base1=q1)


# -- generic machinery -------------------------------------------------------

def _product(values):
    out = Fraction(1)
    for v in values:
        out = out * v
    return out


def _twin_ratio(num, den, p, q, sign_power, z, exact, include_base=True):
    """Build ``R(n) = t_{n+1}/t_n`` for a twin-basic series.

    ``num``/``den`` hold doublets; ``include_base`` adds the
    ``((p, q); (p, q))_n`` denominator.  Numerator zeros return 0;
    denominator zeros raise.
    """
    if not exact:
        p, q, z = to_decimal(p), to_decimal(q), to_decimal(z)
    conv = to_scalar if exact else to_decimal
    tops = [(conv(d.a_p), conv(d.a_q)) for d in num]
    bottoms = [(conv(d.a_p), conv(d.a_q)) for d in den]
    if include_base:
        bottoms.append((p, q))
    rho = sdiv(q, p) if sign_power else None
    state = {"pn": conv(1), "qn": conv(1), "rho_n": conv(1)}

    def ratio(n: int):
        pn, qn = state["pn"], state["qn"]
        state["pn"], state["qn"] = pn * p, qn * q
        value = z
        for ap, aq in tops:
            f = ap * pn - aq * qn
            if f == 0 or (not exact and is_negligible(f, abs(ap * pn) + abs(aq * qn))):
                return 0
            value = value * f
        for ap, aq in bottoms:
            f = ap * pn - aq * qn
            if f == 0 or (not exact and is_negligible(f, abs(ap * pn) + abs(aq * qn))):
                raise PoleError(f"denominator factor vanishes at n = {n}")
            value = value / f
        if sign_power:
            rn = state["rho_n"]
            value = value * spow(-rn, sign_power)
            state["rho_n"] = rn * rho
        return value

    return ratio


def _all_exact(values) -> bool:
    return all(is_exact(v) for v in values)


def _flatten(spec: SeriesSpec) -> list:
    vals = [spec.base.p, spec.base.q, spec.argument]
    for x in spec.numerator + spec.denominator:
        vals.extend(x if isinstance(x, ParamDoublet) else [x])
    vals.extend(spec.numerator1)
    vals.extend(spec.denominator1)
    if spec.base1 is not None:
        vals.append(spec.base1)
    return vals


def _termination(num_doublets, base, trunc) -> int | None:
    hits = [pochhammer_zero_index(d, base, trunc.max_terms) for d in num_doublets]
    hits = [h for h in hits if h is not None]
    return min(hits) if hits else None


def _check_poles(den_doublets, base, upto: int) -> None:
    for d in den_doublets:
        k = pochhammer_zero_index(d, base, upto)
        if k is not None:
            raise PoleError(f"denominator doublet {tuple(d)} vanishes at index {k}")


def _eval_twin(num, den, base: BasePair, z, sign_power: int, trunc: TruncationPolicy, values) -> SeriesValue:
    z = to_scalar(z)
    if z == 0:
        return SeriesValue(Fraction(1), 1, Fraction(0), True)
    if sign_power and base.p == 0:
        raise DomainError("the sign-power factor needs p != 0")
    stop = _termination(num, base, trunc)
    if stop is not None:
        _check_poles(list(den) + [ParamDoublet(base.p, base.q)], base, stop)
        exact = _all_exact(values)
        with decimal_context():
            ratio = _twin_ratio(num, den, base.p, base.q, sign_power, z, exact)
            return sum_by_ratio(ratio, trunc, terminate_at=stop)
    if base.p == 0 and sign_power == 0:
        pass  # p = 0 series (no rho factor) are left to the ratio test
    elif not base.contracting():
        raise DomainError("non-terminating series needs |q/p| < 1")
    with decimal_context():
        ratio = _twin_ratio(num, den, base.p, base.q, sign_power, z, False)
        return sum_by_ratio(ratio, trunc)


# -- public evaluators -------------------------------------------------------

def eval_Phi(spec: SeriesSpec, trunc: TruncationPolicy | None = None) -> SeriesValue:
    """Evaluate ``_r Phi_s`` (twin-basic hypergeometric series)."""
    if spec.kind != "Phi":
        raise ValueError("eval_Phi needs a Phi spec")
    trunc = trunc or TruncationPolicy()
    return _eval_twin(spec.numerator, spec.denominator, spec.base, spec.argument,
                      spec.sign_power, trunc, _flatten(spec))


def _classical_doublets(params) -> list:
    return [ParamDoublet(Fraction(1), x) for x in params]


def eval_phi_classical(spec: SeriesSpec, trunc: TruncationPolicy | None = None) -> SeriesValue:
    """Evaluate the basic hypergeometric series ``_r phi_s``."""
    if spec.kind != "phi":
        raise ValueError("eval_phi_classical needs a phi spec")
    trunc = trunc or TruncationPolicy()
    base = BasePair.classical(spec.base.q)
    return _eval_twin(_classical_doublets(spec.numerator), _classical_doublets(spec.denominator),
                      base, spec.argument, spec.sign_power, trunc, _flatten(spec))


def eval_bibasic(spec: SeriesSpec, trunc: TruncationPolicy | None = None) -> SeriesValue:
    """Evaluate the two-base series with groups ``(a; b)`` on ``q`` and
    ``(c; d)`` on ``q1``.

    Sign-power factors: ``1 + s - r`` on ``q`` and ``s1 - r1`` on ``q1``.
    """
    if spec.kind != "Bibasic":
        raise ValueError("eval_bibasic needs a Bibasic spec")
    trunc = trunc or TruncationPolicy()
    q, q1, z = spec.base.q, spec.base1, spec.argument
    if z == 0:
        return SeriesValue(Fraction(1), 1, Fraction(0), True)
    a, b = list(spec.numerator), list(spec.denominator)
    c, d = list(spec.numerator1), list(spec.denominator1)
    e0 = 1 + len(b) - len(a)
    e1 = len(d) - len(c)
    base_q, base_q1 = BasePair.classical(q), BasePair.classical(q1)
    stops = [_termination(_classical_doublets(a), base_q, trunc),
             _termination(_classical_doublets(c), base_q1, trunc)]
    stops = [s for s in stops if s is not None]
    stop = min(stops) if stops else None
    if stop is None and not (lt(abs(q), 1) and lt(abs(q1), 1)):
        raise DomainError("non-terminating bibasic series needs |q|, |q1| < 1")
    if stop is not None:
        _check_poles(_classical_doublets(b) + [ParamDoublet(1, q)], base_q, stop)
        _check_poles(_classical_doublets(d), base_q1, stop)
    exact = stop is not None and _all_exact(_flatten(spec))

    with decimal_context():
        conv = to_scalar if exact else to_decimal
        q_, q1_, z_ = conv(q), conv(q1), conv(z)
        a_, b_, c_, d_ = ([conv(v) for v in grp] for grp in (a, b, c, d))
        state = {"qn": Fraction(1) if exact else to_decimal(1), "q1n": Fraction(1) if exact else to_decimal(1)}

        def ratio(n: int):
            qn, q1n = state["qn"], state["q1n"]
            nums = [1 - x * qn for x in a_] + [1 - x * q1n for x in c_]
            dens = [1 - x * qn for x in b_] + [1 - x * q1n for x in d_] + [1 - qn * q_]
            for f in nums:
                if f == 0 or (not exact and is_negligible(f, 1)):
                    return 0
            for f in dens:
                if f == 0 or (not exact and is_negligible(f, 1)):
                    raise PoleError(f"denominator factor vanishes at n = {n}")
            val = _product(nums) / _product(dens) * z_
            val = val * spow(-qn, e0) * spow(-q1n, e1)
            state["qn"] = qn * q_
            state["q1n"] = q1n * q1_
            return val

        if stop is not None:
            return sum_by_ratio(ratio, trunc, terminate_at=stop)
        return sum_by_ratio(ratio, trunc)


def psi11_strip(spec: SeriesSpec) -> tuple[Scalar, Scalar]:
    """Open annulus ``(lower, upper)`` for ``|z|`` where ``1Psi1`` converges.

    In doublet form the positive half behaves like ``(a z/c)**n`` and the
    negative half like ``(d/(b z))**n``, so the strip is
    ``|d/b| < |z| < |c/a|``; a zero numerator makes a bound vacuous.
    """
    (a, b), (c, d) = spec.numerator[0], spec.denominator[0]
    lower = Fraction(0) if d == 0 else (abs(d) / abs(b) if b != 0 else None)
    upper = None if a == 0 else (abs(c) / abs(a) if c != 0 else Fraction(0))
    return lower, upper


def eval_Psi11(spec: SeriesSpec, trunc: TruncationPolicy | None = None) -> SeriesValue:
    """Bilateral ``1Psi1((a, b); (c, d); (p, q), z)`` as two one-sided sums.

    The ``n >= 0`` half is ``sum ((a,b))_n/((c,d))_n z**n``; the ``n < 0``
    half uses the negative-index factorials, term ratio
    ``(c p**-n - d q**-n)/((a p**-n - b q**-n) z)``, which equals the
    displayed ``((p/c, q/d))_n/((p/a, q/b))_n (cd/(abz))**n`` form when
    ``a, b, c, d`` are nonzero and stays defined when some of them vanish.
    """
    if spec.kind not in ("Psi11", "psi11"):
        raise ValueError("eval_Psi11 needs a Psi11 or psi11 spec")
    trunc = trunc or TruncationPolicy()
    if spec.kind == "psi11":
        a, b = ParamDoublet(1, spec.numerator[0]), ParamDoublet(1, spec.denominator[0])
        base = BasePair.classical(spec.base.q)
        spec = Psi11(a, b, base, spec.argument)
    base = spec.base
    if not base.contracting() or base.q == 0:
        raise DomainError("bilateral series needs 0 < |q/p| < 1")
    z = spec.argument
    if z == 0:
        raise DomainError("bilateral series undefined at z = 0")
    lower, upper = psi11_strip(spec)
    if lower is None or le(abs(z), lower) or (upper is not None and le(upper, abs(z))):
        raise DivergenceError("argument outside the convergence strip |d/b| < |z| < |c/a|")
    (ap, aq), (cp, cq) = spec.numerator[0], spec.denominator[0]
    with decimal_context():
        pos_ratio = _twin_ratio([ParamDoublet(ap, aq)], [ParamDoublet(cp, cq)], base.p, base.q, 0, z,
                                False, include_base=False)
        first = sum_by_ratio(pos_ratio, trunc)

        a_, b_, c_, d_ = (to_decimal(v) for v in (ap, aq, cp, cq))
        zd = to_decimal(z)
        ip, iq = 1 / to_decimal(base.p), 1 / to_decimal(base.q)
        neg = {"pn": ip, "qn": iq}

        def neg_ratio(n: int):
            # t_{-(n+1)} / t_{-n}
            pn, qn = neg["pn"], neg["qn"]
            top = c_ * pn - d_ * qn
            bottom = a_ * pn - b_ * qn
            neg["pn"] = pn * ip
            neg["qn"] = qn * iq
            if is_negligible(top, abs(c_ * pn) + abs(d_ * qn)):
                return 0
            if is_negligible(bottom, abs(a_ * pn) + abs(b_ * qn)):
                raise PoleError(f"negative-index factor vanishes at n = {n + 1}")
            return top / (bottom * zd)

        first_neg = neg_ratio(0)
        if first_neg == 0:
            second = SeriesValue(Fraction(0), 0, Fraction(0), True)
        else:
            second = sum_by_ratio(neg_ratio, trunc, first_term=first_neg)
    total = first.value + second.value
    return SeriesValue(total, first.terms_used + second.terms_used,
                       first.tail_bound + second.tail_bound,
                       first.terminated and second.terminated)


# -- structural conversions --------------------------------------------------

ZERO_ONE = ParamDoublet(0, 1)
ONE_ZERO = ParamDoublet(1, 0)


def embedding_mu(num_p: Sequence, den_p: Sequence, p) -> Scalar:
    """``mu = b_1p ... b_sp p / (a_1p ... a_rp)``."""
    top = _product(list(den_p)) * to_scalar(p)
    bottom = _product(list(num_p))
    return sdiv(top, bottom)


def embed_phi_to_Phi(spec: SeriesSpec, numerator_p: Sequence | None = None,
                     denominator_p: Sequence | None = None, base_p: object = 1) -> SeriesSpec:
    """Lift ``_r phi_s`` into a twin-basic series of equal value.

    Parameter ``x`` becomes ``(x_p, x * x_p)`` and the base ``q`` becomes
    ``(base_p, q * base_p)``.  The argument is multiplied by ``mu`` and
    ``(0, 1)`` doublets pad whichever side is short of ``s = r - 1``.
    """
    if spec.kind != "phi":
        raise ValueError("embedding starts from a phi spec")
    nump = [to_scalar(x) for x in (numerator_p or [1] * spec.r)]
    denp = [to_scalar(x) for x in (denominator_p or [1] * spec.s)]
    bp = to_scalar(base_p)
    if len(nump) != spec.r or len(denp) != spec.s:
        raise ValueError("one p-component per classical parameter")
    if bp == 0 or any(x == 0 for x in nump + denp):
        raise DomainError("zero p-component in lift")
    num = [ParamDoublet(xp, x * xp) for x, xp in zip(spec.numerator, nump)]
    den = [ParamDoublet(xp, x * xp) for x, xp in zip(spec.denominator, denp)]
    mu = embedding_mu(nump, denp, bp)
    if spec.s > spec.r - 1:
        num += [ZERO_ONE] * (spec.s + 1 - spec.r)
    elif spec.s < spec.r - 1:
        den += [ZERO_ONE] * (spec.r - 1 - spec.s)
    return Phi(num, den, BasePair(bp, spec.base.q * bp), mu * spec.argument)


def project_Phi_to_phi(spec: SeriesSpec) -> SeriesSpec:
    """Inverse of the embedding; exists only for ``s = r - 1``."""
    if spec.kind != "Phi":
        raise ValueError("projection starts from a Phi spec")
    if spec.s != spec.r - 1:
        raise StructuralError("projection exists only for s = r-1")
    if spec.base.p == 0 or any(d.a_p == 0 for d in spec.numerator + spec.denominator):
        raise DomainError("projection needs nonzero p-components")
    mu = embedding_mu([d.a_p for d in spec.numerator], [d.a_p for d in spec.denominator], spec.base.p)
    return phi([d.a_q / d.a_p for d in spec.numerator], [d.a_q / d.a_p for d in spec.denominator],
               spec.base.q / spec.base.p, spec.argument / mu)


def confluence_limit_spec(spec: SeriesSpec, slot: int, which: str) -> SeriesSpec:
    """The series reached by sending one numerator component to infinity.

    With ``z -> z/a_q`` and ``a_q -> inf`` the slot becomes ``(0, 1)``; with
    ``z -> z/a_p`` and ``a_p -> inf`` it becomes ``(1, 0)``.
    """
    if spec.kind != "Phi":
        raise ValueError("confluence acts on Phi specs")
    if not 0 <= slot < spec.r:
        raise IndexError("numerator slot out of range")
    if which not in ("q_component", "p_component"):
        raise ValueError("which must be 'q_component' or 'p_component'")
    new = ZERO_ONE if which == "q_component" else ONE_ZERO
    num = list(spec.numerator)
    num[slot] = new
    return replace(spec, numerator=tuple(num))


def confluence_probe(spec: SeriesSpec, slot: int, which: str, magnitude: object = 10**6,
                     trunc: TruncationPolicy | None = None) -> tuple[Scalar, Scalar]:
    """Evaluate the surrogate (component set to ``magnitude``, argument
    divided by it) and the limiting spec; returns both values."""
    big = to_scalar(magnitude)
    num = list(spec.numerator)
    ap, aq = num[slot]
    num[slot] = ParamDoublet(ap, big) if which == "q_component" else ParamDoublet(big, aq)
    surrogate = replace(spec, numerator=tuple(num), argument=spec.argument / big)
    limit = confluence_limit_spec(spec, slot, which)
    return eval_Phi(surrogate, trunc).value, eval_Phi(limit, trunc).value


def evaluate(spec: SeriesSpec, trunc: TruncationPolicy | None = None) -> SeriesValue:
    """Dispatch on ``spec.kind``."""
    return {
        "Phi": eval_Phi,
        "phi": eval_phi_classical,
        "Psi11": eval_Psi11,
        "psi11": eval_Psi11,
        "Bibasic": eval_bibasic,
    }[spec.kind](spec, trunc)
