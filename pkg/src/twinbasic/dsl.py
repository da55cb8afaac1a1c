"""Expression language for the command line.

Arithmetic on rational and decimal literals plus calls into the library::

    qnum(3;2,1)                      binom(4,2;1,2)
    poch((3,1);(2,1);-1)             pochratio([(1,a)];[(1,b)];(1,q))
    e((1,1/2);1/4)                   Phi[[(1,0)];[];(1,1/2);1/4]
    phi[[a,b];[c];q;z]               Psi[[(1,2)];[(3,1)];(1,1/2);1]
    F_bibasic[[a];[b];[c];[d];q;q1;z]   hermite(3;1/2;2,1)

Slots are separated by ``;`` and items by ``,``.  ``22/7`` is an exact
literal; ``0.5`` is decimal.  Identifiers are free symbols, bound at
evaluation time.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Union

import mpmath

from .identities import hermite_pq
from .numkernel import (
    DomainError,
    Scalar,
    TruncationPolicy,
    decimal_context,
    is_exact,
    parse_scalar,
    promote,
    sdiv,
    spow,
    to_scalar,
)
from .pqcore import (
    BasePair,
    poch_ratio_infinite,
    pq_binomial,
    pq_exponential,
    pq_factorial,
    pq_pochhammer,
    twin_basic_number,
)
from .series import Phi, Psi11, bibasic, eval_bibasic, eval_Phi, eval_phi_classical, eval_Psi11, phi


class ParseError(ValueError):
    def __init__(self, message: str, line: int, column: int, expected=()):
        self.line, self.column = line, column
        self.expected = frozenset(expected)
        self.detail = message
        where = f"line {line}, column {column}"
        if self.expected:
            wanted = " or ".join(f'"{e}"' for e in sorted(self.expected))
            super().__init__(f"{where}: {message}; expected {wanted}")
        else:
            super().__init__(f"{where}: {message}")


class ArityError(ParseError):
    pass


class UnboundSymbolError(KeyError):
    pass


# -- syntax tree -----------------------------------------------------------------

@dataclass(frozen=True)
class Num:
    text: str  # "3", "22/7" or a decimal literal

    @property
    def exact(self) -> bool:
        return "." not in self.text and "e" not in self.text.lower()


@dataclass(frozen=True)
class Sym:
    name: str


@dataclass(frozen=True)
class Neg:
    operand: "Expr"


@dataclass(frozen=True)
class BinOp:
    op: str
    left: "Expr"
    right: "Expr"


@dataclass(frozen=True)
class Pow:
    base: "Expr"
    exponent: int


@dataclass(frozen=True)
class Doublet:
    first: "Expr"
    second: "Expr"


@dataclass(frozen=True)
class ListNode:
    items: tuple


@dataclass(frozen=True)
class Call:
    name: str
    slots: tuple  # tuple of tuples of items


Expr = Union[Num, Sym, Neg, BinOp, Pow, Doublet, ListNode, Call]

# slot kinds: "expr" scalar expression, "doublet", "dlist" list of doublets,
# "elist" list of expressions, "dlist1" one-element list of doublets
SIGNATURES: dict[str, tuple[str, tuple]] = {
    "qnum": ("(", (("expr", 1), ("expr", 2))),
    "fact": ("(", (("expr", 1), ("expr", 2))),
    "binom": ("(", (("expr", 2), ("expr", 2))),
    "poch": ("(", (("doublet", 1), ("doublet", 1), ("expr", 1))),
    "pochratio": ("(", (("dlist", 1), ("dlist", 1), ("doublet", 1))),
    "e": ("(", (("doublet", 1), ("expr", 1))),
    "E": ("(", (("doublet", 1), ("expr", 1))),
    "hermite": ("(", (("expr", 1), ("expr", 1), ("expr", 2))),
    "Phi": ("[", (("dlist", 1), ("dlist", 1), ("doublet", 1), ("expr", 1))),
    "phi": ("[", (("elist", 1), ("elist", 1), ("expr", 1), ("expr", 1))),
    "Psi": ("[", (("dlist1", 1), ("dlist1", 1), ("doublet", 1), ("expr", 1))),
    "F_bibasic": ("[", (("elist", 1),) * 4 + (("expr", 1),) * 3),
}
CLOSE = {"(": ")", "[": "]"}

# the library operation behind each call name
OPERATIONS = {
    "qnum": twin_basic_number,
    "fact": pq_factorial,
    "binom": pq_binomial,
    "poch": pq_pochhammer,
    "pochratio": poch_ratio_infinite,
    "e": pq_exponential,
    "E": pq_exponential,
    "hermite": hermite_pq,
    "Phi": eval_Phi,
    "phi": eval_phi_classical,
    "Psi": eval_Psi11,
    "F_bibasic": eval_bibasic,
}


# -- tokens ----------------------------------------------------------------------

_TOKEN = re.compile(r"""
    (?P<ws>\s+)
  | (?P<dec>\d+\.\d*(?:[eE][+-]?\d+)?|\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<ident>[^\W\d]\w*)
  | (?P<sym>[-+*/^()\[\],;])
""", re.VERBOSE)


@dataclass(frozen=True)
class Token:
    kind: str  # "int", "dec", "ident", "sym", "eof"
    text: str
    line: int
    column: int

    def describe(self) -> str:
        return "end of input" if self.kind == "eof" else f'"{self.text}"'


def tokenize(text: str) -> list[Token]:
    out = []
    pos, line, col = 0, 1, 1
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ParseError(f'unexpected character "{text[pos]}"', line, col)
        chunk = m.group()
        if m.lastgroup != "ws":
            out.append(Token(m.lastgroup, chunk, line, col))
        for ch in chunk:
            if ch == "\n":
                line, col = line + 1, 1
            else:
                col += 1
        pos = m.end()
    out.append(Token("eof", "", line, col))
    return out


# -- parser ----------------------------------------------------------------------

class _Parser:
    def __init__(self, text: str):
        self.toks = tokenize(text)
        self.i = 0

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def at(self, text: str) -> bool:
        return self.tok.kind == "sym" and self.tok.text == text

    def fail(self, expected, message: str | None = None):
        t = self.tok
        raise ParseError(message or f"unexpected {t.describe()}", t.line, t.column, expected)

    def expect(self, text: str, expected=None) -> Token:
        if not self.at(text):
            self.fail(expected or {text})
        t = self.tok
        self.i += 1
        return t

    def parse(self) -> Expr:
        e = self.expr()
        if self.tok.kind != "eof":
            self.fail({"end of input"})
        return e

    def expr(self) -> Expr:
        left = self.term()
        while self.at("+") or self.at("-"):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.term())
        return left

    def term(self) -> Expr:
        left = self.factor()
        while self.at("*") or self.at("/"):
            op = self.tok.text
            self.i += 1
            left = BinOp(op, left, self.factor())
        return left

    def factor(self) -> Expr:
        if self.at("-"):
            self.i += 1
            return Neg(self.factor())
        base = self.atom()
        if self.at("^"):
            self.i += 1
            sign = 1
            if self.at("-"):
                self.i += 1
                sign = -1
            if self.tok.kind != "int":
                self.fail({"integer exponent"})
            n = sign * int(self.tok.text)
            self.i += 1
            return Pow(base, n)
        return base

    def atom(self) -> Expr:
        t = self.tok
        if t.kind == "int":
            self.i += 1
            if self.at("/") and self.toks[self.i + 1].kind == "int":
                den = int(self.toks[self.i + 1].text)
                self.i += 2
                if den == 0:
                    raise ParseError("zero denominator in literal", t.line, t.column)
                return Num(str(Fraction(int(t.text), den)))
            return Num(str(int(t.text)))
        if t.kind == "dec":
            self.i += 1
            return Num(t.text)
        if t.kind == "ident":
            self.i += 1
            if self.at("(") or self.at("["):
                return self.call(t)
            return Sym(t.text)
        if self.at("("):
            self.i += 1
            e = self.expr()
            self.expect(")")
            return e
        self.fail({"number", "identifier", "(", "-"})

    def call(self, name_tok: Token) -> Call:
        name = name_tok.text
        if name not in SIGNATURES:
            raise ParseError(f'unknown function "{name}"', name_tok.line, name_tok.column)
        opener, slots_sig = SIGNATURES[name]
        if not self.at(opener):
            self.fail({opener}, f'"{name}" takes its arguments in {opener}{CLOSE[opener]}')
        close = CLOSE[opener]
        self.i += 1
        slots = []
        for idx, _ in enumerate(slots_sig):
            last = idx == len(slots_sig) - 1
            sep = close if last else ";"
            items = [self.item()]
            while self.at(","):
                self.i += 1
                items.append(self.item())
            if not self.at(sep):
                self.fail({",", sep})
            self.i += 1
            slots.append(tuple(items))
        node = Call(name, tuple(slots))
        _check_kinds(node, name_tok)
        return node

    def item(self) -> Expr:
        if self.at("["):
            self.i += 1
            items = []
            if not self.at("]"):
                items.append(self.item())
                while self.at(","):
                    self.i += 1
                    items.append(self.item())
            self.expect("]", {",", "]"})
            return ListNode(tuple(items))
        if self.at("("):
            mark = self.i
            self.i += 1
            first = self.expr()
            if self.at(","):
                self.i += 1
                second = self.expr()
                self.expect(")", {")"})
                return Doublet(first, second)
            self.i = mark
        return self.expr()


def _kind_of(item) -> str:
    if isinstance(item, Doublet):
        return "doublet"
    if isinstance(item, ListNode):
        if all(isinstance(x, Doublet) for x in item.items) and item.items:
            return "dlist"
        if not item.items:
            return "empty"
        if any(isinstance(x, (Doublet, ListNode)) for x in item.items):
            return "mixed"
        return "elist"
    return "expr"


def _check_kinds(node: Call, at: Token) -> None:
    _, sig = SIGNATURES[node.name]
    for idx, ((kind, count), items) in enumerate(zip(sig, node.slots)):
        if len(items) != count:
            raise ArityError(f"{node.name} slot {idx + 1} takes {count} item(s), got {len(items)}",
                             at.line, at.column)
        for it in items:
            got = _kind_of(it)
            want = "dlist" if kind == "dlist1" else kind
            ok = got == want or (got == "empty" and want in ("dlist", "elist"))
            if kind == "dlist1" and (not isinstance(it, ListNode) or len(it.items) != 1):
                ok = False
            if not ok:
                raise ArityError(f"{node.name} slot {idx + 1} expects {kind}, got {got}", at.line, at.column)


def parse_expr(text: str) -> Expr:
    return _Parser(text).parse()


# -- printer ---------------------------------------------------------------------

_SUM, _PRODUCT, _UNARY, _POWER, _ATOM = 1, 2, 3, 4, 5


def _level(e: Expr) -> int:
    if isinstance(e, BinOp):
        return _SUM if e.op in "+-" else _PRODUCT
    if isinstance(e, Neg):
        return _UNARY
    if isinstance(e, Pow):
        return _POWER
    return _ATOM


def _wrap(e: Expr, need: int) -> str:
    s = to_text(e)
    return f"({s})" if _level(e) < need else s


def to_text(e: Expr) -> str:
    """Canonical text; ``parse_expr(to_text(e)) == e``."""
    if isinstance(e, Num):
        return e.text
    if isinstance(e, Sym):
        return e.name
    if isinstance(e, Neg):
        return "-" + _wrap(e.operand, _UNARY)
    if isinstance(e, BinOp):
        if e.op in "+-":
            return f"{_wrap(e.left, _SUM)}{e.op}{_wrap(e.right, _PRODUCT)}"
        right = _wrap(e.right, _UNARY)
        # "2/3" would re-read as one literal
        if e.op == "/" and right[0].isdigit():
            right = f"({right})"
        return f"{_wrap(e.left, _PRODUCT)}{e.op}{right}"
    if isinstance(e, Pow):
        base = to_text(e.base)
        if _level(e.base) < _ATOM or (isinstance(e.base, Num) and "/" in e.base.text):
            base = f"({base})"
        return f"{base}^{e.exponent}"
    if isinstance(e, Doublet):
        return f"({to_text(e.first)},{to_text(e.second)})"
    if isinstance(e, ListNode):
        return "[" + ",".join(to_text(x) for x in e.items) + "]"
    if isinstance(e, Call):
        opener = SIGNATURES[e.name][0]
        body = ";".join(",".join(to_text(x) for x in slot) for slot in e.slots)
        return f"{e.name}{opener}{body}{CLOSE[opener]}"
    raise TypeError(f"not an expression node: {e!r}")


# -- evaluation --------------------------------------------------------------------

def _binop(op: str, a: Scalar, b: Scalar) -> Scalar:
    a, b = promote(a, b)
    if op == "+":
        return a + b
    if op == "-":
        return a - b
    if op == "*":
        return a * b
    return sdiv(a, b)


def _as_int(x: Scalar, what: str) -> int:
    if not is_exact(x) or x.denominator != 1:
        raise DomainError(f"{what} must be an integer, got {x}")
    return int(x)


class Evaluator:
    def __init__(self, env: Mapping[str, object] | None = None, trunc: TruncationPolicy | None = None):
        self.env = {k: to_scalar(v) for k, v in (env or {}).items()}
        self.trunc = trunc or TruncationPolicy()

    def __call__(self, e: Expr) -> Scalar:
        with decimal_context():
            return self.scalar(e)

    def scalar(self, e: Expr) -> Scalar:
        if isinstance(e, Num):
            return parse_scalar(e.text)
        if isinstance(e, Sym):
            if e.name in self.env:
                return self.env[e.name]
            if e.name == "pi":
                return +mpmath.pi
            raise UnboundSymbolError(e.name)
        if isinstance(e, Neg):
            return -self.scalar(e.operand)
        if isinstance(e, BinOp):
            return _binop(e.op, self.scalar(e.left), self.scalar(e.right))
        if isinstance(e, Pow):
            return spow(self.scalar(e.base), e.exponent)
        if isinstance(e, Call):
            return self.call(e)
        raise DomainError(f"{to_text(e)} is not a scalar expression")

    def pair(self, d: Doublet) -> tuple:
        return self.scalar(d.first), self.scalar(d.second)

    def call(self, c: Call) -> Scalar:
        s = c.slots
        S, P = self.scalar, self.pair
        name = c.name
        if name in ("qnum", "fact"):
            n = _as_int(S(s[0][0]), "n")
            base = BasePair(S(s[1][0]), S(s[1][1]))
            return twin_basic_number(n, base) if name == "qnum" else pq_factorial(n, base)
        if name == "binom":
            n, k = _as_int(S(s[0][0]), "n"), _as_int(S(s[0][1]), "k")
            return pq_binomial(n, k, BasePair(S(s[1][0]), S(s[1][1])))
        if name == "poch":
            return pq_pochhammer(P(s[0][0]), BasePair(*P(s[1][0])), _as_int(S(s[2][0]), "n"))
        if name == "pochratio":
            num = [P(d) for d in s[0][0].items]
            den = [P(d) for d in s[1][0].items]
            return poch_ratio_infinite(num, den, BasePair(*P(s[2][0])), self.trunc)
        if name in ("e", "E"):
            kind = "small_e" if name == "e" else "big_E"
            return pq_exponential(kind, S(s[1][0]), BasePair(*P(s[0][0])), self.trunc)
        if name == "hermite":
            return hermite_pq(_as_int(S(s[0][0]), "n"), S(s[1][0]), BasePair(S(s[2][0]), S(s[2][1])))
        if name == "Phi":
            spec = Phi([P(d) for d in s[0][0].items], [P(d) for d in s[1][0].items], BasePair(*P(s[2][0])),
                       S(s[3][0]))
            return eval_Phi(spec, self.trunc).value
        if name == "phi":
            spec = phi([S(x) for x in s[0][0].items], [S(x) for x in s[1][0].items], S(s[2][0]), S(s[3][0]))
            return eval_phi_classical(spec, self.trunc).value
        if name == "Psi":
            spec = Psi11(P(s[0][0].items[0]), P(s[1][0].items[0]), BasePair(*P(s[2][0])), S(s[3][0]))
            return eval_Psi11(spec, self.trunc).value
        if name == "F_bibasic":
            groups = [[S(x) for x in s[i][0].items] for i in range(4)]
            spec = bibasic(*groups, S(s[4][0]), S(s[5][0]), S(s[6][0]))
            return eval_bibasic(spec, self.trunc).value
        raise DomainError(f"no evaluator for {name}")


def evaluate_text(text: str, env: Mapping[str, object] | None = None,
                  trunc: TruncationPolicy | None = None) -> Scalar:
    return Evaluator(env, trunc)(parse_expr(text))


# -- symbolic helpers for conversion ------------------------------------------------

def num_node(x: Fraction) -> Expr:
    x = Fraction(x)
    return Neg(Num(str(-x))) if x < 0 else Num(str(x))


def _exact_value(e: Expr) -> Fraction | None:
    if isinstance(e, Num) and e.exact:
        return Fraction(e.text)
    if isinstance(e, Neg):
        v = _exact_value(e.operand)
        return None if v is None else -v
    return None


def simplify(e: Expr) -> Expr:
    """Fold exact constants and drop multiplicative and additive identities."""
    if isinstance(e, Neg):
        inner = simplify(e.operand)
        v = _exact_value(inner)
        if v is not None:
            return num_node(-v)
        if isinstance(inner, Neg):
            return inner.operand
        return Neg(inner)
    if isinstance(e, Pow):
        base = simplify(e.base)
        v = _exact_value(base)
        if v is not None and (v != 0 or e.exponent >= 0):
            return num_node(v**e.exponent)
        if e.exponent == 1:
            return base
        if e.exponent == 0:
            return Num("1")
        return Pow(base, e.exponent)
    if isinstance(e, BinOp):
        left, right = simplify(e.left), simplify(e.right)
        lv, rv = _exact_value(left), _exact_value(right)
        if lv is not None and rv is not None and not (e.op == "/" and rv == 0):
            return num_node(Fraction(_binop(e.op, lv, rv)))
        if e.op == "*":
            if lv == 1:
                return right
            if rv == 1:
                return left
            if lv == 0 or rv == 0:
                return Num("0")
            if lv == -1:
                return simplify(Neg(right))
            if rv == -1:
                return simplify(Neg(left))
        if e.op == "/" and rv == 1:
            return left
        if e.op == "/" and rv == -1:
            return simplify(Neg(left))
        if e.op == "+":
            if lv == 0:
                return right
            if rv == 0:
                return left
        if e.op == "-":
            if rv == 0:
                return left
            if lv == 0:
                return simplify(Neg(right))
        return BinOp(e.op, left, right)
    if isinstance(e, Doublet):
        return Doublet(simplify(e.first), simplify(e.second))
    if isinstance(e, ListNode):
        return ListNode(tuple(simplify(x) for x in e.items))
    if isinstance(e, Call):
        return Call(e.name, tuple(tuple(simplify(x) for x in slot) for slot in e.slots))
    return e


def _product_node(items) -> Expr:
    out: Expr = Num("1")
    for x in items:
        out = BinOp("*", out, x)
    return out


def _is_phi_call(e: Expr, name: str) -> bool:
    return isinstance(e, Call) and e.name == name


def project_to_phi(e: Expr) -> Expr:
    """``Phi[...]`` with ``s = r - 1`` to the equal-valued ``phi[...]``.

    Parameters become ``a_q/a_p``, the base ``q/p`` and the argument
    ``z/mu`` with ``mu = (prod b_p) p/(prod a_p)``.
    """
    from .series import StructuralError

    if not _is_phi_call(e, "Phi"):
        raise DomainError("pq2q needs a Phi[...] expression")
    num, den = e.slots[0][0].items, e.slots[1][0].items
    base, z = e.slots[2][0], e.slots[3][0]
    if len(den) != len(num) - 1:
        raise StructuralError("projection exists only for s = r-1")
    mu = BinOp("/", BinOp("*", _product_node(d.first for d in den), base.first),
               _product_node(d.first for d in num))
    if _exact_value(simplify(mu)) == 0:
        raise DomainError("projection needs nonzero p-components")
    out = Call("phi", (
        (ListNode(tuple(BinOp("/", d.second, d.first) for d in num)),),
        (ListNode(tuple(BinOp("/", d.second, d.first) for d in den)),),
        (BinOp("/", base.second, base.first),),
        (BinOp("/", z, mu),),
    ))
    return simplify(out)


def embed_to_Phi(e: Expr, numerator_p=None, denominator_p=None, base_p: Expr | None = None) -> Expr:
    """``phi[...]`` to ``Phi[...]`` with the lift ``x -> (x_p, x x_p)``.

    The default lift uses ``x_p = 1`` and base ``(1, q)``; ``(0,1)``
    doublets pad the shorter side up to ``s = r - 1``.
    """
    if not _is_phi_call(e, "phi"):
        raise DomainError("q2pq needs a phi[...] expression")
    num, den = e.slots[0][0].items, e.slots[1][0].items
    q, z = e.slots[2][0], e.slots[3][0]
    nump = list(numerator_p) if numerator_p is not None else [Num("1")] * len(num)
    denp = list(denominator_p) if denominator_p is not None else [Num("1")] * len(den)
    bp = base_p if base_p is not None else Num("1")
    if len(nump) != len(num) or len(denp) != len(den):
        raise DomainError("one p-component per classical parameter")
    for x in nump + denp + [bp]:
        if _exact_value(simplify(x)) == 0:
            raise DomainError("zero p-component in lift")
    top = [Doublet(xp, BinOp("*", x, xp)) for x, xp in zip(num, nump)]
    bottom = [Doublet(xp, BinOp("*", x, xp)) for x, xp in zip(den, denp)]
    pad = Doublet(Num("0"), Num("1"))
    if len(den) > len(num) - 1:
        top += [pad] * (len(den) + 1 - len(num))
    elif len(den) < len(num) - 1:
        bottom += [pad] * (len(num) - 1 - len(den))
    mu = BinOp("/", BinOp("*", _product_node(denp), bp), _product_node(nump))
    out = Call("Phi", (
        (ListNode(tuple(top)),),
        (ListNode(tuple(bottom)),),
        (Doublet(bp, BinOp("*", q, bp)),),
        (BinOp("*", mu, z),),
    ))
    return simplify(out)


def call_names() -> frozenset:
    return frozenset(SIGNATURES)
