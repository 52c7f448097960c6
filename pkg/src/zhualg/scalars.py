"""Exact scalar arithmetic.

Everything downstream computes over the fraction field of Q[c, h, lambda]:
arbitrary-precision rationals (stdlib ``fractions.Fraction``), sparse
multivariate polynomials in the declared parameters, and normalized rational
functions.  There are no floating-point code paths anywhere; identities are
asserted with exact equality.

Conventions:

* The parameter tuple is fixed as ``("c", "h", "lambda")``: the central
  charge, the lowest-weight parameter of an induced module, and the
  lowest-weight eigenvalue of a free-boson module.  Exponent vectors always
  have arity 3.
* ``binom(p, q)`` is the generalized binomial coefficient
  ``p(p-1)...(p-q+1)/q!`` for any integer ``p`` and ``q >= 0``, and ``0`` for
  ``q < 0``.  In particular ``binom(p, q) = (-1)^q binom(q-p-1, q)``.
* ``RatFunc`` values are canonical: gcd(num, den) is a unit, den is monic
  with respect to the lexicographic term order, and rationals embed with
  den = 1.  Equality is plain structural equality of the canonical form.
"""

from __future__ import annotations

from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Mapping, Union

PARAMS = ("c", "h", "lambda")
NPARAMS = len(PARAMS)
_PARAM_INDEX = {name: i for i, name in enumerate(PARAMS)}
_ZERO_EXP = (0,) * NPARAMS

ScalarLike = Union["RatFunc", "Poly", Fraction, int]


class ScalarError(ArithmeticError):
    """Raised on invalid scalar arithmetic (division by zero, bad substitution)."""


@lru_cache(maxsize=None)
def binom(p: int, q: int) -> Fraction:
    """Generalized binomial coefficient for integer arguments.

    Returns ``p(p-1)...(p-q+1)/q!`` for ``q >= 0`` (so negative ``p`` is
    fine) and ``0`` for ``q < 0``.  The value is always an integer; it is
    returned as a ``Fraction`` so it can be mixed into scalar arithmetic
    directly.
    """
    if q < 0:
        return Fraction(0)
    num = 1
    for i in range(q):
        num *= p - i
    den = 1
    for i in range(2, q + 1):
        den *= i
    return Fraction(num, den)


def _exp_mul(a: tuple, b: tuple) -> tuple:
    return tuple(x + y for x, y in zip(a, b))


class Poly:
    """Sparse multivariate polynomial over Q in the declared parameters.

    ``terms`` maps exponent vectors (tuples of length ``NPARAMS``) to nonzero
    ``Fraction`` coefficients.  Instances are immutable by convention; all
    operations return fresh objects.
    """

    __slots__ = ("terms", "_hash")

    def __init__(self, terms: Mapping[tuple, Fraction] | None = None):
        clean: dict = {}
        if terms:
            for e, v in terms.items():
                if v:
                    clean[e] = v if isinstance(v, Fraction) else Fraction(v)
        self.terms = clean
        self._hash = None

    @classmethod
    def _raw(cls, terms: dict) -> "Poly":
        """Wrap a dict already free of zero coefficients (internal fast path)."""
        p = cls.__new__(cls)
        p.terms = terms
        p._hash = None
        return p

    @classmethod
    def const(cls, value) -> "Poly":
        v = value if isinstance(value, Fraction) else Fraction(value)
        return cls._raw({_ZERO_EXP: v} if v else {})

    @classmethod
    def var(cls, name: str) -> "Poly":
        if name not in _PARAM_INDEX:
            raise ScalarError(f"unknown parameter {name!r}; declared: {PARAMS}")
        e = [0] * NPARAMS
        e[_PARAM_INDEX[name]] = 1
        return cls._raw({tuple(e): Fraction(1)})

    def is_zero(self) -> bool:
        return not self.terms

    def is_const(self) -> bool:
        return not self.terms or (len(self.terms) == 1 and _ZERO_EXP in self.terms)

    def const_value(self) -> Fraction:
        if not self.terms:
            return Fraction(0)
        if self.is_const():
            return self.terms[_ZERO_EXP]
        raise ScalarError("polynomial is not constant")

    def params_present(self) -> set:
        out = set()
        for e in self.terms:
            for i, x in enumerate(e):
                if x:
                    out.add(PARAMS[i])
        return out

    def __add__(self, other: "Poly") -> "Poly":
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for e, v in other.terms.items():
            s = out.get(e)
            if s is None:
                out[e] = v
            else:
                s = s + v
                if s:
                    out[e] = s
                else:
                    del out[e]
        return Poly._raw(out)

    def __neg__(self) -> "Poly":
        return Poly._raw({e: -v for e, v in self.terms.items()})

    def __sub__(self, other: "Poly") -> "Poly":
        return self + (-other)

    def __mul__(self, other: "Poly") -> "Poly":
        if not self.terms or not other.terms:
            return Poly._raw({})
        if self.is_const():
            k = self.terms[_ZERO_EXP]
            return Poly._raw({e: k * v for e, v in other.terms.items()})
        if other.is_const():
            k = other.terms[_ZERO_EXP]
            return Poly._raw({e: k * v for e, v in self.terms.items()})
        out: dict = {}
        for ea, va in self.terms.items():
            for eb, vb in other.terms.items():
                e = _exp_mul(ea, eb)
                s = out.get(e)
                if s is None:
                    out[e] = va * vb
                else:
                    s = s + va * vb
                    if s:
                        out[e] = s
                    else:
                        del out[e]
        return Poly._raw(out)

    def scale(self, k: Fraction) -> "Poly":
        if not k:
            return Poly._raw({})
        return Poly._raw({e: k * v for e, v in self.terms.items()})

    def __pow__(self, n: int) -> "Poly":
        if n < 0:
            raise ScalarError("negative polynomial power")
        out = Poly.const(1)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    def __eq__(self, other) -> bool:
        return isinstance(other, Poly) and self.terms == other.terms

    def __hash__(self):
        if self._hash is None:
            self._hash = hash(tuple(sorted(self.terms.items())))
        return self._hash

    def lead(self) -> tuple:
        """(exponent, coefficient) of the lexicographically largest term."""
        e = max(self.terms)
        return e, self.terms[e]

    def degree(self, var_index: int) -> int:
        if not self.terms:
            return -1
        return max(e[var_index] for e in self.terms)

    def substitute(self, values: Mapping[str, Fraction]) -> "Poly":
        """Substitute rational values for a subset of the parameters."""
        idx = {}
        for name, val in values.items():
            if name not in _PARAM_INDEX:
                raise ScalarError(f"unknown parameter {name!r}")
            idx[_PARAM_INDEX[name]] = Fraction(val)
        out: dict = {}
        for e, v in self.terms.items():
            coef = v
            newe = list(e)
            for i, val in idx.items():
                coef *= val ** e[i]
                newe[i] = 0
            key = tuple(newe)
            s = out.get(key)
            s = coef if s is None else s + coef
            if s:
                out[key] = s
            elif key in out:
                del out[key]
        return Poly._raw(out)

    def content(self) -> Fraction:
        """Positive rational content (gcd of numerators / lcm of denominators)."""
        if not self.terms:
            return Fraction(0)
        from math import gcd, lcm

        gn = 0
        ld = 1
        for v in self.terms.values():
            gn = gcd(gn, abs(v.numerator))
            ld = lcm(ld, v.denominator)
        return Fraction(gn, ld)

    def primitive(self) -> tuple[Fraction, "Poly"]:
        """Split into (content-with-sign, primitive part).

        The primitive part has integer coprime coefficients with positive
        leading (lex) coefficient.
        """
        if not self.terms:
            return Fraction(0), self
        c = self.content()
        _, lead_coeff = self.lead()
        if lead_coeff < 0:
            c = -c
        return c, self.scale(1 / c)

    def __str__(self) -> str:
        return render_poly(self)

    def __repr__(self) -> str:
        return f"Poly({render_poly(self)})"


def _poly_div_exact(a: Poly, b: Poly) -> Poly:
    """Exact polynomial division a / b; raises ScalarError if not exact."""
    if b.is_zero():
        raise ScalarError("polynomial division by zero")
    if b.is_const():
        return a.scale(1 / b.const_value())
    rem = a
    out: dict = {}
    eb, cb = b.lead()
    while rem.terms:
        ea, ca = rem.lead()
        eq = tuple(x - y for x, y in zip(ea, eb))
        if any(x < 0 for x in eq):
            raise ScalarError("inexact polynomial division")
        cq = ca / cb
        out[eq] = out.get(eq, Fraction(0)) + cq
        rem = rem - Poly._raw({eq: cq}) * b
    return Poly._raw({e: v for e, v in out.items() if v})


def _main_var(a: Poly, b: Poly) -> int | None:
    for i in range(NPARAMS):
        if a.degree(i) > 0 or b.degree(i) > 0:
            return i
    return None


def _to_univar(p: Poly, i: int) -> dict[int, Poly]:
    out: dict[int, dict] = {}
    for e, v in p.terms.items():
        d = e[i]
        rest = e[:i] + (0,) + e[i + 1:]
        out.setdefault(d, {})[rest] = v
    return {d: Poly._raw(t) for d, t in out.items()}


def _from_univar(coeffs: dict[int, Poly], i: int) -> Poly:
    out: dict = {}
    for d, p in coeffs.items():
        for e, v in p.terms.items():
            key = e[:i] + (d,) + e[i + 1:]
            out[key] = out.get(key, Fraction(0)) + v
    return Poly._raw({e: v for e, v in out.items() if v})


def _univar_pseudo_rem(f: dict[int, Poly], g: dict[int, Poly], i: int) -> dict[int, Poly]:
    df, dg = max(f), max(g)
    lg = g[dg]
    rem = dict(f)
    while rem and max(rem) >= dg:
        dr = max(rem)
        lr = rem[dr]
        shift = dr - dg
        new: dict[int, Poly] = {}
        for d, p in rem.items():
            new[d] = p * lg
        for d, p in g.items():
            t = new.get(d + shift, Poly._raw({})) - p * lr
            new[d + shift] = t
        rem = {d: p for d, p in new.items() if not p.is_zero()}
    return rem


def poly_gcd(a: Poly, b: Poly) -> Poly:
    """Primitive gcd of two polynomials (unit-normalized, monic-content-free).

    Works by primitive-part/content splitting and a primitive pseudo-remainder
    sequence in the first parameter that actually occurs; contents recurse on
    the remaining parameters.  With at most three parameters in play this is
    entirely adequate.
    """
    if a.is_zero():
        return b.primitive()[1] if not b.is_zero() else Poly._raw({})
    if b.is_zero():
        return a.primitive()[1]
    i = _main_var(a, b)
    if i is None:
        return Poly.const(1)
    fa, fb = a.primitive()[1], b.primitive()[1]
    ua, ub = _to_univar(fa, i), _to_univar(fb, i)

    def content_poly(u: dict[int, Poly]) -> Poly:
        g = Poly._raw({})
        for p in u.values():
            g = poly_gcd(g, p)
        return g

    def primitive_u(u: dict[int, Poly]) -> dict[int, Poly]:
        g = content_poly(u)
        if g.is_const():
            return u
        return {d: _poly_div_exact(p, g) for d, p in u.items()}

    ca, cb = content_poly(ua), content_poly(ub)
    cont = poly_gcd(ca, cb)
    f, g = primitive_u(ua), primitive_u(ub)
    if max(f) < max(g):
        f, g = g, f
    while True:
        r = _univar_pseudo_rem(f, g, i)
        if not r:
            break
        f, g = g, primitive_u(r)
    result = cont * _from_univar(g, i)
    return result.primitive()[1]


class RatFunc:
    """Normalized quotient of two polynomials over Q[c, h, lambda].

    Invariants: den != 0, gcd(num, den) is a unit, den is monic in the lex
    term order (so polynomials and rationals embed with den = 1).
    """

    __slots__ = ("num", "den", "_hash")

    def __init__(self, num, den=None):
        if not isinstance(num, Poly):
            num = Poly.const(num)
        if den is None:
            den = Poly.const(1)
        elif not isinstance(den, Poly):
            den = Poly.const(den)
        if den.is_zero():
            raise ScalarError("rational function with zero denominator")
        num, den = self._normalize(num, den)
        self.num = num
        self.den = den
        self._hash = None

    @staticmethod
    def _normalize(num: Poly, den: Poly) -> tuple[Poly, Poly]:
        if num.is_zero():
            return num, Poly.const(1)
        if den.is_const():
            k = den.const_value()
            if k == 1:
                return num, den
            return num.scale(1 / k), Poly.const(1)
        g = poly_gcd(num, den)
        if not g.is_const():
            num = _poly_div_exact(num, g)
            den = _poly_div_exact(den, g)
        if den.is_const():
            return num.scale(1 / den.const_value()), Poly.const(1)
        _, lead_coeff = den.lead()
        if lead_coeff != 1:
            num = num.scale(1 / lead_coeff)
            den = den.scale(1 / lead_coeff)
        return num, den

    @classmethod
    def _matched(cls, num: Poly, den: Poly) -> "RatFunc":
        """Internal constructor for already-normalized pairs."""
        r = cls.__new__(cls)
        r.num = num
        r.den = den
        r._hash = None
        return r

    @classmethod
    def coerce(cls, x: ScalarLike) -> "RatFunc":
        if isinstance(x, RatFunc):
            return x
        if isinstance(x, Poly):
            return cls(x)
        return cls(Poly.const(x))

    @classmethod
    def var(cls, name: str) -> "RatFunc":
        return cls(Poly.var(name))

    def is_zero(self) -> bool:
        return self.num.is_zero()

    def is_one(self) -> bool:
        return self.den.is_const() and self.num.is_const() and self.num.const_value() == 1 == self.den.const_value()

    def is_rational(self) -> bool:
        return self.num.is_const() and self.den.is_const()

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ScalarError("scalar is not a plain rational")
        return self.num.const_value() / self.den.const_value()

    def params_present(self) -> set:
        return self.num.params_present() | self.den.params_present()

    def __add__(self, other) -> "RatFunc":
        other = RatFunc.coerce(other)
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.den is other.den or self.den == other.den:
            return RatFunc(self.num + other.num, self.den)
        return RatFunc(self.num * other.den + other.num * self.den, self.den * other.den)

    __radd__ = __add__

    def __neg__(self) -> "RatFunc":
        return RatFunc._matched(-self.num, self.den)

    def __sub__(self, other) -> "RatFunc":
        return self + (-RatFunc.coerce(other))

    def __rsub__(self, other) -> "RatFunc":
        return RatFunc.coerce(other) + (-self)

    def __mul__(self, other) -> "RatFunc":
        other = RatFunc.coerce(other)
        if self.is_zero() or other.is_zero():
            return RATFUNC_ZERO
        if self.is_one():
            return other
        if other.is_one():
            return self
        return RatFunc(self.num * other.num, self.den * other.den)

    __rmul__ = __mul__

    def __truediv__(self, other) -> "RatFunc":
        other = RatFunc.coerce(other)
        if other.is_zero():
            raise ScalarError("division by zero scalar")
        return RatFunc(self.num * other.den, self.den * other.num)

    def __rtruediv__(self, other) -> "RatFunc":
        return RatFunc.coerce(other) / self

    def __eq__(self, other) -> bool:
        if isinstance(other, (int, Fraction, Poly)):
            other = RatFunc.coerce(other)
        return isinstance(other, RatFunc) and self.num == other.num and self.den == other.den

    def __hash__(self):
        if self._hash is None:
            self._hash = hash((self.num, self.den))
        return self._hash

    def substitute(self, values: Mapping[str, Fraction]) -> "RatFunc":
        """Substitute rational values for parameters (all-present required to
        land in Q; partial substitution is allowed and stays symbolic)."""
        num = self.num.substitute(values)
        den = self.den.substitute(values)
        if den.is_zero():
            raise ScalarError("substitution makes the denominator vanish")
        return RatFunc(num, den)

    def __str__(self) -> str:
        return render_scalar(self)

    def __repr__(self) -> str:
        return f"RatFunc({render_scalar(self)})"


RATFUNC_ZERO = RatFunc._matched(Poly._raw({}), Poly.const(1))
RATFUNC_ONE = RatFunc._matched(Poly.const(1), Poly.const(1))


def ratfunc(x: ScalarLike) -> RatFunc:
    return RatFunc.coerce(x)


# ---------------------------------------------------------------------------
# rendering and parsing of the scalar grammar
# ---------------------------------------------------------------------------

def _render_term(e: tuple, v: Fraction) -> str:
    parts = []
    if v != 1 or all(x == 0 for x in e):
        if v == -1 and any(e):
            parts.append("-1")
        else:
            parts.append(str(v))
    for name, x in zip(PARAMS, e):
        if x == 0:
            continue
        parts.append(name if x == 1 else f"{name}^{x}")
    s = "*".join(parts)
    if s.startswith("-1*"):
        s = "-" + s[3:]
    return s


def render_poly(p: Poly) -> str:
    if not p.terms:
        return "0"
    items = sorted(p.terms.items(), key=lambda kv: kv[0], reverse=True)
    out = _render_term(*items[0])
    for e, v in items[1:]:
        term = _render_term(e, v if v > 0 else -v)
        out += " - " + term if v < 0 else " + " + term
    return out


def render_scalar(x: ScalarLike) -> str:
    x = RatFunc.coerce(x)
    if x.den.is_const():
        return render_poly(x.num)
    num = render_poly(x.num)
    den = render_poly(x.den)
    if len(x.num.terms) > 1:
        num = f"({num})"
    if len(x.den.terms) > 1:
        den = f"({den})"
    return f"{num}/{den}"


class ParseError(ValueError):
    """Raised with a position diagnostic when text cannot be parsed."""

    def __init__(self, text: str, pos: int, message: str):
        self.pos = pos
        super().__init__(f"{message} at position {pos}: {text[:pos]}>>>{text[pos:]}")


class _ScalarTokens:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def take_int(self) -> int:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos].isdigit():
            self.pos += 1
        if start == self.pos:
            raise ParseError(self.text, self.pos, "expected an integer")
        return int(self.text[start:self.pos])

    def take_name(self) -> str:
        self.skip_ws()
        start = self.pos
        while self.pos < len(self.text) and (self.text[self.pos].isalnum() or self.text[self.pos] == "_"):
            self.pos += 1
        return self.text[start:self.pos]


def _parse_expr(t: _ScalarTokens) -> RatFunc:
    value = _parse_product(t)
    while True:
        ch = t.peek()
        if ch == "+":
            t.pos += 1
            value = value + _parse_product(t)
        elif ch == "-":
            t.pos += 1
            value = value - _parse_product(t)
        else:
            return value


def _starts_factor(ch: str) -> bool:
    return ch.isdigit() or ch.isalpha() or ch == "("


def _parse_product(t: _ScalarTokens) -> RatFunc:
    value = _parse_signed_factor(t)
    while True:
        ch = t.peek()
        if ch == "*":
            t.pos += 1
            value = value * _parse_signed_factor(t)
        elif ch == "/":
            t.pos += 1
            value = value / _parse_signed_factor(t)
        elif _starts_factor(ch):
            value = value * _parse_factor(t)
        else:
            return value


def _parse_signed_factor(t: _ScalarTokens) -> RatFunc:
    if t.peek() == "-":
        t.pos += 1
        return -_parse_signed_factor(t)
    if t.peek() == "+":
        t.pos += 1
        return _parse_signed_factor(t)
    return _parse_factor(t)


def _parse_factor(t: _ScalarTokens) -> RatFunc:
    ch = t.peek()
    if ch == "(":
        t.pos += 1
        value = _parse_expr(t)
        if t.peek() != ")":
            raise ParseError(t.text, t.pos, "expected ')'")
        t.pos += 1
    elif ch.isdigit():
        value = RatFunc.coerce(t.take_int())
    elif ch.isalpha():
        name = t.take_name()
        if name not in _PARAM_INDEX:
            raise ParseError(t.text, t.pos, f"unknown parameter {name!r}")
        value = RatFunc.var(name)
    else:
        raise ParseError(t.text, t.pos, "expected a scalar factor")
    while t.peek() == "^":
        t.pos += 1
        neg = False
        if t.peek() == "-":
            t.pos += 1
            neg = True
        n = t.take_int()
        base = value
        value = RATFUNC_ONE
        for _ in range(n):
            value = value * base
        if neg:
            value = RATFUNC_ONE / value
    return value


def parse_scalar(text: str) -> RatFunc:
    """Parse the scalar grammar: integers, p/q rationals, polynomial
    expressions in c, h, lambda with ^ powers, parentheses, and either
    explicit '*' or juxtaposition for products."""
    t = _ScalarTokens(text)
    value = _parse_expr(t)
    t.skip_ws()
    if t.pos != len(text):
        raise ParseError(text, t.pos, "trailing input")
    return value
