"""Single-generator vertex operator algebras: PBW basis and mode calculus.

Two algebra instances are supported, both strongly generated by one field:

* the rank-one free boson with generator ``a`` of weight 1, bracket
  ``[a(m), a(p)] = m delta_{m+p,0}`` and vacuum law ``a(m)|0> = 0`` for
  ``m >= 0``;
* the chiral stress tensor with generator ``L`` of weight 2, bracket
  ``[L(m), L(p)] = (m - p) L(m+p) + c (m^3 - m)/12 delta_{m+p,0}`` and
  vacuum law ``L(m)|0> = 0`` for ``m >= -1`` (so words never contain
  ``L(-1)`` after normalization).

Mode-index convention.  Monomials store "physics" mode labels: the word
``(k_1, ..., k_r)`` with ``k_1 >= ... >= k_r >= min_mode`` stands for
``u(-k_1) ... u(-k_r)|0>`` and has weight ``sum k_i``.  The vertex-operator
("series") index of a mode is related by ``u(m) = u_{m + wt u - 1}``, i.e.
series index ``j`` corresponds to physics index ``j - wt u + 1``.  The two
helpers ``series_to_physics`` and ``physics_to_series`` are the only place
this shift appears; operations document which convention they take.

All values are immutable after construction.  The memo tables held by an
``Algebra`` are pure caches (same key always maps to the same value), so
results are independent of call order and safe to share.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .scalars import (
    RATFUNC_ZERO,
    ParseError,
    RatFunc,
    binom,
    parse_scalar,
    render_scalar,
)

Monomial = tuple  # weakly decreasing tuple of positive physics mode labels


class PresentationError(ValueError):
    """Invalid word or element for the active algebra presentation."""


def monomial_weight(mono: Monomial) -> int:
    return sum(mono)


def monomial_key(mono: Monomial) -> tuple:
    """Deterministic order: (weight, length, lexicographic modes)."""
    return (monomial_weight(mono), len(mono), mono)


class Element:
    """Finite linear combination of PBW monomials with RatFunc coefficients.

    Immutable by convention.  ``terms`` maps monomial tuples to nonzero
    coefficients.
    """

    __slots__ = ("terms",)

    def __init__(self, terms: dict | None = None, _take: bool = False):
        if terms is None:
            self.terms = {}
        elif _take:
            self.terms = terms
        else:
            clean = {}
            for m, v in terms.items():
                v = RatFunc.coerce(v)
                if not v.is_zero():
                    clean[tuple(m)] = v
            self.terms = clean

    @classmethod
    def zero(cls) -> "Element":
        return cls({}, _take=True)

    @classmethod
    def monomial(cls, modes: Iterable[int], coeff=1) -> "Element":
        v = RatFunc.coerce(coeff)
        if v.is_zero():
            return cls.zero()
        return cls({tuple(modes): v}, _take=True)

    @classmethod
    def vacuum(cls, coeff=1) -> "Element":
        return cls.monomial((), coeff)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: "Element") -> "Element":
        if not self.terms:
            return other
        if not other.terms:
            return self
        out = dict(self.terms)
        for m, v in other.terms.items():
            s = out.get(m)
            s = v if s is None else s + v
            if s.is_zero():
                out.pop(m, None)
            else:
                out[m] = s
        return Element(out, _take=True)

    def __sub__(self, other: "Element") -> "Element":
        return self + other.scale(-1)

    def __neg__(self) -> "Element":
        return self.scale(-1)

    def scale(self, k) -> "Element":
        k = RatFunc.coerce(k)
        if k.is_zero() or not self.terms:
            return Element.zero()
        if k.is_one():
            return self
        return Element({m: v * k for m, v in self.terms.items()}, _take=True)

    def coefficient(self, mono: Iterable[int]) -> RatFunc:
        return self.terms.get(tuple(mono), RATFUNC_ZERO)

    def __eq__(self, other) -> bool:
        return isinstance(other, Element) and self.terms == other.terms

    def __hash__(self):
        return hash(tuple(sorted(self.terms.items(), key=lambda kv: monomial_key(kv[0]))))

    def key(self) -> tuple:
        """Canonical hashable form (used for deduplication)."""
        return tuple(sorted(self.terms.items(), key=lambda kv: monomial_key(kv[0])))

    def max_weight(self) -> int:
        return max((monomial_weight(m) for m in self.terms), default=0)

    def max_length(self) -> int:
        return max((len(m) for m in self.terms), default=0)

    def monomials(self) -> list:
        return sorted(self.terms, key=monomial_key)

    def homogeneous_components(self) -> dict[int, "Element"]:
        out: dict[int, dict] = {}
        for m, v in self.terms.items():
            out.setdefault(monomial_weight(m), {})[m] = v
        return {w: Element(t, _take=True) for w, t in sorted(out.items())}

    def is_homogeneous(self) -> bool:
        return len({monomial_weight(m) for m in self.terms}) <= 1

    def substitute(self, values) -> "Element":
        return Element({m: v.substitute(values) for m, v in self.terms.items()})

    def __repr__(self) -> str:
        items = ", ".join(f"{m}: {render_scalar(v)}" for m, v in sorted(self.terms.items(), key=lambda kv: monomial_key(kv[0])))
        return f"Element({{{items}}})"


@dataclass(frozen=True)
class Presentation:
    """Defining data of a single-generator strongly generated algebra."""

    name: str
    symbol: str
    gen_weight: int
    min_mode: int          # smallest k allowed in PBW words u(-k)...
    vacuum_threshold: int  # u(m)|0> = 0 for all m >= this
    central_params: tuple = ()


HEISENBERG = Presentation(
    name="heisenberg", symbol="a", gen_weight=1, min_mode=1, vacuum_threshold=0
)
VIRASORO = Presentation(
    name="virasoro", symbol="L", gen_weight=2, min_mode=2, vacuum_threshold=-1,
    central_params=("c",),
)

PRESENTATIONS = {"heisenberg": HEISENBERG, "virasoro": VIRASORO}


class _ModeEngine:
    """Iterated-mode recursion shared by the algebra and its modules.

    Computes ``w_p . v`` (series index ``p``) for a PBW word ``w`` acting on
    a vector of the target space, given two primitives of that space: how a
    single generator mode acts, and from which series index on a given word
    annihilates a given vector.  The recursion peels the leftmost factor
    ``u(-K) = u_{-k}`` of ``w`` and expands

        (u_{-k} w')_p = sum_{i>=0} (-1)^i C(-k, i)
            [ u_{-k-i} (w'_{p+i} v) - (-1)^k  w'_{-k+p-i} (u_i v) ],

    both sums truncated by the annihilation bound.  Results are cached on
    ``(w, p, monomial of v)``.
    """

    def __init__(self, algebra: "Algebra", apply_mode: Callable, degree_of: Callable,
                 zero, add, scale):
        self.algebra = algebra
        self.apply_mode = apply_mode      # (physics mode, vector) -> vector
        self.degree_of = degree_of        # monomial of target space -> int
        self.zero = zero
        self.add = add
        self.scale = scale
        self.cache: dict = {}

    def bound(self, w_mono: Monomial, v_mono) -> int:
        """w_p annihilates v for all series p >= this value."""
        return monomial_weight(w_mono) + self.degree_of(v_mono)

    def mode_on_vector(self, w_mono: Monomial, p: int, vector):
        out = self.zero()
        for v_mono, coeff in vector.terms.items():
            out = self.add(out, self.scale(self._mode(w_mono, p, v_mono), coeff))
        return out

    def _mode(self, w_mono: Monomial, p: int, v_mono):
        key = (w_mono, p, v_mono)
        hit = self.cache.get(key)
        if hit is not None:
            return hit
        out = self._mode_uncached(w_mono, p, v_mono)
        self.cache[key] = out
        return out

    def _mode_uncached(self, w_mono: Monomial, p: int, v_mono):
        alg = self.algebra
        if not w_mono:
            if p == -1:
                return self.scale(self._unit(v_mono), RatFunc.coerce(1))
            return self.zero()
        if p >= self.bound(w_mono, v_mono):
            return self.zero()
        K = w_mono[0]
        k = K - alg.presentation.gen_weight + 1  # series depth of the left factor
        if len(w_mono) == 1 and k == 1:
            # the word is the generator itself: u_p = u(p - wt u + 1)
            return self.apply_mode(p - alg.presentation.gen_weight + 1, self._unit_elem(v_mono))
        tail = w_mono[1:]
        gen_bound = alg.presentation.gen_weight + self.degree_of(v_mono)
        tail_bound = self.bound(tail, v_mono)
        out = self.zero()
        one = RatFunc.coerce(1)
        sign_k = -1 if k % 2 else 1
        i = 0
        while True:
            first_live = p + i < tail_bound
            second_live = i < gen_bound
            if not first_live and not second_live:
                break
            coeff = RatFunc.coerce(((-1) ** i) * binom(-k, i))
            if first_live:
                inner = self._mode(tail, p + i, v_mono)
                moved = self.apply_mode(-K - i, inner)
                out = self.add(out, self.scale(moved, coeff))
            if second_live:
                gen_act = self.apply_mode(i - alg.presentation.gen_weight + 1, self._unit_elem(v_mono))
                partial = self.zero()
                for m2, c2 in gen_act.terms.items():
                    partial = self.add(partial, self.scale(self._mode(tail, -k + p - i, m2), c2))
                out = self.add(out, self.scale(partial, coeff * RatFunc.coerce(-sign_k)))
            i += 1
        return out

    def _unit(self, v_mono):
        raise NotImplementedError

    def _unit_elem(self, v_mono):
        raise NotImplementedError


class _VacuumModeEngine(_ModeEngine):
    def _unit(self, v_mono):
        return Element.monomial(v_mono)

    def _unit_elem(self, v_mono):
        return Element.monomial(v_mono)


class Algebra:
    """A presentation together with its mode-action caches.

    Exposes PBW normalization, single-mode and composite-mode actions, the
    translation/grading operators, and the element grammar.
    """

    def __init__(self, presentation: Presentation):
        self.presentation = presentation
        self._apply_cache: dict = {}
        self._engine = _VacuumModeEngine(
            self,
            apply_mode=self.apply_generator_mode,
            degree_of=monomial_weight,
            zero=Element.zero,
            add=Element.__add__,
            scale=Element.scale,
        )

    # -- conventions -------------------------------------------------------

    def series_to_physics(self, j: int) -> int:
        return j - self.presentation.gen_weight + 1

    def physics_to_series(self, m: int) -> int:
        return m + self.presentation.gen_weight - 1

    def generator(self) -> Element:
        """The generating state u(-wt u)|0> = u_{-1}|0>."""
        return Element.monomial((self.presentation.gen_weight,))

    # -- bracket and vacuum law --------------------------------------------

    def bracket(self, m: int, p: int) -> tuple[list, RatFunc]:
        """[u(m), u(p)] as (mode terms, central scalar).

        Mode terms are (coefficient, physics mode) pairs; the central part is
        a scalar multiple of the identity.
        """
        pres = self.presentation
        if pres.name == "heisenberg":
            if m + p == 0:
                return [], RatFunc.coerce(m)
            return [], RATFUNC_ZERO
        # stress tensor
        terms = []
        if m - p != 0:
            terms.append((RatFunc.coerce(m - p), m + p))
        central = RATFUNC_ZERO
        if m + p == 0:
            central = RatFunc.var("c") * RatFunc.coerce(Fraction(m**3 - m, 12))
        return terms, central

    def annihilates_vacuum(self, m: int) -> bool:
        return m >= self.presentation.vacuum_threshold

    # -- single generator mode ----------------------------------------------

    def apply_generator_mode(self, m: int, v: Element) -> Element:
        """u(m) . v in PBW-canonical form (physics index m)."""
        out = Element.zero()
        for mono, coeff in v.terms.items():
            out = out + self._apply_mono(m, mono).scale(coeff)
        return out

    def _apply_mono(self, m: int, mono: Monomial) -> Element:
        key = (m, mono)
        hit = self._apply_cache.get(key)
        if hit is not None:
            return hit
        out = self._apply_mono_uncached(m, mono)
        self._apply_cache[key] = out
        return out

    def _apply_mono_uncached(self, m: int, mono: Monomial) -> Element:
        if not mono:
            if self.annihilates_vacuum(m):
                return Element.zero()
            return Element.monomial((-m,))
        head = -mono[0]
        if m <= head:
            return Element.monomial((-m,) + mono)
        tail = mono[1:]
        moved = self.apply_generator_mode(head, self._apply_mono(m, tail))
        mode_terms, central = self.bracket(m, head)
        out = moved
        if not central.is_zero():
            out = out + Element.monomial(tail, central)
        for coeff, mode in mode_terms:
            out = out + self._apply_mono(mode, tail).scale(coeff)
        return out

    # -- words ---------------------------------------------------------------

    def normalize(self, word: Sequence[int]) -> Element:
        """PBW-canonical form of u(m_1)...u(m_r)|0> for arbitrary physics
        modes m_i (applied right to left, as operators)."""
        out = Element.vacuum()
        for m in reversed(list(word)):
            out = self.apply_generator_mode(m, out)
        return out

    def check_element(self, e: Element) -> None:
        for mono in e.terms:
            if list(mono) != sorted(mono, reverse=True):
                raise PresentationError(f"monomial {mono} is not weakly decreasing")
            if mono and mono[-1] < self.presentation.min_mode:
                raise PresentationError(
                    f"monomial {mono} has a mode below the basis minimum "
                    f"{self.presentation.min_mode}"
                )

    # -- composite modes ------------------------------------------------------

    def composite_mode(self, w: Element, p: int, v: Element) -> Element:
        """w_p . v for the series index p of the state w."""
        out = Element.zero()
        for w_mono, w_coeff in sorted(w.terms.items(), key=lambda kv: monomial_key(kv[0])):
            out = out + self._engine.mode_on_vector(w_mono, p, v).scale(w_coeff)
        return out

    def annihilation_bound(self, w: Element, v: Element) -> int:
        """N with w_p . v = 0 for all series p >= N (vacuum module: weights
        are bounded below by zero)."""
        return w.max_weight() + v.max_weight()

    # -- translation and grading ----------------------------------------------

    def l_minus1(self, v: Element) -> Element:
        """Action of the translation operator: raises one mode per factor,
        u(-k) -> (k - wt u + 1) u(-k-1) summed over factors."""
        w = self.presentation.gen_weight
        out = Element.zero()
        for mono, coeff in v.terms.items():
            for j in range(len(mono)):
                k = mono[j]
                factor = RatFunc.coerce(k - w + 1)
                if factor.is_zero():
                    continue
                word = mono[:j] + (k + 1,) + mono[j + 1:]
                out = out + self.normalize([-x for x in word]).scale(coeff * factor)
        return out

    def l_zero(self, v: Element) -> Element:
        """Grading operator: multiplies each monomial by its weight."""
        return Element(
            {m: c * RatFunc.coerce(monomial_weight(m)) for m, c in v.terms.items()}
        )

    def ol_value(self, v: Element) -> Element:
        """(L(-1) + L(0)) . v, the translation-plus-grading image."""
        return self.l_minus1(v) + self.l_zero(v)

    # -- grammar ---------------------------------------------------------------

    def render_element(self, e: Element) -> str:
        if not e.terms:
            return "0"
        parts = []
        for mono in e.monomials():
            coeff = e.terms[mono]
            body = self._render_monomial(mono)
            parts.append((coeff, body))
        out = []
        for i, (coeff, body) in enumerate(parts):
            text, negative = self._render_coeff(coeff, body)
            if i == 0:
                out.append("-" + text if negative else text)
            else:
                out.append("- " + text if negative else "+ " + text)
        return " ".join(out)

    def _render_monomial(self, mono: Monomial) -> str:
        if not mono:
            return "|0>"
        sym = self.presentation.symbol
        parts = []
        i = 0
        while i < len(mono):
            j = i
            while j < len(mono) and mono[j] == mono[i]:
                j += 1
            power = j - i
            parts.append(f"{sym}(-{mono[i]})" + (f"^{power}" if power > 1 else ""))
            i = j
        return "".join(parts) + "|0>"

    @staticmethod
    def _render_coeff(coeff: RatFunc, body: str) -> tuple[str, bool]:
        if coeff.is_rational():
            q = coeff.as_fraction()
            negative = q < 0
            q = abs(q)
            if q == 1 and body != "|0>":
                return body, negative
            return f"{q} {body}", negative
        return f"({render_scalar(coeff)}) {body}", False

    def parse_element(self, text: str) -> Element:
        """Parse the element grammar, e.g. ``3/2 a(-2)a(-1)^2|0> - a(-4)|0>``.

        Whitespace-insensitive; coefficients are rationals or parenthesized
        scalar expressions; modes may be any integers (the word is normalized
        if it is not already PBW-canonical)."""
        if text.strip() == "0":
            return Element.zero()
        out = Element.zero()
        pos = 0
        sign = 1
        n = len(text)

        def skip_ws(i):
            while i < n and text[i].isspace():
                i += 1
            return i

        pos = skip_ws(pos)
        if pos == n:
            raise ParseError(text, pos, "empty element")
        first = True
        while pos < n:
            pos = skip_ws(pos)
            if pos == n:
                break
            ch = text[pos]
            if ch in "+-":
                if first and ch == "+":
                    raise ParseError(text, pos, "unexpected leading '+'")
                sign = 1 if ch == "+" else -1
                pos += 1
                pos = skip_ws(pos)
            elif not first:
                raise ParseError(text, pos, "expected '+' or '-' between terms")
            coeff, pos = self._parse_coeff(text, pos)
            modes, pos = self._parse_word(text, pos)
            term = self.normalize([-k for k in modes]).scale(coeff * RatFunc.coerce(sign))
            out = out + term
            sign = 1
            first = False
        if out.terms == {} and first:
            raise ParseError(text, 0, "empty element")
        return out

    def _parse_coeff(self, text: str, pos: int) -> tuple[RatFunc, int]:
        n = len(text)
        if pos < n and text[pos] == "(":
            depth = 0
            j = pos
            while j < n:
                if text[j] == "(":
                    depth += 1
                elif text[j] == ")":
                    depth -= 1
                    if depth == 0:
                        break
                j += 1
            if depth != 0:
                raise ParseError(text, pos, "unbalanced parenthesis in coefficient")
            inner = text[pos + 1:j]
            return parse_scalar(inner), j + 1
        if pos < n and text[pos].isdigit():
            j = pos
            while j < n and text[j].isdigit():
                j += 1
            num = int(text[pos:j])
            k = j
            while k < n and text[k].isspace():
                k += 1
            if k < n and text[k] == "/":
                k += 1
                while k < n and text[k].isspace():
                    k += 1
                m = k
                while m < n and text[m].isdigit():
                    m += 1
                if m == k:
                    raise ParseError(text, k, "expected denominator digits")
                return RatFunc.coerce(Fraction(num, int(text[k:m]))), m
            return RatFunc.coerce(num), j
        return RatFunc.coerce(1), pos

    def _parse_word(self, text: str, pos: int) -> tuple[list, int]:
        n = len(text)
        sym = self.presentation.symbol
        modes: list[int] = []

        def skip_ws(i):
            while i < n and text[i].isspace():
                i += 1
            return i

        pos = skip_ws(pos)
        while pos < n and text.startswith(sym, pos):
            pos += len(sym)
            pos = skip_ws(pos)
            if pos >= n or text[pos] != "(":
                raise ParseError(text, pos, "expected '(' after generator symbol")
            pos += 1
            pos = skip_ws(pos)
            neg = False
            if pos < n and text[pos] == "-":
                neg = True
                pos += 1
            j = pos
            while j < n and text[j].isdigit():
                j += 1
            if j == pos:
                raise ParseError(text, pos, "expected a mode integer")
            mode = int(text[pos:j])
            if neg:
                mode = -mode
            pos = skip_ws(j)
            if pos >= n or text[pos] != ")":
                raise ParseError(text, pos, "expected ')' after mode")
            pos += 1
            power = 1
            pos = skip_ws(pos)
            if pos < n and text[pos] == "^":
                pos += 1
                pos = skip_ws(pos)
                j = pos
                while j < n and text[j].isdigit():
                    j += 1
                if j == pos:
                    raise ParseError(text, pos, "expected a power integer")
                power = int(text[pos:j])
                pos = j
                pos = skip_ws(pos)
            modes.extend([-mode] * power)
            pos = skip_ws(pos)
        if not text.startswith("|0>", pos):
            raise ParseError(text, pos, "expected '|0>' at end of term")
        return modes, pos + 3


def heisenberg_algebra() -> Algebra:
    return Algebra(HEISENBERG)


def virasoro_algebra() -> Algebra:
    return Algebra(VIRASORO)
