"""Level-n quotient machinery: products, reductions, membership certificates.

For a fixed level ``n`` the quotient ideal is spanned by two families:

* circle products  ``u o v = sum_i C(wt u + n, i) u_{i-2n-2} v``  (series
  indices), together with their depth-m generalizations
  ``sum_i C(wt u + n + k, i) u_{i-m-2n-2} v`` for ``m >= k >= 0``;
* translation-plus-grading images ``(L(-1) + L(0)) v``.

The star product is ``u * v = sum_{m=0}^n (-1)^m C(m+n, n)
sum_i C(wt u + n, i) u_{i-n-m-1} v`` per homogeneous component of ``u``.

Everything here is certificate-producing: each rewrite that changes an
element modulo the ideal records an explicit spanning vector with its
coefficient, so any claimed membership can be rechecked by recomputing the
vectors and summing exactly.

Reduction strategy.  Generator modes deeper than series ``2n+1`` are
rewritten by the depth recursion (each atomic step emits one generalized
circle vector with the generator on the left); for ``n >= 1`` the remaining
boundary mode of series depth ``2n+1`` is eliminated through
translation-plus-grading identities (each step emits one ``ol`` vector plus
the generalized circles needed to clear the modes it raises).  The surviving
coordinates are words in series modes ``-1 .. -2n``, which is where the
membership systems are solved.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Sequence

from .linalg import Echelon
from .scalars import RATFUNC_ZERO, RatFunc, binom, parse_scalar, render_scalar
from .voa import (
    Algebra,
    Element,
    Monomial,
    PRESENTATIONS,
    monomial_key,
    monomial_weight,
)


class UnsupportedWeightError(ValueError):
    """A homogeneous component violates the weight precondition of a product."""


class ArgumentError(ValueError):
    """A precondition on operation arguments was violated."""


class ZhuInternalError(AssertionError):
    """An exact internal invariant failed; indicates a bug."""


@dataclass
class ZhuContext:
    """An algebra together with a quotient level and its reduction caches."""

    algebra: Algebra
    level: int

    def __post_init__(self):
        if self.level < 0:
            raise ArgumentError("level must be a nonnegative integer")
        if self.algebra.presentation.gen_weight < -self.level:
            raise ArgumentError("generator weight below -level is unsupported")
        self._reduce_full: dict = {}
        self._reduce_circ: dict = {}
        self._step_cache: dict = {}

    @property
    def n(self) -> int:
        return self.level

    @property
    def boundary_mode(self) -> int:
        """Physics label of the series -(2n+1) mode eliminated at this level."""
        return 2 * self.level + self.algebra.presentation.gen_weight

    @property
    def deep_threshold(self) -> int:
        """Physics labels >= this are rewritten by the depth recursion."""
        return self.boundary_mode + 1

    def reduced_mode_range(self) -> tuple[int, int]:
        """Inclusive physics mode range of the fully reduced coordinates."""
        pres = self.algebra.presentation
        return (pres.min_mode, max(self.boundary_mode - 1, pres.min_mode))


# ---------------------------------------------------------------------------
# products
# ---------------------------------------------------------------------------

def _check_component_weights(ctx: ZhuContext, u: Element) -> None:
    for w in u.homogeneous_components():
        if w + ctx.level < 0:
            raise UnsupportedWeightError(
                f"component of weight {w} violates wt u + n >= 0 at level {ctx.level}"
            )


def circle(ctx: ZhuContext, u: Element, v: Element) -> Element:
    """The level-n circle product u o v."""
    return generalized_circle(ctx, u, v, 0, 0)


def generalized_circle(ctx: ZhuContext, u: Element, v: Element, m: int, k: int) -> Element:
    """Depth-m width-k generalization of the circle product.

    Computes ``sum_{i} C(wt u + n + k, i) u_{i - m - 2n - 2} v`` per
    homogeneous component of u; for ``m = k = 0`` this is the circle product.
    """
    if not (m >= k >= 0):
        raise ArgumentError(f"generalized circle requires m >= k >= 0, got m={m}, k={k}")
    _check_component_weights(ctx, u)
    n = ctx.level
    out = Element.zero()
    for w, comp in u.homogeneous_components().items():
        top = w + n + k
        for i in range(top + 1):
            b = binom(top, i)
            if not b:
                continue
            out = out + ctx.algebra.composite_mode(comp, i - m - 2 * n - 2, v).scale(b)
    return out


def star(ctx: ZhuContext, u: Element, v: Element) -> Element:
    """The level-n star product u * v (the quotient multiplication)."""
    _check_component_weights(ctx, u)
    n = ctx.level
    out = Element.zero()
    for w, comp in u.homogeneous_components().items():
        for m in range(n + 1):
            outer = Fraction((-1) ** m) * binom(m + n, n)
            for i in range(w + n + 1):
                b = outer * binom(w + n, i)
                if not b:
                    continue
                out = out + ctx.algebra.composite_mode(comp, i - n - m - 1, v).scale(b)
    return out


def star_word(ctx: ZhuContext, factors: Sequence[Element]) -> Element:
    """Left-associated star product of a sequence of elements."""
    if not factors:
        return Element.vacuum()
    out = factors[0]
    for f in factors[1:]:
        out = star(ctx, out, f)
    return out


def ol_value(ctx: ZhuContext, v: Element) -> Element:
    return ctx.algebra.ol_value(v)


# ---------------------------------------------------------------------------
# spanning vectors and certificates
# ---------------------------------------------------------------------------

CIRCLE = "circle"
GENERALIZED_CIRCLE = "generalized_circle"
OL = "ol"


@dataclass(frozen=True)
class SpanningVector:
    """A generator of the level-n ideal with its recomputable value."""

    kind: str
    operands: tuple
    value: Element

    def key(self) -> tuple:
        ops = tuple(x.key() if isinstance(x, Element) else x for x in self.operands)
        return (self.kind, ops)

    def recompute(self, ctx: ZhuContext) -> Element:
        if self.kind == CIRCLE:
            u, v = self.operands
            return circle(ctx, u, v)
        if self.kind == GENERALIZED_CIRCLE:
            u, v, m, k = self.operands
            return generalized_circle(ctx, u, v, m, k)
        if self.kind == OL:
            (v,) = self.operands
            return ol_value(ctx, v)
        raise ArgumentError(f"unknown spanning vector kind {self.kind!r}")

    def verify(self, ctx: ZhuContext) -> bool:
        return self.recompute(ctx) == self.value


def circle_vector(ctx: ZhuContext, u: Element, v: Element) -> SpanningVector:
    return SpanningVector(CIRCLE, (u, v), circle(ctx, u, v))


def generalized_circle_vector(ctx: ZhuContext, u: Element, v: Element, m: int, k: int) -> SpanningVector:
    if m == 0 and k == 0:
        return circle_vector(ctx, u, v)
    return SpanningVector(GENERALIZED_CIRCLE, (u, v, m, k), generalized_circle(ctx, u, v, m, k))


def ol_vector(ctx: ZhuContext, v: Element) -> SpanningVector:
    return SpanningVector(OL, (v,), ol_value(ctx, v))


@dataclass
class MembershipCertificate:
    """target = sum of coefficient * vector.value, recheckable exactly."""

    target: Element
    combination: list  # list[(RatFunc, SpanningVector)]
    presentation: str
    level: int

    def recheck(self, ctx: ZhuContext) -> bool:
        acc = Element.zero()
        for coeff, vec in self.combination:
            if not vec.verify(ctx):
                return False
            acc = acc + vec.value.scale(coeff)
        return acc == self.target

    def to_json_dict(self) -> dict:
        alg = Algebra(PRESENTATIONS[self.presentation])
        combo = []
        for coeff, vec in self.combination:
            entry = {"kind": vec.kind, "coefficient": render_scalar(coeff)}
            if vec.kind == OL:
                entry["operands"] = {"v": alg.render_element(vec.operands[0])}
            else:
                ops = {"u": alg.render_element(vec.operands[0]), "v": alg.render_element(vec.operands[1])}
                if vec.kind == GENERALIZED_CIRCLE:
                    ops["m"] = vec.operands[2]
                    ops["k"] = vec.operands[3]
                entry["operands"] = ops
            combo.append(entry)
        return {
            "presentation": self.presentation,
            "level": self.level,
            "target": alg.render_element(self.target),
            "combination": combo,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict(), indent=2)


def certificate_from_json_dict(data: dict) -> tuple[MembershipCertificate, ZhuContext]:
    pres = data["presentation"]
    if pres not in PRESENTATIONS:
        raise ArgumentError(f"unknown presentation {pres!r}")
    ctx = ZhuContext(Algebra(PRESENTATIONS[pres]), int(data["level"]))
    alg = ctx.algebra
    target = alg.parse_element(data["target"])
    combo = []
    for entry in data["combination"]:
        kind = entry["kind"]
        coeff = parse_scalar(entry["coefficient"])
        ops = entry["operands"]
        if kind == OL:
            vec = ol_vector(ctx, alg.parse_element(ops["v"]))
        elif kind == CIRCLE:
            vec = circle_vector(ctx, alg.parse_element(ops["u"]), alg.parse_element(ops["v"]))
        elif kind == GENERALIZED_CIRCLE:
            vec = generalized_circle_vector(
                ctx, alg.parse_element(ops["u"]), alg.parse_element(ops["v"]),
                int(ops["m"]), int(ops["k"]),
            )
        else:
            raise ArgumentError(f"unknown vector kind {kind!r}")
        combo.append((coeff, vec))
    return MembershipCertificate(target, combo, pres, ctx.level), ctx


# ---------------------------------------------------------------------------
# reduction steps
# ---------------------------------------------------------------------------

def _recursion_step(ctx: ZhuContext, mono: Monomial) -> tuple[Element, tuple]:
    """One atomic depth-recursion rewrite of a monomial whose leading mode is
    deep.  Returns (replacement, emissions); the exact identity is

        monomial = replacement + sum(coeff * vector.value).
    """
    alg = ctx.algebra
    gw = alg.presentation.gen_weight
    n = ctx.level
    K = mono[0]
    k = K - gw + 1                     # series depth of the leading mode
    depth = k - (2 * n + 2)
    if depth < 0:
        raise ZhuInternalError("recursion step on a non-deep monomial")
    tail = Element.monomial(mono[1:])
    vec = generalized_circle_vector(ctx, alg.generator(), tail, depth, 0)
    repl = Element.zero()
    for i in range(1, gw + n + 1):
        b = binom(gw + n, i)
        if not b:
            continue
        series = i - depth - 2 * n - 2
        repl = repl - alg.apply_generator_mode(alg.series_to_physics(series), tail).scale(b)
    return repl, ((RatFunc.coerce(1), vec),)


def _closed_recursion_image(ctx: ZhuContext, mono: Monomial) -> Element:
    """Closed-form image of a deep monomial modulo circle-type vectors:
    the leading mode of series depth ``m + wt u`` is rewritten onto series
    modes ``-(n+1) .. -(n + n + wt u)`` with binomial coefficients."""
    alg = ctx.algebra
    gw = alg.presentation.gen_weight
    n = ctx.level
    K = mono[0]
    k = K - gw + 1
    m = k + gw - 1                     # u_{-k} = u_{wt u - m - 1}
    if m <= 2 * n + gw:
        raise ZhuInternalError("closed recursion on a non-deep monomial")
    tail = Element.monomial(mono[1:])
    sign = Fraction((-1) ** (m + gw))
    out = Element.zero()
    for j in range(1, n + gw + 1):
        b = sign * binom(m - n - 1, j - 1) * binom(m - n - j - 1, n + gw - j)
        if not b:
            continue
        series = gw - n - j - 1
        out = out + alg.apply_generator_mode(alg.series_to_physics(series), tail).scale(b)
    return out


def _clear_deep(ctx: ZhuContext, e: Element) -> tuple[Element, list]:
    """Rewrite all deep monomials by atomic recursion steps, collecting
    emissions so that input = output + sum(emissions)."""
    emissions: list = []
    work = e
    while True:
        bad = [m for m in work.terms if m and m[0] >= ctx.deep_threshold]
        if not bad:
            return work, emissions
        mono = max(bad, key=monomial_key)
        coeff = work.terms[mono]
        repl, emitted = _recursion_step(ctx, mono)
        work = work - Element.monomial(mono, coeff) + repl.scale(coeff)
        for c, vec in emitted:
            emissions.append((coeff * c, vec))


def _boundary_step(ctx: ZhuContext, mono: Monomial) -> tuple[Element, tuple]:
    """One elimination of the series-(2n+1) boundary mode from a monomial.

    Builds the precursor word (one boundary mode lowered by one), applies the
    translation-plus-grading identity to it, clears the modes this raises,
    and solves for the target monomial.  Exact identity:
    monomial = replacement + sum(coeff * vector.value).
    """
    n = ctx.level
    if n < 1:
        raise ZhuInternalError("boundary elimination requires level >= 1")
    B = ctx.boundary_mode
    if B not in mono:
        raise ZhuInternalError("boundary step on a monomial without the boundary mode")
    pieces = list(mono)
    pieces.remove(B)
    precursor = tuple(sorted(pieces + [B - 1], reverse=True))
    e0 = ol_value(ctx, Element.monomial(precursor))
    e1, cleared = _clear_deep(ctx, e0)
    gamma = e1.coefficient(mono)
    expected = RatFunc.coerce(2 * n * precursor.count(B - 1))
    if gamma != expected:
        raise ZhuInternalError(
            f"boundary pivot {gamma} != {expected} for monomial {mono}"
        )
    inv = RatFunc.coerce(1) / gamma
    repl = Element.monomial(mono) - e1.scale(inv)
    emissions = [(inv, ol_vector(ctx, Element.monomial(precursor)))]
    for c, vec in cleared:
        emissions.append((-inv * c, vec))
    return repl, tuple(emissions)


def _step(ctx: ZhuContext, mono: Monomial, circ_only: bool) -> tuple[Element, tuple] | None:
    """The rewrite applicable to a monomial, or None if it is terminal."""
    if mono and mono[0] >= ctx.deep_threshold:
        key = (mono, "deep")
        hit = ctx._step_cache.get(key)
        if hit is None:
            hit = _recursion_step(ctx, mono)
            ctx._step_cache[key] = hit
        return hit
    if not circ_only and ctx.level >= 1 and ctx.boundary_mode in mono:
        key = (mono, "boundary")
        hit = ctx._step_cache.get(key)
        if hit is None:
            hit = _boundary_step(ctx, mono)
            ctx._step_cache[key] = hit
        return hit
    return None


def _reduce_mono(ctx: ZhuContext, mono: Monomial, circ_only: bool) -> Element:
    memo = ctx._reduce_circ if circ_only else ctx._reduce_full
    hit = memo.get(mono)
    if hit is not None:
        return hit
    stack = [mono]
    while stack:
        cur = stack[-1]
        if cur in memo:
            stack.pop()
            continue
        step = _step(ctx, cur, circ_only)
        if step is None:
            memo[cur] = Element.monomial(cur)
            stack.pop()
            continue
        repl, _ = step
        pending = [m for m in repl.terms if m not in memo]
        unresolved = []
        for m in pending:
            if _step(ctx, m, circ_only) is None:
                memo[m] = Element.monomial(m)
            else:
                unresolved.append(m)
        if unresolved:
            stack.extend(unresolved)
            continue
        acc = Element.zero()
        for m, c in repl.terms.items():
            acc = acc + memo[m].scale(c)
        memo[cur] = acc
        stack.pop()
    return memo[mono]


def reduce_value(ctx: ZhuContext, e: Element, circ_only: bool = False) -> Element:
    """Fully reduced representative of e modulo the ideal (value only)."""
    out = Element.zero()
    for mono, coeff in e.terms.items():
        out = out + _reduce_mono(ctx, mono, circ_only).scale(coeff)
    return out


def reduce_with_emissions(ctx: ZhuContext, e: Element, circ_only: bool = False) -> tuple[Element, list]:
    """Reduced representative together with the exact rewrite combination:
    e = reduced + sum(coeff * vector.value)."""
    work = e
    emissions: list = []
    while True:
        bad = [m for m in work.terms if _step(ctx, m, circ_only) is not None]
        if not bad:
            return work, emissions
        mono = max(bad, key=monomial_key)
        coeff = work.terms[mono]
        repl, emitted = _step(ctx, mono, circ_only)
        work = work - Element.monomial(mono, coeff) + repl.scale(coeff)
        for c, vec in emitted:
            emissions.append((coeff * c, vec))


# ---------------------------------------------------------------------------
# public reduction operations
# ---------------------------------------------------------------------------

def recursion_reduce(ctx: ZhuContext, v: Element) -> Element:
    """Rewrite every deep generator mode via the closed-form depth recursion,
    leftmost-deepest first, to a fixpoint.  The output is equivalent modulo
    circle-type vectors alone and is idempotent under this operation."""
    work = v
    while True:
        bad = [m for m in work.terms if m and m[0] >= ctx.deep_threshold]
        if not bad:
            return work
        mono = max(bad, key=monomial_key)
        coeff = work.terms[mono]
        image = _closed_recursion_image(ctx, mono)
        work = work - Element.monomial(mono, coeff) + image.scale(coeff)


def l_reduce(ctx: ZhuContext, v: Element) -> Element:
    """Eliminate the series-(2n+1) boundary mode (level >= 1) using
    translation-plus-grading identities; the result is equivalent modulo the
    full ideal and contains no boundary or deeper modes."""
    if ctx.level < 1:
        raise ArgumentError("boundary elimination requires level >= 1")
    return reduce_value(ctx, v, circ_only=False)


def spanning_normal_form(ctx: ZhuContext, v: Element) -> Element:
    """Iterate depth recursion and boundary elimination to a fixpoint.

    For level >= 1 the output is supported on physics modes
    ``min_mode .. 2n + wt u - 1`` (series ``-1 .. -2n``).
    """
    if ctx.level < 1:
        raise ArgumentError("the normal form is defined for level >= 1")
    out = reduce_value(ctx, recursion_reduce(ctx, v), circ_only=False)
    lo, hi = ctx.reduced_mode_range()
    for mono in out.terms:
        if mono and (mono[0] > hi or mono[-1] < lo):
            raise ZhuInternalError(f"normal form left mode range: {mono}")
    return out


# ---------------------------------------------------------------------------
# spanning sets and membership
# ---------------------------------------------------------------------------

def basis_monomials(algebra: Algebra, max_weight: int, max_mode: int | None = None) -> list:
    """All PBW monomials of weight <= max_weight (optionally with modes
    capped), in the deterministic (weight, length, lex) order."""
    lo = algebra.presentation.min_mode
    out = [()]

    def rec(prefix, remaining, cap):
        for k in range(min(remaining, cap), lo - 1, -1):
            word = prefix + (k,)
            out.append(word)
            rec(word, remaining - k, k)

    cap0 = max_weight if max_mode is None else min(max_weight, max_mode)
    rec((), max_weight, cap0)
    return sorted(out, key=monomial_key)


def o_n_span(
    ctx: ZhuContext,
    weight_bound_u: int,
    weight_bound_v: int,
    include_generalized: bool = False,
    generalized_depth: int | None = None,
) -> list:
    """Spanning vectors with both operands of bounded weight: all circle
    products over basis pairs, all translation-plus-grading images of basis
    vectors, optionally generalized circles up to the given depth.  Zero
    vectors are dropped and duplicate values deduplicated; order is
    deterministic."""
    if weight_bound_u < 0 or weight_bound_v < 0:
        raise ArgumentError("weight bounds must be nonnegative")
    if generalized_depth is None:
        generalized_depth = 2 * ctx.level + 2
    us = basis_monomials(ctx.algebra, weight_bound_u)
    vs = basis_monomials(ctx.algebra, weight_bound_v)
    out = []
    seen = set()

    def push(vec: SpanningVector):
        if vec.value.is_zero():
            return
        key = vec.value.key()
        if key in seen:
            return
        seen.add(key)
        out.append(vec)

    for u in us:
        ue = Element.monomial(u)
        for v in vs:
            push(circle_vector(ctx, ue, Element.monomial(v)))
    if include_generalized:
        for m in range(1, generalized_depth + 1):
            for u in us:
                ue = Element.monomial(u)
                for v in vs:
                    push(generalized_circle_vector(ctx, ue, Element.monomial(v), m, 0))
    for v in vs:
        push(ol_vector(ctx, Element.monomial(v)))
    return out


@dataclass
class NotFoundUpToBound:
    """Bounded search failed; explicitly not a proof of non-membership."""

    search_bound: int


class OnSolver:
    """Reusable membership solver for one context.

    Spanning rows are reduced into the surviving coordinates and echelonized
    incrementally with provenance; asking for a target reduces it and reads
    off the combination.  Row generation is deterministic and grows in total
    operand weight, so results are reproducible and bounded-search semantics
    are explicit.
    """

    def __init__(self, ctx: ZhuContext, circ_only: bool = False):
        self.ctx = ctx
        self.circ_only = circ_only
        self.echelon = Echelon()
        self.vectors: list[SpanningVector] = []
        self._seen_values: set = set()
        self._col_index: dict = {}
        self._generated_weight = 0

    def _column(self, mono: Monomial) -> tuple:
        # echelon column keys ordered by the deterministic monomial order
        return monomial_key(mono)

    def _row_of(self, e: Element) -> dict:
        return {self._column(m): c for m, c in e.terms.items()}

    def _add_vector(self, vec: SpanningVector):
        if vec.value.is_zero():
            return
        key = vec.value.key()
        if key in self._seen_values:
            return
        self._seen_values.add(key)
        reduced = reduce_value(self.ctx, vec.value, self.circ_only)
        tag = len(self.vectors)
        self.vectors.append(vec)
        if not reduced.is_zero():
            self.echelon.add_row(self._row_of(reduced), tag)
        else:
            self.echelon.inputs[tag] = {}

    def ensure_weight(self, total_weight: int) -> None:
        """Generate all spanning rows with operand weights summing to at most
        the given bound (idempotent, grows monotonically)."""
        ctx = self.ctx
        lo, hi = ctx.reduced_mode_range()
        max_mode = None if self.circ_only else hi
        for w in range(self._generated_weight + 1, total_weight + 1):
            for wu in range(1, w + 1):
                wv = w - wu
                for u in basis_monomials(ctx.algebra, wu, max_mode):
                    if monomial_weight(u) != wu:
                        continue
                    ue = Element.monomial(u)
                    for v in basis_monomials(ctx.algebra, wv, max_mode):
                        if monomial_weight(v) != wv:
                            continue
                        self._add_vector(circle_vector(ctx, ue, Element.monomial(v)))
            if not self.circ_only:
                for v in basis_monomials(ctx.algebra, w - 1, max_mode):
                    if monomial_weight(v) != w - 1:
                        continue
                    self._add_vector(ol_vector(ctx, Element.monomial(v)))
        self._generated_weight = max(self._generated_weight, total_weight)

    def try_solve(self, target: Element, min_length: int = 0):
        """Try to express the reduced target over the current rows.

        Returns (combo, residual) where combo maps vector indices to
        coefficients; with ``min_length`` > 0 columns of monomial length
        <= min_length are projected out (membership modulo short words).
        """
        reduced = reduce_value(self.ctx, target, self.circ_only)
        row = {self._column(m): c for m, c in reduced.terms.items() if len(m) > min_length}
        if min_length:
            # project the stored echelon? rebuild per call instead
            ech = Echelon()
            for tag, vec in enumerate(self.vectors):
                r = reduce_value(self.ctx, vec.value, self.circ_only)
                proj = {self._column(m): c for m, c in r.terms.items() if len(m) > min_length}
                if proj:
                    ech.add_row(proj, tag)
            residual, combo = ech.express(row)
        else:
            residual, combo = self.echelon.express(row)
        return combo, residual

    def solve(self, target: Element, search_bound: int, min_length: int = 0):
        """Grow rows up to target weight + search_bound, early-exiting as soon
        as the target is expressible.  Returns a MembershipCertificate, or a
        (certificate, residual element) pair when ``min_length`` is used, or
        NotFoundUpToBound."""
        reduced = reduce_value(self.ctx, target, self.circ_only)
        cap = reduced.max_weight() + search_bound
        start = min(self._generated_weight, cap)
        combo = residual = None
        for w in range(start, cap + 1):
            self.ensure_weight(w)
            combo, residual = self.try_solve(target, min_length)
            if not residual:
                break
        if residual:
            return NotFoundUpToBound(search_bound)
        cert = self._assemble(target, combo, min_length)
        return cert

    def _assemble(self, target: Element, combo: dict, min_length: int = 0):
        ctx = self.ctx
        acc: dict = {}

        def put(coeff: RatFunc, vec: SpanningVector):
            if coeff.is_zero():
                return
            key = vec.key()
            if key in acc:
                old_c, old_v = acc[key]
                s = old_c + coeff
                if s.is_zero():
                    del acc[key]
                else:
                    acc[key] = (s, old_v)
            else:
                acc[key] = (coeff, vec)

        t_red, t_emit = reduce_with_emissions(ctx, target, self.circ_only)
        for c, vec in t_emit:
            put(c, vec)
        for tag, coeff in sorted(combo.items()):
            vec = self.vectors[tag]
            put(coeff, vec)
            v_red, v_emit = reduce_with_emissions(ctx, vec.value, self.circ_only)
            for c, inner in v_emit:
                put(-coeff * c, inner)
        combination = [acc[k] for k in sorted(acc)]
        cert = MembershipCertificate(
            target, combination, ctx.algebra.presentation.name, ctx.level
        )
        check = Element.zero()
        for coeff, vec in combination:
            check = check + vec.value.scale(coeff)
        residual = target - check
        if min_length == 0:
            if not residual.is_zero():
                raise ZhuInternalError("certificate recheck failed")
            return cert
        if any(len(m) > min_length for m in residual.terms):
            raise ZhuInternalError("filtered certificate recheck failed")
        return cert, residual


def membership(ctx: ZhuContext, target: Element, search_bound: int):
    """Find an explicit ideal-membership certificate for the target, or
    report NotFoundUpToBound (which proves nothing)."""
    solver = OnSolver(ctx)
    return solver.solve(target, search_bound)


def membership_circ_only(ctx: ZhuContext, target: Element, search_bound: int):
    """Membership in the span of circle-type vectors alone (no
    translation-plus-grading images)."""
    solver = OnSolver(ctx, circ_only=True)
    return solver.solve(target, search_bound)


# ---------------------------------------------------------------------------
# separation of the translation-plus-grading images
# ---------------------------------------------------------------------------

@dataclass
class Separated:
    """Proof that (L(-1)+L(0))u lies outside the circle-product span."""

    reason: str


@dataclass
class FoundMembership:
    certificate: MembershipCertificate


@dataclass
class NotSeparatedUpToBound:
    """No certificate found within the bound; neither a separation proof nor
    a membership disproof."""

    search_bound: int


def ol_separation_check(ctx: ZhuContext, u: Element, search_bound: int):
    """Decide whether (L(-1)+L(0))u lies in the circle-product span.

    At level 0 the membership is definitional:
    (L(-1)+L(0))u = u o |0> exactly, so the certificate is immediate.

    For level >= 1 and u a multiple of the generating state of weight
    1 <= wt u <= n, weight accounting over normally ordered circle-product
    expansions shows no circle product can contain the generator monomial
    u_{-1}|0> as a component (that would need weight slack only available
    when wt u >= n + 1), so the answer Separated is a proof, not a bounded
    search.  Outside this regime a bounded search is performed.
    """
    if not u.is_homogeneous() or u.is_zero():
        raise ArgumentError("separation check requires a nonzero homogeneous element")
    n = ctx.level
    if n == 0:
        vec = circle_vector(ctx, u, Element.vacuum())
        target = ol_value(ctx, u)
        if vec.value != target:
            raise ZhuInternalError("level-0 circle identity failed")
        cert = MembershipCertificate(
            target, [(RatFunc.coerce(1), vec)], ctx.algebra.presentation.name, 0
        )
        return FoundMembership(cert)
    gen = ctx.algebra.generator()
    gw = ctx.algebra.presentation.gen_weight
    monos = list(u.terms)
    if monos == list(gen.terms) and 1 <= gw <= n:
        return Separated(
            reason=(
                "weight accounting: every circle product supported near weight "
                f"{gw} lacks a u_{{-1}}|0> component when the generator weight "
                f"{gw} is at most the level {n}"
            )
        )
    result = membership_circ_only(ctx, ol_value(ctx, u), search_bound)
    if isinstance(result, MembershipCertificate):
        return FoundMembership(result)
    return NotSeparatedUpToBound(search_bound)


# ---------------------------------------------------------------------------
# multiplication formulas
# ---------------------------------------------------------------------------

def lead_coefficient(n: int, j: int) -> Fraction:
    """Alternating binomial sum sum_{m=0}^n (-1)^m C(m+n,n) C(j+n,m+n).

    Vanishes exactly when 0 < |j| <= n; equals (-1)^n C(j+n,n) C(j-1,n) for
    j > n; and is a nonzero sum of same-sign terms for j < -n.
    """
    total = Fraction(0)
    for m in range(n + 1):
        total += Fraction((-1) ** m) * binom(m + n, n) * binom(j + n, m + n)
    return total


def _compositions(total: int, parts: int):
    """Ordered tuples of nonnegative integers with the given sum."""
    if parts == 0:
        if total == 0:
            yield ()
        return
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def mult_formula(ctx: ZhuContext, exponents: Sequence[int], v: Element) -> tuple[Element, Element]:
    """Star product of a generator power word with v, split as (main, g).

    ``exponents[s-1]`` is the multiplicity of the series mode ``-s`` in the
    left factor ``u_{-t}^{i_t} ... u_{-1}^{i_1}|0>``.  ``main`` is the double
    binomial sum over ordered tuples of nonnegative integers (the normally
    ordered part with all modes negative); ``g`` is defined as the exact
    difference star - main, so main + g = star always holds.
    """
    if not exponents or any(i < 0 for i in exponents):
        raise ArgumentError("exponents must be a nonempty sequence of naturals")
    alg = ctx.algebra
    gw = alg.presentation.gen_weight
    n = ctx.level
    t = len(exponents)
    modes = []
    for s in range(1, t + 1):
        modes.extend([s + gw - 1] * exponents[s - 1])
    word = tuple(sorted(modes, reverse=True))
    word_elem = Element.monomial(word)
    r = monomial_weight(word)
    p_total = sum(exponents)
    factor_depth = []    # series depth s of each factor position, in formula order
    for s in range(1, t + 1):
        for _ in range(exponents[s - 1]):
            factor_depth.append(s)
    main = Element.zero()
    for m in range(n + 1):
        for j in range(-m, n + 1):
            outer = Fraction((-1) ** m) * binom(m + n, n) * binom(n + r, j + m)
            if not outer:
                continue
            for ks in _compositions(n - j, p_total):
                coeff = outer
                for q, k in enumerate(ks):
                    s = factor_depth[q]
                    coeff *= binom(k + s - 1, s - 1)
                if not coeff:
                    continue
                acc = v
                for q in range(p_total - 1, -1, -1):
                    s = factor_depth[q]
                    acc = alg.apply_generator_mode(alg.series_to_physics(-ks[q] - s), acc)
                    if acc.is_zero():
                        break
                main = main + acc.scale(coeff)
    total = star(ctx, word_elem, v)
    return main, total - main


def mult_single(ctx: ZhuContext, t: int, i: int, v: Element) -> Element:
    """Star product u_{-t}^i |0> * v via the single-mode multiplication
    formula, with the finite tail closed forms asserted in their regimes.

    Returns the product; raises if the closed forms disagree with the star
    product (they never should).
    """
    if t < 1 or i < 1:
        raise ArgumentError("t and i must be positive")
    alg = ctx.algebra
    gw = alg.presentation.gen_weight
    n = ctx.level
    word = Element.monomial(((t + gw - 1),) * i)
    main = Element.zero()
    r = i * (gw + t - 1)
    for m in range(n + 1):
        for j in range(m + n + 1):
            outer = Fraction((-1) ** m) * binom(m + n, n) * binom(n + r, m + n - j)
            if not outer:
                continue
            for ps in _compositions(j, i):
                coeff = outer
                for p in ps:
                    coeff *= binom(p + t - 1, t - 1)
                if not coeff:
                    continue
                acc = v
                for q in range(i - 1, -1, -1):
                    acc = alg.apply_generator_mode(alg.series_to_physics(-ps[q] - t), acc)
                    if acc.is_zero():
                        break
                main = main + acc.scale(coeff)
    total = star(ctx, word, v)
    g = total - main
    if i == 1:
        K = gw + t
        bound = alg.annihilation_bound(alg.generator(), v)
        kills = all(
            alg.apply_generator_mode(alg.series_to_physics(k - t), v).is_zero()
            for k in range(1, bound + t + 1)
        )
        if kills and not g.is_zero():
            raise ZhuInternalError("tail must vanish when positive-shift modes kill v")
        if n + gw + t - 1 >= 0 and gw + t < 2 and not g.is_zero():
            raise ZhuInternalError("tail must vanish in the low-weight regime")
        closed = _single_tail_closed(ctx, t, v)
        if closed != g:
            raise ZhuInternalError("closed-form tail disagrees with the star product")
    return total


def _single_tail_closed(ctx: ZhuContext, t: int, v: Element) -> Element:
    """General closed form of the i = 1 tail: the j <= -1 part of the mode
    expansion, truncated by binomial vanishing and by annihilation."""
    alg = ctx.algebra
    gw = alg.presentation.gen_weight
    n = ctx.level
    out = Element.zero()
    top = n + gw + t - 1
    kill = alg.annihilation_bound(alg.generator(), v)
    for m in range(n + 1):
        j = -1
        while True:
            if top >= 0 and m + n - j > top:
                break
            series = -j - t
            if series >= kill:
                j -= 1
                continue
            coeff = Fraction((-1) ** m) * binom(m + n, n) * binom(top, m + n - j) * binom(j + t - 1, t - 1)
            if coeff:
                out = out + alg.apply_generator_mode(alg.series_to_physics(series), v).scale(coeff)
            j -= 1
        # top < 0 cannot happen for the supported algebras (gw >= 1)
    return out


# ---------------------------------------------------------------------------
# reduced regular part of the vertex operator
# ---------------------------------------------------------------------------

def yplus_reduced(ctx: ZhuContext, u: Element, v: Element, order: int) -> list:
    """Coefficients of x^0..x^order of the regular part of Y(u, x)v after
    reduction modulo circle-type vectors: low powers keep their single-mode
    coefficients, high powers collapse onto series modes -1 .. -(2n+1).
    """
    if not u.is_homogeneous() or u.is_zero():
        raise ArgumentError("the reduced regular part requires homogeneous u")
    n = ctx.level
    wt = u.max_weight()
    if wt < -n:
        raise ArgumentError("weight below -level is unsupported")
    alg = ctx.algebra
    out = []
    if wt == -n:
        for p in range(order + 1):
            k = p + 1
            coeff = alg.composite_mode(u, -k, v) if k <= 2 * n + 1 else Element.zero()
            out.append((p, coeff))
        return out
    for p in range(order + 1):
        if p <= n - wt:
            out.append((p, alg.composite_mode(u, -(p + 1), v)))
            continue
        m = p + wt
        acc = Element.zero()
        sign = Fraction((-1) ** (m - wt))
        for k in range(n - wt + 2, 2 * n + 2):
            b = sign * binom(m - n - 1, k - n + wt - 2) * binom(m - k - wt, 2 * n - k + 1)
            if not b:
                continue
            acc = acc + alg.composite_mode(u, -k, v).scale(b)
        out.append((p, acc))
    return out
