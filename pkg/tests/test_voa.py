import itertools
from fractions import Fraction

import pytest

from zhualg.scalars import RATFUNC_ZERO, RatFunc
from zhualg.voa import (
    Element,
    PresentationError,
    heisenberg_algebra,
    monomial_weight,
    virasoro_algebra,
)


@pytest.fixture(scope="module")
def heis():
    return heisenberg_algebra()


@pytest.fixture(scope="module")
def vir():
    return virasoro_algebra()


C = RatFunc.var("c")


class TestNormalize:
    def test_heisenberg_crossing_bracket(self, heis):
        # oracle: [a(2), a(-2)] = 2, then annihilation
        assert heis.normalize([2, -2]) == Element.vacuum(2)

    def test_virasoro_crossing_bracket(self, vir):
        # oracle: (m - p) L(0)|0> + (m^3 - m)/12 c with m = 2, p = -2
        assert vir.normalize([2, -2]) == Element.vacuum(C / 2)

    def test_negative_heisenberg_modes_commute(self, heis):
        assert heis.normalize([-1, -2]) == Element.monomial((2, 1))
        assert heis.normalize([-1, -2]) == heis.normalize([-2, -1])

    def test_virasoro_mode_minus_one_vanishes_on_vacuum(self, vir):
        assert vir.normalize([-1]).is_zero()
        # L(-1) pushed through one factor picks up only the bracket word
        assert vir.normalize([-1, -2]) == Element.monomial((3,))

    def test_virasoro_reorder_produces_shorter_correction(self, vir):
        # L(-2)L(-3)|0> = L(-3)L(-2)|0> + [L(-2), L(-3)]|0>
        lhs = vir.normalize([-2, -3])
        assert lhs == Element.monomial((3, 2)) + Element.monomial((5,))


class TestApplyGeneratorMode:
    def test_heisenberg_annihilation(self, heis):
        v = Element.monomial((1,))
        assert heis.apply_generator_mode(1, v) == Element.vacuum()

    def test_virasoro_mode_one_kills_through_quotient(self, vir):
        # L(1)L(-2)|0> = 3 L(-1)|0> = 0
        assert vir.apply_generator_mode(1, Element.monomial((2,))).is_zero()

    def test_vacuum_annihilation(self, heis):
        for j in range(0, 5):
            assert heis.apply_generator_mode(j, Element.vacuum()).is_zero()


class TestCompositeMode:
    def test_quadratic_state_acts_as_twice_grading(self, heis):
        # oracle: both commutator expansions by hand; grading eigenvalue 1
        w = Element.monomial((1, 1))
        v = Element.monomial((1,))
        assert heis.composite_mode(w, 1, v) == v.scale(2)

    def test_vacuum_state_is_identity_at_minus_one(self, heis):
        v = Element.monomial((2, 1))
        assert heis.composite_mode(Element.vacuum(), -1, v) == v
        assert heis.composite_mode(Element.vacuum(), 0, v).is_zero()

    def test_virasoro_conformal_state_grading(self, vir):
        # series index 1 of the weight-2 state is the grading operator
        v = Element.monomial((2,))
        assert vir.composite_mode(Element.monomial((2,)), 1, v) == v.scale(2)

    def test_matches_single_mode_action(self, heis, vir):
        for alg, maxwt in ((heis, 8), (vir, 8)):
            gen = alg.generator()
            basis = _basis_up_to(alg, maxwt)
            for mono in basis:
                v = Element.monomial(mono)
                for p in range(-6, 7):
                    got = alg.composite_mode(gen, p, v)
                    want = alg.apply_generator_mode(alg.series_to_physics(p), v)
                    assert got == want, (mono, p)


class TestAnnihilationBound:
    def test_single_boson(self, heis):
        w = Element.monomial((1,))
        v = Element.monomial((1,))
        assert heis.annihilation_bound(w, v) == 2
        assert not heis.composite_mode(w, 1, v).is_zero()
        assert heis.composite_mode(w, 2, v).is_zero()

    def test_vacuum(self, heis):
        assert heis.annihilation_bound(Element.vacuum(), Element.vacuum()) == 0

    def test_conformal_state_on_vacuum(self, vir):
        w = Element.monomial((2,))
        assert vir.annihilation_bound(w, Element.vacuum()) == 2
        assert vir.composite_mode(w, 2, Element.vacuum()).is_zero()


class TestTranslationAndGrading:
    def test_translation_single_mode(self, heis):
        assert heis.l_minus1(Element.monomial((1,))) == Element.monomial((2,))

    def test_grading_eigenvector(self, heis):
        v = Element.monomial((2, 1))
        assert heis.l_zero(v) == v.scale(3)

    def test_combined_on_square(self, heis):
        # oracle: term-by-term translation with two factors of mode one
        v = Element.monomial((1, 1))
        got = heis.ol_value(v)
        want = Element.monomial((2, 1), 2) + Element.monomial((1, 1), 2)
        assert got == want

    def test_translation_commutator(self, heis, vir):
        # [T, u_k] = -k u_{k-1} as operators, on all basis monomials of wt <= 8
        for alg in (heis, vir):
            basis = _basis_up_to(alg, 8)
            for mono in basis:
                v = Element.monomial(mono)
                for k in range(-4, 5):
                    m = alg.series_to_physics(k)
                    lhs = alg.l_minus1(alg.apply_generator_mode(m, v)) - alg.apply_generator_mode(
                        m, alg.l_minus1(v)
                    )
                    rhs = alg.apply_generator_mode(m - 1, v).scale(-k)
                    assert lhs == rhs, (mono, k)


def _basis_up_to(alg, max_weight):
    """All PBW monomials of weight <= max_weight for the algebra."""
    lo = alg.presentation.min_mode
    out = [()]
    def rec(prefix, remaining, cap):
        for k in range(min(remaining, cap), lo - 1, -1):
            word = prefix + (k,)
            out.append(word)
            rec(word, remaining - k, k)
    rec((), max_weight, max_weight)
    return sorted(out, key=lambda m: (monomial_weight(m), len(m), m))


class TestWeightBookkeeping:
    def test_mode_shifts_weight(self, heis, vir):
        for alg in (heis, vir):
            for mono in _basis_up_to(alg, 6):
                v = Element.monomial(mono)
                for m in range(-4, 5):
                    got = alg.apply_generator_mode(m, v)
                    for out_mono in got.terms:
                        assert monomial_weight(out_mono) == monomial_weight(mono) - m


class TestPermutationProperty:
    def test_reordered_words_differ_by_shorter(self, heis, vir):
        for alg in (heis, vir):
            lo = alg.presentation.min_mode
            for length in range(2, 5):
                for word in itertools.combinations_with_replacement(range(lo, 7), length):
                    base = alg.normalize([-k for k in word])
                    for perm in set(itertools.permutations(word)):
                        other = alg.normalize([-k for k in perm])
                        diff = base - other
                        for mono in diff.terms:
                            assert len(mono) < length, (word, perm)


class TestGrammar:
    @pytest.mark.parametrize(
        "text",
        [
            "0|0>",
            "|0>",
            "3/2 a(-2)a(-1)^2|0>",
            "a(-1)|0> + a(-2)|0>",
            "2 a(-3)|0> - 1/2 a(-1)^3|0>",
        ],
    )
    def test_roundtrip_heisenberg(self, heis, text):
        e = heis.parse_element(text)
        assert heis.parse_element(heis.render_element(e)) == e

    def test_roundtrip_virasoro_symbolic(self, vir):
        e = vir.parse_element("(c-1) L(-3)L(-2)|0> + 2|0>")
        assert vir.parse_element(vir.render_element(e)) == e
        assert e.coefficient((3, 2)) == C - 1

    def test_whitespace_insensitive(self, heis):
        a = heis.parse_element("3/2a(-2)a(-1)^2|0>")
        b = heis.parse_element(" 3/2  a(-2) a(-1)^2 |0> ")
        assert a == b

    def test_unsorted_input_normalizes(self, vir):
        assert vir.parse_element("L(-2)L(-3)|0>") == vir.normalize([-2, -3])

    def test_parse_error_has_position(self, heis):
        with pytest.raises(ValueError, match="position"):
            heis.parse_element("a(-1)")

    def test_check_element_rejects_bad_monomials(self, vir):
        with pytest.raises(PresentationError):
            vir.check_element(Element.monomial((2, 1)))
