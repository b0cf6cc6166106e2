import pytest
from hypothesis import given, settings, strategies as st
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.element import Element
from core.errors import ArityMismatchError, KindMismatchError, OperadForgeError, ParseError
from core.monomials import GeneratorSymbol, TreeOperad, WordAlgebra
from core.orderings import MonomialOrder, Reversed, canonical_order_text


@pytest.fixture
def words():
    return WordAlgebra([GeneratorSymbol("x", 1, 0), GeneratorSymbol("m", 2, 0)])


@pytest.fixture
def planar():
    return TreeOperad([GeneratorSymbol("m", 2, 0)], planar=True)


def combs(free):
    left, _ = free.from_nested(("m", [("m", [1, 2]), 3]))
    right, _ = free.from_nested(("m", [1, ("m", [2, 3])]))
    return left, right


class TestOrderText:

    @pytest.mark.parametrize("text,canonical", [
        ("arity-then-lex", "aritylex"),
        ("rev-dictionary-subsets", "revdict"),
        ("path-deg-lex", "pathdeglex"),
        ("qm", "qm > revpathperm"),
        ("qm(m*=0)", "qm(m*=0) > revpathperm"),
        ("opposite( pathdeglex )", "opposite(pathdeglex)"),
        ("aritylex > genlex", "aritylex > genlex"),
    ])
    def test_canonical_text(self, text, canonical):
        assert canonical_order_text(text) == canonical

    @pytest.mark.parametrize("text", ["", "   ", "lexicon", "aritylex(x=1)", "aritylex >", "qm(m=)"])
    def test_malformed_text(self, text):
        with pytest.raises(ParseError):
            canonical_order_text(text)

    def test_reversed_wrapper(self):
        assert Reversed(1) > Reversed(2)
        assert Reversed((1, 2)) == Reversed((1, 2))


class TestWordOrders:

    def test_aritylex_prefers_larger_labels_first(self, words):
        order = MonomialOrder(words, "aritylex")
        up = words.word([("x", (1,)), ("x", (2,))])
        down = words.word([("x", (2,)), ("x", (1,))])

        # Assertions
        assert order.greater(down, up)
        assert order.compare(down, up) == 1
        assert order.lead(Element({up: 1, down: -1})) == down

    def test_revdict_reverses_labels(self, words):
        order = MonomialOrder(words, "revdict")
        up = words.word([("x", (1,)), ("x", (2,))])
        down = words.word([("x", (2,)), ("x", (1,))])
        assert order.greater(up, down)

    def test_weight_dominates(self, words):
        order = MonomialOrder(words, "revdict")
        light = words.word([("m", (1, 2))])
        heavy = words.word([("x", (1,)), ("x", (2,))])
        assert order.greater(heavy, light)

    def test_tree_order_rejected_for_words(self, words):
        with pytest.raises(KindMismatchError):
            MonomialOrder(words, "pathdeglex")

    def test_compare_needs_equal_arity(self, words):
        order = MonomialOrder(words, "aritylex")
        with pytest.raises(ArityMismatchError):
            order.compare(words.word([("x", (1,))]), words.word([("m", (1, 2))]))


class TestTreeOrders:

    def test_pathdeglex_prefers_left_comb(self, planar):
        left, right = combs(planar)
        assert MonomialOrder(planar, "pathdeglex").greater(left, right)

    def test_opposite_flips(self, planar):
        left, right = combs(planar)
        assert MonomialOrder(planar, "opposite(pathdeglex)").greater(right, left)

    def test_revpathperm_prefers_right_comb(self, planar):
        left, right = combs(planar)
        assert MonomialOrder(planar, "revpathperm").greater(right, left)

    def test_descending_and_leading_term(self, planar):
        left, right = combs(planar)
        order = MonomialOrder(planar, "pathdeglex")

        # Assertions
        assert order.descending([right, left]) == [left, right]
        assert order.leading_term(Element({left: 3, right: 1})) == (left, 3)
        with pytest.raises(OperadForgeError):
            order.leading_term(Element())

    def test_word_order_rejected_for_trees(self, planar):
        with pytest.raises(KindMismatchError):
            MonomialOrder(planar, "aritylex")

    def test_for_free_keeps_text(self, planar):
        order = MonomialOrder(planar, "qm")
        bigger = planar.with_generators([GeneratorSymbol("u", 1, 2)])
        assert order.for_free(bigger).text == order.text


TWO_PRODUCTS = TreeOperad([GeneratorSymbol("m", 2, 0), GeneratorSymbol("n", 2, 0)], planar=True)
QUADRATIC = TWO_PRODUCTS.enumerate(3, 2)


class TestAdmissibility:

    @pytest.mark.parametrize("text", ["pathdeglex", "revpathperm", "opposite(pathdeglex)"])
    @settings(max_examples=60, deadline=None)
    @given(
        a=st.sampled_from(QUADRATIC),
        b=st.sampled_from(QUADRATIC),
        c=st.sampled_from(QUADRATIC),
        slot=st.integers(min_value=1, max_value=3),
    )
    def test_composition_preserves_order(self, text, a, b, c, slot):
        order = MonomialOrder(TWO_PRODUCTS, text)
        if a == b:
            return
        if order.greater(b, a):
            a, b = b, a

        # Assertions
        assert order.greater(TWO_PRODUCTS.compose(a, slot, c)[0], TWO_PRODUCTS.compose(b, slot, c)[0])
        assert order.greater(TWO_PRODUCTS.compose(c, slot, a)[0], TWO_PRODUCTS.compose(c, slot, b)[0])

    def test_total_on_enumerated_monomials(self):
        order = MonomialOrder(TWO_PRODUCTS, "pathdeglex")
        keys = [order.key(mon) for mon in QUADRATIC]
        assert len(set(keys)) == len(QUADRATIC) == 8
