import pytest
from hypothesis import given, settings, strategies as st
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.element import Element
from core.errors import ArityMismatchError, KindMismatchError, UnknownGeneratorError
from core.monomials import (
    GeneratorSymbol,
    TreeOperad,
    WordAlgebra,
    free_object,
    tree_leaves,
)


@pytest.fixture
def words():
    return WordAlgebra([
        GeneratorSymbol("m", 2, 0),
        GeneratorSymbol("a", 1, 1),
        GeneratorSymbol("b", 1, 0),
    ])


@pytest.fixture
def planar():
    return TreeOperad([GeneratorSymbol("m", 2, 0), GeneratorSymbol("t", 3, 0)], planar=True)


@pytest.fixture
def shuffle():
    return TreeOperad([GeneratorSymbol("m", 2, 0, symmetric=True)])


class TestWordAlgebra:

    def test_word_validates_labels(self, words):
        assert words.word([("m", (2, 3)), ("b", (1,))]) == (("m", (2, 3)), ("b", (1,)))
        with pytest.raises(ArityMismatchError):
            words.word([("m", (1, 3))])

    def test_factor_checks_arity(self, words):
        with pytest.raises(ArityMismatchError):
            words.factor("m", (1,))
        with pytest.raises(UnknownGeneratorError):
            words.factor("z", (1,))

    def test_code(self, words):
        mon = words.word([("m", (1, 2)), ("b", (3,))])
        assert words.code(mon) == "m[1,2].b[3]"
        assert words.code(words.unit()) == "1"

    def test_enumerate_counts(self):
        free = WordAlgebra([GeneratorSymbol("m", 2, 0)])

        # Assertions
        assert len(free.enumerate(2, 1)) == 2
        # choose the first factor's labels, then order both pairs
        assert len(free.enumerate(4, 2)) == 6 * 2 * 2
        assert free.enumerate(3, 1) == []

    def test_compose_shifts_inner_labels(self, words):
        outer = words.word([("m", (1, 2))])
        inner = words.word([("b", (1,))])
        composed, sign = words.compose(outer, 0, inner)

        # Assertions
        assert composed == (("b", (3,)), ("m", (1, 2)))
        assert sign == 1

    def test_compose_sign_passes_odd_factors(self, words):
        outer = words.word([("a", (1,))])
        inner = words.word([("a", (1,))])
        assert words.compose(outer, 0, inner)[1] == -1
        assert words.compose(outer, 1, inner)[1] == 1

    def test_divides_binds_labels(self, words):
        target = words.word([("b", (1,)), ("m", (2, 3))])
        occurrences = words.divides(words.corolla("m"), target)

        # Assertions
        assert len(occurrences) == 1
        assert occurrences[0].binding == (2, 3)

    def test_substitute_transports_onto_binding(self, words):
        target = words.word([("b", (1,)), ("m", (2, 3))])
        occurrence = words.divides(words.corolla("m"), target)[0]
        replacement = Element.monomial(words.word([("b", (2,)), ("b", (1,))]))
        result = words.substitute(target, occurrence, replacement)
        assert result == Element.monomial((("b", (1,)), ("b", (3,)), ("b", (2,))))

    def test_derive_leibniz_sign(self, words):
        mon = words.word([("a", (1,)), ("a", (2,))])
        diff = {"a": Element.monomial(words.corolla("b"))}
        result = words.derive(mon, diff)

        # Assertions
        assert result.coefficient((("b", (1,)), ("a", (2,)))) == 1
        assert result.coefficient((("a", (1,)), ("b", (2,)))) == -1

    def test_symmetric_factor_sorted(self):
        free = WordAlgebra([GeneratorSymbol("s", 2, 0, symmetric=True)])
        assert free.factor("s", (2, 1)) == ("s", (1, 2))


class TestTreeOperad:

    def test_symmetric_operad_needs_symmetric_generators(self):
        with pytest.raises(KindMismatchError):
            TreeOperad([GeneratorSymbol("m", 2, 0)])

    def test_ns_operad_rejects_symmetric_generators(self):
        with pytest.raises(KindMismatchError):
            TreeOperad([GeneratorSymbol("m", 2, 0, symmetric=True)], planar=True)

    def test_operad_generators_have_positive_arity(self):
        with pytest.raises(ArityMismatchError):
            free_object("operad", [GeneratorSymbol("c", 0, 0)])

    def test_ns_leaves_read_left_to_right(self, planar):
        tree, sign = planar.from_nested(("m", [("m", [1, 2]), 3]))
        assert planar.code(tree) == "m(m(1,2),3)"
        assert sign == 1
        with pytest.raises(ArityMismatchError):
            planar.from_nested(("m", [2, 1]))

    def test_shuffle_children_sorted_by_minimum(self, shuffle):
        tree, _ = shuffle.from_nested(("m", [("m", [3, 1]), 2]))
        assert shuffle.code(tree) == "m(m(1,3),2)"
        assert tree_leaves(tree) == (1, 3, 2)

    def test_enumerate_counts(self, planar, shuffle):
        binary = TreeOperad([GeneratorSymbol("m", 2, 0)], planar=True)

        # Assertions
        assert len(binary.enumerate(3, 2)) == 2
        assert len(binary.enumerate(4, 3)) == 5
        assert len(shuffle.enumerate(3, 2)) == 3
        assert len(shuffle.enumerate(4, 3)) == 15
        assert len(planar.enumerate(3, 1)) == 1

    def test_compose_ns(self, planar):
        m = planar.corolla("m")
        tree, sign = planar.compose(m, 2, m)
        assert planar.code(tree) == "m(1,m(2,3))"
        assert sign == 1
        with pytest.raises(ArityMismatchError):
            planar.compose(m, 3, m)

    def test_compose_odd_generators_sign(self):
        free = TreeOperad([GeneratorSymbol("e", 2, 1)], planar=True)
        e = free.corolla("e")
        # preorder already lists the outer vertex first
        assert free.compose(e, 1, e)[1] == 1
        _, sign = free.from_nested(("e", [("e", [1, 2]), 3]))
        assert sign == 1

    def test_graft_shuffle_condition(self, shuffle):
        m = shuffle.corolla("m")
        tree, _ = shuffle.graft(m, 1, m, (1, 3))
        assert shuffle.code(tree) == "m(m(1,3),2)"
        with pytest.raises(ArityMismatchError):
            shuffle.graft(m, 2, m, (1, 2))

    def test_divides_finds_every_vertex(self, planar):
        tree, _ = planar.from_nested(("m", [("m", [1, 2]), 3]))
        occurrences = planar.divides(planar.corolla("m"), tree)
        assert {occ.root for occ in occurrences} == {(), (0,)}

    def test_substitute_monomial_is_operad_map(self, planar):
        tree, _ = planar.from_nested(("m", [1, ("m", [2, 3])]))
        swap = {"m": Element.monomial(planar.from_nested(("m", [1, 2]))[0], -1)}
        image = planar.substitute_monomial(tree, swap)
        assert image == Element.monomial(tree)

    def test_derive_on_each_vertex(self):
        free = TreeOperad([GeneratorSymbol("e", 2, 1), GeneratorSymbol("m", 2, 0)], planar=True)
        tree, _ = free.from_nested(("e", [("e", [1, 2]), 3]))
        result = free.derive(tree, {"e": Element.monomial(free.corolla("m"))})

        # Assertions
        assert len(result) == 2
        assert free.element_degree(result) == 1

    @settings(max_examples=40, deadline=None)
    @given(st.data())
    def test_sequential_composition_associative(self, data):
        free = TreeOperad([GeneratorSymbol("e", 2, 1), GeneratorSymbol("t", 3, 0)], planar=True)
        pick = st.sampled_from(free.enumerate(3, 1) + free.enumerate(4, 2) + [free.corolla("e")])
        x, y, z = data.draw(pick), data.draw(pick), data.draw(pick)
        i = data.draw(st.integers(1, free.arity(x)))
        j = data.draw(st.integers(1, free.arity(y)))
        xy, s1 = free.compose(x, i, y)
        left, s2 = free.compose(xy, i + j - 1, z)
        yz, s3 = free.compose(y, j, z)
        right, s4 = free.compose(x, i, yz)

        # Assertions
        assert left == right
        assert s1 * s2 == s3 * s4
