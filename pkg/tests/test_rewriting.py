import pytest
from collections import Counter
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.dsl import parse_presentation
from core.element import Element
from core.errors import ArityMismatchError, TruncationError
from core.monomials import GeneratorSymbol, TreeOperad, WordAlgebra
from core.rewriting import complete_relations, weight_bound_for_window

AS = "kind: nsoperad\ngen mu arity=2 degree=0\nrel mu o1 mu = mu o2 mu\n"
COM = (
    "kind: operad\n"
    "gen m arity=2 degree=0 symmetric\n"
    "rel m(m(1,2),3) = m(m(1,3),2)\n"
    "rel m(m(1,2),3) = m(1,m(2,3))\n"
)
COMMUTATIVE_WORDS = "kind: twisted\ngen x arity=1 degree=0\nrel x[1].x[2] = x[2].x[1]\n"


class TestCompletion:

    @pytest.fixture
    def associative(self):
        return parse_presentation(AS).basis(5, order="pathdeglex")

    def test_associative_basis_is_quadratic(self, associative):
        # Assertions
        assert len(associative) == 1
        assert associative.new_count == 0
        assert associative.verify_confluence() == []

    def test_associative_dims(self, associative):
        table = associative.hilbert_table()
        assert {n: sum(c.values()) for n, c in table.items()} == {1: 1, 2: 1, 3: 1, 4: 1, 5: 1}

    def test_reduce_rewrites_lead(self, associative):
        free = associative.free
        left, _ = free.from_nested(("mu", [("mu", [1, 2]), 3]))
        right, _ = free.from_nested(("mu", [1, ("mu", [2, 3])]))

        # Assertions
        assert associative.lead_monomials() == [left]
        assert associative.reduce_monomial(left) == Element.monomial(right)
        assert associative.contains(Element({left: 1, right: -1}))
        assert not associative.is_normal(left)
        assert associative.is_normal(right)

    def test_self_overlap_s_polynomials_reduce_to_zero(self, associative):
        rid = sorted(associative.relations)[0]
        spolys = associative.s_polynomials(rid, rid)

        # Assertions
        assert spolys
        assert all(associative.free.element_arity(s) == 4 for s in spolys)
        assert all(associative.reduce(s).is_zero() for s in spolys)

    def test_opposite_order_also_confluent(self):
        basis = parse_presentation(AS).basis(5, order="revpathperm")
        assert basis.verify_confluence() == []
        assert sum(basis.hilbert_table()[5].values()) == 1

    def test_commutative_operad_dims(self):
        basis = parse_presentation(COM).basis(4, order="pathdeglex")
        table = basis.hilbert_table()
        assert table == {n: Counter({0: 1}) for n in range(1, 5)}

    def test_commutative_words(self):
        basis = parse_presentation(COMMUTATIVE_WORDS).basis(4, order="aritylex")
        free = basis.free
        up = free.word([("x", (1,)), ("x", (2,)), ("x", (3,))])

        # Assertions
        assert basis.hilbert_table() == {n: Counter({0: 1}) for n in range(0, 5)}
        assert basis.normal_monomials(3) == [up]
        assert basis.verify_confluence() == []

    def test_completion_log_records_additions(self, associative):
        log = associative.completion_log()
        assert log.startswith("add\t3\t")

    def test_extend_generators_keeps_relations(self, associative):
        extended = associative.extend_generators([GeneratorSymbol("r", 1, 2)])

        # Assertions
        assert extended.frozen
        assert len(extended) == 1
        assert "r" in extended.free.gens
        assert extended.order.text == associative.order.text


class TestTruncation:

    def test_arity_beyond_truncation(self):
        basis = parse_presentation(AS).basis(3, order="pathdeglex")
        with pytest.raises(TruncationError):
            basis.normal_monomials(4)

    def test_unary_generators_need_weight(self):
        basis = parse_presentation("kind: nsoperad\ngen u arity=1 degree=2\n").basis(2, order="pathdeglex")

        # Assertions
        with pytest.raises(TruncationError):
            basis.normal_monomials(1)
        assert len(basis.normal_monomials(1, 3)) == 1

    def test_relation_beyond_max_arity(self):
        free = TreeOperad([GeneratorSymbol("mu", 2, 0)], planar=True)
        left, _ = free.from_nested(("mu", [("mu", [1, 2]), 3]))
        with pytest.raises(ArityMismatchError):
            complete_relations(free, "pathdeglex", [Element.monomial(left)], 2)

    def test_mixed_degree_signs_refuse_degree_truncation(self):
        free = TreeOperad([GeneratorSymbol("a", 1, 1), GeneratorSymbol("b", 1, -1)], planar=True)
        with pytest.raises(TruncationError):
            complete_relations(free, "pathdeglex", [], 2, max_degree=4)

    def test_within_truncation(self):
        free = WordAlgebra([GeneratorSymbol("D", 0, 1), GeneratorSymbol("x", 1, 0)])
        basis = complete_relations(free, "aritylex", [], 2, max_weight=3, max_degree=2)
        many = tuple(("D", ()) for _ in range(3))

        # Assertions
        assert basis.within_truncation((("D", ()),))
        assert not basis.within_truncation(many)
        assert not basis.within_truncation(tuple(("x", (i,)) for i in range(1, 4)))

    def test_weight_bound_for_window(self):
        free = TreeOperad([GeneratorSymbol("m", 2, 0), GeneratorSymbol("u", 1, 1)], planar=True)
        # two binary vertices plus at most two unary ones
        assert weight_bound_for_window(free, 3, 0, 2) == 4

    def test_weight_bound_rejects_degree_zero_loops(self):
        free = WordAlgebra([GeneratorSymbol("c", 0, 0)])
        with pytest.raises(TruncationError):
            weight_bound_for_window(free, 1, 0, 2)
