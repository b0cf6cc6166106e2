import pytest
from fractions import Fraction
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.element import Element
from core.errors import ArityMismatchError, DegreeError, InvalidFamilyError
from core.givental import (
    LEFT,
    RIGHT,
    DecoratedBamboo,
    GiventalSeries,
    PsiModule,
    bamboo_image,
    enumerate_bamboos,
    infinitesimal_action,
    psi_act,
    r_symbol,
    rooted_trees,
    tree_image,
    verify_bimodule,
    verify_commutator_identity,
    verify_infinitesimal_symmetry,
    verify_psi_independence,
    vertex_decorations,
)
from core.monomials import GeneratorSymbol, TreeOperad, WordAlgebra


def r_words(count):
    gens = [GeneratorSymbol("m", 1, 0)]
    gens += [r_symbol("twisted", f"r{i}", 2 * i) for i in range(1, count + 1)]
    return WordAlgebra(gens)


class TestCoefficients:

    def test_r_symbol_arity_by_kind(self):
        assert r_symbol("twisted", "r", 2).arity == 0
        assert r_symbol("operad", "r", 2).arity == 1
        assert r_symbol("nsoperad", "r", 0).degree == 0

    @pytest.mark.parametrize("degree", [-2, 1, 3])
    def test_r_symbol_rejects_odd_or_negative(self, degree):
        with pytest.raises(DegreeError):
            r_symbol("twisted", "r", degree)


class TestPsiModule:

    @pytest.fixture(scope="class")
    def thc(self):
        return PsiModule("tHC", 3, 4)

    @pytest.fixture(scope="class")
    def nchc(self):
        return PsiModule("ncHC", 3, 4)

    def test_unknown_family(self):
        with pytest.raises(InvalidFamilyError):
            PsiModule("Grav", 3, 4)

    def test_generator_names_within_window(self, thc):
        # Assertions
        assert thc.name(1, 0) == "m1_0"
        assert thc.name(4, 0) is None
        assert thc.name(2, 3) is None
        assert thc.generator([2, 1], 1) == Element.monomial((("m2_1", (1, 2)),))
        assert len(thc.bar(2)) == 3

    def test_twisted_corolla_images(self, thc):
        left = thc.corolla_image(2, 1, LEFT)
        right = thc.corolla_image(2, 1, RIGHT)

        # Assertions
        assert left == Element.monomial((("m1_0", (1,)), ("m1_0", (2,))))
        assert right == Element.monomial((("m1_0", (2,)), ("m1_0", (1,))))
        assert thc.corolla_image(2, 0, LEFT).is_zero()
        with pytest.raises(InvalidFamilyError):
            thc.corolla_image(2, 1, "up")

    def test_act_lowers_degree(self, thc):
        image = thc.act(thc.generator([1, 2, 3], 2), LEFT)
        assert not image.is_zero()
        assert thc.free.element_degree(image) == 2

    def test_end_slots_act_by_zero(self, nchc):
        top = nchc.generator([1, 2, 3], 1)

        # Assertions
        assert psi_act(nchc, RIGHT, top, slot=1).is_zero()
        assert psi_act(nchc, RIGHT, top, slot=3).is_zero()
        with pytest.raises(ArityMismatchError):
            psi_act(nchc, RIGHT, top, slot=4)
        with pytest.raises(ArityMismatchError):
            psi_act(nchc, RIGHT, top)

    def test_compatibility_with_relations(self, thc):
        assert thc.check_compatibility(3)

    def test_odd_coefficient_rejected(self, thc):
        target = thc.free.with_generators([GeneratorSymbol("s", 0, 1)])
        with pytest.raises(DegreeError):
            infinitesimal_action(thc, target, Element.monomial((("s", ()),)), 1)


@pytest.mark.slow
class TestPsiVerifications:

    @pytest.mark.parametrize("family", ["tHC", "HC", "ncHC"])
    def test_independence(self, family):
        assert verify_psi_independence(family, 3)

    @pytest.mark.parametrize("family", ["tHC", "HC", "ncHC"])
    def test_bimodule(self, family):
        assert verify_bimodule(family, 3)

    @pytest.mark.parametrize("family", ["tHC", "HC", "ncHC"])
    def test_infinitesimal_symmetry(self, family):
        assert verify_infinitesimal_symmetry(family, 3, 1)

    def test_commutator_identity(self):
        assert verify_commutator_identity("tHC", 3, 1, 1, max_degree=6)


class TestBamboos:

    def test_factor_and_psi_total(self):
        bamboo = DecoratedBamboo(((1, 2, 3),), root=1, tip=1)

        # Assertions
        assert bamboo.vertex_count == 1
        assert bamboo.vertex_powers() == [(1, 1)]
        assert bamboo.factor == 2
        assert bamboo.psi_total() == 2

    def test_edges_link_vertices(self):
        bamboo = DecoratedBamboo(((1,), (2, 3)), root=0, tip=0, edges=((0, 1),))
        assert bamboo.vertex_powers() == [(0, 0), (1, 0)]

    def test_order_two_arity_two(self):
        bamboos = enumerate_bamboos(2, 2, 1)
        assert len(bamboos) == 4
        assert sum(1 for b in bamboos if b.vertex_count == 2) == 2

    def test_order_one_has_only_corollas(self):
        assert len(enumerate_bamboos(1, 1, 0)) == 1
        assert enumerate_bamboos(3, 1, 1) == []

    @pytest.mark.parametrize("n,k,power", [(3, 3, 1), (5, 3, 2), (4, 4, 1), (3, 2, 2)])
    def test_nonempty_on_the_line(self, n, k, power):
        assert enumerate_bamboos(n, k, power)

    @pytest.mark.parametrize("n,k,power", [(2, 3, 1), (4, 3, 1), (3, 2, 1), (0, 2, 1)])
    def test_empty_off_the_line(self, n, k, power):
        assert enumerate_bamboos(n, k, power) == []

    def test_series_coefficients(self):
        free = r_words(2)
        series = GiventalSeries(free, 2, 2, 4)
        r1 = Element.monomial((("r1", ()),))
        r1r1 = Element.monomial((("r1", ()), ("r1", ())))
        r2 = Element.monomial((("r2", ()),))

        # Assertions
        assert series.root(1) == r1
        assert series.root(2) == r2 + r1r1.scale(Fraction(1, 2))
        assert series.tip(1) == r1
        assert series.tip(2) == r1r1.scale(Fraction(1, 2)) - r2
        assert series.edge(0, 0) == -r1

    def test_image_order_two_arity_two(self):
        image = bamboo_image(r_words(1), 2, 2, 1)
        r = ("r1", ())
        m1, m2 = ("m", (1,)), ("m", (2,))
        expected = Element({
            (r, m1, m2): 1,
            (m1, m2, r): 1,
            (m1, r, m2): -1,
            (m2, r, m1): -1,
        })
        assert image == expected

    def test_image_vanishes_off_the_line(self):
        assert bamboo_image(r_words(1), 3, 2, 1).is_zero()


def r_trees(product, planar):
    gens = [GeneratorSymbol(product, 2, 0, symmetric=not planar), r_symbol("operad", "r1", 2)]
    return TreeOperad(gens, planar=planar)


class TestDecoratedTrees:

    @pytest.mark.parametrize("n,planar,count", [(1, False, 1), (3, False, 4), (4, False, 26), (3, True, 3), (4, True, 11)])
    def test_tree_counts(self, n, planar, count):
        assert len(rooted_trees(range(1, n + 1), planar)) == count

    def test_symmetric_vertex_weights(self):
        three = vertex_decorations(3)
        four = vertex_decorations(4)

        # Assertions
        assert len(three) == 4
        assert all(weight == 1 for _, weight in three)
        assert len(four) == 15
        assert sum(weight for _, weight in four) == 25

    def test_plane_vertices_skip_outer_inputs(self):
        powers = sorted(p for p, _ in vertex_decorations(4, planar=True))
        assert powers == [(0, 0, 1, 1, 0), (1, 0, 0, 1, 0), (1, 0, 1, 0, 0), (2, 0, 0, 0, 0)]

    def test_binary_generator_maps_to_product(self):
        free = r_trees("m", planar=False)
        assert tree_image(free, 2, 2, 0) == Element.monomial(free.corolla("m"))

    def test_symmetric_image_order_two_arity_three(self):
        free = r_trees("m", planar=False)

        def tree(nested):
            return free.from_nested(nested)[0]

        expected = Element({
            tree(("r1", [("m", [("m", [1, 2]), 3])])): 1,
            tree(("m", [("m", [("r1", [1]), 2]), 3])): 1,
            tree(("m", [("m", [1, ("r1", [2])]), 3])): 1,
            tree(("m", [("m", [1, 2]), ("r1", [3])])): 1,
            tree(("m", [("r1", [("m", [1, 2])]), 3])): -1,
            tree(("m", [("r1", [("m", [1, 3])]), 2])): -1,
            tree(("m", [1, ("r1", [("m", [2, 3])])])): -1,
        })
        assert tree_image(free, 2, 3, 1) == expected

    def test_plane_image_order_two_arity_three(self):
        free = r_trees("mu", planar=True)

        def tree(nested):
            return free.from_nested(nested)[0]

        expected = Element({
            tree(("r1", [("mu", [("mu", [1, 2]), 3])])): 1,
            tree(("mu", [("mu", [1, ("r1", [2])]), 3])): 1,
            tree(("mu", [("r1", [("mu", [1, 2])]), 3])): -1,
            tree(("mu", [1, ("r1", [("mu", [2, 3])])])): -1,
        })
        assert tree_image(free, 2, 3, 1, product="mu") == expected

    def test_tree_image_vanishes_off_the_line(self):
        assert tree_image(r_trees("m", planar=False), 3, 3, 1).is_zero()
