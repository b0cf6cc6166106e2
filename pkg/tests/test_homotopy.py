import pytest
from fractions import Fraction
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.element import Element
from core.errors import InvalidFamilyError, TruncationError
from core.homotopy import (
    _generator_slots,
    check_homotopy_square_zero,
    generator_image,
    homotopy_quotient_dg,
    verify_quotient_map_properties,
)

D = ("D", ())
R1 = ("r1", ())
R2 = ("r2", ())


class TestHomotopyQuotient:

    @pytest.fixture
    def twisted(self):
        return homotopy_quotient_dg("twisted", 2, 2, 3)

    def test_first_generator_kills_laplacian(self, twisted):
        assert twisted.differential["r1"] == Element.monomial((D,))

    def test_second_generator_differential(self, twisted):
        half = Fraction(1, 2)
        expected = Element({(R1, D): half, (D, R1): -half})
        assert twisted.differential["r2"] == expected

    def test_exponential_coefficients(self, twisted):
        assert twisted.exponentials[1] == Element.monomial((R1,))
        assert twisted.exponentials[2] == Element({(R2,): 1, (R1, R1): Fraction(1, 2)})

    def test_symbols_and_presentation(self, twisted):
        # Assertions
        assert [s.name for s in twisted.r_symbols] == ["r1", "r2"]
        assert [s.degree for s in twisted.r_symbols] == [2, 4]
        assert twisted.presentation.relations == twisted.base.relations
        assert "r2" in twisted.free.gens

    def test_operadic_symbols_are_unary(self):
        quotient = homotopy_quotient_dg("operad", 2, 1, 3)
        assert quotient.r_symbols[0].arity == 1
        assert quotient.free.element_arity(quotient.differential["r1"]) == 1

    def test_operadic_second_generator_differential(self):
        quotient = homotopy_quotient_dg("operad", 2, 2, 3)
        free = quotient.free
        outer, _ = free.from_nested(("r1", [("D", [1])]))
        inner, _ = free.from_nested(("D", [("r1", [1])]))
        half = Fraction(1, 2)
        assert quotient.differential["r2"] == Element({outer: half, inner: -half})

    def test_invalid_arguments(self):
        with pytest.raises(InvalidFamilyError):
            homotopy_quotient_dg("lattice", 2, 1, 3)
        with pytest.raises(TruncationError):
            homotopy_quotient_dg("twisted", 2, 0, 3)

    def test_square_zero(self):
        quotient = homotopy_quotient_dg("twisted", 2, 1, 2)
        assert check_homotopy_square_zero(quotient, 2, 2)

    @pytest.mark.slow
    def test_square_zero_plane(self):
        quotient = homotopy_quotient_dg("nsoperad", 2, 2, 3)
        assert check_homotopy_square_zero(quotient, 3, 4)


class TestQuotientMap:

    @pytest.mark.parametrize("kind,k,max_arity,slots", [
        ("twisted", 2, 3, [(1, 0), (2, 1), (3, 2)]),
        ("operad", 3, 4, [(2, 0), (4, 1)]),
        ("nsoperad", 1, 5, [(2, 0)]),
    ])
    def test_generator_slots(self, kind, k, max_arity, slots):
        assert _generator_slots(kind, k, max_arity) == slots

    def test_needs_order_two(self):
        with pytest.raises(InvalidFamilyError):
            verify_quotient_map_properties(1, "twisted", 3)

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", ["twisted", "operad", "nsoperad"])
    def test_quotient_map(self, kind):
        result = verify_quotient_map_properties(2, kind, 3)

        # Assertions
        assert result["ok"]
        assert result["kind"] == kind
        assert all(entry["one_dimensional"] for entry in result["checks"])

    def test_binary_generator_image(self):
        quotient = homotopy_quotient_dg("nsoperad", 2, 1, 3)
        assert generator_image(quotient, 2, 0) == Element.monomial(quotient.free.corolla("mu"))

    def test_twisted_unary_generator_image(self):
        quotient = homotopy_quotient_dg("twisted", 2, 1, 2)
        assert generator_image(quotient, 1, 0) == Element.monomial((("m", (1,)),))

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", ["operad", "nsoperad"])
    def test_operadic_images_are_cycles_outside_boundaries(self, kind):
        result = verify_quotient_map_properties(3, kind, 4)

        # Assertions
        assert result["ok"]
        assert [(e["arity"], e["degree"]) for e in result["checks"]] == [(2, 0), (4, 2)]
        assert all(e["cycle"] and e["non_boundary"] for e in result["checks"])
