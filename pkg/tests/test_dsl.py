import pytest
from fractions import Fraction
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.element import Element
from core.errors import ArityMismatchError, ParseError, UnknownGeneratorError
from core.dsl import format_presentation, parse_presentation

AS_TEXT = """\
# associative operad
kind: nsoperad
name: As
gen mu arity=2 degree=0
order = path-deg-lex
rel mu(mu(1,2),3) = mu(1,mu(2,3))   # associativity
"""


class TestParse:

    def test_parses_header_and_relation(self):
        p = parse_presentation(AS_TEXT)

        # Assertions
        assert p.kind == "nsoperad"
        assert p.name == "As"
        assert p.order == "path-deg-lex"
        assert [g.name for g in p.generators] == ["mu"]
        assert len(p.relations) == 1
        assert len(p.relations[0]) == 2

    def test_infix_composition_matches_nested(self):
        nested = parse_presentation(AS_TEXT).relations[0]
        infix = parse_presentation(AS_TEXT.replace("mu(mu(1,2),3) = mu(1,mu(2,3))", "mu o1 mu - mu o2 mu"))
        assert infix.relations[0] == nested

    def test_rational_coefficients(self):
        half = parse_presentation(AS_TEXT.replace("mu(mu(1,2),3) = mu(1,mu(2,3))", "1/2*mu o1 mu - 1/2*mu o2 mu"))
        nested = parse_presentation(AS_TEXT).relations[0]
        assert half.relations[0] == nested.scale(Fraction(1, 2))

    def test_words_and_arity_zero_factors(self):
        p = parse_presentation(
            "kind: twisted\n"
            "gen x arity=1 degree=0\n"
            "gen D arity=0 degree=1\n"
            "rel x[1].x[2] = x[2].x[1]\n"
            "rel D[].D[]\n"
        )
        free = p.free

        # Assertions
        up = (("x", (1,)), ("x", (2,)))
        down = (("x", (2,)), ("x", (1,)))
        assert p.relations[0] == Element({up: 1, down: -1})
        assert p.relations[1] == Element.monomial((("D", ()), ("D", ())))
        assert free.element_degree(p.relations[1]) == 2

    def test_differential_and_symmetric_generators(self):
        p = parse_presentation(
            "kind: operad\n"
            "gen m arity=2 degree=0 symmetric\n"
            "gen e arity=2 degree=1 symmetric\n"
            "diff e = m\n"
        )
        assert p.generator("m").symmetric
        assert p.differential["e"] == Element.monomial(p.free.corolla("m"))


class TestParseErrors:

    def test_unknown_generator_position(self):
        text = "kind: nsoperad\ngen mu arity=2 degree=0\nrel mu(nu(1,2),3) = 0\n"
        with pytest.raises(UnknownGeneratorError) as info:
            parse_presentation(text)

        # Assertions
        assert info.value.line == 3
        assert info.value.column == 8
        assert "line 3, column 8" in str(info.value)

    def test_arity_mismatch(self):
        with pytest.raises(ArityMismatchError) as info:
            parse_presentation("kind: nsoperad\ngen mu arity=2 degree=0\nrel mu(1,2,3) = 0\n")
        assert info.value.line == 3

    def test_word_labels_must_cover_underline(self):
        with pytest.raises(ArityMismatchError):
            parse_presentation("kind: twisted\ngen x arity=1 degree=0\nrel x[1].x[3] = 0\n")

    @pytest.mark.parametrize("text,line", [
        ("gen mu arity=2 degree=0\n", 1),
        ("kind: lattice\n", 1),
        ("kind: nsoperad\nbogus line\n", 2),
        ("kind: nsoperad\ngen mu arity=2\n", 2),
        ("kind: nsoperad\ngen mu arity=2 degree=0 colour=3\n", 2),
        ("kind: nsoperad\ngen mu arity=2 degree=0\norder = nonsense\n", 3),
        ("kind: nsoperad\ngen mu arity=2 degree=0\nrel mu(1,2) )\n", 3),
    ])
    def test_malformed_lines(self, text, line):
        with pytest.raises(ParseError) as info:
            parse_presentation(text)
        assert info.value.line == line


class TestFormat:

    def test_canonical_text(self):
        text = format_presentation(parse_presentation(AS_TEXT))
        assert text == (
            "kind: nsoperad\n"
            "name: As\n"
            "gen mu arity=2 degree=0\n"
            "order = pathdeglex\n"
            "rel -mu(1,mu(2,3)) + mu(mu(1,2),3)\n"
        )

    def test_format_is_stable(self):
        once = format_presentation(parse_presentation(AS_TEXT))
        assert format_presentation(parse_presentation(once)) == once
