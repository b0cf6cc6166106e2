import pytest
from math import factorial
import sys
import os

# Add backend to path
sys.path.append(os.path.join(os.path.dirname(__file__), '..', 'backend'))

from core.catalog import (
    FAMILIES,
    ExtendedGenerator,
    FamilyId,
    build,
    catalan,
    closed_form_dims,
    closed_form_table,
    concatenate,
    extended_grid,
    extended_quotient,
    family_basis,
    koszul_brace,
    list_families,
    ns_bv_pbw_count,
    pbw_leads,
    quotient_matches_family,
    twisted_bv_pbw_words,
    verify_brace_vanishing_relations,
    verify_bv_pbw,
    verify_order_one,
    verify_tbv_elimination,
)
from core.config import Settings
from core.element import Element
from core.errors import InvalidFamilyError


@pytest.fixture
def settings():
    return Settings(max_threads=1, max_degree=4, cache_enabled=False)


def totals(basis):
    return {n: sum(counts.values()) for n, counts in basis.hilbert_table().items()}


class TestExtendedGenerators:

    def test_names_and_degrees(self):
        gen = ExtendedGenerator("HC", 3, 1)

        # Assertions
        assert gen.name == "m3_1"
        assert gen.degree == 2
        assert gen.symbol().symmetric
        assert ExtendedGenerator("ncHC", 2, 0).name == "mu2_0"
        assert not ExtendedGenerator("ncHC", 2, 0).symbol().symmetric

    def test_parse(self):
        assert ExtendedGenerator.parse("tHC", "m1_2") == ExtendedGenerator("tHC", 1, 2)
        with pytest.raises(InvalidFamilyError):
            ExtendedGenerator.parse("tHC", "x1_2")

    @pytest.mark.parametrize("family,arity,power", [("HC", 1, 0), ("ncHC", 1, 0), ("tHC", 0, 0), ("tHC", 2, -1), ("XY", 2, 0)])
    def test_invalid_generators(self, family, arity, power):
        with pytest.raises(InvalidFamilyError):
            ExtendedGenerator(family, arity, power)

    def test_grid(self):
        grid = extended_grid("HC", 3, 1)
        assert sorted(grid) == [(2, 0), (2, 1), (3, 0), (3, 1)]
        alive = extended_grid("HC", 4, 2, lambda t, p: t == 2 + p)
        assert alive == {(2, 0): "m2_0", (3, 1): "m3_1", (4, 2): "m4_2"}


class TestFamilyIds:

    def test_every_family_listed(self):
        listed = list_families()

        # Assertions
        assert len(listed) == len(FAMILIES) == 25
        assert {"name", "kind", "needs_k", "min_k", "description"} <= set(listed[0])

    def test_label_and_kind(self):
        assert FamilyId("bBV", k=2).label == "bBV(2)"
        assert FamilyId("ncGrav").kind == "nsoperad"
        assert FamilyId("tHC").degree_truncated
        assert FamilyId("blmHyperCom", k=1).degree_truncated
        assert not FamilyId("blmHyperCom", k=2).degree_truncated

    @pytest.mark.parametrize("fid", [
        FamilyId("nope"),
        FamilyId("bBV"),
        FamilyId("blmHyperComDual", k=1),
        FamilyId("Grav", k=3),
        FamilyId("tGrav", max_arity=0),
        FamilyId("tGrav", max_degree=-2),
    ])
    def test_invalid_ids(self, fid):
        with pytest.raises(InvalidFamilyError):
            fid.validate()

    def test_resolved_fills_bounds(self, settings):
        fid = FamilyId("HyperCom").resolved(settings)
        assert fid.max_arity == settings.max_arity_operad
        assert fid.max_degree == 4
        assert FamilyId("HyperCom", max_arity=3).resolved(settings).max_arity == 3


class TestClosedForms:

    def test_catalan(self):
        assert [catalan(n) for n in range(6)] == [1, 1, 2, 5, 14, 42]

    @pytest.mark.parametrize("name,k,expected", [
        ("tHyperCom", None, [1, 1, 2, 6, 24]),
        ("blmHyperCom", 2, [1, 1, 2, 6, 24]),
        ("tGrav", None, [1, 1, 2, 4, 8]),
        ("blmHyperComDual", 2, [1, 1, 2, 4, 8]),
        ("blmHyperComDual", 3, [1, 1, 1, 2, 4]),
        ("tBV", None, [2, 4, 8, 16, 32]),
    ])
    def test_twisted_forms(self, name, k, expected):
        assert [closed_form_dims(name, n, k) for n in range(5)] == expected

    def test_operadic_forms(self):
        assert [closed_form_dims("Grav", n) for n in range(1, 5)] == [1, 1, 3, 12]
        assert [closed_form_dims("ncGrav", n) for n in range(1, 5)] == [1, 1, 2, 4]
        assert closed_form_dims("bncHyperComDual", 4, 3) == 2

    def test_no_closed_form(self, settings):
        assert closed_form_dims("HC", 3) is None
        assert closed_form_table(FamilyId("HC", max_arity=3), settings) == {}

    def test_table_range(self, settings):
        table = closed_form_table(FamilyId("tHyperCom", max_arity=3), settings)
        assert table == {0: 1, 1: 1, 2: 2, 3: 6}


class TestBraces:

    def test_twisted_brace_is_commutator(self):
        brace = koszul_brace("twisted", 1)
        delta_m = (("D", ()), ("m", (1,)))
        m_delta = (("m", (1,)), ("D", ()))
        assert brace == Element({delta_m: 1, m_delta: -1})

    def test_brace_lower_bounds(self):
        with pytest.raises(InvalidFamilyError):
            koszul_brace("twisted", -1)
        with pytest.raises(InvalidFamilyError):
            koszul_brace("operad", 0)

    def test_concatenate(self):
        a = Element.monomial((("m", (1,)),))
        b = Element.monomial((("m", (2,)),), 3)
        assert concatenate(a, b) == Element.monomial((("m", (1,)), ("m", (2,))), 3)

    @pytest.mark.parametrize("kind", ["twisted", "operad", "nsoperad"])
    def test_brace_vanishing(self, kind):
        assert verify_brace_vanishing_relations(kind, 3)


class TestBuilds:

    def test_build_validates(self, settings):
        p = build(FamilyId("tHyperCom", max_arity=3), settings)

        # Assertions
        assert p.kind == "twisted"
        assert p.name == "tHyperCom"
        assert [g.name for g in p.generators] == ["m1", "m2", "m3"]

    @pytest.mark.parametrize("name,k,max_arity", [
        ("tHyperCom", None, 4),
        ("tGrav", None, 4),
        ("blmHyperCom", 2, 4),
        ("blmHyperComDual", 3, 4),
        ("Grav", None, 4),
        ("ncGrav", None, 4),
    ])
    def test_dims_match_closed_forms(self, settings, name, k, max_arity):
        fid = FamilyId(name, k=k, max_arity=max_arity)
        assert totals(family_basis(fid, settings=settings)) == closed_form_table(fid, settings)

    def test_gravity_generators_follow_the_kind(self, settings):
        twisted = build(FamilyId("tGrav", max_arity=4), settings)
        plane = build(FamilyId("ncGrav", max_arity=4), settings)

        # Assertions
        assert all(g.symmetric for g in twisted.generators if g.arity >= 2)
        assert not any(g.symmetric for g in plane.generators)
        assert totals(family_basis(FamilyId("tGrav", max_arity=3), settings=settings)) == {0: 1, 1: 1, 2: 2, 3: 4}

    @pytest.mark.slow
    def test_order_three_dual_at_arity_five(self, settings):
        fid = FamilyId("blmHyperComDual", k=3, max_arity=5)
        table = totals(family_basis(fid, settings=settings))
        assert table == closed_form_table(fid, settings)
        assert table[3] == 2
        assert table[5] == 8

    def test_hypercom_dims(self, settings):
        basis = family_basis(FamilyId("HyperCom", max_arity=4), settings=settings)
        assert totals(basis) == {1: 1, 2: 1, 3: 2, 4: 7}

    def test_extended_quotient_rejects_other_families(self, settings):
        with pytest.raises(InvalidFamilyError):
            extended_quotient(FamilyId("tGrav", max_arity=3), settings)

    @pytest.mark.slow
    @pytest.mark.parametrize("name", ["blmHyperCom", "bHyperCom", "bncHyperCom"])
    def test_quotients_match_direct_builds(self, settings, name):
        assert quotient_matches_family(FamilyId(name, k=2, max_arity=4), settings)

    @pytest.mark.slow
    def test_tbv_elimination(self):
        assert verify_tbv_elimination(3)

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", ["twisted", "operad", "nsoperad"])
    def test_order_one(self, kind):
        assert verify_order_one(kind, 3, 4)

    def test_factorial_sanity(self):
        assert closed_form_dims("tHyperCom", 5) == factorial(5)


class TestPbwBases:

    def test_plane_counts(self):
        assert [ns_bv_pbw_count(n) for n in (1, 2, 3)] == [2, 8, 48]

    def test_twisted_word_counts(self):
        free = build(FamilyId("blmBV-qlin", k=4, max_arity=3)).free
        assert [len(twisted_bv_pbw_words(free, n)) for n in (0, 1, 2)] == [2, 4, 12]

    def test_twisted_leading_terms(self, settings):
        leads = pbw_leads(FamilyId("blmBV-qlin", k=4, max_arity=3), settings)

        # Assertions
        assert "m[2].m[1]" in leads
        assert "l0[].l0[]" in leads
        assert "l1[2].m[1]" in leads
        assert "m[1].m[2]" not in leads

    @pytest.mark.parametrize("kind", ["twisted", "nsoperad"])
    def test_normal_monomials_match(self, settings, kind):
        result = verify_bv_pbw(kind, 3, settings)
        assert result["leading terms"]
        assert all(result.values())

    @pytest.mark.slow
    @pytest.mark.parametrize("kind", ["twisted", "nsoperad"])
    def test_normal_monomials_match_at_arity_five(self, settings, kind):
        assert all(verify_bv_pbw(kind, 5, settings).values())

    def test_no_symmetric_description(self):
        with pytest.raises(InvalidFamilyError):
            verify_bv_pbw("operad", 3)
