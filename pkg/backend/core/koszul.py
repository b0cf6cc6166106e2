import logging
import math
from dataclasses import dataclass, field, replace
from fractions import Fraction
from itertools import combinations
from typing import Dict, List, Optional, Tuple

import numpy as np

from .element import Element
from .errors import DifferentialError, GeneratorMismatchError, NotQuadraticError, TruncationError
from .linalg import MonomialIndex, SparseRow, kernel, rank, row_reduce
from .monomials import TWISTED, FreeObject, GeneratorSymbol
from .presentation import Presentation, symmetrize
from .rewriting import GroebnerBasis, weight_bound_for_window

logger = logging.getLogger(__name__)

DEFAULT_DUAL_ORDER = {"twisted": "aritylex", "operad": "revpathperm", "nsoperad": "revpathperm"}


def suspension_shift(kind: str, arity: int) -> int:
    return arity if kind == TWISTED else arity - 1


def _occurrence_names(free: FreeObject, mon) -> List[str]:
    return free.names(mon)


def _suspension_sign(free: FreeObject, mon, shifts: Dict[str, int], desuspended: Dict[str, int]) -> int:
    names = _occurrence_names(free, mon)
    total = 0
    for j, later in enumerate(names):
        if shifts[later] % 2 == 0:
            continue
        for earlier in names[:j]:
            total += desuspended[earlier]
    return -1 if total % 2 else 1


def apply_suspension(p: Presentation, which: int) -> Presentation:
    """Shift generator degrees by the arity-wise suspension (which=+1) or desuspension (which=-1)"""
    if which not in (1, -1):
        raise ValueError("which must be +1 or -1")
    shifts = {g.name: suspension_shift(p.kind, g.arity) for g in p.generators}
    generators = [replace(g, degree=g.degree - which * shifts[g.name]) for g in p.generators]
    # signs are always computed from the desuspended degrees so that the two shifts are inverse
    desuspended = {
        g.name: (g.degree + shifts[g.name] if which == -1 else g.degree) for g in p.generators
    }
    free = p.free

    def resign(element: Element) -> Element:
        return Element.from_terms(
            (mon, coef * _suspension_sign(free, mon, shifts, desuspended)) for mon, coef in element.items()
        )

    return replace(
        p,
        generators=generators,
        relations=[resign(r) for r in p.relations],
        differential={name: resign(image) for name, image in p.differential.items()},
    )


# ---------------------------------------------------------------- pairings


def _first_sign(free: FreeObject, mon) -> int:
    first = free.names(mon)[0]
    return -1 if free.gens[first].degree % 2 else 1


def _rename_monomial(mon, names: Dict[str, str]):
    if isinstance(mon, int):
        return mon
    if mon and isinstance(mon[0], tuple):
        return tuple((names[name], labels) for name, labels in mon)
    if not mon:
        return mon
    return (names[mon[0]], tuple(_rename_monomial(child, names) for child in mon[1]))


def rename_element(element: Element, names: Dict[str, str]) -> Element:
    return Element.from_terms((_rename_monomial(mon, names), coef) for mon, coef in element.items())


def _weight_two_slice(p: Presentation, arity: int) -> Tuple[MonomialIndex, List[Element]]:
    free = p.free
    index = MonomialIndex(free.enumerate(arity, 2))
    relations = [r for r in p.relations if free.element_arity(r) == arity]
    return index, symmetrize(free, relations)


def _arities(p: Presentation, max_arity: int) -> range:
    return range(0 if p.kind == TWISTED else 1, max_arity + 1)


def _dual_generators(p: Presentation, names: Dict[str, str]) -> List[GeneratorSymbol]:
    result = []
    for g in p.generators:
        shift = suspension_shift(p.kind, g.arity)
        result.append(replace(g, name=names[g.name], degree=2 * shift - 1 - g.degree))
    return result


def _dual_relations(p: Presentation, max_arity: int, names: Dict[str, str]) -> List[Element]:
    free = p.free
    relations = []
    for arity in _arities(p, max_arity):
        index, rels = _weight_two_slice(p, arity)
        if not len(index):
            continue
        rows = []
        for rel in rels:
            row = {}
            for mon, coef in rel.items():
                row[index.position[mon]] = coef * _first_sign(free, mon)
            rows.append(row)
        for vector in kernel(rows, len(index)):
            element = index.element(vector)
            relations.append(rename_element(element, names))
        logger.debug(f"Dual relations in arity {arity}: {len(index) - rank(rows)}")
    return relations


def _default_names(p: Presentation, names: Optional[Dict[str, str]]) -> Dict[str, str]:
    result = {g.name: f"{g.name}_dual" for g in p.generators}
    result.update(names or {})
    return result


def quadratic_dual_desuspended(
    p: Presentation, max_arity: int, names: Optional[Dict[str, str]] = None, order: Optional[str] = None
) -> Presentation:
    if not p.is_quadratic():
        raise NotQuadraticError(f"{p.name or 'presentation'} has relations that are not quadratic")
    names = _default_names(p, names)
    return Presentation(
        kind=p.kind,
        generators=_dual_generators(p, names),
        relations=_dual_relations(p, max_arity, names),
        order=order or DEFAULT_DUAL_ORDER[p.kind],
        name=f"{p.name}^!" if p.name else "",
    )


def quadratic_dual(
    p: Presentation, max_arity: int, names: Optional[Dict[str, str]] = None, order: Optional[str] = None
) -> Presentation:
    """Koszul dual presentation in the unshifted degree convention, up to max_arity"""
    return apply_suspension(quadratic_dual_desuspended(p, max_arity, names, order), 1)


def pairing_check(p: Presentation, q: Presentation, max_arity: int) -> dict:
    """Whether q's relations annihilate p's and the two relation spaces are complementary"""
    if len(p.generators) != len(q.generators):
        raise GeneratorMismatchError(
            f"{len(p.generators)} generators cannot be paired with {len(q.generators)}"
        )
    for a, b in zip(p.generators, q.generators):
        if a.arity != b.arity:
            raise GeneratorMismatchError(f"{a.name} has arity {a.arity} but {b.name} has arity {b.arity}")
        if a.symmetric != b.symmetric:
            raise GeneratorMismatchError(f"{a.name} and {b.name} differ in symmetry")
    if p.kind != q.kind:
        raise GeneratorMismatchError(f"Cannot pair a {p.kind} presentation with a {q.kind} one")
    desuspended = [2 * suspension_shift(p.kind, a.arity) - 1 - a.degree for a in p.generators]
    raw = [suspension_shift(p.kind, a.arity) - 1 - a.degree for a in p.generators]
    degrees = [b.degree for b in q.generators]
    if degrees == desuspended:
        convention = "desuspended"
    elif degrees == raw:
        convention = "raw"
        q = apply_suspension(q, -1)
    else:
        raise GeneratorMismatchError("Generator degrees of the second presentation are not dual to the first")
    to_p = {b.name: a.name for a, b in zip(p.generators, q.generators)}
    free = p.free
    annihilates = True
    dims_match = True
    by_arity = {}
    for arity in _arities(p, max_arity):
        index, rels_p = _weight_two_slice(p, arity)
        if not len(index):
            continue
        rels_q = symmetrize(
            q.free, [r for r in q.relations if q.free.element_arity(r) == arity]
        )
        rows_p = [index.row(r) for r in rels_p]
        try:
            rows_q = [index.row(rename_element(r, to_p)) for r in rels_q]
        except KeyError as e:
            raise GeneratorMismatchError(
                f"Relations of the second presentation leave the weight-two slice in arity {arity}: {e.args[0]}"
            )
        signs = {i: _first_sign(free, mon) for i, mon in enumerate(index.monomials)}
        zero = all(
            sum((rp.get(c, 0) * signs[c] * v for c, v in rq.items()), Fraction(0)) == 0
            for rp in rows_p
            for rq in rows_q
        )
        rp, rq = rank(rows_p), rank(rows_q)
        complementary = rp + rq == len(index)
        by_arity[arity] = {"slice": len(index), "rank_first": rp, "rank_second": rq, "annihilates": zero}
        annihilates = annihilates and zero
        dims_match = dims_match and complementary
    return {"annihilates": annihilates, "dims_match": dims_match, "convention": convention, "by_arity": by_arity}


# ---------------------------------------------------------------- dg duals


def ql_dual_dg(
    p: Presentation,
    max_arity: int,
    names: Optional[Dict[str, str]] = None,
    order: Optional[str] = None,
    check: bool = True,
    max_weight: int = 3,
) -> Presentation:
    """Dual of a quadratic-linear presentation with the differential restoring the linear parts"""
    free = p.free
    for rel in p.relations:
        if any(free.size(mon) not in (1, 2) for mon in rel.monomials()):
            raise NotQuadraticError(f"{p.name or 'presentation'} has relations that are not quadratic-linear")
    names = _default_names(p, names)
    quadratic = replace(p, relations=[r.filter(lambda mon: free.size(mon) == 2) for r in p.relations])
    quadratic.relations = [r for r in quadratic.relations if not r.is_zero()]
    dual = quadratic_dual_desuspended(quadratic, max_arity, names, order)
    dual_free = dual.free
    differential: Dict[str, Element] = {}
    for arity in _arities(p, max_arity):
        gens = [g for g in p.generators if g.arity == arity]
        if not gens:
            continue
        quad_mons = free.enumerate(arity, 2)
        linear_mons = free.enumerate(arity, 1)
        index = MonomialIndex(list(quad_mons) + list(linear_mons))
        rels = symmetrize(free, [r for r in p.relations if free.element_arity(r) == arity])
        reduced, pivots = row_reduce(index.row(r) for r in rels)
        cutoff = len(quad_mons)
        images = {g.name: Element() for g in gens}
        for row, pivot in zip(reduced, pivots):
            if pivot >= cutoff:
                raise NotQuadraticError(f"Relations in arity {arity} force a linear relation among generators")
            lead = index.monomials[pivot]
            dual_lead = Element.monomial(_rename_monomial(lead, names), Fraction(-1) * _first_sign(free, lead))
            for g in gens:
                coef = row.get(index.position[free.corolla(g.name)], Fraction(0))
                if coef:
                    images[g.name] = images[g.name] + dual_lead.scale(coef)
        for g in gens:
            if not images[g.name].is_zero():
                differential[names[g.name]] = images[g.name]
    result = replace(dual, differential=differential)
    logger.info(f"Dual dg presentation of {p.name or p.kind}: {len(differential)} generators with nonzero differential")
    if check:
        check_differential(result, max_arity, max_weight)
    return result


def check_differential(p: Presentation, max_arity: int, max_weight: int = 3) -> GroebnerBasis:
    """Differential preserves the relations and squares to zero, modulo the relations"""
    basis = p.basis(max_arity, max_weight=max_weight)
    free = p.free
    for rel in p.relations:
        image = basis.reduce(free.derive_element(rel, p.differential))
        if not image.is_zero():
            raise DifferentialError(
                "Differential does not preserve the relations",
                {"arity": free.element_arity(rel), "relation": free.format_element(rel), "image": free.format_element(image)},
            )
    for name, image in p.differential.items():
        square = basis.reduce(free.derive_element(image, p.differential))
        if not square.is_zero():
            raise DifferentialError(
                f"Differential squares to a nonzero element on {name}",
                {"generator": name, "arity": free.gens[name].arity, "square": free.format_element(square)},
            )
    return basis


# ---------------------------------------------------------------- homology


@dataclass
class ComplexSlice:
    """Fixed-arity window of a dg presentation in its normal-monomial basis"""

    arity: int
    low: int
    high: int
    bases: Dict[int, list] = field(default_factory=dict)
    # degree d -> one sparse row per basis[d] monomial, columns index basis[d - 1]
    matrices: Dict[int, List[SparseRow]] = field(default_factory=dict)

    def dense(self, degree: int) -> np.ndarray:
        rows = self.matrices.get(degree, [])
        target = len(self.bases.get(degree - 1, []))
        matrix = np.zeros((len(rows), target), dtype=object)
        matrix[:, :] = Fraction(0)
        for i, row in enumerate(rows):
            for j, value in row.items():
                matrix[i, j] = value
        return matrix

    def to_text(self) -> str:
        lines = [f"# arity {self.arity} degrees {self.low}..{self.high}"]
        for degree in sorted(self.matrices):
            source = len(self.bases.get(degree, []))
            target = len(self.bases.get(degree - 1, []))
            lines.append(f"matrix {degree} {source} {target}")
            for i, row in enumerate(self.matrices[degree]):
                for j in sorted(row):
                    value = row[j]
                    lines.append(f"{i} {j} {value.numerator}/{value.denominator}")
        return "\n".join(lines) + "\n"


def complex_slice(p: Presentation, basis: GroebnerBasis, arity: int, low: int, high: int) -> ComplexSlice:
    free = basis.free
    bound = weight_bound_for_window(free, arity, low - 1, high + 1)
    if basis.max_weight is not None and basis.max_weight < bound + 1:
        raise TruncationError(
            f"Basis is truncated at weight {basis.max_weight}; the window needs weight {bound + 1}"
        )
    result = ComplexSlice(arity=arity, low=low, high=high)
    for degree in range(low - 1, high + 2):
        result.bases[degree] = basis.normal_monomials_in_degree(arity, degree, bound)
    for degree in range(low, high + 2):
        target = MonomialIndex(result.bases[degree - 1])
        rows = []
        for mon in result.bases[degree]:
            image = basis.reduce(free.derive(mon, p.differential))
            try:
                rows.append(target.row(image))
            except KeyError:
                raise TruncationError(f"Differential of {free.code(mon)} leaves the truncated window")
        result.matrices[degree] = rows
    logger.debug(f"Complex slice arity {arity}: {[len(result.bases[d]) for d in sorted(result.bases)]}")
    return result


def check_square_zero(slice_: ComplexSlice) -> None:
    for degree in range(slice_.low + 1, slice_.high + 2):
        upper = slice_.dense(degree)
        lower = slice_.dense(degree - 1)
        if upper.shape[0] == 0 or lower.shape[1] == 0 or upper.shape[1] == 0:
            continue
        product = upper.dot(lower)
        if any(value != 0 for value in product.flat):
            raise DifferentialError(
                "Consecutive differentials do not compose to zero",
                {"arity": slice_.arity, "degree": degree},
            )


def homology_dims(slice_: ComplexSlice) -> Dict[int, int]:
    """dim ker(d: C_d -> C_{d-1}) - rank(d: C_{d+1} -> C_d) for each degree of the window"""
    check_square_zero(slice_)
    ranks = {d: rank(rows) for d, rows in slice_.matrices.items()}
    result = {}
    for degree in range(slice_.low, slice_.high + 1):
        size = len(slice_.bases.get(degree, []))
        result[degree] = size - ranks.get(degree, 0) - ranks.get(degree + 1, 0)
    return result


# ---------------------------------------------------------------- Koszul complex model


def _koszul_boundary(term: Tuple[frozenset, int, tuple]) -> Dict[tuple, int]:
    labels, t, ns = term
    result: Dict[tuple, int] = {}
    for i in sorted(labels):
        before = sum(1 for j in ns if j < i)
        sign = -1 if before % 2 else 1
        key = (labels - {i}, t - 1, tuple(sorted(ns + (i,))))
        result[key] = result.get(key, 0) + sign
    return result


def _koszul_homotopy(term: Tuple[frozenset, int, tuple]) -> Dict[tuple, int]:
    labels, t, ns = term
    if not ns or ns[0] != 1:
        return {}
    return {(labels | {1}, t + 1, ns[1:]): 1}


def _apply(fn, vector: Dict[tuple, int]) -> Dict[tuple, int]:
    result: Dict[tuple, int] = {}
    for term, coef in vector.items():
        for image, value in fn(term).items():
            result[image] = result.get(image, 0) + coef * value
    return {k: v for k, v in result.items() if v}


def koszul_homotopy_check(max_arity: int, depth: int = 3) -> Dict[int, bool]:
    """dh + hd = id and d^2 = 0 on the complex of K_I^{2t} n_J, arities 1..max_arity"""
    verdicts = {}
    for n in range(1, max_arity + 1):
        ok = True
        labels = range(1, n + 1)
        for size in range(n + 1):
            for chosen in combinations(labels, size):
                ns = tuple(x for x in labels if x not in chosen)
                for t in range(size - depth, size + 1):
                    term = (frozenset(chosen), t, ns)
                    start = {term: 1}
                    dh = _apply(_koszul_boundary, _apply(_koszul_homotopy, start))
                    hd = _apply(_koszul_homotopy, _apply(_koszul_boundary, start))
                    total = dict(dh)
                    for k, v in hd.items():
                        total[k] = total.get(k, 0) + v
                    total = {k: v for k, v in total.items() if v}
                    if total != start:
                        ok = False
                    if _apply(_koszul_boundary, _apply(_koszul_boundary, start)):
                        ok = False
        verdicts[n] = ok
        logger.debug(f"Koszul complex homotopy arity {n}: {ok}")
    return verdicts


def _round_robin(arity: int, parts: int) -> List[Tuple[int, ...]]:
    return [tuple(range(start, arity + 1, parts)) for start in range(1, parts + 1)]


def _consecutive(arity: int, parts: int, size: int) -> List[Tuple[int, ...]]:
    blocks = [tuple(range(i, min(i + size, arity + 1))) for i in range(1, arity + 1, size)]
    return blocks + [()] * (parts - len(blocks))


def block_products_agree(basis: GroebnerBasis, names_by_arity: Dict[int, str], arity: int, extra: int = 1) -> bool:
    """Products of block generators over two different block decompositions have equal normal forms"""
    free = basis.free
    largest = max(names_by_arity)
    if arity == 0:
        return True
    fewest = math.ceil(arity / largest)
    for parts in range(fewest, fewest + extra + 1):
        if 0 not in names_by_arity and parts > arity:
            break
        words = []
        for blocks in (_consecutive(arity, parts, largest), _round_robin(arity, parts)):
            factors = [(names_by_arity[len(block)], block) for block in blocks]
            words.append(Element.monomial(free.word(factors)))
        if basis.reduce(words[0]) != basis.reduce(words[1]):
            logger.debug(f"Block products disagree in arity {arity} with {parts} blocks")
            return False
    return True
