import logging
import re
from collections import defaultdict
from dataclasses import dataclass, replace
from functools import lru_cache
from itertools import combinations
from math import factorial
from typing import Callable, Dict, Iterable, List, Optional, Tuple

import sympy

from .config import Settings, get_settings
from .element import Element
from .errors import InvalidFamilyError
from .koszul import quadratic_dual_desuspended, rename_element
from .monomials import NS, OPERAD, TWISTED, FreeObject, GeneratorSymbol, free_object
from .presentation import Presentation, symmetrize
from .rewriting import GroebnerBasis
from .species import binomial, ordered_partitions_of, two_block_splits, underline

logger = logging.getLogger(__name__)

DELTA = "D"
PRODUCT = {TWISTED: "m", OPERAD: "m", NS: "mu"}


# generators (arity, power) -> name
Grid = Dict[Tuple[int, int], str]


# ---------------------------------------------------------------- extended generators

EXTENDED = {"tHC": TWISTED, "HC": OPERAD, "ncHC": NS}
_LOWEST_ARITY = {"tHC": 1, "HC": 2, "ncHC": 2}


@dataclass(frozen=True)
class ExtendedGenerator:
    """Generator m_t^{2p} of tHC / HC, or mu_t^{2p} of ncHC"""

    family: str
    arity: int
    power: int

    def __post_init__(self):
        if self.family not in EXTENDED:
            raise InvalidFamilyError(f"Unknown extended family {self.family!r}")
        if self.arity < _LOWEST_ARITY[self.family] or self.power < 0:
            raise InvalidFamilyError(
                f"{self.family} has no generator of arity {self.arity} and degree {2 * self.power}"
            )

    @property
    def name(self) -> str:
        prefix = "mu" if self.family == "ncHC" else "m"
        return f"{prefix}{self.arity}_{self.power}"

    @property
    def degree(self) -> int:
        return 2 * self.power

    def symbol(self) -> GeneratorSymbol:
        return GeneratorSymbol(self.name, self.arity, self.degree, symmetric=self.family != "ncHC")

    @classmethod
    def parse(cls, family: str, name: str) -> "ExtendedGenerator":
        match = re.fullmatch(r"(mu|m)(\d+)_(\d+)", name)
        if not match:
            raise InvalidFamilyError(f"{name!r} is not an extended generator name")
        return cls(family, int(match.group(2)), int(match.group(3)))


def extended_grid(family: str, max_arity: int, max_power: int, alive=None) -> Grid:
    grid = {}
    for t in range(_LOWEST_ARITY[family], max_arity + 1):
        for p in range(max_power + 1):
            if alive is None or alive(t, p):
                grid[(t, p)] = ExtendedGenerator(family, t, p).name
    return grid


def _grid_generators(grid: Grid, symmetric: bool) -> List[GeneratorSymbol]:
    return [
        GeneratorSymbol(name, t, 2 * p, symmetric=symmetric)
        for (t, p), name in sorted(grid.items())
    ]


# ---------------------------------------------------------------- small builders


def _word(free: FreeObject, *factors) -> Element:
    return Element.monomial(free.word(factors))


def _tree(free: FreeObject, nested) -> Element:
    tree, sign = free.from_nested(nested)
    return Element.monomial(tree, sign)


def _compose(free: FreeObject, outer: str, slot: int, inner: str) -> Element:
    tree, sign = free.compose(free.corolla(outer), slot, free.corolla(inner))
    return Element.monomial(tree, sign)


def _corolla(free: FreeObject, name: str) -> Element:
    return Element.monomial(free.corolla(name))


def concatenate(a: Element, b: Element) -> Element:
    """Product of two words whose labels are already disjoint"""
    return Element.from_terms((x + y, ca * cb) for x, ca in a.items() for y, cb in b.items())


def _transport(free: FreeObject, element: Element, labels) -> Element:
    return free.relabel_element(element, {i + 1: label for i, label in enumerate(sorted(labels))})


def _powers(grid: Grid) -> Dict[int, List[int]]:
    result = defaultdict(list)
    for t, p in sorted(grid):
        result[t].append(p)
    return result


# ---------------------------------------------------------------- hypercommutative-type relations


def _lm_relations(free: FreeObject, grid: Grid, max_arity: int, max_total: int) -> List[Element]:
    """sum_{i in I, j in J} [m_I, m_J] = 0, separated by total degree 2d"""
    powers = _powers(grid)
    relations = []
    for n in range(2, max_arity + 1):
        splits = two_block_splits(underline(n))
        for i, j in combinations(underline(n), 2):
            chosen = [(I, J) for I, J in splits if i in I and j in J]
            for d in range(max_total + 1):
                terms = []
                for I, J in chosen:
                    for p in powers.get(len(I), ()):
                        name_j = grid.get((len(J), d - p))
                        if name_j is None:
                            continue
                        a, b = (grid[(len(I), p)], I), (name_j, J)
                        terms.append((free.word([a, b]), 1))
                        terms.append((free.word([b, a]), -1))
                element = Element.from_terms(terms)
                if not element.is_zero():
                    relations.append(element)
    return relations


def _dm_relations(free: FreeObject, grid: Grid, max_arity: int, max_total: int) -> List[Element]:
    """sum over i in I; j,k in J of m_{I+*} o_* m_J equals the same sum with i and j swapped"""
    powers = _powers(grid)
    relations = []

    def side(splits, first, second, third, d):
        terms = Element()
        for I, J in splits:
            if first not in I or second not in J or third not in J:
                continue
            for p in powers.get(len(I) + 1, ()):
                inner = grid.get((len(J), d - p))
                if inner is None:
                    continue
                terms = terms + _tree(free, (grid[(len(I) + 1, p)], list(I) + [(inner, list(J))]))
        return terms

    for n in range(3, max_arity + 1):
        splits = [(I, J) for I, J in two_block_splits(underline(n)) if len(J) >= 2]
        for i, j in combinations(underline(n), 2):
            for k in underline(n):
                if k in (i, j):
                    continue
                for d in range(max_total + 1):
                    element = side(splits, i, j, k, d) - side(splits, j, i, k, d)
                    if not element.is_zero():
                        relations.append(element)
    return relations


def _nc_relations(free: FreeObject, grid: Grid, max_arity: int, max_total: int) -> List[Element]:
    """Graftings with q-1, q on the upper corolla equal graftings with q, q+1 on it"""
    powers = _powers(grid)
    relations = []

    def graftings(outer_arity, slot, inner_arity, d):
        terms = Element()
        for p in powers.get(outer_arity, ()):
            inner = grid.get((inner_arity, d - p))
            if inner is not None:
                terms = terms + _compose(free, grid[(outer_arity, p)], slot, inner)
        return terms

    for n in range(3, max_arity + 1):
        for q in range(2, n):
            for d in range(max_total + 1):
                element = Element()
                for i in range(1, q):
                    element = element + graftings(n - q + i, i, q - i + 1, d)
                for i in range(q + 1, n + 1):
                    element = element - graftings(n - i + q, q, i - q + 1, d)
                if not element.is_zero():
                    relations.append(element)
    return relations


# ---------------------------------------------------------------- gravity-type relations


def _tgrav_relations(free: FreeObject, names: Dict[int, str], max_arity: int) -> List[Element]:
    relations = []
    for n in range(2, max_arity + 1):
        if n - 1 not in names or 1 not in names:
            continue
        labels = underline(n)

        def peel(i):
            rest = tuple(x for x in labels if x != i)
            return _word(free, (names[1], (i,)), (names[n - 1], rest))

        total = Element()
        for i in labels:
            total = total + peel(i)
        relations.append(total)
        for size in range(2, n):
            if size not in names or n - size not in names:
                continue
            for I in combinations(labels, size):
                J = tuple(x for x in labels if x not in I)
                element = Element()
                for i in I:
                    element = element + peel(i)
                relations.append(element - _word(free, (names[size], I), (names[n - size], J)))
    return relations


def _grav_relations(free: FreeObject, names: Dict[int, str], max_arity: int) -> List[Element]:
    relations = []
    for n in range(3, max_arity + 1):
        if n - 1 not in names or 2 not in names:
            continue
        labels = underline(n)

        def pair_term(pair):
            rest = [x for x in labels if x not in pair]
            return _tree(free, (names[n - 1], rest + [(names[2], list(pair))]))

        total = Element()
        for pair in combinations(labels, 2):
            total = total + pair_term(pair)
        relations.append(total)
        for size in range(3, n):
            if size not in names or n - size + 1 not in names:
                continue
            for J in combinations(labels, size):
                I = [x for x in labels if x not in J]
                element = Element()
                for pair in combinations(J, 2):
                    element = element + pair_term(pair)
                element = element - _tree(free, (names[n - size + 1], I + [(names[size], list(J))]))
                relations.append(element)
    return relations


def _ncgrav_relations(free: FreeObject, names: Dict[int, str], max_arity: int) -> List[Element]:
    relations = []
    for n in range(3, max_arity + 1):
        if n - 1 not in names or 2 not in names:
            continue
        total = Element()
        for j in range(1, n):
            total = total + _compose(free, names[n - 1], j, names[2])
        relations.append(total)
        for p in range(3, n):
            if p not in names or n - p + 1 not in names:
                continue
            for r in range(1, n - p + 2):
                element = Element()
                for j in range(r, r + p - 1):
                    element = element + _compose(free, names[n - 1], j, names[2])
                relations.append(element - _compose(free, names[n - p + 1], r, names[p]))
    return relations


def _gravity_names(prefix: str, base: int, k: int, max_arity: int) -> Dict[int, str]:
    step = k - 1
    return {t: f"{prefix}{t}" for t in range(base, max_arity + 1) if (t - base) % step == 0}


def _gravity_generators(names: Dict[int, str], base: int, k: int, symmetric: bool) -> List[GeneratorSymbol]:
    result = []
    for t, name in sorted(names.items()):
        m = (t - base) // (k - 1)
        result.append(GeneratorSymbol(name, t, 1 + 2 * m * (k - 2), symmetric=symmetric))
    return result


# ---------------------------------------------------------------- braces and BV-type presentations


def bv_generators(kind: str) -> List[GeneratorSymbol]:
    if kind == TWISTED:
        return [GeneratorSymbol(DELTA, 0, 1), GeneratorSymbol("m", 1, 0, symmetric=True)]
    if kind == OPERAD:
        return [GeneratorSymbol(DELTA, 1, 1), GeneratorSymbol("m", 2, 0, symmetric=True)]
    return [GeneratorSymbol(DELTA, 1, 1), GeneratorSymbol("mu", 2, 0)]


def _bv_free(kind: str) -> FreeObject:
    return free_object(kind, bv_generators(kind))


def koszul_brace(kind: str, k: int, free: Optional[FreeObject] = None) -> Element:
    """k-th brace of D with respect to the product, expanded in the free object"""
    free = free or _bv_free(kind)
    if kind == TWISTED:
        if k < 0:
            raise InvalidFamilyError("Twisted braces start at k = 0")
        brace = Element.monomial(((DELTA, ()),))
        for j in range(1, k + 1):
            factor = Element.monomial((("m", (j,)),))
            brace = concatenate(brace, factor) - concatenate(factor, brace)
        return brace
    if k < 1:
        raise InvalidFamilyError("Operadic braces start at k = 1")
    delta = _corolla(free, DELTA)
    product = _corolla(free, PRODUCT[kind])
    if kind == OPERAD:
        brace = delta
        for n in range(1, k):
            lowered = free.compose_elements(product, 1, brace)
            swap = {i: i for i in range(1, n + 2)}
            swap[n], swap[n + 1] = n + 1, n
            brace = free.compose_elements(brace, n, product) - lowered - free.relabel_element(lowered, swap)
        return brace
    if k == 1:
        return delta
    if k == 2:
        return (
            free.compose_elements(delta, 1, product)
            - free.compose_elements(product, 1, delta)
            - free.compose_elements(product, 2, delta)
        )
    shifted = free.compose_elements(delta, 1, product)
    brace = (
        free.compose_elements(shifted, 2, product)
        - free.compose_elements(product, 1, shifted)
        - free.compose_elements(product, 2, shifted)
        + free.compose_elements(product, 2, free.compose_elements(product, 1, delta))
    )
    for _ in range(4, k + 1):
        brace = free.compose_elements(brace, 2, product)
    return brace


def _bv_weight(kind: str, max_arity: int) -> int:
    return 2 * max_arity + 2 if kind == TWISTED else 3 * max_arity


def bv_presentation(kind: str, max_arity: int, k: Optional[int] = None, name: str = "") -> Presentation:
    """Square-zero D and the (twisted-)commutative or associative product; D of order k if k is given"""
    free = _bv_free(kind)
    product = PRODUCT[kind]
    if kind == TWISTED:
        relations = [
            _word(free, (DELTA, ()), (DELTA, ())),
            _word(free, ("m", (1,)), ("m", (2,))) - _word(free, ("m", (2,)), ("m", (1,))),
        ]
        if k is not None:
            relations.append(koszul_brace(kind, k, free))
        order = "genlex"
    else:
        relations = [
            _compose(free, DELTA, 1, DELTA),
            _compose(free, product, 1, product) - _compose(free, product, 2, product),
        ]
        if k is not None:
            relations.append(koszul_brace(kind, k + 1, free))
        order = "revpathperm" if kind == OPERAD else "pathdeglex"
    relations = [r for r in relations if (free.element_arity(r) or 0) <= max_arity]
    return Presentation(
        kind=kind,
        generators=bv_generators(kind),
        relations=symmetrize(free, relations),
        order=order,
        name=name,
        max_weight=_bv_weight(kind, max_arity),
    )


def _brace_sums(kind: str, free: FreeObject, max_n: int) -> Dict[int, Element]:
    braces = {j: koszul_brace(kind, j, free) for j in range(0 if kind == TWISTED else 1, max_n + 1)}
    sums = {}
    if kind == TWISTED:
        for n in range(max_n + 1):
            labels = underline(n)
            total = Element()
            for size in range(n + 1):
                for I in combinations(labels, size):
                    J = tuple(x for x in labels if x not in I)
                    total = total + concatenate(_transport(free, braces[size], I), _transport(free, braces[n - size], J))
            sums[n] = total
    elif kind == NS:
        for n in range(1, max_n + 1):
            total = Element()
            for p in range(1, n + 1):
                q = n + 1 - p
                for i in range(1, p + 1):
                    total = total + free.compose_elements(braces[p], i, braces[q])
            sums[n] = total
    else:
        for n in range(1, max_n + 1):
            labels = underline(n)
            total = Element()
            for size in range(1, n + 1):
                for J in combinations(labels, size):
                    I = [x for x in labels if x not in J]
                    slot = sorted(I + [J[0]]).index(J[0]) + 1
                    pairs = []
                    for x, ca in braces[len(I) + 1].items():
                        for y, cb in braces[size].items():
                            tree, sign = free.graft(x, slot, y, J)
                            pairs.append((tree, ca * cb * sign))
                    total = total + Element.from_terms(pairs)
            sums[n] = total
    return sums


def verify_brace_vanishing_relations(kind: str, max_n: int) -> bool:
    """The braces of D satisfy the L-infinity type relations modulo D^2 and the product relations"""
    presentation = bv_presentation(kind, max_n, name=f"BV+inf[{kind}]")
    basis = presentation.basis(max(max_n, 1), max_weight=max_n + 2)
    ok = True
    for n, total in _brace_sums(kind, basis.free, max_n).items():
        remainder = basis.reduce(total)
        if not remainder.is_zero():
            logger.warning(f"Brace relation in arity {n} leaves {basis.free.format_element(remainder)}")
            ok = False
    logger.info(f"Brace vanishing relations for {kind} up to arity {max_n}: {ok}")
    return ok


# ---------------------------------------------------------------- quadratic-linear presentations


def _twisted_qlin(k: int, max_arity: int) -> Tuple[List[GeneratorSymbol], List[Element]]:
    gens = [GeneratorSymbol(f"l{j}", j, 1, symmetric=True) for j in range(k)]
    gens.append(GeneratorSymbol("m", 1, 0, symmetric=True))
    free = free_object(TWISTED, gens)
    relations = [_word(free, ("m", (1,)), ("m", (2,))) - _word(free, ("m", (2,)), ("m", (1,)))]
    for n in range(1, k + 1):
        labels = underline(n)
        for i in labels:
            I = tuple(x for x in labels if x != i)
            element = _word(free, (f"l{n - 1}", I), ("m", (i,))) - _word(free, ("m", (i,)), (f"l{n - 1}", I))
            if n - 1 < k - 1:
                element = element - _word(free, (f"l{n}", labels))
            relations.append(element)
    for n in range(0, 2 * k - 1):
        labels = underline(n)
        element = Element()
        for size in range(n + 1):
            if size > k - 1 or n - size > k - 1:
                continue
            for I in combinations(labels, size):
                J = tuple(x for x in labels if x not in I)
                element = element + _word(free, (f"l{size}", I), (f"l{n - size}", J))
        if not element.is_zero():
            relations.append(element)
    return gens, [r for r in relations if (free.element_arity(r) or 0) <= max_arity]


def _operad_qlin(k: int, max_arity: int) -> Tuple[List[GeneratorSymbol], List[Element]]:
    gens = [GeneratorSymbol(f"l{j}", j, 1, symmetric=j >= 2) for j in range(1, k + 1)]
    gens.append(GeneratorSymbol("m", 2, 0, symmetric=True))
    free = free_object(OPERAD, gens)
    product = _corolla(free, "m")
    relations = [_compose(free, "m", 1, "m") - _compose(free, "m", 2, "m")]
    for n in range(1, 2 * k):
        if n > max_arity:
            break
        labels = underline(n)
        element = Element()
        for size in range(1, min(k, n) + 1):
            if n - size > k - 1:
                continue
            for J in combinations(labels, size):
                I = [x for x in labels if x not in J]
                element = element + _tree(free, (f"l{len(I) + 1}", I + [(f"l{size}", list(J))]))
        if not element.is_zero():
            relations.append(element)
    for n in range(1, k + 1):
        if n + 1 > max_arity:
            break
        ell = _corolla(free, f"l{n}")
        lowered = free.compose_elements(product, 1, ell)
        swap = {i: i for i in range(1, n + 2)}
        swap[n], swap[n + 1] = n + 1, n
        element = free.compose_elements(ell, n, product) - lowered - free.relabel_element(lowered, swap)
        if n < k:
            element = element - _corolla(free, f"l{n + 1}")
        relations.append(element)
    return gens, symmetrize(free, relations)


def _ns_qlin(k: int, max_arity: int) -> Tuple[List[GeneratorSymbol], List[Element]]:
    gens = [GeneratorSymbol(f"beta{j}", j, 1) for j in range(1, k + 1)]
    gens.append(GeneratorSymbol("mu", 2, 0))
    free = free_object(NS, gens)
    relations = [_compose(free, "mu", 1, "mu") - _compose(free, "mu", 2, "mu")]
    for n in range(1, 2 * k):
        if n > max_arity:
            break
        element = Element()
        for p in range(1, k + 1):
            q = n + 1 - p
            if not 1 <= q <= k:
                continue
            for i in range(1, p + 1):
                element = element + _compose(free, f"beta{p}", i, f"beta{q}")
        if not element.is_zero():
            relations.append(element)

    def beta(j):
        return _corolla(free, f"beta{j}") if j <= k else Element()

    for n in range(1, k + 1):
        if n + 1 > max_arity:
            break
        upper = beta(n + 1)
        name = f"beta{n}"
        if n == 1:
            relations.append(
                _compose(free, name, 1, "mu") - _compose(free, "mu", 1, name)
                - _compose(free, "mu", 2, name) - upper
            )
            continue
        relations.append(_compose(free, name, 1, "mu") - _compose(free, "mu", 2, name) - upper)
        for i in range(2, n):
            relations.append(_compose(free, name, i, "mu") - upper)
        relations.append(_compose(free, name, n, "mu") - _compose(free, "mu", 1, name) - upper)
    return gens, [r for r in relations if not r.is_zero()]


# ---------------------------------------------------------------- order-one u-presentations


def _u_presentation(kind: str, max_power: int, max_arity: int, name: str) -> Presentation:
    arity = 1 if kind == TWISTED else 2
    gens = [
        GeneratorSymbol(f"u{p}", arity, 2 * p + 1, symmetric=kind == OPERAD)
        for p in range(max_power + 1)
    ]
    free = free_object(kind, gens)
    relations = []
    for p in range(max_power + 1):
        for q in range(max_power + 1):
            a, b = f"u{p}", f"u{q}"
            if kind == TWISTED:
                first = _word(free, (a, (1,)), (b, (2,)))
                relations.append(first + _word(free, (b, (2,)), (a, (1,))))
                if p >= 1 and q + 1 <= max_power:
                    relations.append(first - _word(free, (f"u{p - 1}", (1,)), (f"u{q + 1}", (2,))))
            else:
                first = _compose(free, a, 1, b)
                relations.append(first + _compose(free, a, 2, b))
                if p >= 1 and q + 1 <= max_power:
                    relations.append(first - _compose(free, f"u{p - 1}", 1, f"u{q + 1}"))
    relations = [r for r in relations if not r.is_zero() and free.element_arity(r) <= max_arity]
    if kind != NS:
        relations = symmetrize(free, relations)
    order = {TWISTED: "aritylex", OPERAD: "revpathperm", NS: "pathdeglex"}[kind]
    return Presentation(kind=kind, generators=gens, relations=relations, order=order, name=name)


# ---------------------------------------------------------------- families


@dataclass(frozen=True)
class FamilyInfo:
    kind: str
    builder: Callable[["FamilyId"], Presentation]
    needs_k: bool = False
    min_k: int = 1
    description: str = ""


B_HYPERCOM = {"blmHyperCom": "tHC", "bHyperCom": "HC", "bncHyperCom": "ncHC"}
U_QUOTIENTS = {TWISTED: "tBV1-quotient", OPERAD: "bBV1-quotient", NS: "bncBV1-quotient"}


@dataclass(frozen=True)
class FamilyId:
    name: str
    k: Optional[int] = None
    max_arity: Optional[int] = None
    max_degree: Optional[int] = None

    @property
    def info(self) -> FamilyInfo:
        try:
            return FAMILIES[self.name]
        except KeyError:
            raise InvalidFamilyError(f"Unknown family {self.name!r}")

    @property
    def kind(self) -> str:
        return self.info.kind

    @property
    def label(self) -> str:
        return f"{self.name}({self.k})" if self.k is not None else self.name

    def validate(self) -> "FamilyId":
        info = self.info
        if info.needs_k:
            if self.k is None:
                raise InvalidFamilyError(f"{self.name} needs a parameter k")
            if self.k < info.min_k:
                raise InvalidFamilyError(f"{self.name} needs k >= {info.min_k}, got {self.k}")
        elif self.k is not None:
            raise InvalidFamilyError(f"{self.name} takes no parameter k")
        if self.max_arity is not None and self.max_arity < 1:
            raise InvalidFamilyError(f"Max arity must be positive, got {self.max_arity}")
        if self.max_degree is not None and self.max_degree < 0:
            raise InvalidFamilyError(f"Max degree must be nonnegative, got {self.max_degree}")
        return self

    def resolved(self, settings: Optional[Settings] = None) -> "FamilyId":
        settings = settings or get_settings()
        return replace(
            self,
            max_arity=self.max_arity if self.max_arity is not None else settings.max_arity_for(self.kind),
            max_degree=self.max_degree if self.max_degree is not None else settings.max_degree,
        )

    @property
    def degree_truncated(self) -> bool:
        """Whether the Gröbner basis itself must be cut at max_degree"""
        return self.name in EXTENDED or (self.name in B_HYPERCOM and self.k == 1)


def _alive(fid: FamilyId) -> Callable[[int, int], bool]:
    base = 1 if fid.kind == TWISTED else 2
    return lambda t, p: t == base + p * (fid.k - 1)


def _max_power(fid: FamilyId) -> int:
    if fid.name in B_HYPERCOM and fid.k > 1:
        base = 1 if fid.kind == TWISTED else 2
        return max((fid.max_arity - base) // (fid.k - 1), 0)
    return fid.max_degree // 2


_EXTENDED_RELATIONS = {TWISTED: _lm_relations, OPERAD: _dm_relations, NS: _nc_relations}
_EXTENDED_ORDER = {
    "tHC": "revdict",
    "HC": "opposite(qm(m2_*=0,m*=1) > revpathperm)",
    "ncHC": "opposite(qm(mu2_*=0,mu*=1) > revpathperm)",
}


def _grid_presentation(kind: str, grid: Grid, fid: FamilyId, order: str, max_total: int) -> Presentation:
    gens = _grid_generators(grid, symmetric=kind != NS)
    free = free_object(kind, gens)
    relations = _EXTENDED_RELATIONS[kind](free, grid, fid.max_arity, max_total)
    return Presentation(kind=kind, generators=gens, relations=relations, order=order, name=fid.label)


def _build_extended(fid: FamilyId) -> Presentation:
    power = fid.max_degree // 2
    grid = extended_grid(fid.name, fid.max_arity, power)
    return _grid_presentation(fid.kind, grid, fid, _EXTENDED_ORDER[fid.name], power)


def _build_b_hypercom(fid: FamilyId) -> Presentation:
    base = B_HYPERCOM[fid.name]
    power = _max_power(fid)
    grid = extended_grid(base, fid.max_arity, power, _alive(fid))
    total = power if fid.k == 1 else 2 * power
    return _grid_presentation(fid.kind, grid, fid, _EXTENDED_ORDER[base], total)


def extended_quotient(fid: FamilyId, settings: Optional[Settings] = None) -> Presentation:
    """The b-family obtained by killing generators of the truncated extended family"""
    fid = fid.validate().resolved(settings)
    base = B_HYPERCOM.get(fid.name)
    if base is None:
        raise InvalidFamilyError(f"{fid.name} is not a quotient of an extended family")
    degree = fid.max_degree if fid.k == 1 else 2 * _max_power(fid)
    extended = build(FamilyId(base, max_arity=fid.max_arity, max_degree=degree), settings)
    alive = _alive(fid)

    def dead(gen: GeneratorSymbol) -> bool:
        parsed = ExtendedGenerator.parse(base, gen.name)
        return not alive(parsed.arity, parsed.power)

    return extended.kill_generators(dead, name=fid.label)


def _build_hypercom(fid: FamilyId) -> Presentation:
    prefix = "mu" if fid.kind == NS else "m"
    base = 1 if fid.kind == TWISTED else 2
    grid = {(t, t - base): f"{prefix}{t}" for t in range(base, fid.max_arity + 1)}
    order = {
        TWISTED: "revdict",
        OPERAD: "opposite(qm(m2=0,m*=1) > revpathperm)",
        NS: "opposite(qm(mu2=0,mu*=1) > revpathperm)",
    }[fid.kind]
    return _grid_presentation(fid.kind, grid, fid, order, 2 * fid.max_arity)


_GRAVITY = {
    TWISTED: ("g", 1, _tgrav_relations, "aritylex"),
    OPERAD: ("g", 2, _grav_relations, "qm(g2=0,g*=1) > revpathperm"),
    NS: ("gamma", 2, _ncgrav_relations, "qm(gamma2=0,gamma*=1) > pathdeglex"),
}


def _build_gravity(fid: FamilyId) -> Presentation:
    prefix, base, relations_of, order = _GRAVITY[fid.kind]
    k = fid.k if fid.k is not None else 2
    names = _gravity_names(prefix, base, k, fid.max_arity)
    gens = _gravity_generators(names, base, k, symmetric=fid.kind != NS)
    free = free_object(fid.kind, gens)
    return Presentation(
        kind=fid.kind,
        generators=gens,
        relations=relations_of(free, names, fid.max_arity),
        order=order,
        name=fid.label,
    )


def _build_bv(fid: FamilyId) -> Presentation:
    k = 2 if fid.name == "tBV" else fid.k
    return bv_presentation(fid.kind, fid.max_arity, k, name=fid.label)


_QLIN = {TWISTED: (_twisted_qlin, "genlex"), OPERAD: (_operad_qlin, "revpathperm"), NS: (_ns_qlin, "pathdeglex")}


def _build_qlin(fid: FamilyId) -> Presentation:
    builder, order = _QLIN[fid.kind]
    gens, relations = builder(fid.k, fid.max_arity)
    return Presentation(
        kind=fid.kind,
        generators=gens,
        relations=relations,
        order=order,
        name=fid.label,
        max_weight=_bv_weight(fid.kind, fid.max_arity),
    )


def _build_u(fid: FamilyId) -> Presentation:
    return _u_presentation(fid.kind, fid.max_degree // 2, fid.max_arity, fid.label)


FAMILIES: Dict[str, FamilyInfo] = {
    "tHyperCom": FamilyInfo(TWISTED, _build_hypercom, description="homology of Losev-Manin spaces"),
    "tGrav": FamilyInfo(TWISTED, _build_gravity, description="desuspended Koszul dual of tHyperCom"),
    "tBV": FamilyInfo(TWISTED, _build_bv, description="twisted BV algebra, D of order 2"),
    "blmBV": FamilyInfo(TWISTED, _build_bv, True, description="twisted BV, D of order k"),
    "blmBV-qlin": FamilyInfo(TWISTED, _build_qlin, True, description="quadratic-linear twisted BV, order k"),
    "blmHyperCom": FamilyInfo(TWISTED, _build_b_hypercom, True, description="quotient of tHC for order k"),
    "blmHyperComDual": FamilyInfo(TWISTED, _build_gravity, True, 2, "desuspended dual of blmHyperCom"),
    "tHC": FamilyInfo(TWISTED, _build_extended, description="extended Losev-Manin algebra"),
    "HyperCom": FamilyInfo(OPERAD, _build_hypercom, description="hypercommutative operad"),
    "Grav": FamilyInfo(OPERAD, _build_gravity, description="desuspended gravity operad"),
    "bBV": FamilyInfo(OPERAD, _build_bv, True, description="BV operad, D of order k"),
    "bBV-qlin": FamilyInfo(OPERAD, _build_qlin, True, description="quadratic-linear BV operad, order k"),
    "bHyperCom": FamilyInfo(OPERAD, _build_b_hypercom, True, description="quotient of HC for order k"),
    "bHyperComDual": FamilyInfo(OPERAD, _build_gravity, True, 2, "desuspended dual of bHyperCom"),
    "HC": FamilyInfo(OPERAD, _build_extended, description="extended hypercommutative operad"),
    "ncHyperCom": FamilyInfo(NS, _build_hypercom, description="noncommutative hypercommutative operad"),
    "ncGrav": FamilyInfo(NS, _build_gravity, description="desuspended noncommutative gravity operad"),
    "bncBV": FamilyInfo(NS, _build_bv, True, description="ncBV operad, D of order k"),
    "bncBV-qlin": FamilyInfo(NS, _build_qlin, True, description="quadratic-linear ncBV operad, order k"),
    "bncHyperCom": FamilyInfo(NS, _build_b_hypercom, True, description="quotient of ncHC for order k"),
    "bncHyperComDual": FamilyInfo(NS, _build_gravity, True, 2, "desuspended dual of bncHyperCom"),
    "ncHC": FamilyInfo(NS, _build_extended, description="extended noncommutative hypercommutative operad"),
    "bBV1-quotient": FamilyInfo(OPERAD, _build_u, description="dual of the order-one homotopy quotient"),
    "bncBV1-quotient": FamilyInfo(NS, _build_u, description="dual of the order-one homotopy quotient"),
    "tBV1-quotient": FamilyInfo(TWISTED, _build_u, description="dual of the order-one homotopy quotient"),
}


def list_families() -> List[dict]:
    return [
        {"name": name, "kind": info.kind, "needs_k": info.needs_k, "min_k": info.min_k, "description": info.description}
        for name, info in FAMILIES.items()
    ]


def build(fid: FamilyId, settings: Optional[Settings] = None) -> Presentation:
    fid = fid.validate().resolved(settings)
    presentation = fid.info.builder(fid).validate()
    logger.info(
        f"Built {fid.label}: {len(presentation.generators)} generators, {len(presentation.relations)} relations"
    )
    return presentation


def family_basis(
    fid: FamilyId,
    presentation: Optional[Presentation] = None,
    order: Optional[str] = None,
    settings: Optional[Settings] = None,
) -> GroebnerBasis:
    fid = fid.validate().resolved(settings)
    presentation = presentation or build(fid, settings)
    max_degree = fid.max_degree if fid.degree_truncated else None
    return presentation.basis(fid.max_arity, order=order, max_degree=max_degree)


# ---------------------------------------------------------------- closed forms


def catalan(n: int) -> int:
    return binomial(2 * n, n) // (n + 1)


def _gravity_polynomial_sum(n: int, k: int) -> int:
    t = sympy.Symbol("t")
    poly = sympy.Poly(sympy.prod([j + t for j in range(2, n)]), t)
    coefficients = poly.all_coeffs()[::-1]
    return int(sum(c for e, c in enumerate(coefficients) if e % (k - 1) == 0))


def closed_form_dims(name: str, n: int, k: Optional[int] = None) -> Optional[int]:
    """Known total dimension of a family in arity n, or None when no closed form is recorded"""
    if name == "tHyperCom" or (name == "blmHyperCom" and k == 2):
        return factorial(n)
    if name == "tGrav":
        return 1 if n == 0 else 2 ** (n - 1)
    if name == "blmHyperComDual":
        return 1 if n == 0 else sum(binomial(n - 1, p * (k - 1)) for p in range(n + 1))
    if name in ("Grav", "bHyperComDual"):
        return 1 if n <= 1 else _gravity_polynomial_sum(n, k if name == "bHyperComDual" else 2)
    if name in ("ncGrav", "bncHyperComDual"):
        step = (k if name == "bncHyperComDual" else 2) - 1
        return 1 if n <= 1 else sum(binomial(n - 2, p * step) for p in range(n))
    if name == "tBV" or (name == "blmBV" and k == 2):
        return 2 ** (n + 1)
    if name == "free-ns-binary":
        return catalan(n - 1) if n >= 1 else 0
    return None


def closed_form_table(fid: FamilyId, settings: Optional[Settings] = None) -> Dict[int, int]:
    fid = fid.validate().resolved(settings)
    start = 0 if fid.kind == TWISTED else 1
    table = {}
    for n in range(start, fid.max_arity + 1):
        value = closed_form_dims(fid.name, n, fid.k)
        if value is None:
            return {}
        table[n] = value
    return table


# ---------------------------------------------------------------- structural checks


def verify_tbv_elimination(max_arity: int = 3) -> bool:
    """Eliminating l from the quadratic-linear presentation of order 2 gives back tBV"""
    qlin = build(FamilyId("blmBV-qlin", k=2, max_arity=max_arity))
    tbv = build(FamilyId("tBV", max_arity=max_arity))
    tbv_basis = tbv.basis(max_arity)
    qlin_basis = qlin.basis(max_arity)
    joint = tbv.free.with_generators([g for g in qlin.generators if g.name.startswith("l")])
    images = {"l0": Element.monomial(((DELTA, ()),)), "l1": koszul_brace(TWISTED, 1, tbv.free)}
    forward = all(tbv_basis.reduce(joint.substitute_all(r, images)).is_zero() for r in qlin.relations)
    backward = all(qlin_basis.reduce(rename_element(r, {DELTA: "l0", "m": "m"})).is_zero() for r in tbv.relations)
    logger.info(f"tBV elimination up to arity {max_arity}: forward {forward}, backward {backward}")
    return forward and backward


def order_one_tables(kind: str, max_arity: int, max_degree: int) -> Tuple[Dict[int, Dict[int, int]], Dict[int, Dict[int, int]]]:
    """Hilbert tables of the dual of the u-presentation and of the k = 1 b-family, indexed by half degree"""
    power = max_degree // 2
    u = build(FamilyId(U_QUOTIENTS[kind], max_arity=max_arity, max_degree=max_degree))
    names = {g.name: f"w{g.name[1:]}" for g in u.generators}
    dual = quadratic_dual_desuspended(u, max_arity, names)
    dual_table = dual.basis(max_arity).hilbert_table()
    family = {TWISTED: "blmHyperCom", OPERAD: "bHyperCom", NS: "bncHyperCom"}[kind]
    fid = FamilyId(family, k=1, max_arity=max_arity, max_degree=2 * power)
    b_table = family_basis(fid).hilbert_table()
    left = {n: {s: counts.get(-2 * s, 0) for s in range(power + 1)} for n, counts in dual_table.items()}
    right = {n: {s: counts.get(2 * s, 0) for s in range(power + 1)} for n, counts in b_table.items()}
    return left, right


def verify_order_one(kind: str, max_arity: int, max_degree: int = 4) -> bool:
    left, right = order_one_tables(kind, max_arity, max_degree)
    arities = sorted(set(left) & set(right))
    ok = all(left[n] == right[n] for n in arities if n >= 1)
    logger.info(f"Order-one quotient check for {kind} up to arity {max_arity}: {ok}")
    return ok


def quotient_matches_family(fid: FamilyId, settings: Optional[Settings] = None) -> bool:
    """Killing generators of the extended family gives the same dimension tables as the direct builder"""
    fid = fid.validate().resolved(settings)
    direct = family_basis(fid, settings=settings).hilbert_table()
    quotient = family_basis(fid, extended_quotient(fid, settings), settings=settings).hilbert_table()
    limit = fid.max_degree if fid.degree_truncated else None

    def clip(table):
        return {n: {d: c for d, c in counts.items() if limit is None or d <= limit} for n, counts in table.items()}

    return clip(direct) == clip(quotient)


def pbw_leads(fid: FamilyId, settings: Optional[Settings] = None, basis: Optional[GroebnerBasis] = None) -> List[str]:
    basis = basis or family_basis(fid, settings=settings)
    return [basis.free.code(lead) for lead in basis.lead_monomials()]


def _normal_of_arity(basis: GroebnerBasis, arity: int) -> list:
    return [m for w in range(basis.max_weight + 1) for m in basis.normal_monomials(arity, w)]


def _compositions(n: int) -> Iterable[Tuple[int, ...]]:
    for cuts in range(n):
        for points in combinations(range(1, n), cuts):
            bounds = (0,) + points + (n,)
            yield tuple(b - a for a, b in zip(bounds, bounds[1:]))


@lru_cache(maxsize=None)
def _planar_trees(r: int) -> int:
    """Planar trees with r leaves and every vertex of arity at least 2"""
    if r == 1:
        return 1
    return sum(_product(_planar_trees(part) for part in parts) for parts in _compositions(r) if len(parts) >= 2)


def _product(values: Iterable[int]) -> int:
    result = 1
    for value in values:
        result *= value
    return result


TWISTED_BV_LEADS = ("m[2].m[1]", "l0[].l0[]", "l0[].m[1]", "l0[].l1[1]", "l1[1].m[2]", "l1[2].m[1]")
NS_BV_LEADS = ("mu(mu(1,2),3)", "beta1(beta1(1))", "beta1(beta2(1,2))", "beta1(mu(1,2))")


def twisted_bv_pbw_words(free: FreeObject, arity: int) -> set:
    """m_{i1}...m_{is} M and m_{i1}...m_{is} M l0 with i1 < ... < is and M a word in the l_S, S nonempty"""
    labels = underline(arity)
    words = set()
    for size in range(arity + 1):
        for chosen in combinations(labels, size):
            rest = [x for x in labels if x not in chosen]
            splits = [()] if not rest else [b for t in range(1, len(rest) + 1) for b in ordered_partitions_of(rest, t)]
            head = [("m", (i,)) for i in chosen]
            for blocks in splits:
                body = head + [(f"l{len(block)}", block) for block in blocks]
                words.add(free.word(body))
                words.add(free.word(body + [("l0", ())]))
    return words


def ns_bv_pbw_count(arity: int) -> int:
    """Associative products of planar trees on beta_p (p > 1) with every leaf carrying 1 or Delta"""
    return sum(_product(_planar_trees(r) * 2 ** r for r in parts) for parts in _compositions(arity))


def verify_bv_pbw(kind: str, max_arity: int = 5, settings: Optional[Settings] = None) -> Dict[str, bool]:
    """Normal monomials of the quadratic-linear BV presentation of infinite order against the known PBW basis

    Order k = max_arity + 1 agrees with infinite order inside the truncation.
    """
    name = {TWISTED: "blmBV-qlin", NS: "bncBV-qlin"}.get(kind)
    if name is None:
        raise InvalidFamilyError(f"No PBW description recorded for {kind}")
    fid = FamilyId(name, k=max_arity + 1, max_arity=max_arity)
    basis = family_basis(fid, settings=settings)
    leads = set(pbw_leads(fid, settings, basis))
    stated = TWISTED_BV_LEADS if kind == TWISTED else NS_BV_LEADS
    result = {"leading terms": all(code in leads for code in stated)}
    for arity in range(0 if kind == TWISTED else 1, max_arity + 1):
        normal = _normal_of_arity(basis, arity)
        if kind == TWISTED:
            result[f"arity {arity}"] = set(normal) == twisted_bv_pbw_words(basis.free, arity)
        else:
            result[f"arity {arity}"] = len(normal) == ns_bv_pbw_count(arity)
    logger.info(f"PBW basis check for {name} up to arity {max_arity}: {all(result.values())}")
    return result


__all__ = [
    "DELTA",
    "EXTENDED",
    "ExtendedGenerator",
    "FAMILIES",
    "FamilyId",
    "FamilyInfo",
    "build",
    "bv_presentation",
    "catalan",
    "concatenate",
    "closed_form_dims",
    "closed_form_table",
    "extended_grid",
    "extended_quotient",
    "family_basis",
    "koszul_brace",
    "list_families",
    "ns_bv_pbw_count",
    "order_one_tables",
    "pbw_leads",
    "quotient_matches_family",
    "twisted_bv_pbw_words",
    "verify_brace_vanishing_relations",
    "verify_bv_pbw",
    "verify_order_one",
    "verify_tbv_elimination",
]
