import logging
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations, product as cartesian
from math import factorial
from typing import Callable, Dict, List, Optional, Sequence, Tuple, Union

from .catalog import EXTENDED, ExtendedGenerator, FamilyId, build, concatenate, family_basis
from .element import Element
from .errors import ArityMismatchError, DegreeError, InvalidFamilyError
from .monomials import (
    NS,
    TWISTED,
    FreeObject,
    GeneratorSymbol,
    Occurrence,
    TreeOperad,
    WordAlgebra,
    subtree_at,
    vertex_paths,
)
from .rewriting import GroebnerBasis
from .species import (
    LabelSet,
    binomial,
    labelset,
    ordered_partitions,
    shuffle_partitions_of,
    two_block_splits,
    underline,
)

logger = logging.getLogger(__name__)

LEFT = "left"
RIGHT = "right"
SIDES = (LEFT, RIGHT)

Map = Callable[[Element], Element]


def r_symbol(kind: str, name: str, degree: int) -> GeneratorSymbol:
    """Formal coefficient of the Givental Lie algebra: arity 0 for twisted algebras, unary for operads"""
    if degree < 0 or degree % 2:
        raise DegreeError(f"Givental coefficients have even nonnegative degree, got {degree} for {name}")
    return GeneratorSymbol(name, 0 if kind == TWISTED else 1, degree)


class PsiModule:
    """Psi actions on a degree-truncated extended family (tHC, HC or ncHC)"""

    def __init__(self, family: str, max_arity: int, max_degree: int):
        if family not in EXTENDED:
            raise InvalidFamilyError(f"Psi actions are defined on tHC, HC and ncHC, not {family!r}")
        self.family = family
        self.kind = EXTENDED[family]
        self.max_arity = max_arity
        self.max_degree = max_degree
        self.max_power = max_degree // 2
        self.fid = FamilyId(family, max_arity=max_arity, max_degree=max_degree)
        self.presentation = build(self.fid)
        self.free = self.presentation.free
        self._basis: Optional[GroebnerBasis] = None

    @property
    def basis(self) -> GroebnerBasis:
        if self._basis is None:
            self._basis = family_basis(self.fid, self.presentation)
        return self._basis

    def normal_form(self, element: Element) -> Element:
        return self.basis.reduce(element)

    # generators ------------------------------------------------------------------

    def name(self, arity: int, power: int) -> Optional[str]:
        lowest = 1 if self.kind == TWISTED else 2
        if not lowest <= arity <= self.max_arity or not 0 <= power <= self.max_power:
            return None
        return ExtendedGenerator(self.family, arity, power).name

    def generator(self, labels: Sequence[int], power: int) -> Element:
        """m_L^{2p} on the given labels (standard labels only for operads)"""
        name = self.name(len(labels), power)
        if name is None:
            return Element()
        if self.kind == TWISTED:
            return Element.monomial(((name, tuple(sorted(labels))),))
        return Element.monomial((name, tuple(sorted(labels))))

    def bar(self, n: int) -> Element:
        """Sum of all generators of arity n within the degree window"""
        labels = underline(n)
        total = Element()
        for power in range(self.max_power + 1):
            total = total + self.generator(labels, power)
        return total

    def _split(self, power: int) -> List[Tuple[int, int]]:
        return [(p, power - 1 - p) for p in range(power)]

    # action on a single corolla ------------------------------------------------------

    def corolla_image(self, arity: int, power: int, side: str, slot: Optional[int] = None, choice=None) -> Element:
        if side not in SIDES:
            raise InvalidFamilyError(f"Unknown side {side!r}")
        if self.kind == TWISTED:
            return self._twisted_image(arity, power, side, choice)
        if self.kind == NS:
            if side == LEFT:
                return self._nc_left(arity, power, choice)
            return self._nc_right(arity, power, slot, choice)
        if side == LEFT:
            return self._dm_left(arity, power, choice)
        return self._dm_right(arity, power, slot, choice)

    def _twisted_image(self, arity: int, power: int, side: str, choice) -> Element:
        j = choice if choice is not None else arity
        pairs = []
        for I, J in two_block_splits(underline(arity)):
            if j not in J:
                continue
            for p1, p2 in self._split(power):
                a, b = self.name(len(I), p1), self.name(len(J), p2)
                if a is None or b is None:
                    continue
                factors = [(a, I), (b, J)] if side == LEFT else [(b, J), (a, I)]
                pairs.append((self.free.word(factors), 1))
        return Element.from_terms(pairs)

    def _nested(self, outer: str, rest: Sequence[int], inner: str, block: Sequence[int]) -> Element:
        tree, sign = self.free.from_nested((outer, list(rest) + [(inner, list(block))]))
        return Element.monomial(tree, sign)

    def _dm_left(self, arity: int, power: int, choice) -> Element:
        pair = choice if choice is not None else (arity - 1, arity)
        result = Element()
        for I, J in two_block_splits(underline(arity)):
            if pair[0] not in J or pair[1] not in J:
                continue
            for p1, p2 in self._split(power):
                outer, inner = self.name(len(I) + 1, p1), self.name(len(J), p2)
                if outer and inner:
                    result = result + self._nested(outer, I, inner, J)
        return result

    def _check_slot(self, arity: int, slot: Optional[int]) -> int:
        if slot is None or not 1 <= slot <= arity:
            raise ArityMismatchError(f"Slot {slot} outside arity {arity}")
        return slot

    def _dm_right(self, arity: int, power: int, slot: Optional[int], choice) -> Element:
        i = self._check_slot(arity, slot)
        j1 = choice if choice is not None else max(x for x in underline(arity) if x != i)
        result = Element()
        for I, J in two_block_splits(underline(arity)):
            if i not in I or j1 not in J:
                continue
            for p1, p2 in self._split(power):
                outer, inner = self.name(len(J) + 1, p1), self.name(len(I), p2)
                if outer and inner:
                    result = result + self._nested(outer, J, inner, I)
        return result

    def _graftings(self, arity: int, power: int, on_top: Callable[[int, int], bool]) -> Element:
        result = Element()
        for inner_arity in range(2, arity):
            outer_arity = arity + 1 - inner_arity
            for j in range(1, outer_arity + 1):
                if not on_top(j, j + inner_arity - 1):
                    continue
                for p1, p2 in self._split(power):
                    outer, inner = self.name(outer_arity, p1), self.name(inner_arity, p2)
                    if outer and inner:
                        tree, sign = self.free.compose(self.free.corolla(outer), j, self.free.corolla(inner))
                        result = result + Element.monomial(tree, sign)
        return result

    def _nc_left(self, arity: int, power: int, choice) -> Element:
        i = choice if choice is not None else arity - 1
        return self._graftings(arity, power, lambda lo, hi: lo <= i and i + 1 <= hi)

    def _nc_right(self, arity: int, power: int, slot: Optional[int], choice) -> Element:
        i = self._check_slot(arity, slot)
        if i in (1, arity):
            return Element()
        at_top = self._graftings(arity, power, lambda lo, hi: lo <= i <= hi)
        return at_top - self._nc_left(arity, power, choice)

    # action on elements ------------------------------------------------------------

    def act(self, element: Element, side: str, slot: Optional[int] = None, power: int = 1, choice=None) -> Element:
        """psi^power acting on the left (root) or on the right (at leaf slot for operads)"""
        for _ in range(power):
            element = self._act_once(element, side, slot, choice)
        return element

    def _act_once(self, element: Element, side: str, slot: Optional[int], choice) -> Element:
        result = Element()
        for mon, coef in element.items():
            result = result + self._act_monomial(mon, side, slot, choice).scale(coef)
        return result

    def _act_monomial(self, mon, side: str, slot: Optional[int], choice) -> Element:
        if self.kind == TWISTED:
            if not mon:
                return Element()
            position = 0 if side == LEFT else len(mon) - 1
            name, labels = mon[position]
            gen = ExtendedGenerator.parse(self.family, name)
            image = self.corolla_image(gen.arity, gen.power, side, choice=choice)
            moved = self.free.relabel_element(image, {i + 1: label for i, label in enumerate(labels)})
            before, after = mon[:position], mon[position + 1:]
            return Element.from_terms((before + piece + after, c) for piece, c in moved.items())
        if isinstance(mon, int):
            return Element()
        if side == LEFT:
            path, corolla_slot = (), None
        else:
            path, corolla_slot = self._leaf_parent(mon, slot)
        node = subtree_at(mon, path)
        gen = ExtendedGenerator.parse(self.family, node[0])
        image = self.corolla_image(gen.arity, gen.power, side, corolla_slot, choice)
        occurrence = Occurrence(
            root=path,
            span=frozenset([path]),
            binding=tuple(path + (i,) for i in range(len(node[1]))),
        )
        return self.free.substitute(mon, occurrence, image)

    def _leaf_parent(self, mon, leaf: Optional[int]) -> Tuple[tuple, int]:
        for path in vertex_paths(mon):
            children = subtree_at(mon, path)[1]
            for index, child in enumerate(children):
                if child == leaf:
                    return path, index + 1
        raise ArityMismatchError(f"Leaf {leaf} not found in {self.free.code(mon)}")

    # verifications ------------------------------------------------------------------

    def _agree(self, elements: Sequence[Element]) -> bool:
        forms = [self.normal_form(e) for e in elements]
        return all(form == forms[0] for form in forms[1:])

    def check_independence(self, n: int) -> bool:
        """All admissible auxiliary choices give the same normal forms"""
        bar = self.bar(n)
        labels = underline(n)
        checks: List[List[Element]] = []
        if self.kind == TWISTED:
            for side in SIDES:
                checks.append([self.act(bar, side, choice=j) for j in labels])
        elif self.kind == NS:
            checks.append([self.act(bar, LEFT, choice=i) for i in range(1, n)])
            # the end slots act by zero
            for slot in range(2, n):
                checks.append([self.act(bar, RIGHT, slot, choice=i) for i in range(1, n)])
        else:
            checks.append([self.act(bar, LEFT, choice=pair) for pair in combinations(labels, 2)])
            for slot in labels:
                others = [j for j in labels if j != slot]
                checks.append([self.act(bar, RIGHT, slot, choice=j) for j in others])
        ok = all(self._agree(group) for group in checks if group)
        logger.info(f"Psi independence for {self.family} in arity {n}: {ok}")
        return ok

    def _relations_up_to(self, n: int) -> List[Element]:
        return [r for r in self.presentation.relations if (self.free.element_arity(r) or 0) <= n]

    def check_compatibility(self, n: int) -> bool:
        """Acting on any defining relation gives an element of the ideal"""
        for relation in self._relations_up_to(n):
            arity = self.free.element_arity(relation)
            images = [self.act(relation, LEFT)]
            if self.kind == TWISTED:
                images.append(self.act(relation, RIGHT))
            else:
                images.extend(self.act(relation, RIGHT, slot) for slot in underline(arity))
            for image in images:
                if not self.normal_form(image).is_zero():
                    logger.warning(f"Psi action leaves the ideal on {self.free.format_element(relation)}")
                    return False
        return True

    def check_bimodule(self, n: int) -> bool:
        bar = self.bar(n)
        checks = []
        if self.kind == TWISTED:
            checks.append((self.act(self.act(bar, LEFT), RIGHT), self.act(self.act(bar, RIGHT), LEFT)))
        else:
            for i in underline(n):
                checks.append(
                    (self.act(self.act(bar, LEFT), RIGHT, i), self.act(self.act(bar, RIGHT, i), LEFT))
                )
            for i, j in combinations(underline(n), 2):
                checks.append(
                    (self.act(self.act(bar, RIGHT, i), RIGHT, j), self.act(self.act(bar, RIGHT, j), RIGHT, i))
                )
            if self.kind == NS:
                for i in range(2, n):
                    checks.append((self.act(bar, RIGHT, i, power=2), Element()))
        ok = all(self.normal_form(a) == self.normal_form(b) for a, b in checks) and self.check_compatibility(n)
        logger.info(f"Psi bimodule axioms for {self.family} in arity {n}: {ok}")
        return ok


def psi_act(
    family: Union[str, PsiModule],
    side: str,
    element: Element,
    power: int = 1,
    slot: Optional[int] = None,
    max_arity: int = 4,
    max_degree: int = 4,
) -> Element:
    """psi^power acting on an element of tHC, HC or ncHC"""
    module = family if isinstance(family, PsiModule) else PsiModule(family, max_arity, max_degree)
    if module.kind != TWISTED and side == RIGHT:
        module._check_slot(module.free.element_arity(element) or 0, slot)
    return module.act(element, side, slot, power)


def verify_psi_independence(family: str, n: int, max_degree: int = 4) -> bool:
    return PsiModule(family, n, max_degree).check_independence(n)


def verify_bimodule(family: str, n: int, max_degree: int = 4) -> bool:
    return PsiModule(family, n, max_degree).check_bimodule(n)


# ---------------------------------------------------------------- infinitesimal Givental action


class GiventalAction:
    """Infinitesimal action of r z^p on a morphism f from an extended family into a target"""

    def __init__(self, module: PsiModule, target: FreeObject, images: Optional[Dict[str, Element]] = None):
        self.module = module
        self.target = target
        # None is the inclusion of the extended family into the target
        self.images = images

    def apply(self, element: Element) -> Element:
        if self.images is None:
            return element
        full = {g.name: self.images.get(g.name, Element()) for g in self.module.free.generators}
        return self.target.substitute_all(element, full)

    def _times(self, a: Element, b: Element) -> Element:
        if self.module.kind == TWISTED:
            return concatenate(a, b)
        return self.target.compose_elements(a, 1, b)

    def _right_everywhere(self, x: Element, r: Element) -> Element:
        if self.module.kind == TWISTED:
            return concatenate(x, r)
        arity = self.target.element_arity(x)
        result = Element()
        for slot in range(1, (arity or 0) + 1):
            result = result + self.target.compose_elements(x, slot, r)
        return result

    def image(self, name: str, r: Element, power: int) -> Element:
        """((r z^power).f) on one generator"""
        return self._terms(name, r, power, self.apply, [(self.apply, self.apply)])

    def derivative(self, name: str, r: Element, power: int, tangent: Dict[str, Element]) -> Element:
        """Derivative of the action in f along the tangent vector given on generators"""
        if self.images is not None:
            raise InvalidFamilyError("Derivatives are taken at the inclusion morphism only")

        def along(element: Element) -> Element:
            return self.target.derive_element(element, tangent)

        return self._terms(name, r, power, along, [(along, self.apply), (self.apply, along)])

    def _terms(self, name: str, r: Element, power: int, single: Map, pairs: List[Tuple[Map, Map]]) -> Element:
        module = self.module
        gen = ExtendedGenerator.parse(module.family, name)
        t, q = gen.arity, gen.power
        corolla = module.generator(underline(t), q)
        first = self._times(r, single(module.act(corolla, LEFT, power=power)))
        sign = 1 if power % 2 else -1
        if module.kind == TWISTED:
            second = self._times(single(module.act(corolla, RIGHT, power=power)), r)
        else:
            second = Element()
            for slot in underline(t):
                second = second + self.target.compose_elements(
                    single(module.act(corolla, RIGHT, slot, power)), slot, r
                )
        third = Element()
        for i in range(power):
            j = power - 1 - i
            weight = -1 if j % 2 == 0 else 1
            for outer_map, inner_map in pairs:
                third = third + self._third(t, q, i, j, r, outer_map, inner_map).scale(weight)
        return first + second.scale(sign) + third

    def _third(self, t: int, q: int, i: int, j: int, r: Element, outer_map: Map, inner_map: Map) -> Element:
        module = self.module
        result = Element()
        if module.kind == TWISTED:
            for I, J in two_block_splits(underline(t)):
                for q1, q2 in module._split(q):
                    outer = outer_map(module.act(module.generator(J, q1), RIGHT, power=j))
                    inner = inner_map(module.act(module.generator(I, q2), LEFT, power=i))
                    if outer.is_zero() or inner.is_zero():
                        continue
                    result = result + concatenate(concatenate(outer, r), inner)
            return result
        if module.kind == NS:
            for inner_arity in range(2, t):
                outer_arity = t + 1 - inner_arity
                for q1, q2 in module._split(q):
                    inner = inner_map(module.act(module.generator(underline(inner_arity), q2), LEFT, power=i))
                    if inner.is_zero():
                        continue
                    inner = self.target.compose_elements(r, 1, inner)
                    for k in range(1, outer_arity + 1):
                        outer = outer_map(
                            module.act(module.generator(underline(outer_arity), q1), RIGHT, k, power=j)
                        )
                        result = result + self.target.compose_elements(outer, k, inner)
            return result
        for I, J in two_block_splits(underline(t)):
            if len(I) < 2:
                continue
            star = sorted(J + (I[0],)).index(I[0]) + 1
            for q1, q2 in module._split(q):
                inner = inner_map(module.act(module.generator(underline(len(I)), q2), LEFT, power=i))
                if inner.is_zero():
                    continue
                inner = self.target.compose_elements(r, 1, inner)
                outer = outer_map(module.act(module.generator(underline(len(J) + 1), q1), RIGHT, star, power=j))
                pairs = []
                for x, cx in outer.items():
                    for y, cy in inner.items():
                        tree, sign = self.target.graft(x, star, y, I)
                        pairs.append((tree, cx * cy * sign))
                result = result + Element.from_terms(pairs)
        return result


def infinitesimal_action(
    module: PsiModule,
    target: FreeObject,
    r: Element,
    power: int,
    images: Optional[Dict[str, Element]] = None,
) -> Dict[str, Element]:
    """((r z^power).f) on every generator of the truncated extended family"""
    degree = target.element_degree(r)
    if degree is None or degree % 2:
        raise DegreeError(f"The Givental coefficient must be homogeneous of even degree, got {degree}")
    action = GiventalAction(module, target, images)
    return {g.name: action.image(g.name, r, power) for g in module.free.generators}


def verify_infinitesimal_symmetry(family: str, n: int, power: int, max_degree: int = 4, r_degree: int = 2) -> bool:
    """f + eps (r z^p).f respects every defining relation, f being the inclusion into the free product with r"""
    module = PsiModule(family, n, max_degree)
    symbol = r_symbol(module.kind, "r", r_degree)
    basis = module.basis.extend_generators([symbol])
    target = basis.free
    r = Element.monomial(target.corolla("r"))
    tangent = infinitesimal_action(module, target, r, power)
    for relation in module._relations_up_to(n):
        remainder = basis.reduce(target.derive_element(relation, tangent))
        if not remainder.is_zero():
            logger.warning(
                f"Givental action of r z^{power} breaks {module.free.format_element(relation)}: "
                f"{target.format_element(remainder)}"
            )
            return False
    logger.info(f"Infinitesimal Givental symmetry for {family}, arity {n}, power {power}: True")
    return True


def verify_commutator_identity(family: str, n: int, p1: int, p2: int, max_degree: int = 4) -> bool:
    """[l1, l2].f = l1.(l2.f) - l2.(l1.f) on generators of arity at most n"""
    module = PsiModule(family, n, max_degree)
    symbols = [r_symbol(module.kind, "r1", 2), r_symbol(module.kind, "r2", 2)]
    basis = module.basis.extend_generators(symbols)
    target = basis.free
    action = GiventalAction(module, target)
    r1 = Element.monomial(target.corolla("r1"))
    r2 = Element.monomial(target.corolla("r2"))
    bracket = action._times(r1, r2) - action._times(r2, r1)
    first = {g.name: action.image(g.name, r1, p1) for g in module.free.generators}
    second = {g.name: action.image(g.name, r2, p2) for g in module.free.generators}
    for gen in module.free.generators:
        if gen.arity > n:
            continue
        lhs = action.image(gen.name, bracket, p1 + p2)
        rhs = action.derivative(gen.name, r1, p1, second) - action.derivative(gen.name, r2, p2, first)
        if basis.reduce(lhs - rhs) != Element():
            logger.warning(f"Commutator identity fails on {gen.name}")
            return False
    return True


# ---------------------------------------------------------------- bamboos


@dataclass(frozen=True)
class DecoratedBamboo:
    """Linear graph with tendril sets per vertex and psi exponents on its half-edges"""

    tendrils: Tuple[LabelSet, ...]
    root: int
    tip: int
    # (psi' on the left half-edge, psi'' on the right half-edge) per internal edge
    edges: Tuple[Tuple[int, int], ...] = ()

    @property
    def vertex_count(self) -> int:
        return len(self.tendrils)

    def vertex_powers(self) -> List[Tuple[int, int]]:
        lefts = [self.root] + [s for _, s in self.edges]
        rights = [r for r, _ in self.edges] + [self.tip]
        return list(zip(lefts, rights))

    @property
    def factor(self) -> int:
        result = 1
        for a, b in self.vertex_powers():
            result *= binomial(a + b, a)
        return result

    def psi_total(self) -> int:
        return self.root + self.tip + sum(r + s for r, s in self.edges)


def _decorations(sizes: Sequence[int]) -> List[List[Tuple[int, int]]]:
    if not sizes:
        return [[]]
    rest = _decorations(sizes[1:])
    return [[(a, sizes[0] - 1 - a)] + tail for a in range(sizes[0]) for tail in rest]


def enumerate_bamboos(n: int, k: int, power: int) -> List[DecoratedBamboo]:
    """Decorated bamboos with n tendrils whose decorations have total degree 2*power"""
    if k < 1 or n < 1 or power < 0:
        return []
    result = []
    for count in range(1, n + 1):
        for blocks in ordered_partitions(n, count):
            for powers in _decorations([len(b) for b in blocks]):
                edges = tuple((powers[v][1], powers[v + 1][0]) for v in range(count - 1))
                bamboo = DecoratedBamboo(tuple(blocks), powers[0][0], powers[-1][1], edges)
                if _admissible(bamboo, k, power):
                    result.append(bamboo)
    return result


def _admissible(bamboo: DecoratedBamboo, k: int, power: int) -> bool:
    if k == 1:
        # exp(r) carries no psi, and the edge series vanishes
        return bamboo.root == 0 and bamboo.tip == 0 and not bamboo.edges
    step = k - 1
    if bamboo.root % step or bamboo.tip % step:
        return False
    if any((r + s + 1) % step for r, s in bamboo.edges):
        return False
    units = bamboo.psi_total() + len(bamboo.edges)
    return units == power * step


Series = Dict[int, Element]


class GiventalSeries:
    """Taylor coefficients of exp(r(psi)), exp(-r(-psi)) and the edge series, as words in r_1, r_2, ..."""

    def __init__(self, free: FreeObject, k: int, r_count: int, max_degree: int):
        self.free = free
        self.k = k
        self.max_degree = max_degree
        step = k - 1
        r = {}
        for i in range(1, r_count + 1):
            r[i * step] = r.get(i * step, Element()) + Element.monomial(((f"r{i}", ()),))
        self.root_series = self._exp(r)
        minus = {e: c.scale(-1 if e % 2 == 0 else 1) for e, c in r.items()}
        self.tip_series = self._exp(minus)
        self.edge_series = self._edge()

    def _trim(self, element: Element) -> Element:
        return element.filter(lambda mon: self.free.degree(mon) <= self.max_degree)

    def _multiply(self, a: Series, b: Series) -> Series:
        result: Series = {}
        for e1, c1 in a.items():
            for e2, c2 in b.items():
                term = self._trim(concatenate(c1, c2))
                if not term.is_zero():
                    result[e1 + e2] = result.get(e1 + e2, Element()) + term
        return result

    def _exp(self, series: Series) -> Series:
        unit = Element.monomial(())
        result: Series = {0: unit}
        power: Series = {0: unit}
        for s in range(1, self.max_degree // 2 + 1):
            power = self._multiply(power, series)
            for e, c in power.items():
                result[e] = result.get(e, Element()) + c.scale(Fraction(1, factorial(s)))
        return result

    def _edge(self) -> Dict[Tuple[int, int], Element]:
        # (1 - exp(-r(-a)) exp(r(b))) / (a + b)
        numerator: Dict[Tuple[int, int], Element] = {(0, 0): Element.monomial(())}
        for e1, c1 in self.tip_series.items():
            for e2, c2 in self.root_series.items():
                term = self._trim(concatenate(c1, c2))
                numerator[(e1, e2)] = numerator.get((e1, e2), Element()) - term
        top_a = max(a for a, _ in numerator)
        top_b = max(b for _, b in numerator)
        quotient: Dict[Tuple[int, int], Element] = {}
        for a in range(top_a + 1):
            for b in range(top_b + 1):
                value = numerator.get((a, b + 1), Element()) - quotient.get((a - 1, b + 1), Element())
                if not value.is_zero():
                    quotient[(a, b)] = value
        return quotient

    def root(self, power: int) -> Element:
        return self.root_series.get(power, Element())

    def tip(self, power: int) -> Element:
        return self.tip_series.get(power, Element())

    def edge(self, left: int, right: int) -> Element:
        return self.edge_series.get((left, right), Element())


def bamboo_image(free: FreeObject, k: int, n: int, power: int, product: str = "m") -> Element:
    """Image of m_n^{2p} under exp(r(z)).f, with f sending m_1^0 to the product and the rest to zero"""
    series = GiventalSeries(free, k, max(power, 1), 2 * power)
    total = Element()
    for bamboo in enumerate_bamboos(n, k, power):
        term = series.root(bamboo.root)
        for v, block in enumerate(bamboo.tendrils):
            if v:
                term = concatenate(term, series.edge(*bamboo.edges[v - 1]))
            vertex = Element.monomial(tuple((product, (label,)) for label in block))
            term = concatenate(term, vertex)
        term = concatenate(term, series.tip(bamboo.tip))
        total = total + term.scale(bamboo.factor)
    return total.filter(lambda mon: free.degree(mon) == 2 * power)


# ---------------------------------------------------------------- decorated trees

Chains = List[Tuple[Tuple[str, ...], Fraction, int]]


def _child_blocks(labels: LabelSet, parts: int, planar: bool) -> List[tuple]:
    if not planar:
        return shuffle_partitions_of(labels, parts)
    result = []
    for cuts in combinations(range(1, len(labels)), parts - 1):
        bounds = (0,) + cuts + (len(labels),)
        result.append(tuple(labels[a:b] for a, b in zip(bounds, bounds[1:])))
    return result


def rooted_trees(labels: Sequence[int], planar: bool = False) -> List:
    """Rooted trees on the given leaves with at least two inputs per vertex; a vertex is the tuple of its subtrees"""
    labels = labelset(labels)
    if len(labels) == 1:
        return [labels[0]]
    result = []
    for parts in range(2, len(labels) + 1):
        for blocks in _child_blocks(labels, parts, planar):
            result.extend(cartesian(*(rooted_trees(block, planar) for block in blocks)))
    return result


def _weak_compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total + 1) for rest in _weak_compositions(total - first, parts - 1)]


def vertex_decorations(t: int, planar: bool = False) -> List[Tuple[Tuple[int, ...], int]]:
    """
    Psi powers (k_0 on the output, k_1..k_t on the inputs) of a vertex with t inputs,
    each with its intersection number. The powers add up to t - 2; plane vertices carry
    at most one psi on each inner input and none on the outer two.
    """
    result = []
    for powers in _weak_compositions(t - 2, t + 1):
        if planar:
            if powers[1] or powers[t] or any(x > 1 for x in powers[2:t]):
                continue
            result.append((powers, 1))
        else:
            denominator = 1
            for x in powers:
                denominator *= factorial(x)
            result.append((powers, factorial(t - 2) // denominator))
    return result


def tree_image(free: TreeOperad, k: int, n: int, power: int, product: str = "m") -> Element:
    """
    Image of the arity-n, degree-2p generator under exp(r(z)).f for operads, with f sending
    the binary generator to the product and the rest to zero.

    Sums over rooted trees with n leaves, plane trees when free is planar. The root carries
    a term of exp(r(psi)), each leaf a term of exp(-r(-psi)) and each internal edge a term
    of the edge series; the tree is weighted by the intersection numbers of its vertices.
    """
    top = 2 * power
    count = max(power, 1)
    words = WordAlgebra([r_symbol(TWISTED, f"r{i}", 2 * i) for i in range(1, count + 1)])
    series = GiventalSeries(words, k, count, top)
    memo: Dict[object, Dict[int, list]] = {}

    def chains(element: Element) -> Chains:
        return [(tuple(name for name, _ in mon), coef, words.degree(mon)) for mon, coef in element.items()]

    def wrap(names: Tuple[str, ...], nested):
        for name in reversed(names):
            nested = (name, [nested])
        return nested

    def branch(child, a: int) -> list:
        if isinstance(child, int):
            return [(wrap(names, child), coef, degree) for names, coef, degree in chains(series.tip(a))]
        terms = []
        for b, below in expand(child).items():
            for names, coef, degree in chains(series.edge(a, b)):
                terms.extend(
                    (wrap(names, nested), coef * c, degree + d) for nested, c, d in below if degree + d <= top
                )
        return terms

    def expand(tree) -> Dict[int, list]:
        # terms of a subtree keyed by the psi power on the output of its top vertex
        if tree in memo:
            return memo[tree]
        result: Dict[int, list] = {}
        for powers, weight in vertex_decorations(len(tree), free.planar):
            options = [branch(child, a) for child, a in zip(tree, powers[1:])]
            for choice in cartesian(*options):
                degree = sum(d for _, _, d in choice)
                if degree > top:
                    continue
                coef = Fraction(weight)
                node = choice[0][0]
                for nested, _, _ in choice[1:]:
                    node = (product, [node, nested])
                for _, c, _ in choice:
                    coef *= c
                result.setdefault(powers[0], []).append((node, coef, degree))
        memo[tree] = result
        return result

    pairs = []
    for tree in rooted_trees(underline(n), free.planar):
        if isinstance(tree, int):
            continue
        for a, terms in expand(tree).items():
            for names, coef, degree in chains(series.root(a)):
                for nested, c, d in terms:
                    if degree + d != top:
                        continue
                    mon, sign = free.from_nested(wrap(names, nested))
                    pairs.append((mon, coef * c * sign))
    return Element.from_terms(pairs)


__all__ = [
    "DecoratedBamboo",
    "GiventalAction",
    "GiventalSeries",
    "LEFT",
    "PsiModule",
    "RIGHT",
    "bamboo_image",
    "enumerate_bamboos",
    "infinitesimal_action",
    "psi_act",
    "r_symbol",
    "rooted_trees",
    "tree_image",
    "verify_bimodule",
    "verify_commutator_identity",
    "verify_infinitesimal_symmetry",
    "verify_psi_independence",
    "vertex_decorations",
]
