import logging
from dataclasses import dataclass, field, replace
from fractions import Fraction
from functools import cached_property
from itertools import permutations
from typing import Callable, Dict, Iterable, List, Optional

from .element import Element
from .errors import ArityMismatchError, ParseError
from .monomials import NS, FreeObject, GeneratorSymbol, free_object
from .orderings import canonical_order_text
from .rewriting import GroebnerBasis, complete_relations

logger = logging.getLogger(__name__)


@dataclass
class Presentation:
    """Generators, relations and an optional differential of a twisted algebra or operad"""

    kind: str
    generators: List[GeneratorSymbol]
    relations: List[Element] = field(default_factory=list)
    differential: Dict[str, Element] = field(default_factory=dict)
    order: str = ""
    name: str = ""
    max_weight: Optional[int] = None

    @cached_property
    def free(self) -> FreeObject:
        return free_object(self.kind, self.generators)

    def generator(self, name: str) -> GeneratorSymbol:
        return self.free.generator(name)

    def validate(self) -> "Presentation":
        free = self.free
        for element in self.relations:
            free.element_arity(element)
            for mon in element.monomials():
                for name in free.names(mon):
                    free.generator(name)
        for name, image in self.differential.items():
            gen = free.generator(name)
            arity = free.element_arity(image)
            if arity is not None and arity != gen.arity:
                raise ArityMismatchError(f"d({name}) has arity {arity}, expected {gen.arity}")
        if self.order:
            canonical_order_text(self.order)
        return self

    def is_quadratic(self) -> bool:
        return all(self.free.size(mon) == 2 for element in self.relations for mon in element.monomials())

    def is_quadratic_linear(self) -> bool:
        return all(self.free.size(mon) in (1, 2) for element in self.relations for mon in element.monomials())

    def kill_generators(self, predicate: Callable[[GeneratorSymbol], bool], name: str = "") -> "Presentation":
        """Quotient by the generators satisfying predicate"""
        dead = {g.name for g in self.generators if predicate(g)}
        keep = [g for g in self.generators if g.name not in dead]
        free = self.free

        def alive(mon) -> bool:
            return not any(n in dead for n in free.names(mon))

        relations = []
        for element in self.relations:
            survivor = element.filter(alive)
            if not survivor.is_zero():
                relations.append(survivor)
        differential = {
            gen: image.filter(alive) for gen, image in self.differential.items() if gen not in dead
        }
        return replace(self, generators=keep, relations=relations, differential=differential, name=name or self.name)

    def basis(
        self,
        max_arity: int,
        order: Optional[str] = None,
        max_weight: Optional[int] = None,
        max_degree: Optional[int] = None,
    ) -> GroebnerBasis:
        order = order or self.order
        if not order:
            raise ParseError(f"No monomial order given for {self.name or 'presentation'}")
        weight = max_weight if max_weight is not None else self.max_weight
        relations = [r for r in self.relations if (self.free.element_arity(r) or 0) <= max_arity]
        logger.info(f"Completing {self.name or self.kind} up to arity {max_arity} with order {order}")
        return complete_relations(self.free, order, relations, max_arity, weight, max_degree)


def _canonical(free: FreeObject, element: Element) -> Element:
    top = max(element.monomials(), key=free.code)
    return element.scale(Fraction(1) / element.coefficient(top))


def symmetrize(free: FreeObject, elements: Iterable[Element]) -> List[Element]:
    """All relabelings of each element under the symmetric group, without repeats"""
    result: List[Element] = []
    seen = set()
    for element in elements:
        if element.is_zero():
            continue
        if free.kind == NS:
            images = [element]
        else:
            arity = free.element_arity(element) or 0
            images = []
            for perm in permutations(range(1, arity + 1)):
                mapping = {i + 1: image for i, image in enumerate(perm)}
                images.append(free.relabel_element(element, mapping))
        for image in images:
            if image.is_zero():
                continue
            key = _canonical(free, image)
            if key in seen:
                continue
            seen.add(key)
            result.append(image)
    return result
