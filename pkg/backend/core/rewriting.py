import heapq
import logging
from collections import Counter, defaultdict
from fractions import Fraction
from itertools import combinations, permutations, product
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

from .element import Element
from .errors import ArityMismatchError, TruncationError
from .monomials import FreeObject, GeneratorSymbol, Occurrence, TreeOperad, WordAlgebra, vertex_paths
from .orderings import MonomialOrder
from .species import underline

logger = logging.getLogger(__name__)

INPUT = 0
SPOLY = 1
REQUEUED = 2


class _Top:
    """Heap entry ordering monomials from largest to smallest"""

    __slots__ = ("key", "mon")

    def __init__(self, key: tuple, mon):
        self.key = key
        self.mon = mon

    def __lt__(self, other: "_Top") -> bool:
        return self.key > other.key


class GroebnerBasis:
    """Truncated Gröbner basis of an ideal in a free object"""

    def __init__(
        self,
        free: FreeObject,
        order: MonomialOrder,
        max_arity: int,
        max_weight: Optional[int] = None,
        max_degree: Optional[int] = None,
    ):
        self.free = free
        self.order = order
        self.max_arity = max_arity
        self.max_weight = max_weight
        self.max_degree = max_degree
        self.relations: Dict[int, Element] = {}
        self.leads: Dict[int, object] = {}
        self._index: Dict[object, List[int]] = defaultdict(list)
        self._lengths: Counter = Counter()
        self._next_id = 0
        self.frozen = False
        self._nf_cache: Dict[object, Element] = {}
        self._normal_cache: Dict[tuple, list] = {}
        self.events: List[str] = []
        self.new_count = 0
        self.pairs_checked = 0

    # bookkeeping ----------------------------------------------------------------

    def _index_key(self, lead):
        if isinstance(self.free, WordAlgebra):
            return lead
        return lead[0]

    def _add(self, element: Element) -> int:
        rid = self._next_id
        self._next_id += 1
        lead = self.order.lead(element)
        self.relations[rid] = element
        self.leads[rid] = lead
        self._index[self._index_key(lead)].append(rid)
        self._lengths[self.free.size(lead)] += 1
        self._nf_cache.clear()
        self._normal_cache.clear()
        return rid

    def _remove(self, rid: int) -> Element:
        lead = self.leads.pop(rid)
        element = self.relations.pop(rid)
        self._index[self._index_key(lead)].remove(rid)
        self._lengths[self.free.size(lead)] -= 1
        if self._lengths[self.free.size(lead)] == 0:
            del self._lengths[self.free.size(lead)]
        self._nf_cache.clear()
        self._normal_cache.clear()
        return element

    def __len__(self) -> int:
        return len(self.relations)

    def elements(self) -> List[Element]:
        return [self.relations[rid] for rid in sorted(self.relations, key=self._sort_key)]

    def lead_monomials(self) -> list:
        return [self.leads[rid] for rid in sorted(self.relations, key=self._sort_key)]

    def _sort_key(self, rid: int):
        lead = self.leads[rid]
        return (self.free.arity(lead), self.order.key(lead))

    def within_truncation(self, mon) -> bool:
        if self.free.arity(mon) > self.max_arity:
            return False
        if self.max_weight is not None and self.free.weight(mon) > self.max_weight:
            return False
        if self.max_degree is not None and abs(self.free.degree(mon)) > self.max_degree:
            return False
        return True

    # divisibility ------------------------------------------------------------------

    def find_reducer(self, mon) -> Optional[Tuple[int, Occurrence]]:
        for rid, occurrence in self._occurrences(mon):
            return rid, occurrence
        return None

    def _occurrences(self, mon) -> Iterable[Tuple[int, Occurrence]]:
        free = self.free
        if isinstance(free, WordAlgebra):
            for start in range(len(mon)):
                for length in sorted(self._lengths):
                    segment = mon[start:start + length]
                    if len(segment) < length:
                        break
                    for rid in self._index.get(free.standardize(segment), ()):
                        yield rid, Occurrence(
                            root=(start,),
                            span=frozenset(range(start, start + length)),
                            binding=free.labels_of(segment),
                        )
            return
        for path in vertex_paths(mon):
            name = mon
            for step in path:
                name = name[1][step]
            for rid in self._index.get(name[0], ()):
                occurrence = free.match_at(self.leads[rid], mon, path)
                if occurrence is not None:
                    yield rid, occurrence

    def is_normal(self, mon) -> bool:
        return self.find_reducer(mon) is None

    # reduction ------------------------------------------------------------------------

    def reduce(self, element: Element, trace: Optional[list] = None) -> Element:
        """Normal form of an element; steps are appended to trace as (relation id, occurrence, coefficient)"""
        if self.frozen and trace is None:
            result = Element()
            for mon, coef in element.items():
                result = result + self.reduce_monomial(mon).scale(coef)
            return result
        return self._reduce_loop(element, trace)

    def reduce_monomial(self, mon) -> Element:
        cached = self._nf_cache.get(mon)
        if cached is None:
            cached = self._reduce_loop(Element.monomial(mon), None)
            if self.frozen:
                self._nf_cache[mon] = cached
        return cached

    def _reduce_loop(self, element: Element, trace: Optional[list]) -> Element:
        remaining: Dict[object, Fraction] = dict(element.items())
        heap = [_Top(self.order.key(mon), mon) for mon in remaining]
        heapq.heapify(heap)
        normal: Dict[object, Fraction] = {}
        while heap:
            mon = heapq.heappop(heap).mon
            coef = remaining.pop(mon, None)
            if not coef:
                continue
            found = self.find_reducer(mon)
            if found is None:
                normal[mon] = coef
                continue
            rid, occurrence = found
            if trace is not None:
                trace.append((rid, occurrence, coef))
            multiple = self.free.substitute(mon, occurrence, self.relations[rid])
            for other, value in multiple.items():
                if other == mon:
                    continue
                updated = remaining.get(other, Fraction(0)) - coef * value
                if updated:
                    if other not in remaining:
                        heapq.heappush(heap, _Top(self.order.key(other), other))
                    remaining[other] = updated
                else:
                    remaining.pop(other, None)
        return Element(normal)

    def contains(self, element: Element) -> bool:
        return self.reduce(element).is_zero()

    # completion ------------------------------------------------------------------------

    def _normalize(self, element: Element) -> Element:
        lead = self.order.lead(element)
        return element.scale(Fraction(1) / element.coefficient(lead))

    def _check_degree_truncation(self) -> None:
        if self.max_degree is None:
            return
        signs = {(g.degree > 0) - (g.degree < 0) for g in self.free.generators}
        if 1 in signs and -1 in signs:
            raise TruncationError(
                "Degree truncation needs generator degrees of one sign; use a weight bound instead"
            )

    def complete(self, relations: Iterable[Element]) -> "GroebnerBasis":
        """Truncated Buchberger completion of the given relations into this basis"""
        self._check_degree_truncation()
        self.frozen = False
        queue: list = []
        seq = 0
        for element in relations:
            if element.is_zero():
                continue
            arity = self.free.element_arity(element)
            heapq.heappush(queue, (arity, self.free.element_weight(element), INPUT, seq, element))
            seq += 1
        current_arity = None
        while queue:
            arity, weight, origin, _, element = heapq.heappop(queue)
            if arity != current_arity:
                if current_arity is not None:
                    logger.info(f"Completed arity {current_arity}: {len(self)} relations")
                current_arity = arity
            reduced = self.reduce(element)
            if reduced.is_zero():
                if origin == SPOLY:
                    logger.debug(f"S-polynomial in arity {arity} reduced to zero")
                continue
            if origin == SPOLY:
                self.new_count += 1
                self.events.append(f"new\t{arity}\t{self.free.format_element(reduced)}")
                logger.debug(f"S-polynomial in arity {arity} gave a new relation")
            reduced = self._normalize(reduced)
            lead = self.order.lead(reduced)
            for rid in list(self.relations):
                if self.free.divides(lead, self.leads[rid]):
                    self.events.append(f"requeue\t{arity}\t{rid}\t{self.free.code(self.leads[rid])}")
                    old = self._remove(rid)
                    heapq.heappush(
                        queue, (self.free.element_arity(old), self.free.element_weight(old), REQUEUED, seq, old)
                    )
                    seq += 1
            rid = self._add(reduced)
            self.events.append(f"add\t{arity}\t{rid}\t{self.free.code(lead)}")
            for spoly in self._critical(rid):
                self.pairs_checked += 1
                heapq.heappush(
                    queue, (self.free.element_arity(spoly), self.free.element_weight(spoly), SPOLY, seq, spoly)
                )
                seq += 1
        if current_arity is not None:
            logger.info(f"Completed arity {current_arity}: {len(self)} relations")
        self._tail_reduce()
        self.frozen = True
        return self

    def _tail_reduce(self) -> None:
        for rid in sorted(self.relations):
            element = self.relations[rid]
            lead = self.leads[rid]
            tail = element.filter(lambda mon: mon != lead)
            self.relations[rid] = Element.monomial(lead) + self._reduce_loop(tail, None)
        self._nf_cache.clear()

    def _common_multiples(self, lead, extra: int) -> List:
        found = []
        seen = {lead}
        level = [lead]
        for _ in range(extra):
            following = []
            for mon in level:
                for grown in self.free.extensions(mon):
                    if grown in seen or not self.within_truncation(grown):
                        continue
                    seen.add(grown)
                    following.append(grown)
            found.extend(following)
            level = following
        return found

    def _critical(self, rid: int) -> List[Element]:
        """S-polynomials between relation rid and every basis member (itself included)"""
        lead = self.leads[rid]
        longest = max(self.free.size(m) for m in self.leads.values())
        result = []
        for multiple in self._common_multiples(lead, longest - 1):
            result.extend(self._s_polynomials_at(multiple, {rid}))
        return result

    def _s_polynomials_at(self, multiple, anchors: set) -> List[Element]:
        everywhere = self._full_span(multiple)
        found = list(self._occurrences(multiple))
        result = []
        for i, (rid1, occ1) in enumerate(found):
            if rid1 not in anchors:
                continue
            for j, (rid2, occ2) in enumerate(found):
                if i == j or (rid2 in anchors and j < i):
                    continue
                if not occ1.span & occ2.span or occ1.span | occ2.span != everywhere:
                    continue
                first = self.free.substitute(multiple, occ1, self.relations[rid1])
                second = self.free.substitute(multiple, occ2, self.relations[rid2])
                spoly = first - second
                if not spoly.is_zero():
                    result.append(spoly)
        return result

    def _full_span(self, mon) -> frozenset:
        if isinstance(self.free, WordAlgebra):
            return frozenset(range(len(mon)))
        return frozenset(vertex_paths(mon))

    def s_polynomials(self, rid1: int, rid2: int) -> List[Element]:
        """One element per small common multiple of the two leads, within truncation"""
        lead = self.leads[rid1]
        extra = self.free.size(self.leads[rid2]) - 1
        result = []
        seen = set()
        for multiple in self._common_multiples(lead, extra):
            occurrences = list(self._occurrences(multiple))
            everywhere = self._full_span(multiple)
            for r1, o1 in occurrences:
                if r1 != rid1:
                    continue
                for r2, o2 in occurrences:
                    if r2 != rid2 or o1 == o2:
                        continue
                    if not o1.span & o2.span or o1.span | o2.span != everywhere:
                        continue
                    if (multiple, o1, o2) in seen:
                        continue
                    seen.add((multiple, o1, o2))
                    result.append(
                        self.free.substitute(multiple, o1, self.relations[r1])
                        - self.free.substitute(multiple, o2, self.relations[r2])
                    )
        return result

    def verify_confluence(self) -> List[Element]:
        """Re-derive every S-polynomial within truncation; returns those with a nonzero remainder"""
        failures = []
        for rid in sorted(self.relations):
            for spoly in self._critical(rid):
                remainder = self.reduce(spoly)
                if not remainder.is_zero():
                    failures.append(remainder)
        logger.info(f"Confluence check: {len(failures)} nonzero remainders")
        return failures

    def completion_log(self) -> str:
        return "\n".join(self.events)

    # normal monomials ------------------------------------------------------------------

    def _needs_weight_bound(self) -> bool:
        if isinstance(self.free, WordAlgebra):
            return any(g.arity == 0 for g in self.free.generators)
        return any(g.arity == 1 for g in self.free.generators)

    def normal_monomials(self, arity: int, weight: Optional[int] = None) -> list:
        """Monomials of the given arity (and weight, if given) divisible by no lead"""
        if arity > self.max_arity:
            raise TruncationError(f"Arity {arity} exceeds the truncation {self.max_arity}")
        if weight is None:
            if self._needs_weight_bound():
                raise TruncationError(
                    "Generators that do not raise arity make this slice infinite; pass a weight"
                )
            heaviest = max((g.weight for g in self.free.generators), default=1)
            consumed = arity if isinstance(self.free, WordAlgebra) else max(arity - 1, 0)
            bound = consumed * heaviest
            return [m for w in range(bound + 1) for m in self.normal_monomials(arity, w)]
        if isinstance(self.free, WordAlgebra):
            return self._normal_words(underline(arity), weight, ())
        return self._normal_trees(arity, weight)

    def _normal_words(self, remaining, weight: int, prefix: tuple) -> list:
        if weight == 0:
            return [prefix] if not remaining else []
        result = []
        for gen in self.free.generators:
            if gen.weight > weight or gen.arity > len(remaining):
                continue
            for chosen in _label_choices(gen, remaining):
                word = prefix + ((gen.name, chosen),)
                if not self._suffix_normal(word):
                    continue
                rest = tuple(x for x in remaining if x not in chosen)
                result.extend(self._normal_words(rest, weight - gen.weight, word))
        return result

    def _suffix_normal(self, word: tuple) -> bool:
        # only ranges ending at the last factor are new
        for length in self._lengths:
            if length > len(word):
                continue
            segment = word[len(word) - length:]
            if self._index.get(self.free.standardize(segment)):
                return False
        return True

    def _normal_trees(self, arity: int, weight: int) -> list:
        key = (arity, weight)
        cache = self._normal_cache
        if key in cache:
            return cache[key]
        free: TreeOperad = self.free
        if weight == 0:
            result = [1] if arity == 1 else []
        else:
            result = []
            for gen in free.generators:
                rest = weight - gen.weight
                if rest < 0 or gen.arity > arity:
                    continue
                for blocks in free._child_blocks(arity, gen.arity):
                    for weights in _weak_compositions(rest, len(blocks)):
                        options = []
                        for block, w in zip(blocks, weights):
                            trees = self._normal_trees(len(block), w)
                            if not trees:
                                break
                            mapping = {i + 1: label for i, label in enumerate(block)}
                            options.append([_relabel(t, mapping) for t in trees])
                        else:
                            for children in product(*options):
                                tree = (gen.name, tuple(children))
                                if self._root_normal(tree):
                                    result.append(tree)
        if self.frozen:
            cache[key] = result
        return result

    def _root_normal(self, tree) -> bool:
        for rid in self._index.get(tree[0], ()):
            if self.free.match_at(self.leads[rid], tree, ()) is not None:
                return False
        return True

    def normal_monomials_in_degree(self, arity: int, degree: int, max_weight: int) -> list:
        return [
            m
            for w in range(max_weight + 1)
            for m in self.normal_monomials(arity, w)
            if self.free.degree(m) == degree
        ]

    def hilbert_table(self, max_arity: Optional[int] = None, max_weight: Optional[int] = None) -> Dict[int, Counter]:
        """Arity -> Counter(degree -> number of normal monomials)"""
        max_arity = self.max_arity if max_arity is None else max_arity
        table: Dict[int, Counter] = {}
        start = 0 if isinstance(self.free, WordAlgebra) else 1
        for arity in range(start, max_arity + 1):
            if max_weight is None:
                monomials = self.normal_monomials(arity)
            else:
                monomials = [m for w in range(max_weight + 1) for m in self.normal_monomials(arity, w)]
            table[arity] = Counter(self.free.degree(m) for m in monomials)
            logger.debug(f"Hilbert table arity {arity}: {sum(table[arity].values())}")
        return table

    # free products ---------------------------------------------------------------------

    def extend_generators(self, extra: Sequence[GeneratorSymbol]) -> "GroebnerBasis":
        """Same basis inside the free product with additional free generators"""
        free = self.free.with_generators(extra)
        basis = GroebnerBasis(free, self.order.for_free(free), self.max_arity, self.max_weight, self.max_degree)
        for rid in sorted(self.relations):
            basis._add(self.relations[rid])
        basis.frozen = True
        return basis


def _label_choices(gen: GeneratorSymbol, remaining) -> list:
    choices = []
    for chosen in combinations(remaining, gen.arity):
        if gen.symmetric or gen.arity <= 1:
            choices.append(chosen)
        else:
            choices.extend(permutations(chosen))
    return choices


def _weak_compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    if parts == 0:
        return [()] if total == 0 else []
    if parts == 1:
        return [(total,)]
    return [(first,) + rest for first in range(total + 1) for rest in _weak_compositions(total - first, parts - 1)]


def _relabel(tree, mapping):
    if isinstance(tree, int):
        return mapping[tree]
    return (tree[0], tuple(_relabel(child, mapping) for child in tree[1]))


def weight_bound_for_window(free: FreeObject, arity: int, lo: int, hi: int) -> int:
    """Largest weight a monomial of the given arity can have with degree in [lo, hi]"""
    if isinstance(free, WordAlgebra):
        consumers = [g for g in free.generators if g.arity >= 1]
        idle = [g for g in free.generators if g.arity == 0]
        room = arity
    else:
        consumers = [g for g in free.generators if g.arity >= 2]
        idle = [g for g in free.generators if g.arity == 1]
        room = max(arity - 1, 0)
    max_weight = max((g.weight for g in free.generators), default=1)
    low = min((g.degree for g in consumers), default=0)
    high = max((g.degree for g in consumers), default=0)
    p_min = room * min(0, low)
    p_max = room * max(0, high)
    if not idle:
        return room * max_weight
    degrees = [g.degree for g in idle]
    if any(d == 0 for d in degrees):
        raise TruncationError("A degree-zero generator that keeps arity makes the window infinite")
    smallest = min(abs(d) for d in degrees)
    if all(d > 0 for d in degrees):
        count = (hi - p_min) // smallest
    elif all(d < 0 for d in degrees):
        count = (p_max - lo) // smallest
    else:
        raise TruncationError("Arity-preserving generators of both degree signs need an explicit weight bound")
    return (room + max(count, 0)) * max_weight


def complete_relations(
    free: FreeObject,
    order_text: str,
    relations: Iterable[Element],
    max_arity: int,
    max_weight: Optional[int] = None,
    max_degree: Optional[int] = None,
) -> GroebnerBasis:
    order = MonomialOrder(free, order_text)
    relations = list(relations)
    for element in relations:
        arity = free.element_arity(element)
        if arity is not None and arity > max_arity:
            raise ArityMismatchError(f"Relation of arity {arity} lies beyond max arity {max_arity}")
    basis = GroebnerBasis(free, order, max_arity, max_weight, max_degree)
    return basis.complete(relations)
