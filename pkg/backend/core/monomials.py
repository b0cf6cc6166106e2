import logging
from dataclasses import dataclass, replace
from fractions import Fraction
from functools import lru_cache
from itertools import combinations, permutations, product
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .element import Element
from .errors import ArityMismatchError, KindMismatchError, UnknownGeneratorError
from .species import LabelSet, inversion_sign, shuffle_partitions, standardize, underline

logger = logging.getLogger(__name__)

TWISTED = "twisted"
OPERAD = "operad"
NS = "nsoperad"
KINDS = (TWISTED, OPERAD, NS)


@dataclass(frozen=True)
class GeneratorSymbol:
    name: str
    arity: int
    degree: int
    weight: int = 1
    symmetric: bool = False

    def renamed(self, name: str, degree: Optional[int] = None) -> "GeneratorSymbol":
        return replace(self, name=name, degree=self.degree if degree is None else degree)


@dataclass(frozen=True)
class Occurrence:
    """Position of a divisor inside a target monomial.

    For words `root` is (start,), `span` the covered factor indices and `binding` the
    label set the divisor was standardized from. For trees `root` is the vertex path of
    the divisor root, `span` the covered vertex paths and `binding` the paths of the
    subtrees hanging below divisor leaves 1..k.
    """

    root: tuple
    span: frozenset
    binding: tuple


# ---------------------------------------------------------------- tree helpers


@lru_cache(maxsize=None)
def tree_leaves(tree) -> Tuple[int, ...]:
    """Leaf labels in planar reading order"""
    if isinstance(tree, int):
        return (tree,)
    return tuple(label for child in tree[1] for label in tree_leaves(child))


def tree_arity(tree) -> int:
    return len(tree_leaves(tree))


def min_leaf(tree) -> int:
    return min(tree_leaves(tree))


def subtree_at(tree, path: Sequence[int]):
    for step in path:
        tree = tree[1][step]
    return tree


def replace_at(tree, path: Sequence[int], new):
    if not path:
        return new
    children = list(tree[1])
    children[path[0]] = replace_at(children[path[0]], path[1:], new)
    return (tree[0], tuple(children)) + tuple(tree[2:])


def vertex_paths(tree, path: tuple = ()) -> List[tuple]:
    """Paths of internal vertices in preorder"""
    if isinstance(tree, int):
        return []
    result = [path]
    for i, child in enumerate(tree[1]):
        result.extend(vertex_paths(child, path + (i,)))
    return result


def relabel_leaves(tree, mapping: Dict[int, int]):
    if isinstance(tree, int):
        return mapping[tree]
    return (tree[0], tuple(relabel_leaves(c, mapping) for c in tree[1])) + tuple(tree[2:])


# ---------------------------------------------------------------- free objects


class FreeObject:
    """Monomial basis of a free twisted associative algebra, shuffle operad or ns operad"""

    kind = ""

    def __init__(self, generators: Iterable[GeneratorSymbol]):
        self.generators: List[GeneratorSymbol] = []
        self.gens: Dict[str, GeneratorSymbol] = {}
        for gen in generators:
            if gen.name in self.gens:
                raise KindMismatchError(f"Generator {gen.name} declared twice")
            self._check_generator(gen)
            self.generators.append(gen)
            self.gens[gen.name] = gen
        count = len(self.generators)
        # earlier declarations rank higher
        self.priority: Dict[str, int] = {g.name: count - i for i, g in enumerate(self.generators)}
        self._enum_cache: Dict[tuple, list] = {}

    def _check_generator(self, gen: GeneratorSymbol) -> None:
        if gen.arity < 0:
            raise ArityMismatchError(f"Generator {gen.name} has negative arity")

    def generator(self, name: str) -> GeneratorSymbol:
        try:
            return self.gens[name]
        except KeyError:
            raise UnknownGeneratorError(f"Unknown generator {name}")

    def with_generators(self, extra: Iterable[GeneratorSymbol]) -> "FreeObject":
        return type(self)(list(self.generators) + list(extra))

    def restricted_to(self, names: Iterable[str]) -> "FreeObject":
        keep = set(names)
        return type(self)([g for g in self.generators if g.name in keep])

    # generic gradings -------------------------------------------------------

    def names(self, mon) -> List[str]:
        raise NotImplementedError

    def weight(self, mon) -> int:
        return sum(self.gens[name].weight for name in self.names(mon))

    def size(self, mon) -> int:
        return len(self.names(mon))

    def degree(self, mon) -> int:
        return sum(self.gens[name].degree for name in self.names(mon))

    def element_arity(self, element: Element) -> Optional[int]:
        arities = {self.arity(mon) for mon in element.monomials()}
        if len(arities) > 1:
            raise ArityMismatchError(f"Element is not homogeneous in arity: {sorted(arities)}")
        return arities.pop() if arities else None

    def element_weight(self, element: Element) -> int:
        return max((self.weight(mon) for mon in element.monomials()), default=0)

    def element_degree(self, element: Element) -> Optional[int]:
        degrees = {self.degree(mon) for mon in element.monomials()}
        return degrees.pop() if len(degrees) == 1 else None

    def arity(self, mon) -> int:
        raise NotImplementedError

    # element level ----------------------------------------------------------

    def compose_elements(self, outer: Element, slot: int, inner: Element) -> Element:
        pairs = []
        for a, ca in outer.items():
            for b, cb in inner.items():
                mon, sign = self.compose(a, slot, b)
                pairs.append((mon, ca * cb * sign))
        return Element.from_terms(pairs)

    def derive_element(self, element: Element, diff: Dict[str, Element]) -> Element:
        result = Element()
        for mon, coef in element.items():
            result = result + self.derive(mon, diff).scale(coef)
        return result

    def relabel_element(self, element: Element, mapping: Dict[int, int]) -> Element:
        return Element.from_terms(
            (new, coef * sign) for mon, coef in element.items() for new, sign in [self.relabel(mon, mapping)]
        )

    def substitute_all(self, element: Element, images: Dict[str, Element]) -> Element:
        """Apply the morphism sending each generator to an element (missing names are kept)"""
        result = Element()
        for mon, coef in element.items():
            result = result + self.substitute_monomial(mon, images).scale(coef)
        return result

    def format_element(self, element: Element) -> str:
        if element.is_zero():
            return "0"
        parts = []
        for mon, coef in sorted(element.items(), key=lambda item: self.code(item[0])):
            sign = "-" if coef < 0 else "+"
            magnitude = abs(coef)
            body = self.code(mon) if magnitude == 1 else f"{magnitude}*{self.code(mon)}"
            parts.append(f"{sign} {body}")
        text = " ".join(parts)
        return text[2:] if text.startswith("+ ") else "-" + text[2:]

    # interface implemented by subclasses ------------------------------------

    def compose(self, outer, slot: int, inner) -> Tuple[object, int]:
        raise NotImplementedError

    def divides(self, divisor, target) -> List[Occurrence]:
        raise NotImplementedError

    def substitute(self, target, occurrence: Occurrence, element: Element) -> Element:
        raise NotImplementedError

    def enumerate(self, arity: int, weight: int) -> list:
        raise NotImplementedError

    def extensions(self, mon) -> list:
        raise NotImplementedError

    def derive(self, mon, diff: Dict[str, Element]) -> Element:
        raise NotImplementedError

    def relabel(self, mon, mapping: Dict[int, int]) -> Tuple[object, int]:
        raise NotImplementedError

    def substitute_monomial(self, mon, images: Dict[str, Element]) -> Element:
        raise NotImplementedError

    def code(self, mon) -> str:
        raise NotImplementedError

    def corolla(self, name: str):
        raise NotImplementedError

    def unit(self):
        raise NotImplementedError


class WordAlgebra(FreeObject):
    """Free shuffle algebra: words of labeled generator factors"""

    kind = TWISTED

    def factor(self, name: str, labels: Sequence[int]) -> Tuple[str, LabelSet]:
        gen = self.generator(name)
        if len(labels) != gen.arity:
            raise ArityMismatchError(f"{name} has arity {gen.arity}, got labels {tuple(labels)}")
        labels = tuple(labels)
        if gen.symmetric:
            labels = tuple(sorted(labels))
        return (name, labels)

    def word(self, factors: Iterable[Tuple[str, Sequence[int]]]) -> tuple:
        result = tuple(self.factor(name, labels) for name, labels in factors)
        all_labels = sorted(label for _, labels in result for label in labels)
        if all_labels != list(range(1, len(all_labels) + 1)):
            raise ArityMismatchError(f"Labels {all_labels} do not form a set 1..n")
        return result

    def unit(self):
        return ()

    def corolla(self, name: str):
        gen = self.generator(name)
        return ((name, underline(gen.arity)),)

    def names(self, mon) -> List[str]:
        return [name for name, _ in mon]

    def arity(self, mon) -> int:
        return sum(len(labels) for _, labels in mon)

    def labels_of(self, factors) -> LabelSet:
        return tuple(sorted(label for _, labels in factors for label in labels))

    def standardize(self, factors) -> tuple:
        ranks = standardize(self.labels_of(factors))
        return tuple((name, tuple(ranks[x] for x in labels)) for name, labels in factors)

    def relabel(self, mon, mapping: Dict[int, int]) -> Tuple[tuple, int]:
        result = []
        for name, labels in mon:
            new = tuple(mapping[x] for x in labels)
            if self.gens[name].symmetric:
                new = tuple(sorted(new))
            result.append((name, new))
        return tuple(result), 1

    def onto(self, mon, target_labels: Sequence[int]) -> tuple:
        """Transport a standard word onto a label set, order-preservingly"""
        target = sorted(target_labels)
        mapping = {i + 1: label for i, label in enumerate(target)}
        return self.relabel(mon, mapping)[0]

    def compose(self, outer, slot: int, inner) -> Tuple[tuple, int]:
        if slot < 0 or slot > len(outer):
            raise ArityMismatchError(f"Insertion position {slot} outside word of length {len(outer)}")
        shift = self.arity(outer)
        moved = self.relabel(inner, {x: x + shift for x in range(1, self.arity(inner) + 1)})[0]
        after = sum(self.gens[name].degree for name, _ in outer[slot:])
        sign = -1 if (self.degree(inner) * after) % 2 else 1
        return outer[:slot] + moved + outer[slot:], sign

    def multiply(self, a, b) -> tuple:
        return self.compose(a, len(a), b)[0]

    def cauchy(self, a, left: Sequence[int], b, right: Sequence[int]) -> tuple:
        """Product a_I b_J of standard words transported onto I and J"""
        return self.onto(a, left) + self.onto(b, right)

    def product_elements(self, a: Element, b: Element) -> Element:
        return Element.from_terms(
            (self.multiply(x, y), ca * cb) for x, ca in a.items() for y, cb in b.items()
        )

    def cauchy_elements(self, a: Element, left: Sequence[int], b: Element, right: Sequence[int]) -> Element:
        return Element.from_terms(
            (self.cauchy(x, left, y, right), ca * cb) for x, ca in a.items() for y, cb in b.items()
        )

    def divides(self, divisor, target) -> List[Occurrence]:
        size = len(divisor)
        found = []
        if size == 0:
            return found
        for start in range(len(target) - size + 1):
            segment = target[start:start + size]
            if any(s[0] != d[0] for s, d in zip(segment, divisor)):
                continue
            if self.standardize(segment) == divisor:
                found.append(
                    Occurrence(
                        root=(start,),
                        span=frozenset(range(start, start + size)),
                        binding=self.labels_of(segment),
                    )
                )
        return found

    def substitute(self, target, occurrence: Occurrence, element: Element) -> Element:
        start = occurrence.root[0]
        stop = start + len(occurrence.span)
        pairs = []
        for mon, coef in element.items():
            pairs.append((target[:start] + self.onto(mon, occurrence.binding) + target[stop:], coef))
        return Element.from_terms(pairs)

    def enumerate(self, arity: int, weight: int) -> List[tuple]:
        key = (arity, weight)
        if key not in self._enum_cache:
            self._enum_cache[key] = self._words(underline(arity), weight)
        return self._enum_cache[key]

    def _words(self, remaining: LabelSet, weight: int) -> List[tuple]:
        if weight == 0:
            return [()] if not remaining else []
        result = []
        for gen in self.generators:
            if gen.weight > weight or gen.arity > len(remaining):
                continue
            for chosen in combinations(remaining, gen.arity):
                arrangements = [chosen] if gen.symmetric or gen.arity <= 1 else list(permutations(chosen))
                rest = tuple(x for x in remaining if x not in chosen)
                tails = self._words(rest, weight - gen.weight)
                for labels in arrangements:
                    for tail in tails:
                        result.append(((gen.name, labels),) + tail)
        return result

    def extensions(self, mon) -> List[tuple]:
        n = self.arity(mon)
        found = set()
        for gen in self.generators:
            total = n + gen.arity
            for chosen in combinations(range(1, total + 1), gen.arity):
                rest = [x for x in range(1, total + 1) if x not in chosen]
                moved = self.onto(mon, rest)
                arrangements = [chosen] if gen.symmetric or gen.arity <= 1 else list(permutations(chosen))
                for labels in arrangements:
                    found.add(((gen.name, labels),) + moved)
                    found.add(moved + ((gen.name, labels),))
        return sorted(found)

    def derive(self, mon, diff: Dict[str, Element]) -> Element:
        pairs = []
        prefix_degree = 0
        for i, (name, labels) in enumerate(mon):
            image = diff.get(name)
            if image is not None and not image.is_zero():
                sign = -1 if prefix_degree % 2 else 1
                mapping = {j + 1: label for j, label in enumerate(labels)}
                for piece, coef in image.items():
                    moved = self.relabel(piece, mapping)[0]
                    pairs.append((mon[:i] + moved + mon[i + 1:], coef * sign))
            prefix_degree += self.gens[name].degree
        return Element.from_terms(pairs)

    def substitute_monomial(self, mon, images: Dict[str, Element]) -> Element:
        result = Element.monomial(())
        for name, labels in mon:
            image = images.get(name)
            if image is None:
                image = Element.monomial(((name, tuple(range(1, len(labels) + 1))),))
            mapping = {j + 1: label for j, label in enumerate(labels)}
            moved = self.relabel_element(image, mapping)
            result = Element.from_terms(
                (x + y, ca * cb) for x, ca in result.items() for y, cb in moved.items()
            )
        return result

    def code(self, mon) -> str:
        if not mon:
            return "1"
        return ".".join(f"{name}[{','.join(str(x) for x in labels)}]" for name, labels in mon)


class TreeOperad(FreeObject):
    """Free shuffle operad (planar=False) or free ns operad (planar=True) on tree monomials"""

    def __init__(self, generators: Iterable[GeneratorSymbol], planar: bool = False):
        self.planar = planar
        self.kind = NS if planar else OPERAD
        super().__init__(generators)

    def _check_generator(self, gen: GeneratorSymbol) -> None:
        if gen.arity < 1:
            raise ArityMismatchError(f"Operad generator {gen.name} must have positive arity")
        if self.planar and gen.symmetric:
            raise KindMismatchError(f"Generator {gen.name} cannot be symmetric in an ns operad")
        if not self.planar and gen.arity >= 2 and not gen.symmetric:
            raise KindMismatchError(
                f"Generator {gen.name} of a symmetric operad must be declared symmetric"
            )

    def with_generators(self, extra: Iterable[GeneratorSymbol]) -> "TreeOperad":
        return TreeOperad(list(self.generators) + list(extra), planar=self.planar)

    def restricted_to(self, names: Iterable[str]) -> "TreeOperad":
        keep = set(names)
        return TreeOperad([g for g in self.generators if g.name in keep], planar=self.planar)

    def unit(self):
        return 1

    def corolla(self, name: str):
        gen = self.generator(name)
        return (name, underline(gen.arity))

    def names(self, mon) -> List[str]:
        if isinstance(mon, int):
            return []
        return [mon[0]] + [name for child in mon[1] for name in self.names(child)]

    def arity(self, mon) -> int:
        return tree_arity(mon)

    # canonical forms and signs ----------------------------------------------

    def _odd(self, name: str) -> bool:
        return self.gens[name].degree % 2 != 0

    def _sorted_tagged(self, node):
        if isinstance(node, int):
            return node, node
        name, children, tag = node
        done = [self._sorted_tagged(child) for child in children]
        if not self.planar:
            done.sort(key=lambda item: item[1])
        return (name, tuple(item[0] for item in done), tag), min(item[1] for item in done)

    def settle(self, tagged) -> Tuple[object, int]:
        """Canonical tree of a tagged tree and the Koszul sign of reaching preorder"""
        ordered, _ = self._sorted_tagged(tagged)
        tags: List = []
        odd: List[bool] = []

        def strip(node):
            if isinstance(node, int):
                return node
            name, children, tag = node
            tags.append(tag)
            odd.append(self._odd(name))
            return (name, tuple(strip(child) for child in children))

        plain = strip(ordered)
        return plain, inversion_sign(tags, odd)

    def tag(self, tree, tagger: Callable[[tuple, int], object]):
        counter = [0]

        def walk(node, path):
            if isinstance(node, int):
                return node
            index = counter[0]
            counter[0] += 1
            tag = tagger(path, index)
            children = tuple(walk(child, path + (i,)) for i, child in enumerate(node[1]))
            return (node[0], children, tag)

        return walk(tree, ())

    def from_nested(self, nested) -> Tuple[object, int]:
        """Tree from a nested (name, children) tuple; vertices are ordered as written"""
        counter = [0]

        def walk(node):
            if isinstance(node, int):
                return node
            name, children = node[0], node[1]
            gen = self.generator(name)
            if len(children) != gen.arity:
                raise ArityMismatchError(f"{name} has arity {gen.arity}, got {len(children)} inputs")
            index = counter[0]
            counter[0] += 1
            return (name, tuple(walk(child) for child in children), index)

        tagged = walk(nested)
        leaves = sorted(tree_leaves(self._strip_tags(tagged)))
        if leaves != list(range(1, len(leaves) + 1)):
            raise ArityMismatchError(f"Leaves {leaves} do not form a set 1..n")
        if self.planar and list(tree_leaves(self._strip_tags(tagged))) != leaves:
            raise ArityMismatchError("Leaves of an ns tree must read 1..n from left to right")
        return self.settle(tagged)

    def _strip_tags(self, node):
        if isinstance(node, int):
            return node
        return (node[0], tuple(self._strip_tags(child) for child in node[1]))

    def relabel(self, mon, mapping: Dict[int, int]) -> Tuple[object, int]:
        tagged = self.tag(mon, lambda path, index: index)
        return self.settle(relabel_leaves(tagged, mapping))

    # composition ------------------------------------------------------------

    def compose(self, outer, slot: int, inner) -> Tuple[object, int]:
        p = self.arity(outer)
        m = self.arity(inner)
        if slot < 1 or slot > p:
            raise ArityMismatchError(f"Slot {slot} outside arity {p}")
        outer_tagged = self.tag(outer, lambda path, index: (0, index))
        inner_tagged = self.tag(inner, lambda path, index: (1, index))
        outer_map = {j: (j if j < slot else j + m - 1) for j in range(1, p + 1) if j != slot}
        inner_map = {l: l + slot - 1 for l in range(1, m + 1)}
        moved_inner = relabel_leaves(inner_tagged, inner_map)

        def graft(node):
            if isinstance(node, int):
                return moved_inner if node == slot else outer_map[node]
            return (node[0], tuple(graft(child) for child in node[1]), node[2])

        return self.settle(graft(outer_tagged))

    def graft(self, outer, slot: int, inner, inner_labels: Sequence[int]) -> Tuple[object, int]:
        """Shuffle composition: inner goes onto inner_labels, outer onto the rest plus min(inner_labels)"""
        p = self.arity(outer)
        m = self.arity(inner)
        total = p + m - 1
        chosen = sorted(inner_labels)
        if len(chosen) != m:
            raise ArityMismatchError("Inner label set does not match inner arity")
        outer_targets = sorted([x for x in range(1, total + 1) if x not in chosen] + [chosen[0]])
        if outer_targets[slot - 1] != chosen[0]:
            raise ArityMismatchError("Shuffle condition violated by the chosen inner labels")
        outer_tagged = self.tag(outer, lambda path, index: (0, index))
        inner_tagged = relabel_leaves(
            self.tag(inner, lambda path, index: (1, index)), {l: chosen[l - 1] for l in range(1, m + 1)}
        )
        outer_map = {j: outer_targets[j - 1] for j in range(1, p + 1)}

        def walk(node):
            if isinstance(node, int):
                return inner_tagged if node == slot else outer_map[node]
            return (node[0], tuple(walk(child) for child in node[1]), node[2])

        return self.settle(walk(outer_tagged))

    # divisibility -----------------------------------------------------------

    def match_at(self, divisor, target, path: tuple) -> Optional[Occurrence]:
        span: List[tuple] = []
        hangs: Dict[int, tuple] = {}

        def walk(d, t, at):
            if isinstance(d, int):
                hangs[d] = at
                return True
            if isinstance(t, int) or d[0] != t[0]:
                return False
            span.append(at)
            return all(walk(dc, tc, at + (i,)) for i, (dc, tc) in enumerate(zip(d[1], t[1])))

        if isinstance(divisor, int):
            return None
        if not walk(divisor, subtree_at(target, path), path):
            return None
        ordered = tuple(hangs[label] for label in range(1, len(hangs) + 1))
        minima = [min_leaf(subtree_at(target, at)) for at in ordered]
        if any(a > b for a, b in zip(minima, minima[1:])):
            return None
        return Occurrence(root=path, span=frozenset(span), binding=ordered)

    def divides(self, divisor, target) -> List[Occurrence]:
        found = []
        for path in vertex_paths(target):
            occurrence = self.match_at(divisor, target, path)
            if occurrence is not None:
                found.append(occurrence)
        return found

    def substitute(self, target, occurrence: Occurrence, element: Element) -> Element:
        span = occurrence.span
        hang_index = {at: label for label, at in enumerate(occurrence.binding, start=1)}
        span_rank = {at: rank for rank, at in enumerate(sorted(span, key=self._preorder_key(target)))}

        def tagger(path, index):
            if path in span:
                return (1, span_rank[path])
            for depth in range(len(path), -1, -1):
                label = hang_index.get(path[:depth])
                if label is not None:
                    return (2, label, index)
            return (0, index)

        tagged = self.tag(target, tagger)
        _, sign_target = self.settle(tagged)
        hangs = {label: subtree_at(tagged, at) for at, label in hang_index.items()}
        pairs = []
        for mon, coef in element.items():
            piece = self.tag(mon, lambda path, index: (1, index))
            piece = self._plug(piece, hangs)
            tree, sign = self.settle(replace_at(tagged, occurrence.root, piece))
            pairs.append((tree, coef * sign * sign_target))
        return Element.from_terms(pairs)

    def _plug(self, node, hangs):
        if isinstance(node, int):
            return hangs[node]
        return (node[0], tuple(self._plug(child, hangs) for child in node[1]), node[2])

    def _preorder_key(self, tree):
        order = {path: i for i, path in enumerate(vertex_paths(tree))}
        return lambda path: order[path]

    # enumeration ------------------------------------------------------------

    def enumerate(self, arity: int, weight: int) -> list:
        key = (arity, weight)
        if key in self._enum_cache:
            return self._enum_cache[key]
        if weight == 0:
            result = [1] if arity == 1 else []
        else:
            result = []
            for gen in self.generators:
                rest = weight - gen.weight
                if rest < 0 or gen.arity > arity or (gen.arity == 1 and rest == 0 and arity != 1):
                    continue
                for blocks in self._child_blocks(arity, gen.arity):
                    for weights in _compositions(rest, len(blocks)):
                        options = []
                        for block, w in zip(blocks, weights):
                            trees = self.enumerate(len(block), w)
                            if not trees:
                                break
                            mapping = {i + 1: label for i, label in enumerate(block)}
                            options.append([relabel_leaves(t, mapping) for t in trees])
                        else:
                            for children in product(*options):
                                result.append((gen.name, tuple(children)))
        self._enum_cache[key] = result
        return result

    def _child_blocks(self, arity: int, parts: int) -> List[Tuple[LabelSet, ...]]:
        if self.planar:
            blocks = []
            for sizes in _compositions(arity - parts, parts):
                start = 1
                current = []
                for size in sizes:
                    current.append(tuple(range(start, start + size + 1)))
                    start += size + 1
                blocks.append(tuple(current))
            return blocks
        return shuffle_partitions(arity, parts)

    def extensions(self, mon) -> list:
        n = self.arity(mon)
        found = set()
        for gen in self.generators:
            a = gen.arity
            total = n + a - 1
            # new root above the old tree
            if self.planar:
                for slot in range(a):
                    children = []
                    for i in range(a):
                        if i < slot:
                            children.append(i + 1)
                        elif i == slot:
                            children.append(relabel_leaves(mon, {x: x + slot for x in range(1, n + 1)}))
                        else:
                            children.append(i + n)
                    found.add((gen.name, tuple(children)))
            else:
                for chosen in combinations(range(1, total + 1), n):
                    moved = relabel_leaves(mon, {i + 1: label for i, label in enumerate(chosen)})
                    leaves = [x for x in range(1, total + 1) if x not in chosen]
                    children = sorted([moved] + leaves, key=min_leaf)
                    found.add((gen.name, tuple(children)))
            # new vertex grafted at a leaf
            for leaf in range(1, n + 1):
                if self.planar:
                    corolla = (gen.name, tuple(range(leaf, leaf + a)))
                    mapping = {x: (x if x < leaf else x + a - 1) for x in range(1, n + 1) if x != leaf}
                    found.add(self._graft_leaf(mon, leaf, corolla, mapping))
                    continue
                for chosen in combinations(range(1, total + 1), a):
                    targets = sorted([x for x in range(1, total + 1) if x not in chosen] + [chosen[0]])
                    if targets[leaf - 1] != chosen[0]:
                        continue
                    mapping = {x: targets[x - 1] for x in range(1, n + 1) if x != leaf}
                    corolla = (gen.name, tuple(chosen))
                    grown = self._graft_leaf(mon, leaf, corolla, mapping)
                    found.add(self.settle(self.tag(grown, lambda path, index: index))[0])
        return sorted(found, key=self.code)

    def _graft_leaf(self, tree, leaf: int, corolla, mapping: Dict[int, int]):
        if isinstance(tree, int):
            return corolla if tree == leaf else mapping[tree]
        return (tree[0], tuple(self._graft_leaf(child, leaf, corolla, mapping) for child in tree[1]))

    # derivations and morphisms ------------------------------------------------

    def derive(self, mon, diff: Dict[str, Element]) -> Element:
        result = Element()
        total = self.degree(mon)
        for path in vertex_paths(mon):
            node = subtree_at(mon, path)
            image = diff.get(node[0])
            if image is None or image.is_zero():
                continue
            occurrence = Occurrence(
                root=path,
                span=frozenset([path]),
                binding=tuple(path + (i,) for i in range(len(node[1]))),
            )
            outside = total - self.degree(node)
            term = self.substitute(mon, occurrence, image)
            result = result + (term.scale(-1) if outside % 2 else term)
        return result

    def substitute_monomial(self, mon, images: Dict[str, Element]) -> Element:
        """Image of a tree under the operad map given on generators"""
        if isinstance(mon, int):
            return Element.monomial(mon)
        name, children = mon[0], mon[1]
        image = images.get(name)
        if image is None:
            image = Element.monomial(self.corolla(name))
        current = image
        # compose children from the last slot down so earlier slots keep their labels
        for slot in range(len(children), 0, -1):
            child_image = self.substitute_monomial(self._standard_child(children[slot - 1]), images)
            current = self.compose_elements(current, slot, child_image)
        return self._relabel_to_leaves(current, mon)

    def _standard_child(self, child):
        if isinstance(child, int):
            return 1
        ranks = standardize(tree_leaves(child))
        return relabel_leaves(child, ranks)

    def _relabel_to_leaves(self, element: Element, mon) -> Element:
        # the composite was built with children on consecutive labels in planar order
        reading = [label for child in mon[1] for label in sorted(tree_leaves(child))]
        mapping = {i + 1: label for i, label in enumerate(reading)}
        return self.relabel_element(element, mapping)

    def code(self, mon) -> str:
        if isinstance(mon, int):
            return str(mon)
        return f"{mon[0]}({','.join(self.code(child) for child in mon[1])})"

    # path data for orderings ------------------------------------------------------

    def leaf_paths(self, mon) -> Dict[int, Tuple[str, ...]]:
        paths: Dict[int, Tuple[str, ...]] = {}

        def walk(node, trail):
            if isinstance(node, int):
                paths[node] = trail
                return
            for child in node[1]:
                walk(child, trail + (node[0],))

        walk(mon, ())
        return paths


def _compositions(total: int, parts: int) -> List[Tuple[int, ...]]:
    """Weak compositions of total into parts nonnegative summands"""
    if parts == 0:
        return [()] if total == 0 else []
    if parts == 1:
        return [(total,)]
    result = []
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            result.append((first,) + rest)
    return result


def free_object(kind: str, generators: Iterable[GeneratorSymbol]) -> FreeObject:
    if kind == TWISTED:
        return WordAlgebra(generators)
    if kind == OPERAD:
        return TreeOperad(generators, planar=False)
    if kind == NS:
        return TreeOperad(generators, planar=True)
    raise KindMismatchError(f"Unknown algebra kind {kind}")
