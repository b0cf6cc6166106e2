import logging
import re
from fnmatch import fnmatchcase
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Dict, Iterable, List, Optional, Sequence, Tuple

from .element import Element
from .errors import ArityMismatchError, KindMismatchError, OperadForgeError, ParseError
from .monomials import FreeObject, TreeOperad, WordAlgebra, tree_leaves

logger = logging.getLogger(__name__)


@total_ordering
class Reversed:
    """Wraps a comparable value and flips its comparisons"""

    __slots__ = ("value",)

    def __init__(self, value):
        self.value = value

    def __eq__(self, other) -> bool:
        return isinstance(other, Reversed) and self.value == other.value

    def __lt__(self, other: "Reversed") -> bool:
        return other.value < self.value

    def __hash__(self) -> int:
        return hash(("reversed", self.value))

    def __repr__(self) -> str:
        return f"Reversed({self.value!r})"


ALIASES = {
    "revdict": "revdict",
    "rev-dictionary-subsets": "revdict",
    "aritylex": "aritylex",
    "arity-then-lex": "aritylex",
    "genlex": "genlex",
    "pathdeglex": "pathdeglex",
    "path-deg-lex": "pathdeglex",
    "revpathperm": "revpathperm",
    "rev-path-perm-lex": "revpathperm",
    "qm": "qm",
    "qm-word-order": "qm",
}

WORD_COMPONENTS = ("revdict", "aritylex", "genlex")
TREE_COMPONENTS = ("pathdeglex", "revpathperm", "qm")


# ---------------------------------------------------------------- parsing


class _Node:
    def __init__(self, op: str, children: Sequence["_Node"] = (), params: Sequence[Tuple[str, int]] = ()):
        self.op = op
        self.children = list(children)
        self.params = list(params)

    def text(self) -> str:
        if self.op == "opposite":
            return f"opposite({self.children[0].text()})"
        if self.op == ">":
            return " > ".join(child.text() for child in self.children)
        if self.params:
            return f"{self.op}({','.join(f'{p}={w}' for p, w in self.params)})"
        return self.op


class _OrderParser:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def error(self, message: str) -> ParseError:
        return ParseError(f"{message} in order text {self.text!r}", line=1, column=self.pos + 1)

    def skip(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos].isspace():
            self.pos += 1

    def peek(self) -> str:
        self.skip()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def expect(self, char: str) -> None:
        if self.peek() != char:
            raise self.error(f"expected {char!r}")
        self.pos += 1

    def word(self) -> str:
        self.skip()
        match = re.compile(r"[A-Za-z_][A-Za-z0-9_\-]*").match(self.text, self.pos)
        if not match:
            raise self.error("expected an order name")
        self.pos = match.end()
        return match.group(0)

    def parse(self) -> _Node:
        node = self.chain()
        if self.peek():
            raise self.error("unexpected trailing text")
        return node

    def chain(self) -> _Node:
        parts = [self.atom()]
        while self.peek() == ">":
            self.pos += 1
            parts.append(self.atom())
        return parts[0] if len(parts) == 1 else _Node(">", parts)

    def atom(self) -> _Node:
        if self.peek() == "(":
            self.pos += 1
            inner = self.chain()
            self.expect(")")
            return inner
        name = self.word()
        if name == "opposite":
            self.expect("(")
            inner = self.chain()
            self.expect(")")
            return _Node("opposite", [inner])
        if name not in ALIASES:
            raise self.error(f"unknown order {name!r}")
        op = ALIASES[name]
        params: List[Tuple[str, int]] = []
        if self.peek() == "(":
            self.pos += 1
            while True:
                self.skip()
                match = re.compile(r"[A-Za-z0-9_*?\[\]]+").match(self.text, self.pos)
                if not match:
                    raise self.error("expected a generator pattern")
                pattern = match.group(0)
                self.pos = match.end()
                self.expect("=")
                self.skip()
                number = re.compile(r"-?\d+").match(self.text, self.pos)
                if not number:
                    raise self.error("expected an integer weight")
                self.pos = number.end()
                params.append((pattern, int(number.group(0))))
                if self.peek() == ",":
                    self.pos += 1
                    continue
                self.expect(")")
                break
        if params and op != "qm":
            raise self.error(f"order {name!r} takes no parameters")
        return _Node(op, params=params)


def parse_order(text: str) -> _Node:
    if not text or not text.strip():
        raise ParseError("empty order text", line=1, column=1)
    node = _OrderParser(text).parse()
    return _complete_qm(node)


def _complete_qm(node: _Node) -> _Node:
    # a qm order only splits ties through a permutation order placed after it
    if node.op == "opposite":
        return _Node("opposite", [_complete_qm(node.children[0])])
    if node.op == "qm":
        return _Node(">", [node, _Node("revpathperm")])
    if node.op == ">" and node.children[-1].op == "qm":
        return _Node(">", node.children + [_Node("revpathperm")])
    return node


def canonical_order_text(text: str) -> str:
    return parse_order(text).text()


# ---------------------------------------------------------------- components


def _word_revdict(free: WordAlgebra, mon) -> tuple:
    return (len(mon), tuple((Reversed(labels), free.priority[name]) for name, labels in mon))


def _word_aritylex(free: WordAlgebra, mon) -> tuple:
    return (len(mon), tuple((len(labels), labels, free.priority[name]) for name, labels in mon))


def _word_genlex(free: WordAlgebra, mon) -> tuple:
    return (len(mon), tuple((free.priority[name], len(labels), labels) for name, labels in mon))


def _paths(free: TreeOperad, mon) -> tuple:
    paths = free.leaf_paths(mon)
    return tuple(tuple(free.priority[name] for name in paths[leaf]) for leaf in sorted(paths))


def _tree_pathdeglex(free: TreeOperad, mon) -> tuple:
    paths = _paths(free, mon)
    graded = tuple((len(p), p) for p in paths)
    perm = tree_leaves(mon)
    return (graded, Reversed(perm), free.code(mon))


def _tree_revpathperm(free: TreeOperad, mon) -> tuple:
    return (Reversed(_paths(free, mon)), tree_leaves(mon), free.code(mon))


def _qm_weights(free: FreeObject, params: Sequence[Tuple[str, int]]) -> Dict[str, int]:
    weights = {}
    for gen in free.generators:
        weights[gen.name] = 1
        for pattern, weight in params:
            if fnmatchcase(gen.name, pattern):
                weights[gen.name] = weight
                break
    return weights


def _tree_qm(free: TreeOperad, mon, weights: Dict[str, int]) -> tuple:
    paths = free.leaf_paths(mon)
    heavy = sum(weights[name] for name in free.names(mon) if weights[name] != 0)
    a_vector, b_vector, c_vector = [], [], []
    for leaf in sorted(paths):
        trail = [weights[name] != 0 for name in paths[leaf]]
        a_vector.append(sum(1 for x in trail if x))
        b_vector.append(sum(1 for x in trail if not x))
        inversions = 0
        lights = 0
        for x in trail:
            if x:
                inversions += lights
            else:
                lights += 1
        c_vector.append(inversions)
    b_key = tuple(b_vector) if free.planar else Reversed(tuple(b_vector))
    return (heavy, Reversed(tuple(a_vector)), b_key, tuple(c_vector))


# ---------------------------------------------------------------- orders


class MonomialOrder:
    """Admissible order on the monomials of a free object, given by an order text"""

    def __init__(self, free: FreeObject, text: str):
        self.free = free
        self.tree = parse_order(text)
        self.text = self.tree.text()
        self._tail = self._compile(self.tree)
        self._keys: Dict[object, tuple] = {}

    def _compile(self, node: _Node) -> Callable[[object], tuple]:
        free = self.free
        if node.op == "opposite":
            inner = self._compile(node.children[0])
            return lambda mon: (Reversed(inner(mon)),)
        if node.op == ">":
            parts = [self._compile(child) for child in node.children]
            return lambda mon: tuple(x for part in parts for x in part(mon))
        if node.op in WORD_COMPONENTS:
            if not isinstance(free, WordAlgebra):
                raise KindMismatchError(f"Order {node.op} applies to twisted algebras, not {free.kind}")
            fn = {"revdict": _word_revdict, "aritylex": _word_aritylex, "genlex": _word_genlex}[node.op]
            return lambda mon: (fn(free, mon),)
        if not isinstance(free, TreeOperad):
            raise KindMismatchError(f"Order {node.op} applies to operads, not {free.kind}")
        if node.op == "qm":
            weights = _qm_weights(free, node.params)
            return lambda mon: (_tree_qm(free, mon, weights),)
        fn = {"pathdeglex": _tree_pathdeglex, "revpathperm": _tree_revpathperm}[node.op]
        return lambda mon: (fn(free, mon),)

    def key(self, mon) -> tuple:
        cached = self._keys.get(mon)
        if cached is None:
            cached = (self.free.weight(mon),) + self._tail(mon)
            self._keys[mon] = cached
        return cached

    def compare(self, a, b) -> int:
        if self.free.arity(a) != self.free.arity(b):
            raise ArityMismatchError("Only monomials of equal arity are compared")
        ka, kb = self.key(a), self.key(b)
        return (ka > kb) - (ka < kb)

    def greater(self, a, b) -> bool:
        return self.key(a) > self.key(b)

    def lead(self, element: Element):
        if element.is_zero():
            return None
        return max(element.monomials(), key=self.key)

    def leading_term(self, element: Element) -> Tuple[object, Fraction]:
        if element.is_zero():
            raise OperadForgeError("The zero element has no leading term")
        mon = self.lead(element)
        return mon, element.coefficient(mon)

    def descending(self, monomials: Iterable) -> list:
        return sorted(monomials, key=self.key, reverse=True)

    def for_free(self, free: FreeObject) -> "MonomialOrder":
        return MonomialOrder(free, self.text)

    def __repr__(self) -> str:
        return f"MonomialOrder({self.text!r})"
