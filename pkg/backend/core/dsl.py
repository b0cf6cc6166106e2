"""Presentation files.

A presentation file is line oriented::

    kind: nsoperad
    name: As
    gen mu arity=2 degree=0
    order = pathdeglex
    rel mu(mu(1,2),3) = mu(1,mu(2,3))

Word monomials are written ``m[1,2].m[3]`` (``D[]`` for arity zero factors), tree
monomials either nested (``g(1,g(2,3))``) or with infix compositions (``mu o1 mu``).
``#`` starts a comment.
"""

import logging
import re
from fractions import Fraction
from typing import Dict, List, Optional, Tuple

from .element import Element
from .errors import ArityMismatchError, OperadForgeError, ParseError, UnknownGeneratorError
from .monomials import KINDS, FreeObject, GeneratorSymbol, WordAlgebra, free_object
from .orderings import canonical_order_text
from .presentation import Presentation

logger = logging.getLogger(__name__)

_TOKENS = re.compile(
    r"(?P<space>\s+)|(?P<number>\d+(?:/\d+)?)|(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<punct>[\[\](),.*+\-=])"
)
_COMPOSE = re.compile(r"o(\d+)$")
_GEN_OPTION = re.compile(r"(arity|degree|weight)=(-?\d+)$")


class _Tokens:
    def __init__(self, text: str, line: int, offset: int):
        self.line = line
        self.items: List[Tuple[str, str, int]] = []
        pos = 0
        while pos < len(text):
            match = _TOKENS.match(text, pos)
            if not match:
                raise ParseError(f"unexpected character {text[pos]!r}", line=line, column=offset + pos + 1)
            if match.lastgroup != "space":
                self.items.append((match.lastgroup, match.group(0), offset + pos + 1))
            pos = match.end()
        self.index = 0
        self.end_column = offset + len(text) + 1

    def peek(self) -> Tuple[str, str, int]:
        if self.index < len(self.items):
            return self.items[self.index]
        return ("end", "", self.end_column)

    def take(self) -> Tuple[str, str, int]:
        token = self.peek()
        self.index += 1
        return token

    def error(self, message: str) -> ParseError:
        return ParseError(message, line=self.line, column=self.peek()[2])

    def expect(self, value: str) -> None:
        kind, text, _ = self.peek()
        if text != value:
            raise self.error(f"expected {value!r}, found {text or 'end of line'!r}")
        self.take()

    def at_end(self) -> bool:
        return self.index >= len(self.items)


class _ExpressionParser:
    """Signed sums of monomials for one free object"""

    def __init__(self, free: FreeObject, tokens: _Tokens):
        self.free = free
        self.tokens = tokens

    def sum(self) -> Element:
        result = Element()
        first = True
        while True:
            _, text, _ = self.tokens.peek()
            sign = 1
            if text in ("+", "-"):
                self.tokens.take()
                sign = -1 if text == "-" else 1
            elif not first:
                break
            result = result + self.term().scale(sign)
            first = False
            if self.tokens.peek()[1] not in ("+", "-"):
                break
        return result

    def term(self) -> Element:
        kind, text, column = self.tokens.peek()
        coefficient = Fraction(1)
        if kind == "number":
            self.tokens.take()
            value = Fraction(text)
            if self.tokens.peek()[1] == "*":
                self.tokens.take()
                coefficient = value
                if self.tokens.peek()[1] == "1":
                    self.tokens.take()
                    return Element.monomial(self.free.unit(), value)
            else:
                return Element.monomial(self.free.unit(), value)
        mon, sign = self.monomial()
        return Element.monomial(mon, coefficient * sign)

    def monomial(self) -> Tuple[object, int]:
        if isinstance(self.free, WordAlgebra):
            return self.word(), 1
        return self.composite()

    # words --------------------------------------------------------------

    def word(self) -> tuple:
        factors = [self.factor()]
        while self.tokens.peek()[1] == ".":
            self.tokens.take()
            factors.append(self.factor())
        column = self.tokens.peek()[2]
        try:
            return self.free.word(factors)
        except OperadForgeError as e:
            raise type(e)(e.message, line=self.tokens.line, column=column)

    def factor(self) -> Tuple[str, Tuple[int, ...]]:
        kind, name, column = self.tokens.take()
        if kind != "name":
            raise ParseError(f"expected a generator name, found {name!r}", line=self.tokens.line, column=column)
        self._known(name, column)
        labels: List[int] = []
        if self.tokens.peek()[1] == "[":
            self.tokens.take()
            while self.tokens.peek()[1] != "]":
                labels.append(self.label())
                if self.tokens.peek()[1] == ",":
                    self.tokens.take()
            self.tokens.expect("]")
        gen = self.free.generator(name)
        if len(labels) != gen.arity:
            raise ArityMismatchError(
                f"{name} has arity {gen.arity} but {len(labels)} labels were given",
                line=self.tokens.line,
                column=column,
            )
        return (name, tuple(labels))

    def label(self) -> int:
        kind, text, column = self.tokens.take()
        if kind != "number" or "/" in text:
            raise ParseError(f"expected a label, found {text!r}", line=self.tokens.line, column=column)
        return int(text)

    def _known(self, name: str, column: int) -> None:
        if name not in self.free.gens:
            raise UnknownGeneratorError(f"unknown generator {name!r}", line=self.tokens.line, column=column)

    # trees --------------------------------------------------------------

    def composite(self) -> Tuple[object, int]:
        tree, sign = self.primary()
        while True:
            _, text, column = self.tokens.peek()
            match = _COMPOSE.match(text)
            if not match:
                break
            self.tokens.take()
            other, other_sign = self.primary()
            try:
                tree, composed_sign = self.free.compose(tree, int(match.group(1)), other)
            except OperadForgeError as e:
                raise type(e)(e.message, line=self.tokens.line, column=column)
            sign *= other_sign * composed_sign
        return tree, sign

    def primary(self) -> Tuple[object, int]:
        kind, text, column = self.tokens.peek()
        if text == "(":
            self.tokens.take()
            result = self.composite()
            self.tokens.expect(")")
            return result
        if kind != "name":
            raise ParseError(f"expected a tree, found {text!r}", line=self.tokens.line, column=column)
        if self.tokens.index + 1 < len(self.tokens.items) and self.tokens.items[self.tokens.index + 1][1] == "(":
            nested = self.nested()
            try:
                return self.free.from_nested(nested)
            except OperadForgeError as e:
                raise type(e)(e.message, line=self.tokens.line, column=column)
        self.tokens.take()
        self._known(text, column)
        return self.free.corolla(text), 1

    def nested(self):
        kind, name, column = self.tokens.take()
        self._known(name, column)
        self.tokens.expect("(")
        children = []
        while True:
            kind, text, _ = self.tokens.peek()
            if kind == "number":
                children.append(self.label())
            else:
                children.append(self.nested())
            if self.tokens.peek()[1] == ",":
                self.tokens.take()
                continue
            break
        self.tokens.expect(")")
        gen = self.free.generator(name)
        if len(children) != gen.arity:
            raise ArityMismatchError(
                f"{name} has arity {gen.arity} but {len(children)} inputs were given",
                line=self.tokens.line,
                column=column,
            )
        return (name, children)


def _parse_generator(body: str, line: int, column: int) -> GeneratorSymbol:
    parts = body.split()
    if not parts:
        raise ParseError("generator line needs a name", line=line, column=column)
    name = parts[0]
    if not re.match(r"[A-Za-z_][A-Za-z0-9_]*$", name) or _COMPOSE.match(name):
        raise ParseError(f"invalid generator name {name!r}", line=line, column=column)
    options: Dict[str, int] = {}
    symmetric = False
    for part in parts[1:]:
        if part == "symmetric":
            symmetric = True
            continue
        match = _GEN_OPTION.match(part)
        if not match:
            raise ParseError(f"unknown generator option {part!r}", line=line, column=column + body.find(part))
        options[match.group(1)] = int(match.group(2))
    if "arity" not in options or "degree" not in options:
        raise ParseError(f"generator {name} needs arity= and degree=", line=line, column=column)
    return GeneratorSymbol(
        name=name,
        arity=options["arity"],
        degree=options["degree"],
        weight=options.get("weight", 1),
        symmetric=symmetric,
    )


def parse_presentation(text: str) -> Presentation:
    """Parse presentation text; every error carries its line and column"""
    kind: Optional[str] = None
    name = ""
    order = ""
    generators: List[GeneratorSymbol] = []
    pending: List[Tuple[str, str, int, int]] = []
    for number, raw in enumerate(text.splitlines(), start=1):
        content = raw.split("#", 1)[0].rstrip()
        stripped = content.lstrip()
        if not stripped:
            continue
        column = len(content) - len(stripped) + 1
        if stripped.startswith("kind:"):
            kind = stripped[len("kind:"):].strip()
            if kind not in KINDS:
                raise ParseError(f"unknown kind {kind!r}", line=number, column=column)
        elif stripped.startswith("name:"):
            name = stripped[len("name:"):].strip()
        elif stripped.startswith("gen "):
            generators.append(_parse_generator(stripped[4:], number, column + 4))
        elif re.match(r"order\s*=", stripped):
            order = stripped.split("=", 1)[1].strip()
            try:
                canonical_order_text(order)
            except ParseError as e:
                raise ParseError(e.message, line=number, column=column)
        elif stripped.startswith("rel "):
            pending.append(("rel", stripped[4:], number, column + 4))
        elif stripped.startswith("diff "):
            pending.append(("diff", stripped[5:], number, column + 5))
        else:
            raise ParseError(f"unrecognized line {stripped!r}", line=number, column=column)
    if kind is None:
        raise ParseError("missing 'kind:' header", line=1, column=1)
    try:
        free = free_object(kind, generators)
    except OperadForgeError as e:
        raise type(e)(e.message, line=1, column=1)
    relations: List[Element] = []
    differential: Dict[str, Element] = {}
    for what, body, number, column in pending:
        tokens = _Tokens(body, number, column - 1)
        if what == "diff":
            kind_token, target, target_column = tokens.take()
            if kind_token != "name" or target not in free.gens:
                raise ParseError(f"diff needs a declared generator, found {target!r}", line=number, column=target_column)
            tokens.expect("=")
            differential[target] = _ExpressionParser(free, tokens).sum()
        else:
            parser = _ExpressionParser(free, tokens)
            element = parser.sum()
            if tokens.peek()[1] == "=":
                tokens.take()
                element = element - parser.sum()
            relations.append(element)
        if not tokens.at_end():
            raise tokens.error(f"unexpected {tokens.peek()[1]!r}")
    presentation = Presentation(
        kind=kind, generators=generators, relations=relations, differential=differential, order=order, name=name
    )
    try:
        presentation.validate()
    except OperadForgeError as e:
        if e.line is None:
            raise type(e)(e.message, line=1, column=1)
        raise
    logger.debug(f"Parsed presentation {name or kind} with {len(generators)} generators")
    return presentation


def format_presentation(presentation: Presentation) -> str:
    """Canonical text of a presentation; parsing it back gives the same text"""
    free = presentation.free
    lines = [f"kind: {presentation.kind}"]
    if presentation.name:
        lines.append(f"name: {presentation.name}")
    for gen in presentation.generators:
        parts = [f"gen {gen.name}", f"arity={gen.arity}", f"degree={gen.degree}"]
        if gen.symmetric:
            parts.append("symmetric")
        if gen.weight != 1:
            parts.append(f"weight={gen.weight}")
        lines.append(" ".join(parts))
    if presentation.order:
        lines.append(f"order = {canonical_order_text(presentation.order)}")
    for element in presentation.relations:
        lines.append(f"rel {_format_relation(free, element)}")
    for name in sorted(presentation.differential):
        lines.append(f"diff {name} = {free.format_element(presentation.differential[name])}")
    return "\n".join(lines) + "\n"


def _format_relation(free: FreeObject, element: Element) -> str:
    if element.is_zero():
        return "0"
    return free.format_element(element)
