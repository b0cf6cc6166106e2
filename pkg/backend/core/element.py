from fractions import Fraction
from typing import Callable, Dict, Hashable, Iterable, Iterator, Optional, Tuple, Union

Monomial = Hashable
Number = Union[int, Fraction]


class Element:
    """Finite linear combination of monomials with exact rational coefficients"""

    __slots__ = ("_terms",)

    def __init__(self, terms: Optional[Dict[Monomial, Number]] = None):
        self._terms: Dict[Monomial, Fraction] = {}
        if terms:
            for mon, coef in terms.items():
                coef = Fraction(coef)
                if coef != 0:
                    self._terms[mon] = coef

    @classmethod
    def zero(cls) -> "Element":
        return cls()

    @classmethod
    def monomial(cls, mon: Monomial, coef: Number = 1) -> "Element":
        return cls({mon: coef})

    @classmethod
    def from_terms(cls, pairs: Iterable[Tuple[Monomial, Number]]) -> "Element":
        result: Dict[Monomial, Fraction] = {}
        for mon, coef in pairs:
            result[mon] = result.get(mon, Fraction(0)) + Fraction(coef)
        return cls(result)

    def items(self) -> Iterator[Tuple[Monomial, Fraction]]:
        return iter(self._terms.items())

    def monomials(self) -> Iterator[Monomial]:
        return iter(self._terms)

    def coefficient(self, mon: Monomial) -> Fraction:
        return self._terms.get(mon, Fraction(0))

    def is_zero(self) -> bool:
        return not self._terms

    def __len__(self) -> int:
        return len(self._terms)

    def __bool__(self) -> bool:
        return bool(self._terms)

    def __contains__(self, mon: Monomial) -> bool:
        return mon in self._terms

    def __add__(self, other: "Element") -> "Element":
        result = dict(self._terms)
        for mon, coef in other._terms.items():
            value = result.get(mon, Fraction(0)) + coef
            if value:
                result[mon] = value
            else:
                result.pop(mon, None)
        return Element(result)

    def __neg__(self) -> "Element":
        return Element({mon: -coef for mon, coef in self._terms.items()})

    def __sub__(self, other: "Element") -> "Element":
        return self + (-other)

    def scale(self, factor: Number) -> "Element":
        factor = Fraction(factor)
        if factor == 0:
            return Element()
        return Element({mon: coef * factor for mon, coef in self._terms.items()})

    def __mul__(self, factor: Number) -> "Element":
        return self.scale(factor)

    __rmul__ = __mul__

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Element):
            return NotImplemented
        return self._terms == other._terms

    def __hash__(self) -> int:
        return hash(frozenset(self._terms.items()))

    def map_monomials(self, fn: Callable[[Monomial], Tuple[Monomial, Number]]) -> "Element":
        """Apply a signed monomial map term by term"""
        return Element.from_terms(
            (new_mon, coef * sign) for mon, coef in self._terms.items() for new_mon, sign in [fn(mon)]
        )

    def filter(self, predicate: Callable[[Monomial], bool]) -> "Element":
        return Element({mon: coef for mon, coef in self._terms.items() if predicate(mon)})

    def __repr__(self) -> str:
        if not self._terms:
            return "Element(0)"
        body = " + ".join(f"{coef}*{mon!r}" for mon, coef in self._terms.items())
        return f"Element({body})"


def linear_combination(parts: Iterable[Tuple[Number, Element]]) -> Element:
    acc: Dict[Monomial, Fraction] = {}
    for factor, element in parts:
        factor = Fraction(factor)
        if factor == 0:
            continue
        for mon, coef in element.items():
            acc[mon] = acc.get(mon, Fraction(0)) + factor * coef
    return Element(acc)
