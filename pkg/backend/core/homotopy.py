"""
Homotopy quotients of BV-type presentations by the Laplacian D.

Formal generators r_1, r_2, ... (degree 2j) are adjoined to blmBV_k, bBV_k or bncBV_k
and the differential is fixed by d exp(r(w)) = exp(r(w))(d + wD), solved one power of
w at a time.
"""

import logging
from dataclasses import dataclass, field
from fractions import Fraction
from math import factorial
from typing import Dict, List, Optional

from .catalog import DELTA, PRODUCT, bv_presentation, concatenate
from .element import Element
from .errors import DifferentialError, InvalidFamilyError, TruncationError
from .givental import bamboo_image, r_symbol, tree_image
from .koszul import ComplexSlice, check_square_zero, complex_slice, homology_dims
from .linalg import MonomialIndex, rank
from .monomials import NS, OPERAD, TWISTED, FreeObject, GeneratorSymbol
from .presentation import Presentation
from .rewriting import GroebnerBasis, weight_bound_for_window

logger = logging.getLogger(__name__)

KINDS = (TWISTED, OPERAD, NS)


def _compositions(total: int) -> List[tuple]:
    if total == 0:
        return [()]
    return [(first,) + rest for first in range(1, total + 1) for rest in _compositions(total - first)]


@dataclass
class HomotopyQuotient:
    """Base presentation, the adjoined r_j and the dg presentation they span together"""

    kind: str
    k: int
    base: Presentation
    r_symbols: List[GeneratorSymbol]
    presentation: Presentation
    # coefficient of w^j in exp(r(w))
    exponentials: Dict[int, Element] = field(default_factory=dict)
    _bases: Dict[tuple, GroebnerBasis] = field(default_factory=dict, repr=False)

    @property
    def free(self) -> FreeObject:
        return self.presentation.free

    @property
    def differential(self) -> Dict[str, Element]:
        return self.presentation.differential

    def basis(self, max_arity: int, max_weight: int) -> GroebnerBasis:
        key = (max_arity, max_weight)
        if key not in self._bases:
            core = self.base.basis(max_arity, max_weight=max_weight)
            self._bases[key] = core.extend_generators(self.r_symbols)
        return self._bases[key]

    def window_basis(self, arity: int, low: int, high: int) -> GroebnerBasis:
        """Basis heavy enough for the complex slice of one arity between two degrees"""
        bound = weight_bound_for_window(self.free, arity, low - 1, high + 1)
        return self.basis(max(arity, 1), bound + 1)

    def slice(self, arity: int, low: int, high: int) -> ComplexSlice:
        return complex_slice(self.presentation, self.window_basis(arity, low, high), arity, low, high)


def _product(kind: str, free: FreeObject, a: Element, b: Element) -> Element:
    if kind == TWISTED:
        return concatenate(a, b)
    return free.compose_elements(a, 1, b)


def _exponential_coefficients(kind: str, free: FreeObject, r: Dict[int, Element], top: int) -> Dict[int, Element]:
    """E_j = sum over s of 1/s! times all products r_{c_1}...r_{c_s} with c_1 + ... + c_s = j"""
    result = {}
    for j in range(1, top + 1):
        total = Element()
        for parts in _compositions(j):
            term = r[parts[0]]
            for c in parts[1:]:
                term = _product(kind, free, term, r[c])
            total = total + term.scale(Fraction(1, factorial(len(parts))))
        result[j] = total
    return result


def homotopy_quotient_dg(kind: str, k: int, r_count: int, max_arity: int) -> HomotopyQuotient:
    """BV_k with r_1..r_N adjoined and d(r_j) solved from d exp(r(w)) = exp(r(w))(d + wD)"""
    if kind not in KINDS:
        raise InvalidFamilyError(f"Unknown kind {kind!r}")
    if r_count < 1:
        raise TruncationError("At least one formal generator r_1 is needed")
    base = bv_presentation(kind, max_arity, k, name=f"BV_{k}[{kind}]")
    r_symbols = [r_symbol(kind, f"r{j}", 2 * j) for j in range(1, r_count + 1)]
    generators = list(base.generators) + r_symbols
    shell = Presentation(kind=kind, generators=generators)
    free = shell.free
    r = {j: Element.monomial(free.corolla(f"r{j}")) for j in range(1, r_count + 1)}
    delta = Element.monomial(free.corolla(DELTA))
    exponentials = _exponential_coefficients(kind, free, r, r_count)

    # solves d(E_j) = E_{j-1} D in the free object
    differential: Dict[str, Element] = {}
    for j in range(1, r_count + 1):
        lower = delta if j == 1 else _product(kind, free, exponentials[j - 1], delta)
        correction = free.derive_element(exponentials[j] - r[j], differential)
        differential[f"r{j}"] = lower - correction
        logger.debug(f"d(r{j}) = {free.format_element(differential[f'r{j}'])}")

    presentation = Presentation(
        kind=kind,
        generators=generators,
        relations=list(base.relations),
        differential=differential,
        order=base.order,
        name=f"{base.name}+r{r_count}",
        max_weight=base.max_weight,
    )
    logger.info(f"Built homotopy quotient of {base.name} with {r_count} formal generators")
    return HomotopyQuotient(kind, k, base, r_symbols, presentation, exponentials)


def check_homotopy_square_zero(quotient: HomotopyQuotient, max_arity: int, max_degree: int) -> bool:
    """d^2 = 0 on the formal generators and on every slice of arity up to max_arity"""
    start = 0 if quotient.kind == TWISTED else 1
    basis = quotient.window_basis(max_arity, 0, max_degree)
    for name, image in quotient.differential.items():
        square = basis.reduce(quotient.free.derive_element(image, quotient.differential))
        if not square.is_zero():
            raise DifferentialError(
                f"d(d({name})) = {quotient.free.format_element(square)}", {"generator": name}
            )
    for arity in range(start, max_arity + 1):
        check_square_zero(quotient.slice(arity, 0, max_degree))
        logger.debug(f"d^2 = 0 on arity {arity} of {quotient.presentation.name}")
    return True


def _generator_slots(kind: str, k: int, max_arity: int) -> List[tuple]:
    """(arity, p) of the generators of the order-k quotient up to max_arity"""
    base = 1 if kind == TWISTED else 2
    result = []
    p = 0
    while base + p * (k - 1) <= max_arity:
        result.append((base + p * (k - 1), p))
        if k == 1:
            break
        p += 1
    return result


def generator_image(quotient: HomotopyQuotient, n: int, power: int) -> Element:
    """Image of the arity-n, degree-2p generator of the order-k family in the homotopy quotient"""
    product = PRODUCT[quotient.kind]
    if quotient.kind == TWISTED:
        return bamboo_image(quotient.free, quotient.k, n, power, product)
    return tree_image(quotient.free, quotient.k, n, power, product)


def verify_quotient_map_properties(k: int, kind: str, max_arity: int) -> Dict[str, object]:
    """
    Finite checks behind the quasi-isomorphism from the order-k hypercommutative-type
    family to the homotopy quotient.

    For each generator slot the image (bamboos for twisted algebras, decorated trees for
    operads) is reduced to normal form; it must be a nonzero cycle that is not a boundary,
    and the homology of its slice must be one-dimensional.
    """
    if k < 2:
        raise InvalidFamilyError("Quotient map checks need k >= 2")
    slots = _generator_slots(kind, k, max_arity)
    top = max((p for _, p in slots), default=1)
    quotient = homotopy_quotient_dg(kind, k, max(top, 1), max_arity)
    checks = []
    for n, p in slots:
        degree = 2 * p
        piece = quotient.slice(n, degree, degree)
        homology = homology_dims(piece).get(degree, 0)
        basis = quotient.window_basis(n, degree, degree)
        image = basis.reduce(generator_image(quotient, n, p))
        boundary = basis.reduce(quotient.free.derive_element(image, quotient.differential))
        entry = {
            "arity": n,
            "degree": degree,
            "one_dimensional": homology == 1,
            "cycle": boundary.is_zero() and not image.is_zero(),
            "non_boundary": not image.is_zero() and _outside_boundaries(piece, degree, image),
        }
        checks.append(entry)
        logger.info(f"Quotient map check {kind} k={k} arity {n} degree {degree}: {entry}")
    ok = all(e["cycle"] and e["non_boundary"] and e["one_dimensional"] for e in checks)
    return {"kind": kind, "k": k, "max_arity": max_arity, "checks": checks, "ok": ok}


def _outside_boundaries(piece: ComplexSlice, degree: int, image: Element) -> bool:
    index = MonomialIndex(piece.bases.get(degree, []))
    try:
        row = index.row(image)
    except KeyError:
        raise TruncationError(f"Image leaves the slice of degree {degree}")
    boundaries = list(piece.matrices.get(degree + 1, []))
    return rank(boundaries + [row]) > rank(boundaries)


__all__ = [
    "HomotopyQuotient",
    "check_homotopy_square_zero",
    "generator_image",
    "homotopy_quotient_dg",
    "verify_quotient_map_properties",
]
