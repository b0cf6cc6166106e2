from fractions import Fraction
from typing import Dict, Hashable, Iterable, List, Sequence, Tuple

from .element import Element

SparseRow = Dict[int, Fraction]


def row_reduce(rows: Iterable[SparseRow]) -> Tuple[List[SparseRow], List[int]]:
    """Fully reduced row echelon form of sparse rational rows

    Returns the nonzero reduced rows (pivot entry 1, sorted by pivot column) and their pivots.
    """
    pivot_rows: Dict[int, SparseRow] = {}
    for raw in rows:
        row = {c: Fraction(v) for c, v in raw.items() if v != 0}
        for col in sorted(c for c in row if c in pivot_rows):
            # entries may already have been cleared by an earlier pivot
            factor = row.get(col)
            if not factor:
                continue
            for c, v in pivot_rows[col].items():
                value = row.get(c, Fraction(0)) - factor * v
                if value:
                    row[c] = value
                else:
                    row.pop(c, None)
        if not row:
            continue
        pivot = min(row)
        scale = row[pivot]
        row = {c: v / scale for c, v in row.items()}
        # clear the new pivot column from the rows already kept
        for other in pivot_rows.values():
            factor = other.get(pivot)
            if factor:
                for c, v in row.items():
                    value = other.get(c, Fraction(0)) - factor * v
                    if value:
                        other[c] = value
                    else:
                        other.pop(c, None)
        pivot_rows[pivot] = row
    pivots = sorted(pivot_rows)
    return [pivot_rows[p] for p in pivots], pivots


def rank(rows: Iterable[SparseRow]) -> int:
    return len(row_reduce(rows)[1])


def kernel(rows: Sequence[SparseRow], ncols: int) -> List[SparseRow]:
    """Basis of {x : row . x = 0 for every row}, one vector per free column"""
    reduced, pivots = row_reduce(rows)
    pivot_set = set(pivots)
    basis = []
    for free in range(ncols):
        if free in pivot_set:
            continue
        vector: SparseRow = {free: Fraction(1)}
        for row, pivot in zip(reduced, pivots):
            value = row.get(free)
            if value:
                vector[pivot] = -value
        basis.append(vector)
    return basis


class MonomialIndex:
    """Bijection between a list of monomials and matrix columns"""

    def __init__(self, monomials: Iterable[Hashable]):
        self.monomials: List[Hashable] = list(monomials)
        self.position: Dict[Hashable, int] = {m: i for i, m in enumerate(self.monomials)}

    def __len__(self) -> int:
        return len(self.monomials)

    def row(self, element: Element) -> SparseRow:
        row: SparseRow = {}
        for mon, coef in element.items():
            if mon not in self.position:
                raise KeyError(f"Monomial {mon!r} outside the indexed basis")
            row[self.position[mon]] = coef
        return row

    def element(self, row: SparseRow) -> Element:
        return Element({self.monomials[c]: v for c, v in row.items()})


def span_rank(elements: Iterable[Element]) -> int:
    elements = list(elements)
    index = MonomialIndex({m for e in elements for m in e.monomials()})
    return rank(index.row(e) for e in elements)
