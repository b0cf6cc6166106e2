from fractions import Fraction
from itertools import combinations, product
from typing import Dict, Iterable, List, Sequence, Tuple

from scipy.special import comb

from .errors import ArityMismatchError

Scalar = Fraction
LabelSet = Tuple[int, ...]
Block = Tuple[LabelSet, ...]

ONE = Fraction(1)
MINUS_ONE = Fraction(-1)


def labelset(items: Iterable[int]) -> LabelSet:
    """Sorted duplicate-free tuple of positive labels"""
    result = tuple(sorted(items))
    if len(set(result)) != len(result):
        raise ArityMismatchError(f"Repeated label in {result}")
    if result and result[0] < 1:
        raise ArityMismatchError(f"Labels must be positive, got {result}")
    return result


def underline(n: int) -> LabelSet:
    return tuple(range(1, n + 1))


def standardize(labels: Iterable[int]) -> Dict[int, int]:
    """Order-preserving bijection from a label set onto 1..k"""
    return {label: rank for rank, label in enumerate(sorted(labels), start=1)}


def binomial(n: int, k: int) -> int:
    if k < 0 or n < 0 or k > n:
        return 0
    return int(comb(n, k, exact=True))


def _shuffle_blocks(labels: LabelSet, parts: int) -> List[Block]:
    if parts == 1:
        return [(labels,)] if labels else []
    if len(labels) < parts:
        return []
    result = []
    first, rest = labels[0], labels[1:]
    # first block holds the minimum; later blocks keep increasing minima
    for size in range(0, len(rest) - parts + 2):
        for extra in combinations(rest, size):
            block = (first,) + extra
            remaining = tuple(x for x in rest if x not in extra)
            for tail in _shuffle_blocks(remaining, parts - 1):
                result.append((block,) + tail)
    return result


def shuffle_partitions_of(labels: Sequence[int], parts: int) -> List[Block]:
    labels = labelset(labels)
    if parts < 1:
        return []
    return sorted(_shuffle_blocks(labels, parts))


def shuffle_partitions(n: int, parts: int) -> List[Block]:
    """Set partitions (I_1, ..., I_parts) of 1..n with min(I_s) < min(I_{s+1})"""
    return shuffle_partitions_of(underline(n), parts)


def ordered_partitions_of(labels: Sequence[int], parts: int) -> List[Block]:
    labels = labelset(labels)
    if parts < 1 or len(labels) < parts:
        return []
    result = []
    # surjections labels -> blocks
    for assignment in product(range(parts), repeat=len(labels)):
        if len(set(assignment)) != parts:
            continue
        blocks = tuple(
            tuple(label for label, a in zip(labels, assignment) if a == b) for b in range(parts)
        )
        result.append(blocks)
    return sorted(result)


def ordered_partitions(n: int, parts: int) -> List[Block]:
    """Ordered set partitions of 1..n into nonempty blocks"""
    return ordered_partitions_of(underline(n), parts)


def two_block_splits(labels: Sequence[int]) -> List[Tuple[LabelSet, LabelSet]]:
    """All ordered pairs (I, J) of nonempty disjoint sets covering labels"""
    return [(block[0], block[1]) for block in ordered_partitions_of(labels, 2)]


def koszul_sign(degrees: Sequence[int], permutation: Sequence[int]) -> Scalar:
    """Sign of rearranging graded items so that result[i] = source[permutation[i]]"""
    if len(degrees) != len(permutation):
        raise ArityMismatchError(
            f"Permutation of length {len(permutation)} applied to {len(degrees)} items"
        )
    if sorted(permutation) != list(range(len(degrees))):
        raise ArityMismatchError(f"Not a bijection on positions: {list(permutation)}")
    # bubble the target order into place by adjacent transpositions
    current = list(range(len(degrees)))
    target_position = {source: i for i, source in enumerate(permutation)}
    sign = 1
    for end in range(len(current) - 1, 0, -1):
        for i in range(end):
            a, b = current[i], current[i + 1]
            if target_position[a] > target_position[b]:
                current[i], current[i + 1] = b, a
                if degrees[a] % 2 and degrees[b] % 2:
                    sign = -sign
    return Fraction(sign)


def inversion_sign(tags: Sequence, odd: Sequence[bool]) -> int:
    """Parity of inversions among odd items of a tag sequence, as +1 or -1"""
    odd_tags = [tag for tag, flag in zip(tags, odd) if flag]
    inversions = 0
    for i in range(len(odd_tags)):
        for j in range(i + 1, len(odd_tags)):
            if odd_tags[i] > odd_tags[j]:
                inversions += 1
    return -1 if inversions % 2 else 1
