import logging
from fractions import Fraction
from functools import lru_cache
from itertools import combinations
from typing import FrozenSet, List, Optional, Sequence, Tuple

import sympy

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]


def to_fraction(value: sympy.Rational) -> Fraction:
    value = sympy.Rational(value)
    return Fraction(int(value.p), int(value.q))


def rank(vectors: Sequence[Sequence[int]]) -> int:
    if not vectors:
        return 0
    return sympy.Matrix(vectors).rank()


def solve_in_span(columns: Sequence[Sequence[int]], target: Sequence[int]) -> Optional[Tuple[Fraction, ...]]:
    """
    Coefficients of `target` in the linearly independent `columns`,
    or None when it is outside their span
    """
    if not columns:
        return () if not any(target) else None
    matrix = sympy.Matrix(columns).T
    try:
        solution, params = matrix.gauss_jordan_solve(sympy.Matrix(target))
    except ValueError:
        return None
    if params.shape[0]:
        raise ValueError("columns are not linearly independent")
    return tuple(to_fraction(entry) for entry in solution)


@lru_cache(maxsize=None)
def cone_bases(vectors: Tuple[IntVector, ...], target: IntVector) -> Tuple[FrozenSet[int], ...]:
    """
    All linearly independent index sets B with `target` in Cone(vectors[B]).
    Any index set whose cone contains `target` contains one of these.
    """
    dimension = len(target)
    if not any(target):
        return (frozenset(),)
    found = []  # type: List[FrozenSet[int]]
    for size in range(1, dimension + 1):
        for subset in combinations(range(len(vectors)), size):
            columns = [vectors[i] for i in subset]
            if rank(columns) < size:
                continue
            coefficients = solve_in_span(columns, target)
            if coefficients is not None and all(c >= 0 for c in coefficients):
                found.append(frozenset(subset))
    logger.debug("%d cone bases for target %s over %d vectors", len(found), target, len(vectors))
    return tuple(found)


def in_cone(vectors: Tuple[IntVector, ...], target: IntVector, subset: Sequence[int]) -> bool:
    chosen = frozenset(subset)
    return any(basis <= chosen for basis in cone_bases(vectors, target))


def is_generic(vectors: Tuple[IntVector, ...], target: IntVector) -> bool:
    """
    No cone on fewer than rank-many vectors contains `target`
    """
    return all(len(basis) == len(target) for basis in cone_bases(vectors, target))


def minimal_transversals(universe: Sequence[int], family: Sequence[FrozenSet[int]]) -> List[FrozenSet[int]]:
    """
    Inclusion-minimal subsets of `universe` meeting every member of `family`.
    A family containing the empty set has no transversal.
    """
    universe = sorted(universe)
    position = {index: bit for bit, index in enumerate(universe)}
    masks = []
    for member in family:
        if not member <= set(universe):
            continue
        masks.append(sum(1 << position[i] for i in member))
    if 0 in masks:
        return []
    minimal = []  # type: List[int]
    for size in range(len(universe) + 1):
        for subset in combinations(range(len(universe)), size):
            mask = sum(1 << bit for bit in subset)
            if any(kept & mask == kept for kept in minimal):
                continue
            if all(mask & member for member in masks):
                minimal.append(mask)
    return [frozenset(universe[bit] for bit in range(len(universe)) if mask >> bit & 1) for mask in minimal]


def is_pointed(vectors: Tuple[IntVector, ...]) -> bool:
    """
    True when no nontrivial nonnegative combination of `vectors` vanishes.
    Checked on circuits: minimal dependent subsets whose single relation
    has coefficients of one sign.
    """
    if any(not any(v) for v in vectors):
        return False
    dimension = len(vectors[0]) if vectors else 0
    for size in range(2, dimension + 2):
        for subset in combinations(range(len(vectors)), size):
            matrix = sympy.Matrix([vectors[i] for i in subset]).T
            kernel = matrix.nullspace()
            if len(kernel) != 1:
                continue
            relation = list(kernel[0])
            if any(entry == 0 for entry in relation):
                continue
            if all(entry > 0 for entry in relation) or all(entry < 0 for entry in relation):
                return False
    return True
