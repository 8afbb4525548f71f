import logging
import math
from fractions import Fraction
from functools import lru_cache, reduce
from itertools import product
from typing import Dict, FrozenSet, List, Optional, Sequence, Set, Tuple

import sympy
from pydantic import BaseModel, root_validator, validator
from sympy.matrices.normalforms import smith_normal_form
from sympy.polys.domains import ZZ

from pydanticquasimap.base_models import PresentationError, RationalValue, UnboundedFiberError
from pydanticquasimap.gitdata.cones import cone_bases, in_cone, is_generic, is_pointed, minimal_transversals, rank, solve_in_span, to_fraction

logger = logging.getLogger(__name__)

IntVector = Tuple[int, ...]
IntMatrix = Tuple[IntVector, ...]
WeylElement = IntMatrix

# Cap on the closure of the Weyl generators
MAX_WEYL_ORDER = 10000


def frac(value: Fraction) -> Fraction:
    return value - math.floor(value)


def lcm(values: Sequence[int]) -> int:
    return reduce(lambda a, b: int(sympy.ilcm(a, b)), values, 1)


class GitPresentation(BaseModel):
    """
    The GIT input: T-weights of the vector space X, the roots of G,
    the T-weights of the bundle E cutting out Y, the stability character
    and the Weyl group as generator matrices acting on characters.

    With `equivariant_rank` q > 0 every weight and e-weight carries q
    extra columns, the weights of an auxiliary torus R.
    """

    torus_rank: int
    weights: Tuple[IntVector, ...]
    theta: IntVector
    roots: Tuple[IntVector, ...] = ()
    positive_roots: Tuple[int, ...] = ()
    weyl_generators: Tuple[IntMatrix, ...] = ()
    e_weights: Tuple[IntVector, ...] = ()
    chi_g_basis: Tuple[IntVector, ...] = ()
    equivariant_rank: int = 0

    class Config:
        frozen = True

    @validator("torus_rank")
    def positive_rank(cls, v):
        if v < 1:
            raise ValueError("torus rank must be positive")
        return v

    @validator("equivariant_rank")
    def nonnegative_rank(cls, v):
        if v < 0:
            raise ValueError("equivariant rank must be nonnegative")
        return v

    @root_validator(skip_on_failure=True)
    def check_dimensions(cls, values):
        r = values["torus_rank"]
        q = values["equivariant_rank"]
        if len(values["theta"]) != r:
            raise ValueError(f"theta has {len(values['theta'])} entries, expected {r}")
        for name in ("weights", "e_weights"):
            for index, row in enumerate(values[name]):
                if len(row) != r + q:
                    raise ValueError(f"{name}[{index}] has {len(row)} entries, expected {r + q}")
        for name in ("roots", "chi_g_basis"):
            for index, row in enumerate(values[name]):
                if len(row) != r:
                    raise ValueError(f"{name}[{index}] has {len(row)} entries, expected {r}")
        for index in values["positive_roots"]:
            if not 0 <= index < len(values["roots"]):
                raise ValueError(f"positive root index {index} out of range")
        for index, matrix in enumerate(values["weyl_generators"]):
            if len(matrix) != r or any(len(row) != r for row in matrix):
                raise ValueError(f"weyl_generators[{index}] is not {r}x{r}")
        if not values["weights"]:
            raise ValueError("at least one weight is required")
        return values

    @property
    def r(self) -> int:
        return self.torus_rank

    @property
    def n(self) -> int:
        return len(self.weights)

    @property
    def q(self) -> int:
        return self.equivariant_rank

    @property
    def is_abelian(self) -> bool:
        return not self.roots

    @property
    def torus_weights(self) -> Tuple[IntVector, ...]:
        """
        Weights with the equivariant columns dropped
        """
        return tuple(w[: self.r] for w in self.weights)

    @property
    def positive_root_vectors(self) -> Tuple[IntVector, ...]:
        return tuple(self.roots[i] for i in self.positive_roots)

    @property
    def characters_of_g(self) -> Tuple[IntVector, ...]:
        """
        Basis of chi(G) (x) Q inside chi(T) (x) Q: the user's chi_g_basis,
        else the W-invariant characters
        """
        if self.chi_g_basis:
            return self.chi_g_basis
        return invariant_characters(self)

    def forget_equivariance(self) -> "GitPresentation":
        return self.copy(
            update=dict(
                weights=tuple(w[: self.r] for w in self.weights),
                e_weights=tuple(w[: self.r] for w in self.e_weights),
                equivariant_rank=0,
            )
        )


class CurveClass(BaseModel):
    """
    The values of a class on the standard basis of the character lattice
    """

    values: Tuple[RationalValue, ...]

    class Config:
        frozen = True
        json_encoders = {Fraction: str}

    def pairing(self, xi: Sequence[int]) -> Fraction:
        """
        Value on the character xi. Equivariant columns beyond the torus rank
        are ignored
        """
        return sum((Fraction(x) * v for x, v in zip(xi, self.values)), Fraction(0))

    @property
    def order(self) -> int:
        """
        Minimal positive a with a * values integral
        """
        return lcm([v.denominator for v in self.values])

    def theta_degree(self, presentation: GitPresentation) -> Fraction:
        return self.pairing(presentation.theta)

    def __str__(self):
        return "(" + ", ".join(str(v) for v in self.values) + ")"


class Sector(BaseModel):
    """
    A twisted sector: the sector element g (fractional class values on the
    standard basis), the values of the weights of X on g and the
    coordinates g fixes
    """

    element: Tuple[RationalValue, ...]
    fracs: Tuple[RationalValue, ...]
    fixed_support: Tuple[int, ...]
    order: int

    class Config:
        frozen = True
        json_encoders = {Fraction: str}

    @property
    def is_untwisted(self) -> bool:
        return self.order == 1

    @property
    def age_label(self) -> str:
        return "(" + ", ".join(str(f) for f in self.fracs) + ")"


class ValidationReport(BaseModel):
    errors: List[str] = []
    warnings: List[str] = []

    @property
    def ok(self) -> bool:
        return not self.errors


class WeylOrbit(BaseModel):
    representative: CurveClass
    members: Tuple[CurveClass, ...]
    stabilizer: Tuple[WeylElement, ...]

    class Config:
        frozen = True


def class_sort_key(beta: CurveClass, presentation: GitPresentation):
    return (beta.theta_degree(presentation), beta.values)


# Weyl group


def _matmul(a: IntMatrix, b: IntMatrix) -> IntMatrix:
    return tuple(tuple(int(x) for x in row) for row in (sympy.Matrix(a) * sympy.Matrix(b)).tolist())


@lru_cache(maxsize=None)
def weyl_group(presentation: GitPresentation) -> Tuple[WeylElement, ...]:
    """
    All elements of the finite group generated by the Weyl generators,
    identity first
    """
    r = presentation.r
    identity = tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    elements = [identity]
    seen = {identity}
    frontier = [identity]
    while frontier:
        new_frontier = []
        for element in frontier:
            for generator in presentation.weyl_generators:
                candidate = _matmul(generator, element)
                if candidate not in seen:
                    seen.add(candidate)
                    elements.append(candidate)
                    new_frontier.append(candidate)
                    if len(elements) > MAX_WEYL_ORDER:
                        raise PresentationError("Weyl generators do not generate a finite group")
        frontier = new_frontier
    return tuple(elements)


@lru_cache(maxsize=None)
def _inverse(w: WeylElement) -> WeylElement:
    inverse = sympy.Matrix(w).inv()
    return tuple(tuple(int(x) for x in row) for row in inverse.tolist())


def act_on_character(w: WeylElement, xi: Sequence[int]) -> IntVector:
    """
    w . xi on the torus part; equivariant columns are untouched
    """
    r = len(w)
    head = tuple(sum(w[i][j] * xi[j] for j in range(r)) for i in range(r))
    return head + tuple(xi[r:])


def act_on_class(w: WeylElement, beta: CurveClass) -> CurveClass:
    """
    (w . beta)(xi) = beta(w^-1 . xi), so the values transform by (w^-1)^T
    """
    inverse = _inverse(w)
    r = len(w)
    values = tuple(sum((inverse[j][i] * beta.values[j] for j in range(r)), Fraction(0)) for i in range(r))
    return CurveClass(values=values)


def invariant_characters(presentation: GitPresentation) -> Tuple[IntVector, ...]:
    r = presentation.r
    if not presentation.weyl_generators:
        return tuple(tuple(int(i == j) for j in range(r)) for i in range(r))
    stacked = sympy.Matrix.vstack(*[sympy.Matrix(w) - sympy.eye(r) for w in presentation.weyl_generators])
    basis = []
    for vector in stacked.nullspace():
        scale = lcm([to_fraction(x).denominator for x in vector])
        basis.append(tuple(int(to_fraction(x) * scale) for x in vector))
    return tuple(basis)


# Validation


def _same_multiset(rows: Sequence[IntVector], images: Sequence[IntVector]) -> bool:
    return sorted(rows) == sorted(images)


def validate(presentation: GitPresentation, allow_nonproper: bool = False) -> ValidationReport:
    """
    Semantic checks on a structurally valid presentation
    """
    report = ValidationReport()
    P = presentation
    weights = P.torus_weights

    if rank(weights) != P.r:
        report.errors.append(f"weight matrix has rank {rank(weights)}, expected {P.r}")

    root_set = set(P.roots)
    if any(tuple(-x for x in root) not in root_set for root in P.roots):
        report.errors.append("roots are not closed under negation")
    chosen = set(P.positive_roots)
    if len(P.roots) != 2 * len(chosen):
        report.errors.append("positive_roots must select exactly one root from each +/- pair")
    else:
        for index in chosen:
            negative = tuple(-x for x in P.roots[index])
            if any(P.roots[j] == negative for j in chosen):
                report.errors.append(f"positive_roots selects both {P.roots[index]} and its negative")

    group = ()  # type: Tuple[WeylElement, ...]
    try:
        group = weyl_group(P)
    except PresentationError as E:
        report.errors.append(str(E))
    for index, w in enumerate(P.weyl_generators):
        if act_on_character(w, P.theta) != P.theta:
            report.errors.append(f"weyl_generators[{index}] does not fix theta")
        if not _same_multiset(P.weights, [act_on_character(w, xi) for xi in P.weights]):
            report.errors.append(f"weyl_generators[{index}] does not permute the weights")
        if not _same_multiset(P.e_weights, [act_on_character(w, xi) for xi in P.e_weights]):
            report.errors.append(f"weyl_generators[{index}] does not permute the e_weights multiset")
        if set(act_on_character(w, rho) for rho in P.roots) != root_set:
            report.errors.append(f"weyl_generators[{index}] does not permute the roots")
        for chi in P.chi_g_basis:
            if act_on_character(w, chi) != chi:
                report.errors.append(f"weyl_generators[{index}] does not fix chi_g_basis vector {chi}")
    if group and len(group) > 1 and not P.roots:
        report.warnings.append("Weyl generators given for an abelian group")

    if not any(P.theta):
        report.errors.append("theta is trivial")
    elif not report.errors:
        everything = range(P.n)
        if not in_cone(weights, P.theta, everything):
            report.errors.append("theta is outside the cone of weights: the quotient is empty")
        else:
            if not is_generic(weights, P.theta):
                short = [basis for basis in cone_bases(weights, P.theta) if len(basis) < P.r]
                report.errors.append(f"theta lies on a wall: it is in the cone of weights {sorted(short[0])}")
            if not is_pointed(weights):
                message = "the weight cone is not pointed: X//T is not proper"
                if allow_nonproper:
                    report.warnings.append(message)
                else:
                    report.errors.append(message)

    if P.roots:
        report.warnings.append("user-asserted: centralizers of elements with fixed points are connected")
        if not theta_in_g_span(P):
            report.warnings.append("theta is not in the span of chi_g_basis; fibers do not have constant theta-degree")
    if P.e_weights:
        report.warnings.append("user-asserted: the section is regular and Y is smooth on the stable locus")

    for message in report.warnings:
        logger.info("validation warning: %s", message)
    return report


def theta_in_g_span(presentation: GitPresentation) -> bool:
    basis = _independent(presentation.characters_of_g)
    return solve_in_span(basis, presentation.theta) is not None


def _independent(vectors: Sequence[IntVector]) -> List[IntVector]:
    chosen = []  # type: List[IntVector]
    for v in vectors:
        if rank(chosen + [v]) > len(chosen):
            chosen.append(v)
    return chosen


# Stability


@lru_cache(maxsize=None)
def stable_bases(presentation: GitPresentation) -> Tuple[FrozenSet[int], ...]:
    """
    Linearly independent weight index sets whose cone contains theta
    """
    return cone_bases(presentation.torus_weights, presentation.theta)


def unstable_supports(presentation: GitPresentation, weight_subset: Sequence[int]) -> List[FrozenSet[int]]:
    """
    Inclusion-minimal S inside `weight_subset` with theta outside the cone
    of the remaining weights of the subset
    """
    family = [basis for basis in stable_bases(presentation) if basis <= set(weight_subset)]
    return minimal_transversals(weight_subset, family)


# Sectors


def sector_of(beta: CurveClass, presentation: GitPresentation) -> Sector:
    fracs = tuple(frac(beta.pairing(xi)) for xi in presentation.weights)
    return Sector(
        element=tuple(frac(v) for v in beta.values),
        fracs=fracs,
        fixed_support=tuple(i for i, f in enumerate(fracs) if f == 0),
        order=beta.order,
    )


def involute(sector: Sector) -> Sector:
    return Sector(
        element=tuple(frac(-e) for e in sector.element),
        fracs=tuple(frac(-f) for f in sector.fracs),
        fixed_support=sector.fixed_support,
        order=sector.order,
    )


def act_on_sector(w: WeylElement, sector: Sector, presentation: GitPresentation) -> Sector:
    moved = act_on_class(w, CurveClass(values=sector.element))
    return sector_of(moved, presentation)


def sector_stabilizer(beta: CurveClass, presentation: GitPresentation) -> Tuple[WeylElement, ...]:
    """
    W_g: the Weyl elements fixing the sector element of beta
    """
    stabilizer = []
    for w in weyl_group(presentation):
        moved = act_on_class(w, beta)
        if all((a - b).denominator == 1 for a, b in zip(moved.values, beta.values)):
            stabilizer.append(w)
    return tuple(stabilizer)


@lru_cache(maxsize=None)
def sector_orders(presentation: GitPresentation) -> FrozenSet[int]:
    """
    Orders of torus elements acting trivially on some stable support
    """
    weights = presentation.torus_weights
    orders = set()  # type: Set[int]
    for basis in stable_bases(presentation):
        if len(basis) != presentation.r:
            continue
        columns = sympy.Matrix([weights[i] for i in sorted(basis)]).T
        diagonal = smith_normal_form(columns, domain=ZZ)
        exponent = lcm([abs(int(diagonal[i, i])) for i in range(presentation.r)])
        orders.update(int(d) for d in sympy.divisors(exponent))
    return frozenset(orders or {1})


def default_denominator_bound(presentation: GitPresentation) -> int:
    return lcm(sorted(sector_orders(presentation)))


# Classes


@lru_cache(maxsize=None)
def candidate_classes(presentation: GitPresentation, degree_bound: Fraction, denom_bound: int) -> Tuple[CurveClass, ...]:
    """
    Classes with theta-degree at most `degree_bound`, denominators dividing
    `denom_bound`, whose set of weights with values in Z>=0 contains a
    stable basis. Classes outside this set have a vanishing coefficient.
    """
    if degree_bound < 0:
        return ()
    weights = presentation.torus_weights
    found = set()  # type: Set[CurveClass]
    for basis in stable_bases(presentation):
        if len(basis) != presentation.r:
            continue
        indices = sorted(basis)
        columns = [weights[i] for i in indices]
        coefficients = solve_in_span(columns, presentation.theta)
        # values on the basis weights determine the class: beta = (M^T)^-1 v
        inverse = sympy.Matrix(columns).inv()
        for position, a in enumerate(coefficients):
            if a == 0:
                direction = tuple(to_fraction(x) for x in inverse.col(position))
                raise UnboundedFiberError(
                    f"search region is not compact: direction {tuple(str(x) for x in direction)} has zero theta-degree",
                    direction=direction,
                )
        ranges = [range(0, math.floor(degree_bound / a) + 1) for a in coefficients]
        for v in product(*ranges):
            if sum(a * x for a, x in zip(coefficients, v)) > degree_bound:
                continue
            values = tuple(sum((to_fraction(inverse[i, j]) * v[j] for j in range(len(v))), Fraction(0)) for i in range(presentation.r))
            if any(denom_bound % x.denominator for x in values):
                continue
            found.add(CurveClass(values=values))
    return tuple(sorted(found, key=lambda beta: class_sort_key(beta, presentation)))


def restrict_to_g(beta: CurveClass, presentation: GitPresentation) -> Tuple[Fraction, ...]:
    return tuple(beta.pairing(chi) for chi in presentation.characters_of_g)


def enumerate_fiber(
    presentation: GitPresentation,
    beta_on_g: Sequence[Fraction],
    degree_bound: Fraction,
    denom_bound: Optional[int] = None,
) -> List[CurveClass]:
    """
    Classes of the torus quotient mapping to `beta_on_g`, the values on the
    chi_g_basis
    """
    if denom_bound is None:
        denom_bound = default_denominator_bound(presentation)
    target = tuple(Fraction(b) for b in beta_on_g)
    fiber = [beta for beta in candidate_classes(presentation, Fraction(degree_bound), denom_bound) if restrict_to_g(beta, presentation) == target]
    logger.debug("fiber over %s: %d classes", [str(b) for b in target], len(fiber))
    return fiber


def weyl_orbits(presentation: GitPresentation, classes: Sequence[CurveClass]) -> List[WeylOrbit]:
    """
    One orbit per W-orbit in `classes`, represented by its first member
    """
    group = weyl_group(presentation)
    remaining = list(dict.fromkeys(classes))
    present = set(remaining)
    orbits = []
    seen = set()  # type: Set[CurveClass]
    for beta in remaining:
        if beta in seen:
            continue
        members = []  # type: List[CurveClass]
        stabilizer = []
        for w in group:
            image = act_on_class(w, beta)
            if image not in present:
                raise ValueError(f"classes are not closed under the Weyl group: {image} is missing")
            if image == beta:
                stabilizer.append(w)
            if image not in members:
                members.append(image)
        seen.update(members)
        orbits.append(WeylOrbit(representative=beta, members=tuple(members), stabilizer=tuple(stabilizer)))
    return orbits


def sector_orbits(presentation: GitPresentation, sectors: Sequence[Sector]) -> Dict[Sector, Tuple[Sector, ...]]:
    """
    Group sectors into W-orbits keyed by the first member met
    """
    group = weyl_group(presentation)
    orbits = {}  # type: Dict[Sector, Tuple[Sector, ...]]
    assigned = set()  # type: Set[Sector]
    for sector in sectors:
        if sector in assigned:
            continue
        images = tuple(dict.fromkeys(act_on_sector(w, sector, presentation) for w in group))
        assigned.update(images)
        orbits[sector] = images
    return orbits
