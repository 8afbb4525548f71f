import logging
import math
import warnings
from collections import defaultdict
from concurrent.futures import ThreadPoolExecutor
from enum import Enum
from fractions import Fraction
from itertools import product
from typing import Callable, Dict, List, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel, root_validator

from pydanticquasimap.base_models import PipelineIntegrityError, PresentationError, PresentationMixError, RationalValue
from pydanticquasimap.chowring.models import (
    Z,
    RingElement,
    SectorRing,
    antisymmetrize,
    assert_z_laurent,
    build_ring,
    divide_by_delta,
    is_anti_invariant,
    is_invariant,
    s_symbols,
    sign_on_delta,
    t_symbols,
)
from pydanticquasimap.factors.models import FactorSpec, FactorVariant, c_factor, euler_class, is_i_nonnegative, negative_e_weights, weyl_numerator_factor
from pydanticquasimap.gitdata.models import (
    CurveClass,
    GitPresentation,
    Sector,
    act_on_character,
    candidate_classes,
    default_denominator_bound,
    enumerate_fiber,
    involute,
    restrict_to_g,
    sector_of,
    sector_orbits,
    sector_stabilizer,
    validate,
)

logger = logging.getLogger(__name__)


class Presentation(Enum):
    RESTRICTED = "restricted"
    PUSHFORWARD = "pushforward"
    SYMBOLIC_RESIDUE = "symbolic-residue"


class LefschetzMode(Enum):
    CONVEX_ONLY = "convex-only"
    ASSUME_TRANSVERSE = "assume-transverse"
    SYMBOLIC_RESIDUE = "symbolic-residue"


class RunMode(Enum):
    TORIC = "toric"
    NONABELIAN = "nonabelian"
    LEFSCHETZ = "lefschetz"


class DiagnosticKind(Enum):
    USER_ASSERTED = "user-asserted"
    VALIDATION_WARNING = "validation-warning"
    SKIPPED_NONCONVEX = "skipped-nonconvex"
    SYMBOLIC_RESIDUE = "symbolic-residue"
    REDUCED_TO_PLAIN = "reduced-to-plain"


class Diagnostic(BaseModel):
    kind: DiagnosticKind
    message: str
    beta: Optional[CurveClass] = None
    e_weights: Tuple[int, ...] = ()

    class Config:
        frozen = True


class ResidueMarker(BaseModel):
    """
    An unevaluated term: the coordinates forced to vanish and the
    E-weights pairing to nonnegative integers
    """

    vanishing: Tuple[int, ...]
    nonnegative_e_weights: Tuple[int, ...]

    class Config:
        frozen = True


class SectorClass(BaseModel):
    """
    One coefficient of the series: the class, the sector it lands in and
    its value in that sector's ring
    """

    beta: CurveClass
    degree: Tuple[RationalValue, ...]
    sector: Sector
    coefficient: Optional[RingElement] = None
    presentation: Presentation = Presentation.RESTRICTED
    marker: Optional[ResidueMarker] = None

    class Config:
        arbitrary_types_allowed = True

    @root_validator(skip_on_failure=True)
    def check_payload(cls, values):
        if values["presentation"] == Presentation.SYMBOLIC_RESIDUE:
            if values.get("marker") is None:
                raise ValueError("symbolic-residue terms carry a marker")
        elif values.get("coefficient") is None:
            raise ValueError("evaluated terms carry a coefficient")
        return values

    @property
    def is_zero(self) -> bool:
        return self.coefficient is not None and self.coefficient.is_zero

    def sort_key(self, presentation: GitPresentation):
        return (self.beta.theta_degree(presentation), self.degree, self.sector.element, self.beta.values)

    def to_pushforward(self, presentation: GitPresentation) -> "SectorClass":
        """
        Multiply a restricted abelian term by the Euler class of E^g
        """
        if self.presentation == Presentation.PUSHFORWARD:
            return self
        if self.presentation != Presentation.RESTRICTED:
            raise PresentationMixError("only restricted terms can be pushed forward")
        if not presentation.is_abelian:
            raise PresentationMixError("pushforward of a Delta-divided term is not defined; run with pushforward enabled instead")
        assert self.coefficient is not None
        ring = self.coefficient.ring
        euler = euler_class(integral_e_weights(self.beta, presentation), ring)
        return self.copy(update=dict(coefficient=self.coefficient * euler, presentation=Presentation.PUSHFORWARD))


class IFunctionSeries(BaseModel):
    """
    Coefficients of the I-function up to a theta-degree bound, ordered by
    theta-degree then class values
    """

    presentation: GitPresentation
    degree_bound: RationalValue
    terms: Tuple[SectorClass, ...]
    diagnostics: Tuple[Diagnostic, ...] = ()
    allow_mixed: bool = False

    class Config:
        arbitrary_types_allowed = True

    def __init__(self, **data):
        super().__init__(**data)
        kinds = {term.presentation for term in self.terms}
        if {Presentation.RESTRICTED, Presentation.PUSHFORWARD} <= kinds and not self.allow_mixed:
            raise PresentationMixError("series mixes restricted and pushforward terms")

    @root_validator(skip_on_failure=True)
    def check_unit(cls, values):
        if not any(term.beta.theta_degree(values["presentation"]) == 0 and not any(term.beta.values) for term in values["terms"]):
            raise ValueError("the unit term at class 0 is missing")
        return values

    def __getitem__(self, degree: Sequence[Fraction]) -> List[SectorClass]:
        key = tuple(Fraction(d) for d in degree)
        return [term for term in self.terms if term.degree == key]

    def coefficient(self, degree: Sequence[Fraction]) -> RingElement:
        """
        The single evaluated coefficient at `degree`
        """
        found = [term for term in self[degree] if term.coefficient is not None]
        if len(found) != 1:
            raise KeyError(f"{len(found)} evaluated terms at {tuple(str(d) for d in degree)}")
        assert found[0].coefficient is not None
        return found[0].coefficient

    @property
    def degrees(self) -> List[Tuple[Fraction, ...]]:
        return list(dict.fromkeys(term.degree for term in self.terms))

    @property
    def unit(self) -> SectorClass:
        return next(term for term in self.terms if not any(term.beta.values))

    def merge(self, other: "IFunctionSeries", allow_mixed: bool = False) -> "IFunctionSeries":
        """
        Add the terms of `other` at degrees and sectors this series lacks
        """
        present = {(term.degree, term.sector) for term in self.terms}
        extra = [term for term in other.terms if (term.degree, term.sector) not in present]
        return IFunctionSeries(
            presentation=self.presentation,
            degree_bound=max(self.degree_bound, other.degree_bound),
            terms=tuple(sorted_terms(list(self.terms) + extra, self.presentation)),
            diagnostics=self.diagnostics + other.diagnostics,
            allow_mixed=allow_mixed,
        )


class RunOptions(BaseModel):
    mode: RunMode = RunMode.TORIC
    degree_bound: RationalValue = Fraction(1)
    denominator_bound: Optional[int] = None
    convexity: LefschetzMode = LefschetzMode.CONVEX_ONLY
    pushforward: bool = False
    allow_mixed: bool = False
    check_laurent: bool = True
    allow_nonproper: bool = False
    strict_validation: bool = True
    workers: int = 1


def sorted_terms(terms: Sequence[SectorClass], presentation: GitPresentation) -> List[SectorClass]:
    return sorted(terms, key=lambda term: term.sort_key(presentation))


def landing_ring(beta: CurveClass, presentation: GitPresentation) -> SectorRing:
    """
    The ring of the involuted sector of beta
    """
    return build_ring(involute(sector_of(beta, presentation)), presentation)


def integral_e_weights(beta: CurveClass, presentation: GitPresentation) -> List[Tuple[int, ...]]:
    return [epsilon for epsilon in presentation.e_weights if beta.pairing(epsilon).denominator == 1]


def toric_part(beta: CurveClass, presentation: GitPresentation, ring: SectorRing, variant: FactorVariant = FactorVariant.C) -> RingElement:
    """
    prod_l C(beta, xi_l)
    """
    result = ring.one
    for xi in presentation.weights:
        result = result * c_factor(FactorSpec(beta=beta, xi=xi, variant=variant, ring=ring))
    return result


def e_part(beta: CurveClass, presentation: GitPresentation, ring: SectorRing) -> RingElement:
    """
    prod_j C-circle(beta, epsilon_j)^-1
    """
    result = ring.one
    for epsilon in presentation.e_weights:
        result = result * c_factor(FactorSpec(beta=beta, xi=epsilon, variant=FactorVariant.C_CIRCLE, inverted=True, ring=ring))
    return result


def transverse_part(beta: CurveClass, presentation: GitPresentation, ring: SectorRing) -> RingElement:
    """
    The pushforward form of a twisted term: prod C-circle(xi) and
    prod C-circle(epsilon)^-1 with xi(t) for the weights pairing to negative
    integers and epsilon(t) for the E-weights pairing to nonnegative integers
    """
    result = toric_part(beta, presentation, ring, FactorVariant.C_CIRCLE) * e_part(beta, presentation, ring)
    for xi in presentation.weights:
        value = beta.pairing(xi)
        if value.denominator == 1 and value < 0:
            result = result * ring.chern(xi)
    for epsilon in presentation.e_weights:
        value = beta.pairing(epsilon)
        if value.denominator == 1 and value >= 0:
            result = result * ring.chern(epsilon)
    return result


def residue_marker(beta: CurveClass, presentation: GitPresentation) -> ResidueMarker:
    vanishing = tuple(i for i, xi in enumerate(presentation.weights) if _negative_integral(beta.pairing(xi)))
    nonnegative = tuple(j for j, epsilon in enumerate(presentation.e_weights) if beta.pairing(epsilon).denominator == 1 and beta.pairing(epsilon) >= 0)
    return ResidueMarker(vanishing=vanishing, nonnegative_e_weights=nonnegative)


def _negative_integral(value: Fraction) -> bool:
    return value.denominator == 1 and value < 0


TermFactor = Callable[[CurveClass, SectorRing], Tuple[Optional[RingElement], Presentation]]


def plain_factor(presentation: GitPresentation) -> TermFactor:
    def factor(beta: CurveClass, ring: SectorRing):
        return toric_part(beta, presentation, ring), Presentation.RESTRICTED

    return factor


def lefschetz_factor(presentation: GitPresentation, mode: LefschetzMode, pushforward: bool = False) -> TermFactor:
    """
    The per-class factor of the twisted coefficient; None marks a term that
    is not evaluated in this mode
    """

    def factor(beta: CurveClass, ring: SectorRing):
        if mode == LefschetzMode.ASSUME_TRANSVERSE:
            return transverse_part(beta, presentation, ring), Presentation.PUSHFORWARD
        if not is_i_nonnegative(beta, presentation):
            return None, Presentation.SYMBOLIC_RESIDUE
        value = toric_part(beta, presentation, ring) * e_part(beta, presentation, ring)
        if pushforward:
            return value * euler_class(integral_e_weights(beta, presentation), ring), Presentation.PUSHFORWARD
        return value, Presentation.RESTRICTED

    return factor


def _skipped(beta: CurveClass, presentation: GitPresentation, mode: LefschetzMode) -> Tuple[Optional[SectorClass], Diagnostic]:
    offending = tuple(negative_e_weights(beta, presentation))
    if mode == LefschetzMode.SYMBOLIC_RESIDUE:
        diagnostic = Diagnostic(kind=DiagnosticKind.SYMBOLIC_RESIDUE, message=f"term at {beta} left as a residue marker", beta=beta, e_weights=offending)
        term = SectorClass(
            beta=beta,
            degree=restrict_to_g(beta, presentation),
            sector=involute(sector_of(beta, presentation)),
            presentation=Presentation.SYMBOLIC_RESIDUE,
            marker=residue_marker(beta, presentation),
        )
        return term, diagnostic
    diagnostic = Diagnostic(kind=DiagnosticKind.SKIPPED_NONCONVEX, message=f"term at {beta} skipped: E-weights {list(offending)} pair to negative integers", beta=beta, e_weights=offending)
    return None, diagnostic


# Abelian coefficients


def toric_coefficient(beta: CurveClass, presentation: GitPresentation) -> SectorClass:
    if not presentation.is_abelian:
        raise PresentationError("toric coefficients need a presentation without roots")
    ring = landing_ring(beta, presentation)
    return SectorClass(beta=beta, degree=restrict_to_g(beta, presentation), sector=ring.sector, coefficient=toric_part(beta, presentation, ring))


def abelian_coefficient(beta: CurveClass, presentation: GitPresentation, factor: TermFactor, mode: LefschetzMode) -> Tuple[List[SectorClass], List[Diagnostic]]:
    ring = landing_ring(beta, presentation)
    value, kind = factor(beta, ring)
    if value is None:
        term, diagnostic = _skipped(beta, presentation, mode)
        return ([term] if term else []), [diagnostic]
    return [SectorClass(beta=beta, degree=restrict_to_g(beta, presentation), sector=ring.sector, coefficient=value, presentation=kind)], []


def toric_series(presentation: GitPresentation, bound: Fraction, denom_bound: Optional[int] = None) -> "IFunctionSeries":
    return assemble(presentation, RunOptions(mode=RunMode.TORIC, degree_bound=bound, denominator_bound=denom_bound))


# Abelianized coefficients


def _orbit_coefficient(
    presentation: GitPresentation,
    sector: Sector,
    classes: Sequence[CurveClass],
    factor: TermFactor,
    degree: Tuple[Fraction, ...],
) -> Tuple[Optional[SectorClass], List[CurveClass]]:
    ring = build_ring(involute(sector), presentation)
    numerator = ring.poly_ring.zero
    delta = ring.poly_ring.one
    kinds = set()
    skipped = []  # type: List[CurveClass]
    for beta in classes:
        value, kind = factor(beta, ring)
        if value is None:
            skipped.append(beta)
            continue
        kinds.add(kind)
        weyl_numerator, delta = weyl_numerator_factor(beta, presentation, ring)
        numerator += (weyl_numerator * value).poly
    if not kinds:
        return None, skipped
    kind = kinds.pop()

    group = [(w, sign_on_delta(w, delta, ring)) for w in sector_stabilizer(classes[0], presentation)]
    reduced = ring.normal_form(numerator)
    if not is_anti_invariant(reduced, group):
        logger.error("numerator at %s in sector %s: %s", degree, sector.age_label, reduced)
        raise PipelineIntegrityError(f"numerator at {tuple(str(d) for d in degree)} is not anti-invariant under the sector stabilizer")
    lifted = antisymmetrize(reduced.poly, group, ring)
    result = divide_by_delta(lifted, delta, ring)
    if not is_invariant(result, group):
        logger.error("quotient at %s in sector %s: %s", degree, sector.age_label, result)
        raise PipelineIntegrityError(f"coefficient at {tuple(str(d) for d in degree)} is not Weyl invariant")
    term = SectorClass(beta=classes[0], degree=degree, sector=ring.sector, coefficient=result, presentation=kind)
    return term, skipped


def fiber_coefficients(
    presentation: GitPresentation,
    fiber: Sequence[CurveClass],
    factor: TermFactor,
    mode: LefschetzMode = LefschetzMode.CONVEX_ONLY,
) -> Tuple[List[SectorClass], List[Diagnostic]]:
    """
    One coefficient per Weyl orbit of sectors met by the fiber
    """
    if not fiber:
        return [], []
    degree = restrict_to_g(fiber[0], presentation)
    by_sector = defaultdict(list)  # type: Dict[Sector, List[CurveClass]]
    for beta in fiber:
        by_sector[sector_of(beta, presentation)].append(beta)

    terms = []  # type: List[SectorClass]
    diagnostics = []  # type: List[Diagnostic]
    for representative in sector_orbits(presentation, list(by_sector)):
        term, skipped = _orbit_coefficient(presentation, representative, by_sector[representative], factor, degree)
        for beta in skipped:
            marker, diagnostic = _skipped(beta, presentation, mode)
            diagnostics.append(diagnostic)
            if marker is not None:
                terms.append(marker)
        if term is not None:
            terms.append(term)
    return terms, diagnostics


def nonabelian_coefficient(
    beta_on_g: Sequence[Fraction],
    presentation: GitPresentation,
    degree_bound: Fraction,
    denom_bound: Optional[int] = None,
) -> List[SectorClass]:
    fiber = enumerate_fiber(presentation, beta_on_g, degree_bound, denom_bound)
    terms, _ = fiber_coefficients(presentation, fiber, plain_factor(presentation))
    return [term for term in terms if not term.is_zero]


def lefschetz_coefficient(
    beta: CurveClass,
    presentation: GitPresentation,
    mode: LefschetzMode = LefschetzMode.CONVEX_ONLY,
    degree_bound: Optional[Fraction] = None,
    denom_bound: Optional[int] = None,
    pushforward: bool = False,
) -> Tuple[List[SectorClass], List[Diagnostic]]:
    """
    Twisted coefficients at `beta`: the class itself for abelian
    presentations, its whole fiber otherwise
    """
    factor = lefschetz_factor(presentation, mode, pushforward) if presentation.e_weights else plain_factor(presentation)
    if presentation.is_abelian:
        return abelian_coefficient(beta, presentation, factor, mode)
    bound = beta.theta_degree(presentation) if degree_bound is None else degree_bound
    fiber = enumerate_fiber(presentation, restrict_to_g(beta, presentation), bound, denom_bound)
    return fiber_coefficients(presentation, fiber, factor, mode)


# Series


def _check_laurent(term: SectorClass) -> None:
    if term.coefficient is not None:
        assert_z_laurent(term.coefficient, f"class {term.beta}")


def _check_unit(found: Sequence[SectorClass], presentation: GitPresentation) -> None:
    """
    The class 0 coefficient is 1, or the Euler class of E in pushforward form
    """
    if len(found) != 1 or found[0].coefficient is None:
        raise PipelineIntegrityError(f"expected one evaluated term at class 0, found {len(found)}")
    term = found[0]
    ring = term.coefficient.ring
    expected = euler_class(presentation.e_weights, ring) if term.presentation == Presentation.PUSHFORWARD else ring.one
    if term.coefficient != expected:
        raise PipelineIntegrityError(f"the coefficient at class 0 is {term.coefficient}, expected {expected}")


def assemble(presentation: GitPresentation, options: Optional[RunOptions] = None) -> IFunctionSeries:
    """
    Every class up to the degree bound, orbit by orbit, with the z-Laurent
    and Weyl invariance checks applied to each coefficient
    """
    options = options or RunOptions()
    P = presentation
    diagnostics = []  # type: List[Diagnostic]

    report = validate(P, allow_nonproper=options.allow_nonproper)
    if report.errors:
        if options.strict_validation:
            raise PresentationError("; ".join(report.errors))
        for message in report.errors:
            warnings.warn(message)
            diagnostics.append(Diagnostic(kind=DiagnosticKind.VALIDATION_WARNING, message=message))
    for message in report.warnings:
        warnings.warn(message)
        kind = DiagnosticKind.USER_ASSERTED if message.startswith("user-asserted") else DiagnosticKind.VALIDATION_WARNING
        diagnostics.append(Diagnostic(kind=kind, message=message))

    if options.mode == RunMode.TORIC and not P.is_abelian:
        raise PresentationError("toric mode needs a presentation without roots")
    if options.mode == RunMode.LEFSCHETZ and not P.e_weights:
        diagnostics.append(Diagnostic(kind=DiagnosticKind.REDUCED_TO_PLAIN, message="lefschetz mode without e_weights reduces to plain mode"))
    if options.mode == RunMode.LEFSCHETZ and P.e_weights:
        factor = lefschetz_factor(P, options.convexity, options.pushforward)
    else:
        factor = plain_factor(P)

    denom_bound = options.denominator_bound or default_denominator_bound(P)
    candidates = candidate_classes(P, Fraction(options.degree_bound), denom_bound)
    logger.info("%d candidate classes up to theta-degree %s", len(candidates), options.degree_bound)

    if P.is_abelian:
        units = [[beta] for beta in candidates]  # type: List[List[CurveClass]]
    else:
        fibers = defaultdict(list)  # type: Dict[Tuple[Fraction, ...], List[CurveClass]]
        for beta in candidates:
            fibers[restrict_to_g(beta, P)].append(beta)
        units = list(fibers.values())

    def work(unit: List[CurveClass]):
        if P.is_abelian:
            return abelian_coefficient(unit[0], P, factor, options.convexity)
        return fiber_coefficients(P, unit, factor, options.convexity)

    if options.workers > 1:
        with ThreadPoolExecutor(max_workers=options.workers) as executor:
            results = list(executor.map(work, units))
    else:
        results = [work(unit) for unit in units]

    terms = []  # type: List[SectorClass]
    for unit_terms, unit_diagnostics in results:
        terms.extend(term for term in unit_terms if not term.is_zero)
        diagnostics.extend(unit_diagnostics)

    _check_unit([term for term in terms if not any(term.beta.values)], P)
    if options.check_laurent and P.q == 0:
        for term in terms:
            _check_laurent(term)

    return IFunctionSeries(
        presentation=P,
        degree_bound=options.degree_bound,
        terms=tuple(sorted_terms(terms, P)),
        diagnostics=tuple(diagnostics),
        allow_mixed=options.allow_mixed,
    )


def degenerate(series: IFunctionSeries) -> IFunctionSeries:
    """
    Set every equivariant parameter to 0
    """
    P = series.presentation
    plain = P.forget_equivariance()
    substitutions = {s: 0 for s in s_symbols(P.q)}
    terms = []
    for term in series.terms:
        if term.coefficient is None:
            terms.append(term)
            continue
        target = build_ring(term.sector, plain)
        coefficient = term.coefficient.specialize(target, substitutions)
        if not coefficient.is_zero:
            terms.append(term.copy(update=dict(coefficient=coefficient)))
    return IFunctionSeries(presentation=plain, degree_bound=series.degree_bound, terms=tuple(terms), diagnostics=series.diagnostics, allow_mixed=series.allow_mixed)


# Bigger I-function


class Insertion(BaseModel):
    """
    A polynomial p in x1..xk evaluated at x_i = c1(L_eta_i) + beta(eta_i) z
    """

    polynomial: str
    characters: Tuple[Tuple[int, ...], ...]

    class Config:
        frozen = True

    def variables(self) -> Tuple[sympy.Symbol, ...]:
        return tuple(sympy.Symbol(f"x{i + 1}") for i in range(len(self.characters)))

    def expression(self) -> sympy.Expr:
        expr = sympy.sympify(self.polynomial)
        unknown = expr.free_symbols - set(self.variables())
        if unknown:
            raise ValueError(f"insertion {self.polynomial!r} uses {sorted(str(s) for s in unknown)}")
        return expr

    def argument(self, beta: CurveClass, ring: SectorRing) -> RingElement:
        """
        z^-1 p(c1(L_eta) + beta(eta) z)
        """
        t = t_symbols(ring.r)
        s = s_symbols(ring.q)
        values = {}
        for x, eta in zip(self.variables(), self.characters):
            chern = sum((eta[i] * t[i] for i in range(ring.r)), sympy.Integer(0))
            chern += sum((eta[ring.r + p] * s[p] for p in range(min(ring.q, len(eta) - ring.r))), sympy.Integer(0))
            pairing = beta.pairing(eta)
            values[x] = chern + sympy.Rational(pairing.numerator, pairing.denominator) * Z
        return ring.evaluate(sympy.expand(self.expression().subs(values) / Z))


class BigITerm(BaseModel):
    base: SectorClass
    t_exponents: Tuple[int, ...]
    coefficient: Optional[RingElement] = None

    class Config:
        arbitrary_types_allowed = True


class BigIFunctionSeries(BaseModel):
    series: IFunctionSeries
    insertions: Tuple[Insertion, ...]
    t_order: int
    terms: Tuple[BigITerm, ...]

    class Config:
        arbitrary_types_allowed = True

    def at_zero(self) -> IFunctionSeries:
        """
        The small series: every t_i set to 0
        """
        zero = (0,) * len(self.insertions)
        terms = tuple(term.base.copy(update=dict(coefficient=term.coefficient)) for term in self.terms if term.t_exponents == zero)
        return self.series.copy(update=dict(terms=terms))

    def coefficient(self, degree: Sequence[Fraction], t_exponents: Sequence[int]) -> RingElement:
        key = tuple(Fraction(d) for d in degree)
        found = [term for term in self.terms if term.base.degree == key and term.t_exponents == tuple(t_exponents) and term.coefficient is not None]
        if len(found) != 1:
            raise KeyError(f"{len(found)} evaluated terms at {tuple(str(d) for d in degree)}, {tuple(t_exponents)}")
        assert found[0].coefficient is not None
        return found[0].coefficient


def multi_indices(count: int, order: int) -> List[Tuple[int, ...]]:
    return sorted((m for m in product(range(order + 1), repeat=count) if sum(m) <= order), key=lambda m: (sum(m), tuple(-e for e in m)))


def big_i_twist(series: IFunctionSeries, insertions: Sequence[Insertion], t_order: int) -> BigIFunctionSeries:
    """
    Multiply every term by exp(z^-1 sum_i t_i p_i) truncated at total
    t-degree `t_order`
    """
    P = series.presentation
    if not P.is_abelian:
        for insertion in insertions:
            for eta in insertion.characters:
                for index, w in enumerate(P.weyl_generators):
                    if act_on_character(w, eta) != tuple(eta):
                        raise PresentationError(f"insertion character {eta} is not fixed by weyl_generators[{index}]")
    indices = multi_indices(len(insertions), t_order)
    terms = []
    for term in series.terms:
        if term.coefficient is None:
            terms.append(BigITerm(base=term, t_exponents=(0,) * len(insertions)))
            continue
        ring = term.coefficient.ring
        arguments = [insertion.argument(term.beta, ring) for insertion in insertions]
        for m in indices:
            value = term.coefficient
            for argument, exponent in zip(arguments, m):
                if exponent:
                    value = value * argument**exponent * Fraction(1, math.factorial(exponent))
            terms.append(BigITerm(base=term, t_exponents=m, coefficient=value))
    return BigIFunctionSeries(series=series, insertions=tuple(insertions), t_order=t_order, terms=tuple(terms))
