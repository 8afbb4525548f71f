import json
from fractions import Fraction
from typing import List, Optional, Sequence, Tuple

import sympy
from pydantic import BaseModel

from pydanticquasimap.base_models import ConfigError
from pydanticquasimap.chowring.models import CoeffFunction, RingElement, SectorRing, build_ring, t_symbols
from pydanticquasimap.cli.models import OutputFormat
from pydanticquasimap.gitdata.models import CurveClass, GitPresentation, Sector
from pydanticquasimap.ifunction.models import (
    BigIFunctionSeries,
    BigITerm,
    Diagnostic,
    DiagnosticKind,
    IFunctionSeries,
    Insertion,
    Presentation,
    ResidueMarker,
    SectorClass,
)

SCHEMA_VERSION = 1

RationalPair = Tuple[int, int]


def pair(value: Fraction) -> RationalPair:
    return (value.numerator, value.denominator)


def unpair(value: Sequence[int]) -> Fraction:
    return Fraction(value[0], value[1])


class PolynomialTerm(BaseModel):
    exponents: Tuple[int, ...]
    coefficient: RationalPair


class MonomialDocument(BaseModel):
    """
    One monomial in t with its coefficient, a rational function in z and s
    """

    exponents: Tuple[int, ...]
    numerator: List[PolynomialTerm]
    denominator: List[PolynomialTerm]


class SectorDocument(BaseModel):
    element: List[RationalPair]
    fracs: List[RationalPair]
    fixed_support: List[int]
    order: int


class TermDocument(BaseModel):
    values: List[RationalPair]
    degree: List[RationalPair]
    sector: SectorDocument
    presentation: Presentation
    coefficient: Optional[List[MonomialDocument]] = None
    marker: Optional[ResidueMarker] = None


class DiagnosticDocument(BaseModel):
    kind: DiagnosticKind
    message: str
    values: Optional[List[RationalPair]] = None
    e_weights: List[int] = []


class SeriesDocument(BaseModel):
    schema_version: int = SCHEMA_VERSION
    presentation: GitPresentation
    degree_bound: RationalPair
    allow_mixed: bool = False
    terms: List[TermDocument]
    diagnostics: List[DiagnosticDocument] = []


class BigITermDocument(BaseModel):
    term: int
    t_exponents: Tuple[int, ...]
    coefficient: Optional[List[MonomialDocument]] = None


class BigIDocument(BaseModel):
    """
    A twisted series: each term points at the small-series term it was
    twisted from by its position in `series.terms`
    """

    schema_version: int = SCHEMA_VERSION
    series: SeriesDocument
    insertions: List[Insertion]
    t_order: int
    terms: List[BigITermDocument]


def _polynomial(terms: Sequence[Tuple[Tuple[int, ...], Fraction]]) -> List[PolynomialTerm]:
    return [PolynomialTerm(exponents=m, coefficient=pair(c)) for m, c in terms]


def _monomials(element: RingElement) -> List[MonomialDocument]:
    return [MonomialDocument(exponents=m, numerator=_polynomial(c.numerator_terms()), denominator=_polynomial(c.denominator_terms())) for m, c in element.terms()]


def _element(monomials: Sequence[MonomialDocument], ring: SectorRing) -> RingElement:
    poly = ring.poly_ring.zero
    for monomial in monomials:
        value = CoeffFunction.from_terms(
            [(t.exponents, unpair(t.coefficient)) for t in monomial.numerator],
            [(t.exponents, unpair(t.coefficient)) for t in monomial.denominator],
            ring.K,
        )
        poly += ring.poly_ring({tuple(monomial.exponents): value.value})
    return ring.normal_form(poly)


def to_document(series: IFunctionSeries) -> SeriesDocument:
    terms = []
    for term in series.terms:
        coefficient = _monomials(term.coefficient) if term.coefficient is not None else None
        terms.append(
            TermDocument(
                values=[pair(v) for v in term.beta.values],
                degree=[pair(v) for v in term.degree],
                sector=SectorDocument(
                    element=[pair(v) for v in term.sector.element],
                    fracs=[pair(v) for v in term.sector.fracs],
                    fixed_support=list(term.sector.fixed_support),
                    order=term.sector.order,
                ),
                presentation=term.presentation,
                coefficient=coefficient,
                marker=term.marker,
            )
        )
    diagnostics = [
        DiagnosticDocument(
            kind=d.kind,
            message=d.message,
            values=[pair(v) for v in d.beta.values] if d.beta is not None else None,
            e_weights=list(d.e_weights),
        )
        for d in series.diagnostics
    ]
    return SeriesDocument(
        presentation=series.presentation,
        degree_bound=pair(series.degree_bound),
        allow_mixed=series.allow_mixed,
        terms=terms,
        diagnostics=diagnostics,
    )


def _check_version(version: object) -> None:
    if version != SCHEMA_VERSION:
        raise ConfigError(f"unsupported schema_version {version}", field="schema_version")


def _series(document: SeriesDocument, presentation: Optional[GitPresentation]) -> IFunctionSeries:
    P = presentation or document.presentation
    terms = []
    for term in document.terms:
        sector = Sector(
            element=tuple(unpair(v) for v in term.sector.element),
            fracs=tuple(unpair(v) for v in term.sector.fracs),
            fixed_support=tuple(term.sector.fixed_support),
            order=term.sector.order,
        )
        coefficient = _element(term.coefficient, build_ring(sector, P)) if term.coefficient is not None else None
        terms.append(
            SectorClass(
                beta=CurveClass(values=tuple(unpair(v) for v in term.values)),
                degree=tuple(unpair(v) for v in term.degree),
                sector=sector,
                coefficient=coefficient,
                presentation=term.presentation,
                marker=term.marker,
            )
        )
    diagnostics = tuple(
        Diagnostic(
            kind=d.kind,
            message=d.message,
            beta=CurveClass(values=tuple(unpair(v) for v in d.values)) if d.values is not None else None,
            e_weights=tuple(d.e_weights),
        )
        for d in document.diagnostics
    )
    return IFunctionSeries(
        presentation=P,
        degree_bound=unpair(document.degree_bound),
        terms=tuple(terms),
        diagnostics=diagnostics,
        allow_mixed=document.allow_mixed,
    )


def load_series(text: str, presentation: Optional[GitPresentation] = None) -> IFunctionSeries:
    """
    Rebuild a series from its JSON document. A big-I document gives back
    the small series it was twisted from.
    """
    raw = json.loads(text)
    _check_version(raw.get("schema_version"))
    if "t_order" in raw:
        return _series(BigIDocument.parse_obj(raw).series, presentation)
    return _series(SeriesDocument.parse_obj(raw), presentation)


def to_big_i_document(big_i: BigIFunctionSeries) -> BigIDocument:
    position = {(term.beta, term.presentation): index for index, term in enumerate(big_i.series.terms)}
    terms = [
        BigITermDocument(
            term=position[(term.base.beta, term.base.presentation)],
            t_exponents=term.t_exponents,
            coefficient=_monomials(term.coefficient) if term.coefficient is not None else None,
        )
        for term in big_i.terms
    ]
    return BigIDocument(series=to_document(big_i.series), insertions=list(big_i.insertions), t_order=big_i.t_order, terms=terms)


def load_big_i(text: str, presentation: Optional[GitPresentation] = None) -> BigIFunctionSeries:
    document = BigIDocument.parse_raw(text)
    _check_version(document.schema_version)
    series = _series(document.series, presentation)
    terms = []
    for term in document.terms:
        base = series.terms[term.term]
        coefficient = None
        if term.coefficient is not None:
            ring = base.coefficient.ring if base.coefficient is not None else build_ring(base.sector, series.presentation)
            coefficient = _element(term.coefficient, ring)
        terms.append(BigITerm(base=base, t_exponents=term.t_exponents, coefficient=coefficient))
    return BigIFunctionSeries(series=series, insertions=tuple(document.insertions), t_order=document.t_order, terms=tuple(terms))


# Text


def divisor_symbols(r: int, names: Optional[Sequence[str]] = None) -> List[sympy.Symbol]:
    if names:
        if len(names) != r:
            raise ConfigError(f"expected {r} divisor symbols, got {len(names)}", field="output.symbols")
        return [sympy.Symbol(name) for name in names]
    if r == 1:
        return [sympy.Symbol("H")]
    return [sympy.Symbol(f"H{i + 1}") for i in range(r)]


def term_expression(term: SectorClass, names: Optional[Sequence[str]] = None, factored: bool = False) -> sympy.Expr:
    assert term.coefficient is not None
    ring = term.coefficient.ring
    symbols = divisor_symbols(ring.r, names)
    expr = term.coefficient.to_sympy().subs(dict(zip(t_symbols(ring.r), symbols)), simultaneous=True)
    return sympy.factor(expr) if factored else sympy.expand(expr)


def degree_label(term: SectorClass) -> str:
    if len(term.degree) == 1:
        return str(term.degree[0])
    return "(" + ", ".join(str(d) for d in term.degree) + ")"


def _is_unit(term: SectorClass) -> bool:
    return not any(term.beta.values)


def render_plain(series: IFunctionSeries, names: Optional[Sequence[str]] = None, factored: bool = False) -> str:
    lines = []
    for term in series.terms:
        if _is_unit(term) and term.presentation == Presentation.RESTRICTED:
            lines.append("1")
            continue
        where = f"q^{degree_label(term)}"
        if not term.sector.is_untwisted:
            where += f" [sector {term.sector.age_label}]"
        if term.presentation != Presentation.RESTRICTED:
            where += f" <{term.presentation.value}>"
        if term.marker is not None:
            lines.append(f"{where}: residue(vanishing={list(term.marker.vanishing)}, e_weights={list(term.marker.nonnegative_e_weights)})")
        else:
            lines.append(f"{where}: {sympy.sstr(term_expression(term, names, factored))}")
    return "\n".join(lines)


def render_latex(series: IFunctionSeries, names: Optional[Sequence[str]] = None, factored: bool = False) -> str:
    parts = []
    for term in series.terms:
        if _is_unit(term) and term.presentation == Presentation.RESTRICTED:
            parts.append("1")
            continue
        q = f"q^{{{degree_label(term)}}}"
        if term.marker is not None:
            parts.append(q + r"\,\mathrm{Res}_{" + ",".join(str(i) for i in term.marker.vanishing) + "}")
        else:
            parts.append(q + r"\left(" + sympy.latex(term_expression(term, names, factored)) + r"\right)")
    return " + ".join(parts)


def render_json(series: IFunctionSeries) -> str:
    return to_document(series).json(indent=2)


def render_big_i_json(big_i: BigIFunctionSeries) -> str:
    return to_big_i_document(big_i).json(indent=2)


def render_big_i(big_i: BigIFunctionSeries, names: Optional[Sequence[str]] = None, factored: bool = False) -> str:
    lines = []
    for term in big_i.terms:
        if term.coefficient is None:
            continue
        exponents = "".join(f" t{i + 1}^{e}" for i, e in enumerate(term.t_exponents) if e)
        expr = term_expression(term.base.copy(update=dict(coefficient=term.coefficient)), names, factored)
        lines.append(f"q^{degree_label(term.base)}{exponents}: {sympy.sstr(expr)}")
    return "\n".join(lines)


def render(series: IFunctionSeries, format: OutputFormat = OutputFormat.PLAIN, names: Optional[Sequence[str]] = None, factored: bool = False) -> str:
    if format == OutputFormat.JSON:
        return render_json(series)
    if format == OutputFormat.LATEX:
        return render_latex(series, names, factored)
    return render_plain(series, names, factored)
