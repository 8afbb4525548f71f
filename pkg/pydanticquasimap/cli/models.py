import logging
import warnings
from enum import Enum
from fractions import Fraction
from typing import List, Optional

from pydantic import BaseModel, ValidationError, validator

from pydanticquasimap.base_models import ConfigError, RationalValue, TextField, ThisElementTextField, XmlBaseModel, parse_int_matrix, parse_int_vector, parse_vector
from pydanticquasimap.cli.presets import complete_intersection, preset_from_text, with_equivariant_column
from pydanticquasimap.gitdata.models import GitPresentation
from pydanticquasimap.ifunction.models import BigIFunctionSeries, IFunctionSeries, Insertion, LefschetzMode, RunMode, RunOptions, assemble, big_i_twist

logger = logging.getLogger(__name__)


class OutputFormat(Enum):
    PLAIN = "plain"
    LATEX = "latex"
    JSON = "json"


class PresentationBlock(XmlBaseModel):
    """
    Either a named preset or the full GIT data, one matrix row per ';'.
    `degrees` adds complete-intersection e-weights d * theta.
    """

    preset: Optional[str] = None
    degrees: Optional[str] = None
    torus_rank: Optional[int] = None
    equivariant_rank: int = 0
    weights: Optional[TextField] = None
    theta: Optional[TextField] = None
    roots: Optional[TextField] = None
    positive_roots: Optional[TextField] = None
    weyl_generator: List[TextField] = []
    e_weights: Optional[TextField] = None
    chi_g_basis: Optional[TextField] = None

    def to_presentation(self, equivariant: bool = False) -> GitPresentation:
        if self.preset:
            presentation = preset_from_text(self.preset, equivariant=equivariant)
            if self.e_weights:
                presentation = complete_intersection(presentation, *parse_int_matrix(self.e_weights, "presentation.e-weights"))
        else:
            presentation = self._explicit()
            if equivariant:
                presentation = with_equivariant_column(presentation)
        if self.degrees:
            presentation = complete_intersection(presentation, *parse_int_vector(self.degrees, "presentation.degrees"))
        return presentation

    def _explicit(self) -> GitPresentation:
        if self.torus_rank is None or self.weights is None or self.theta is None:
            raise ConfigError("needs a preset, or torus-rank with weights and theta", field="presentation")
        data = dict(
            torus_rank=self.torus_rank,
            equivariant_rank=self.equivariant_rank,
            weights=parse_int_matrix(self.weights, "presentation.weights"),
            theta=parse_int_vector(self.theta, "presentation.theta"),
            roots=parse_int_matrix(self.roots or "", "presentation.roots"),
            positive_roots=parse_int_vector(self.positive_roots or "", "presentation.positive-roots"),
            weyl_generators=tuple(parse_int_matrix(text, "presentation.weyl-generator") for text in self.weyl_generator),
            e_weights=parse_int_matrix(self.e_weights or "", "presentation.e-weights"),
            chi_g_basis=parse_int_matrix(self.chi_g_basis or "", "presentation.chi-g-basis"),
        )
        try:
            return GitPresentation(**data)
        except ValidationError as E:
            first = E.errors()[0]
            raise ConfigError(first["msg"], field="presentation") from E


class RunBlock(XmlBaseModel):
    mode: RunMode = RunMode.TORIC
    max_degree: RationalValue = Fraction(1)
    denominator_bound: Optional[int] = None
    convexity: LefschetzMode = LefschetzMode.CONVEX_ONLY
    equivariant: bool = False
    pushforward: bool = False
    allow_mixed: bool = False
    allow_nonproper: bool = False
    strict_validation: bool = True
    workers: int = 1

    @validator("max_degree")
    def nonnegative_bound(cls, v):
        if v < 0:
            raise ValueError("max-degree must be nonnegative")
        return v

    @validator("denominator_bound", "workers")
    def positive(cls, v):
        if v is not None and v < 1:
            raise ValueError("must be positive")
        return v

    def options(self) -> RunOptions:
        return RunOptions(
            mode=self.mode,
            degree_bound=self.max_degree,
            denominator_bound=self.denominator_bound,
            convexity=self.convexity,
            pushforward=self.pushforward,
            allow_mixed=self.allow_mixed,
            allow_nonproper=self.allow_nonproper,
            strict_validation=self.strict_validation,
            workers=self.workers,
        )


class InsertionBlock(XmlBaseModel):
    """
    `characters` lists eta_1..eta_k, one per ';'; the polynomial is in x1..xk
    """

    polynomial: str
    characters: str

    def to_insertion(self) -> Insertion:
        insertion = Insertion(polynomial=self.polynomial, characters=parse_int_matrix(self.characters, "insertion.characters"))
        try:
            insertion.expression()
        except Exception as E:
            raise ConfigError(str(E), field="insertion.polynomial") from E
        return insertion


class BigIBlock(XmlBaseModel):
    t_order: int = 1
    insertion: List[InsertionBlock] = []


class OutputBlock(XmlBaseModel):
    format: OutputFormat = OutputFormat.PLAIN
    destination: Optional[str] = None
    factored: bool = False
    symbols: Optional[str] = None

    @property
    def symbol_names(self) -> Optional[List[str]]:
        return self.symbols.split() if self.symbols else None


class ExpectBlock(XmlBaseModel):
    """
    An expected coefficient, a sympy expression in t1..tr, z and s1..sq.
    With `divide-by` the expression is divided exactly by that polynomial.
    """

    degree: str
    t_exponents: Optional[str] = None
    divide_by: Optional[str] = None
    value: ThisElementTextField

    @property
    def degree_vector(self):
        return parse_vector(self.degree, "expect.degree")


class JobConfig(XmlBaseModel):
    name: Optional[str] = None
    presentation: PresentationBlock
    run: RunBlock = RunBlock()
    big_i: Optional[BigIBlock] = None
    output: OutputBlock = OutputBlock()
    expect: List[ExpectBlock] = []

    def to_presentation(self) -> GitPresentation:
        return self.presentation.to_presentation(equivariant=self.run.equivariant)


class JobResult(BaseModel):
    series: IFunctionSeries
    big_i: Optional[BigIFunctionSeries] = None

    class Config:
        arbitrary_types_allowed = True


def parse_config(text: str, strict: bool = True) -> JobConfig:
    config = JobConfig.from_text(text, strict=strict)
    presentation = config.to_presentation()
    if config.run.mode == RunMode.LEFSCHETZ and not presentation.e_weights:
        warnings.warn("mode lefschetz with empty e_weights: reduces to plain mode")
    return config


def run_job(config: JobConfig) -> JobResult:
    presentation = config.to_presentation()
    logger.info("running %s in %s mode up to theta-degree %s", config.name or "job", config.run.mode.value, config.run.max_degree)
    series = assemble(presentation, config.run.options())
    big_i = None
    if config.big_i is not None:
        insertions = [block.to_insertion() for block in config.big_i.insertion]
        big_i = big_i_twist(series, insertions, config.big_i.t_order)
    return JobResult(series=series, big_i=big_i)
