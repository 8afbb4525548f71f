import logging
import xml.etree.ElementTree as ET
from pathlib import Path
from typing import List, Optional, Union

import sympy
from pydantic import BaseModel

from pydanticquasimap.base_models import CorpusError
from pydanticquasimap.chowring.models import RingElement, build_ring, divide_by_delta
from pydanticquasimap.cli.models import ExpectBlock, JobConfig, JobResult, parse_config, run_job
from pydanticquasimap.gitdata.models import CurveClass, involute, sector_of

logger = logging.getLogger(__name__)

CORPUS_DIR = Path(__file__).parent.parent / "data" / "corpus"


class CorpusFailure(BaseModel):
    case: str
    degree: str
    expected: str
    actual: str
    reproduction: str


class CorpusReport(BaseModel):
    passed: List[str] = []
    failure: Optional[CorpusFailure] = None

    @property
    def ok(self) -> bool:
        return self.failure is None

    def summary(self) -> str:
        if self.failure is None:
            return f"{len(self.passed)} cases passed"
        f = self.failure
        return "\n".join(
            [
                f"{len(self.passed)} cases passed, {f.case} failed at degree {f.degree}",
                f"  expected: {f.expected}",
                f"  actual:   {f.actual}",
                "reproduction:",
                f.reproduction,
            ]
        )


def _actual(result: JobResult, expect: ExpectBlock) -> Optional[RingElement]:
    degree = expect.degree_vector
    if expect.t_exponents is not None:
        assert result.big_i is not None
        exponents = tuple(int(e) for e in expect.t_exponents.split())
        terms = [t for t in result.big_i.terms if t.base.degree == degree and t.t_exponents == exponents and t.coefficient is not None]
        return terms[0].coefficient if terms else None
    terms = [t for t in result.series[degree] if t.coefficient is not None]
    if len(terms) > 1:
        raise CorpusError(f"{len(terms)} terms at degree {expect.degree}; expectations need a single sector")
    return terms[0].coefficient if terms else None


def expected_value(expect: ExpectBlock, config: JobConfig, actual: Optional[RingElement]) -> RingElement:
    """
    Evaluate the expected expression in the ring the coefficient lives in
    """
    if actual is not None:
        ring = actual.ring
    else:
        # no term was emitted: the expectation must vanish in the landing ring
        presentation = config.to_presentation()
        values = expect.degree_vector
        beta = CurveClass(values=values if len(values) == presentation.r else (0,) * presentation.r)
        ring = build_ring(involute(sector_of(beta, presentation)), presentation)
    value = ring.evaluate(sympy.sympify(expect.value))
    if expect.divide_by:
        return divide_by_delta(value.poly, ring.evaluate(sympy.sympify(expect.divide_by)).poly, ring)
    return value


def reproduction(config: JobConfig, expect: ExpectBlock) -> str:
    minimal = config.copy(update=dict(expect=[expect]))
    return ET.tostring(minimal.to_element("job"), encoding="unicode")


def run_case(path: Path, report: CorpusReport) -> bool:
    config = parse_config(path.read_text())
    result = run_job(config)
    for expect in config.expect:
        actual = _actual(result, expect)
        expected = expected_value(expect, config, actual)
        observed = actual if actual is not None else expected.ring.zero
        if observed != expected:
            logger.error("%s: mismatch at degree %s", path.name, expect.degree)
            report.failure = CorpusFailure(
                case=path.name,
                degree=expect.degree,
                expected=str(expected),
                actual=str(observed),
                reproduction=reproduction(config, expect),
            )
            return False
    report.passed.append(path.name)
    return True


def run_corpus(directory: Union[str, Path, None] = None) -> CorpusReport:
    """
    Run every case, stopping at the first mismatch
    """
    directory = Path(directory) if directory is not None else CORPUS_DIR
    cases = sorted(directory.glob("*.xml")) if directory.is_dir() else []
    if not cases:
        raise CorpusError(f"no corpus cases in {directory}")
    report = CorpusReport()
    for path in cases:
        logger.info("corpus case %s", path.name)
        if not run_case(path, report):
            break
    return report
