import shutil

import pytest

from pydanticquasimap.base_models import CorpusError
from pydanticquasimap.cli.corpus import CORPUS_DIR, run_corpus
from pydanticquasimap.cli.main import EXIT_CONFIG, EXIT_FAILED, EXIT_OK, main

PERTURBED = "((t1 + z)*(t1 + 2*z))**-3"
ORIGINAL = "((t1 + z)*(t1 + 2*z))**-2"


@pytest.fixture
def perturbed(tmp_path):
    directory = tmp_path / "corpus"
    shutil.copytree(CORPUS_DIR, directory)
    case = directory / "projective_space_1.xml"
    case.write_text(case.read_text().replace(ORIGINAL, PERTURBED))
    return directory


def test_corpus_passes():
    report = run_corpus()
    assert report.ok, report.summary()
    assert len(report.passed) == len(list(CORPUS_DIR.glob("*.xml")))
    assert report.summary().endswith("cases passed")


def test_perturbed_case_fails(perturbed):
    report = run_corpus(perturbed)
    assert not report.ok
    assert report.passed == ["big_i_projective_plane.xml", "equivariant_projective_plane.xml", "grassmannian_2_4.xml"]
    failure = report.failure
    assert failure.case == "projective_space_1.xml"
    assert failure.degree == "2"
    assert failure.expected != failure.actual
    assert failure.reproduction.startswith("<job")
    assert PERTURBED in failure.reproduction
    assert "failed at degree 2" in report.summary()


def test_missing_term_compares_against_zero(tmp_path):
    directory = tmp_path / "corpus"
    directory.mkdir()
    (directory / "vanishing.xml").write_text(
        """
        <job name="no class of degree 1/2 on the projective line">
          <presentation preset="projective_space(1)"/>
          <run max-degree="1" denominator-bound="2"/>
          <expect degree="1/2">0</expect>
        </job>
        """
    )
    assert run_corpus(directory).ok


def test_empty_corpus(tmp_path):
    with pytest.raises(CorpusError):
        run_corpus(tmp_path)
    assert main(["--corpus", str(tmp_path)]) == EXIT_CONFIG


def test_main_corpus(perturbed, tmp_path, capsys):
    small = tmp_path / "small"
    small.mkdir()
    shutil.copy(CORPUS_DIR / "projective_space_2.xml", small)
    assert main(["--corpus", str(small)]) == EXIT_OK
    assert "1 cases passed" in capsys.readouterr().out

    shutil.copy(perturbed / "projective_space_1.xml", small)
    assert main(["--corpus", str(small)]) == EXIT_FAILED
    out = capsys.readouterr().out
    assert "projective_space_1.xml failed at degree 2" in out
    assert "reproduction:" in out
