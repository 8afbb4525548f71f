import json
from fractions import Fraction
from pathlib import Path

import pytest

from pydanticquasimap.base_models import ConfigError, PipelineIntegrityError
from pydanticquasimap.cli.corpus import CORPUS_DIR
from pydanticquasimap.cli.main import EXIT_CONFIG, EXIT_INTEGRITY, EXIT_OK, EXIT_UNBOUNDED, main, parse_big_i
from pydanticquasimap.cli.models import OutputFormat, parse_config, run_job
from pydanticquasimap.cli.presets import complete_intersection, grassmannian, preset_from_text, projective_space, weighted_projective, with_equivariant_column
from pydanticquasimap.cli.render import divisor_symbols, load_big_i, load_series, render, render_big_i_json, render_json, render_plain
from pydanticquasimap.ifunction.models import RunMode, RunOptions, assemble

SAMPLES = Path(__file__).parent.parent / "data" / "sample"

UNBOUNDED = """
<job name="theta on a wall">
  <presentation torus-rank="2">
    <weights>1 0; 0 1; 1 1</weights>
    <theta>1 0</theta>
  </presentation>
  <run max-degree="1" strict-validation="0"/>
</job>
"""


@pytest.fixture
def plane_series():
    return assemble(projective_space(2), RunOptions(degree_bound=2))


def test_parse_corpus_config():
    config = parse_config((CORPUS_DIR / "projective_space_2.xml").read_text())
    assert config.name == "projective space of dimension 2"
    assert config.presentation.preset == "projective_space(2)"
    assert config.run.max_degree == 5
    assert config.run.mode == RunMode.TORIC
    assert len(config.expect) == 6
    assert config.expect[1].degree_vector == (1,)
    assert config.to_presentation() == projective_space(2)


def test_parse_explicit_presentation():
    config = parse_config((SAMPLES / "explicit_weighted.xml").read_text())
    assert config.to_presentation() == weighted_projective(1, 1, 2)
    assert config.run.max_degree == Fraction(3, 2)
    assert config.output.format == OutputFormat.PLAIN


def test_parse_degrees_and_equivariant():
    config = parse_config((SAMPLES / "quintic_json.xml").read_text())
    assert config.to_presentation().e_weights == ((5,),)
    equivariant = parse_config('<job><presentation preset="grassmannian(2, 3)"/><run mode="nonabelian" equivariant="1"/></job>')
    assert equivariant.to_presentation() == grassmannian(2, 3, equivariant=True)


def test_syntax_error_position():
    with pytest.raises(ConfigError) as info:
        parse_config("<job>\n  <presentation preset='projective_space(2)'>\n</job>")
    assert info.value.line == 3
    assert info.value.column is not None
    assert "line 3" in str(info.value)


@pytest.mark.parametrize(
    "text,message",
    [
        ('<job><presentation preset="projective_space(2)" colour="red"/></job>', "Unknown attributes"),
        ('<job><presentation preset="projective_space(2)"/><runs/></job>', "Unknown elements"),
        ('<job><presentation preset="flag_variety(2)"/></job>', "unknown preset"),
        ('<job><presentation preset="projective_space(a)"/></job>', "integers"),
        ('<job><presentation torus-rank="2"><weights>1; 1</weights><theta>1 1</theta></presentation></job>', r"weights\[0\]"),
        ('<job><presentation torus-rank="1"><weights>1 0; 1</weights><theta>1</theta></presentation></job>', r"presentation.weights\[1\]: ragged"),
        ('<job><presentation torus-rank="2"><weights>1 0; 0 1; 1 1 1; 1</weights><theta>1 1</theta></presentation></job>', r"weights\[2\].*row 2 has 3 entries"),
        ('<job><presentation torus-rank="1"><weights>1; x</weights><theta>1</theta></presentation></job>', "presentation.weights"),
        ('<job><presentation torus-rank="1"/></job>', "needs a preset"),
        ('<job><presentation preset="projective_space(2)"/><run max-degree="-1"/></job>', "nonnegative"),
        ('<job><presentation preset="projective_space(2)"/><run mode="quantum"/></job>', "run.mode"),
    ],
)
def test_config_errors(text, message):
    with pytest.raises(ConfigError, match=message):
        parse_config(text)


def test_lenient_parsing_warns():
    with pytest.warns(UserWarning, match="Unknown attributes"):
        config = parse_config('<job><presentation preset="projective_space(2)" colour="red"/></job>', strict=False)
    assert config.to_presentation() == projective_space(2)


def test_lefschetz_without_e_weights_warns():
    with pytest.warns(UserWarning, match="reduces to plain"):
        parse_config('<job><presentation preset="projective_space(2)"/><run mode="lefschetz"/></job>')


def test_presets():
    assert preset_from_text("grassmannian(2, 4)") == grassmannian(2, 4)
    assert preset_from_text(" weighted_projective(1,1,2) ") == weighted_projective(1, 1, 2)
    assert preset_from_text("quintic()").e_weights == ((5,),)
    assert preset_from_text("product_projective(1, 2)").n == 5
    assert complete_intersection(projective_space(3), 2, 2).e_weights == ((2,), (2,))
    P = with_equivariant_column(projective_space(1))
    assert P.weights == ((1, 0), (1, 1))
    assert with_equivariant_column(P) is P
    with pytest.raises(ConfigError):
        with_equivariant_column(projective_space(1), [0])


def test_render_plain(plane_series):
    lines = render_plain(plane_series).splitlines()
    assert lines[0] == "1"
    assert lines[1].startswith("q^1: ")
    assert "H" in lines[1]
    assert lines[2].startswith("q^2: ")


def test_render_twisted():
    series = assemble(weighted_projective(1, 1, 2), RunOptions(degree_bound=Fraction(1, 2)))
    lines = render_plain(series).splitlines()
    assert lines[1] == "q^1/2 [sector (1/2, 1/2, 0)]: 4/z**3"


def test_render_latex(plane_series):
    text = render(plane_series, OutputFormat.LATEX, names=["D"], factored=True)
    assert text.startswith("1 + q^{1}")
    assert "D" in text


def test_divisor_symbols():
    assert [str(s) for s in divisor_symbols(1)] == ["H"]
    assert [str(s) for s in divisor_symbols(2)] == ["H1", "H2"]
    with pytest.raises(ConfigError):
        divisor_symbols(2, ["a"])


def test_json_document(plane_series):
    text = render_json(plane_series)
    document = json.loads(text)
    assert document["schema_version"] == 1
    assert document["terms"][1]["values"] == [[1, 1]]
    loaded = load_series(text)
    assert loaded.presentation == plane_series.presentation
    assert [t.coefficient for t in loaded.terms] == [t.coefficient for t in plane_series.terms]


def test_json_twisted_sectors():
    series = assemble(weighted_projective(1, 1, 2), RunOptions(degree_bound=1))
    loaded = load_series(render_json(series))
    assert [t.sector for t in loaded.terms] == [t.sector for t in series.terms]
    assert [t.coefficient for t in loaded.terms] == [t.coefficient for t in series.terms]


def test_json_schema_version(plane_series):
    document = json.loads(render_json(plane_series))
    document["schema_version"] = 2
    with pytest.raises(ConfigError, match="schema_version"):
        load_series(json.dumps(document))


def test_big_i_json_round_trip():
    config = parse_config((CORPUS_DIR / "big_i_projective_plane.xml").read_text())
    big = run_job(config).big_i
    text = render_big_i_json(big)
    document = json.loads(text)
    assert document["schema_version"] == 1
    assert document["t_order"] == 1
    assert document["insertions"] == [{"polynomial": "x1", "characters": [[1]]}]
    assert [term["t_exponents"] for term in document["terms"][:4]] == [[0], [1], [0], [1]]
    loaded = load_big_i(text)
    assert [(t.base.beta, t.t_exponents) for t in loaded.terms] == [(t.base.beta, t.t_exponents) for t in big.terms]
    assert [t.coefficient for t in loaded.terms] == [t.coefficient for t in big.terms]
    assert loaded.coefficient((1,), (1,)) == big.coefficient((1,), (1,))
    assert [t.coefficient for t in load_series(text).terms] == [t.coefficient for t in big.series.terms]


def test_run_job_big_i():
    config = parse_config((CORPUS_DIR / "big_i_projective_plane.xml").read_text())
    result = run_job(config)
    assert result.big_i is not None
    assert result.big_i.coefficient((1,), (0,)) == result.series.coefficient((1,))


def test_parse_big_i():
    block = parse_big_i("2:x1@1:x1**2@1")
    assert block.t_order == 2
    assert [i.characters for i in block.insertion] == ["1", "1"]
    with pytest.raises(ConfigError):
        parse_big_i("two:x1@1")
    with pytest.raises(ConfigError):
        parse_big_i("1:x1")


def test_main_plain(capsys):
    assert main(["--config", str(SAMPLES / "explicit_weighted.xml")]) == EXIT_OK
    out = capsys.readouterr().out
    assert out.splitlines()[0] == "1"
    assert "q^1/2" in out
    assert "q^3/2" in out


def test_main_overrides(capsys):
    code = main(["--config", str(CORPUS_DIR / "projective_space_2.xml"), "--max-degree", "1", "--output", "latex"])
    assert code == EXIT_OK
    out = capsys.readouterr().out
    assert out.startswith("1 + q^{1}")
    assert "q^{2}" not in out


def test_main_json_file(tmp_path):
    destination = tmp_path / "series.json"
    code = main(["--config", str(SAMPLES / "quintic_json.xml"), "--out", str(destination)])
    assert code == EXIT_OK
    series = load_series(destination.read_text())
    assert [d for (d,) in series.degrees] == [0, 1, 2]


def test_main_big_i(capsys):
    code = main(["--config", str(CORPUS_DIR / "projective_space_1.xml"), "--max-degree", "1", "--big-i", "1:x1@1"])
    assert code == EXIT_OK
    assert " t1^1: " in capsys.readouterr().out


def test_main_residue_sample(capsys):
    assert main(["--config", str(SAMPLES / "negative_bundle_residue.xml")]) == EXIT_OK
    assert "residue(" in capsys.readouterr().out


def test_main_config_errors(tmp_path, capsys):
    assert main([]) == EXIT_CONFIG
    assert main(["--config", str(tmp_path / "missing.xml")]) == EXIT_CONFIG
    broken = tmp_path / "broken.xml"
    broken.write_text("<job><presentation preset='projective_space(2)'></job>")
    assert main(["--config", str(broken)]) == EXIT_CONFIG
    assert "line 1" in capsys.readouterr().err


def test_main_unbounded(tmp_path, capsys):
    path = tmp_path / "unbounded.xml"
    path.write_text(UNBOUNDED)
    with pytest.warns(UserWarning):
        assert main(["--config", str(path)]) == EXIT_UNBOUNDED
    assert "unbounded" in capsys.readouterr().err


def test_main_integrity(monkeypatch):
    def broken(config):
        raise PipelineIntegrityError("division by t1 - t2 is not exact")

    monkeypatch.setattr("pydanticquasimap.cli.main.run_job", broken)
    assert main(["--config", str(CORPUS_DIR / "projective_space_1.xml")]) == EXIT_INTEGRITY


def test_main_mode_override_refused(capsys):
    code = main(["--config", str(CORPUS_DIR / "grassmannian_2_4.xml"), "--mode", "toric"])
    assert code == EXIT_CONFIG
    assert "toric mode" in capsys.readouterr().err


def test_main_big_i_json(tmp_path):
    destination = tmp_path / "big.json"
    code = main(["--config", str(CORPUS_DIR / "big_i_projective_plane.xml"), "--output", "json", "--out", str(destination)])
    assert code == EXIT_OK
    big = load_big_i(destination.read_text())
    assert big.t_order == 1
    assert big.coefficient((2,), (1,)) == run_job(parse_config((CORPUS_DIR / "big_i_projective_plane.xml").read_text())).big_i.coefficient((2,), (1,))
