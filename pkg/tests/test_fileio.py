import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from odkit.config import DEFAULTS, load_config, parse_config
from odkit.constructions import H2, base_od, od_with_type, weighing_power2
from odkit.designs import OrthogonalDesign, substitute, verify_od
from odkit.errors import MatrixFormatError
from odkit.exact import gram, identity
from odkit.fileio import (Certificate, IntTable, UnitWeighingFile, WeighingFile, digest, parse_matrix,
                          read_matrix, render_matrix, write_matrix)
from odkit.unit import UnitMatrix, UnitOrthogonalDesign, is_unit_weighing

from .oracles import to_complex


def test_weighing_example():
    obj = parse_matrix("W 2 2\n+ +\n+ -\n")
    assert obj == WeighingFile(H2, 2)


def test_od_example():
    obj = parse_matrix("OD 2 2\ntype 1 1\n+1 +2\n-2 +1\n")
    assert obj == base_od(1)


def test_fourier_example():
    obj = parse_matrix("UW 3 3 3\ne0 e0 e0\ne0 e1 e2\ne0 e2 e1\n")
    assert obj.matrix == UnitMatrix.fourier(3)
    assert is_unit_weighing(obj.matrix, 3)
    F = to_complex(obj.matrix)
    assert np.allclose(F @ F.conj().T, 3 * np.eye(3))


def test_uod_tokens_and_abbreviation():
    text = "UOD 2 2 4\ntype 1 1\n+1 e0*x2\ne2*x2 e0*x1\n"
    D = parse_matrix(text)
    assert isinstance(D, UnitOrthogonalDesign)
    # e0*x<i> is rendered in its short form
    assert render_matrix(D).splitlines()[-2:] == ["+1 +2", "e2*x2 +1"]


def test_rendering_starts_with_version_line():
    text = render_matrix(base_od(2))
    assert text.splitlines()[:3] == ["# odkit-format 1", "OD 4 4", "type 1 1 1 1"]
    assert text.endswith("\n")


@pytest.mark.parametrize("text,line,column", [
    ("W 2\n+ +\n+ -\n", 1, None),
    ("W 2 2\n+ +\n+ x\n", 3, 2),
    ("W 2 2\n+ + +\n+ -\n", 2, None),
    ("OD 2 2\ntype 1 1\n+1 +3\n-2 +1\n", 3, 2),
    ("OD 2 2\n+1 +2\n-2 +1\n", 2, None),
    ("UW 3 3 3\ne0 e0 e0\ne0 e1 e3\ne0 e2 e1\n", 3, 3),
    ("UOD 2 2 4\ntype 1 1\n+1 e4*x2\ne2*x2 +1\n", 3, 2),
    ("Q 2 2\n", 1, 1),
    ("W 0 2\n", 1, 2),
])
def test_located_errors(text, line, column):
    with pytest.raises(MatrixFormatError) as exc:
        parse_matrix(text)
    assert exc.value.line == line and exc.value.column == column


def test_row_count_mismatch():
    with pytest.raises(MatrixFormatError, match="expected 2 rows"):
        parse_matrix("W 2 2\n+ +\n")
    with pytest.raises(MatrixFormatError, match="empty"):
        parse_matrix("\n# only a comment\n")


def test_version_rejected():
    with pytest.raises(MatrixFormatError, match="unsupported format version 2"):
        parse_matrix("# odkit-format 2\nW 2 2\n+ +\n+ -\n")


def test_int_table_round_trip():
    T = IntTable(np.array([[1, -2, 30], [0, 4, -5]]))
    assert parse_matrix(render_matrix(T)) == T


def _catalog():
    w = st.integers(1, 3).flatmap(lambda t: st.integers(1, 2 ** t).map(
        lambda k: WeighingFile(weighing_power2(t, k), k)))
    od = st.sampled_from([base_od(1), base_od(2), base_od(3), od_with_type(3, (1, 1, 6)),
                          od_with_type(4, (2, 2, 6, 6))])
    uw = st.integers(2, 9).map(lambda q: UnitWeighingFile(UnitMatrix.fourier(q), q))
    uod = st.sampled_from([1, 2, 3]).map(lambda t: UnitOrthogonalDesign.from_real(base_od(t)))
    return st.one_of(w, od, uw, uod)


@given(_catalog())
def test_round_trip(obj):
    text = render_matrix(obj)
    assert parse_matrix(text) == obj
    assert render_matrix(parse_matrix(text)) == text


def test_single_token_corruption_is_located(tmp_path):
    text = render_matrix(base_od(2))
    lines = text.splitlines()
    lines[3] = lines[3].replace("+1", "+9", 1)
    with pytest.raises(MatrixFormatError) as exc:
        parse_matrix("\n".join(lines))
    assert exc.value.line == 4 and exc.value.column == 1
    lines = text.splitlines()
    lines[4] = lines[4].replace("+1", "-1", 1)
    rep = verify_od(parse_matrix("\n".join(lines)))
    assert not rep and rep.pair is not None


def test_write_and_read(tmp_path):
    obj = WeighingFile(weighing_power2(3, 7), 7)
    h = write_matrix(tmp_path / "a.w", obj)
    assert h == digest((tmp_path / "a.w").read_text())
    assert read_matrix(tmp_path / "a.w") == obj
    assert not list(tmp_path.glob(".*"))


def test_certificate_round_trip():
    c = Certificate("OD", {"alpha": "4"}, [("entries", True), ("gram", False)], {"x.od": "ab" * 32}, "1.0")
    back = Certificate.parse(c.render())
    assert back == c
    with pytest.raises(MatrixFormatError, match="unknown digest"):
        Certificate.parse("kind: W\nversion: 1\nfile.x.w: md5 00\n")
    with pytest.raises(MatrixFormatError, match="lacks kind"):
        Certificate.parse("version: 1\n")


def test_parsed_od_substitutes_to_hadamard():
    D = parse_matrix(render_matrix(od_with_type(3, (1, 1, 6))))
    assert isinstance(D, OrthogonalDesign) and verify_od(D)
    H = substitute(D, {v: 1 for v in range(D.nvars)})
    assert np.array_equal(gram(H), 8 * identity(8))


def test_config_parsing(tmp_path):
    cfg = parse_config("# budgets\nsearch.gs.max_q = 13\n\nsearch.od.node_budget=5  # small\n")
    assert cfg["search.gs.max_q"] == 13 and cfg["search.od.node_budget"] == 5
    assert cfg["search.williamson.max_n"] == DEFAULTS["search.williamson.max_n"]
    for bad in ("nonsense=1", "search.gs.max_q", "search.gs.max_q=x", "search.gs.max_q=0"):
        with pytest.raises(ValueError, match="config line 1"):
            parse_config(bad)
    assert load_config(None) == DEFAULTS
    p = tmp_path / "c.cfg"
    p.write_text("search.butson.max_q=4\n")
    assert load_config(p)["search.butson.max_q"] == 4
