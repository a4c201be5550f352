import json

import numpy as np
import pytest

from nilmoment import io
from nilmoment import lie_core as lc
from nilmoment.errors import ParseError


def _scenario(**fields):
    doc = {"dim": 3, "brackets": [{"i": 1, "j": 2, "k": 3, "c": 1.0}]}
    doc.update(fields)
    return doc


def test_heisenberg_document():
    sc = io.parse_scenario(_scenario())
    assert sc.bracket.allclose(lc.heisenberg())
    assert sc.derivations == [] and sc.split is None


def test_reversed_indices_flip_sign():
    sc = io.parse_scenario(_scenario(brackets=[{"i": 2, "j": 1, "k": 3, "c": 1.0}]))
    assert sc.bracket.allclose(-1.0 * lc.heisenberg())


def test_optional_sections():
    sc = io.parse_scenario(_scenario(derivations=[[1, 0, 0, 0, 1, 0, 0, 0, 2]], split=[2, 1],
                                     flow={"max_steps": 10, "line_search": False}))
    assert np.array_equal(sc.derivations[0], np.diag([1.0, 1.0, 2.0]))
    assert (sc.split.dim_1, sc.split.dim_2) == (2, 1)
    assert sc.flow_config().max_steps == 10 and not sc.flow_config().line_search


@pytest.mark.parametrize("doc, where, message", [
    (_scenario(dim=0), "<input>.dim", "outside"),
    (_scenario(dim="3"), "<input>.dim", "integer"),
    ({"brackets": []}, "<input>", "missing field 'dim'"),
    (_scenario(brackets=[{"i": 1, "j": 4, "k": 3, "c": 1}]), "<input>.brackets[0].j", "outside"),
    (_scenario(brackets=[{"i": 1, "j": 2, "k": 3, "c": "x"}]), "<input>.brackets[0].c", "real number"),
    (_scenario(brackets=[{"i": 1, "j": 2, "k": 3, "c": [1, 2]}]), "<input>.brackets[0].c", "complex"),
    (_scenario(brackets=[{"i": 1, "j": 1, "k": 3, "c": 1}]), "<input>.brackets[0]", "antisymmetry"),
    (_scenario(brackets=[{"i": 1, "j": 2, "k": 3, "c": 1}, {"i": 2, "j": 1, "k": 3, "c": 1}]),
     "<input>.brackets[1]", "duplicate"),
    (_scenario(brackets=[{"i": 1, "j": 2, "k": 3, "c": 1, "z": 0}]), "<input>.brackets[0]", "unknown field"),
    (_scenario(extra=1), "<input>", "unknown field"),
    (_scenario(schema="other/1"), "<input>.schema", "unsupported schema"),
    (_scenario(split=[2, 2]), "<input>.split", "does not add up"),
    (_scenario(derivations=[[0, 1, 0, 0, 0, 0, 0, 0, 0]]), "<input>.derivations[0]", "symmetric"),
    (_scenario(derivations=[[1, 2]]), "<input>.derivations[0]", "expected 9 entries"),
    (_scenario(flow={"speed": 1}), "<input>.flow", "unknown flow setting"),
    (_scenario(flow={"shrink": 2.0}), "<input>.flow", "shrink"),
])
def test_field_path_diagnostics(doc, where, message):
    with pytest.raises(ParseError, match=message) as info:
        io.parse_scenario(doc)
    assert info.value.where == where


def test_json_syntax_error_reports_line_and_column():
    with pytest.raises(ParseError) as info:
        io.loads('{\n  "dim": 3,\n  "brackets": [\n}', "bad.json")
    assert info.value.where.startswith("bad.json: line 4")


def test_duplicate_keys_and_nan_are_rejected():
    with pytest.raises(ParseError, match="duplicate key"):
        io.loads('{"dim": 3, "dim": 4}')
    with pytest.raises(ParseError, match="non-finite"):
        io.loads('{"c": NaN}')


def test_matrix_documents():
    flat = io.parse_matrix_document({"dim": 2, "entries": [0, 1, 0, 0]})
    nested = io.parse_matrix_document({"dim": 2, "entries": [[0, 1], [0, 0]]})
    assert np.array_equal(flat, nested)
    with pytest.raises(ParseError, match=r"row has 1 entries") as info:
        io.parse_matrix_document({"dim": 2, "entries": [[0, 1], [0]]})
    assert info.value.where == "<input>.entries[1]"
    with pytest.raises(ParseError, match="nonempty"):
        io.parse_basis_document({"dim": 2, "basis": []})


def test_missing_file(tmp_path):
    with pytest.raises(ParseError, match="no such file"):
        io.load_scenario(tmp_path / "absent.json")


def test_bundled_fixtures_all_parse():
    data = io.fixture_path("heisenberg.json").parent
    names = sorted(p.name for p in data.iterdir() if p.suffix == ".json")
    assert len(names) >= 20
    for name in names:
        doc = json.loads((data / name).read_text())
        if "brackets" in doc:
            sc = io.load_scenario(name)
            assert lc.jacobi_residual(sc.bracket) <= 1e-12 * max(1.0, sc.bracket.norm() ** 2)
        elif "basis" in doc:
            assert io.load_basis(name)
        else:
            assert io.load_matrix(name).shape == (doc["dim"], doc["dim"])


def test_records_round_trip(rng):
    mu = lc.random_bracket(4, rng)
    doc = {"dim": 4, "brackets": io.bracket_records(mu)}
    assert io.parse_scenario(json.loads(json.dumps(doc))).bracket.allclose(mu, atol=0.0)
