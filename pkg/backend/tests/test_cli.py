import json
import xml.etree.ElementTree as ET

import pytest

from api.cli import EXIT_COMPILE, EXIT_IO, EXIT_OK, EXIT_PARSE, EXIT_VERIFY, main
from api.render import render_ascii, render_svg
from tests.conftest import WORKED_EXAMPLE

SVG_NS = "{http://www.w3.org/2000/svg}"


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps(WORKED_EXAMPLE), encoding="utf-8")
    return path


@pytest.fixture
def layout_file(tmp_path, problem_file):
    out = tmp_path / "layout.json"
    assert main(["compile", "--input", str(problem_file), "--output", str(out)]) == EXIT_OK
    return out


def test_compile_writes_layout(layout_file):
    data = json.loads(layout_file.read_text(encoding="utf-8"))
    groups = {p["group"] for p in data["plaquettes"] if p["group"] != "filler"}
    assert len(groups) == 3


def test_compile_with_verify_embeds_report(tmp_path, problem_file, capsys):
    out = tmp_path / "layout.json"
    status = main(["compile", "--input", str(problem_file), "--output", str(out), "--verify"])
    assert status == EXIT_OK
    report = json.loads(capsys.readouterr().out)
    assert report["rowspace"] == "pass"
    assert report["passed"] is True


def test_compile_is_byte_identical(tmp_path, problem_file):
    outputs = []
    for name in ("a.json", "b.json"):
        out = tmp_path / name
        main(["compile", "--input", str(problem_file), "--output", str(out), "--seed", "4"])
        outputs.append(out.read_bytes())
    assert outputs[0] == outputs[1]


def test_malformed_problem_exits_with_parse_error(tmp_path, capsys):
    bad = tmp_path / "bad.json"
    bad.write_text('{"num_logical": 2,\n "terms": [}', encoding="utf-8")
    status = main(["compile", "--input", str(bad), "--output", str(tmp_path / "out.json")])
    assert status == EXIT_PARSE
    assert "line 2" in capsys.readouterr().err


def test_missing_input_file(tmp_path):
    status = main(["compile", "--input", str(tmp_path / "nope.json"), "--output", str(tmp_path / "o.json")])
    assert status == EXIT_IO


def test_unsatisfiable_side_conditions_exit_with_compile_error(tmp_path):
    path = tmp_path / "problem.json"
    path.write_text(json.dumps({
        "num_logical": 4,
        "terms": [{"qubits": [1, 2]}, {"qubits": [2, 3]}, {"qubits": [3, 4]}],
        "side_conditions": [
            {"terms": [[1, 2], [2, 3], [3, 4]], "values": [0]},
            {"terms": [[1, 2], [3, 4]], "values": [0]},
        ],
    }), encoding="utf-8")
    status = main(["compile", "--input", str(path), "--output", str(tmp_path / "o.json")])
    assert status == EXIT_COMPILE


def test_verify_passes_on_compiled_layout(layout_file, problem_file, capsys):
    status = main(["verify", "--layout", str(layout_file), "--problem", str(problem_file), "--exhaustive"])
    assert status == EXIT_OK
    assert json.loads(capsys.readouterr().out)["brute_force"]["status"] == "pass"


def test_verify_fails_on_mismatched_problem(tmp_path, layout_file, capsys):
    other = dict(WORKED_EXAMPLE, terms=WORKED_EXAMPLE["terms"][:-1] + [{"qubits": [2, 4], "coeff": 1.0}])
    path = tmp_path / "other.json"
    path.write_text(json.dumps(other), encoding="utf-8")
    status = main(["verify", "--layout", str(layout_file), "--problem", str(path)])
    assert status == EXIT_VERIFY
    assert json.loads(capsys.readouterr().out)["rowspace"] == "fail"


def test_stats_on_single_square(tmp_path, capsys):
    path = tmp_path / "square.json"
    path.write_text(json.dumps({
        "qubits": [
            {"id": 0, "col": 0, "row": 0, "kind": "parity", "term": [1, 2]},
            {"id": 1, "col": 1, "row": 0, "kind": "parity", "term": [2, 3]},
            {"id": 2, "col": 0, "row": 1, "kind": "parity", "term": [1, 4]},
            {"id": 3, "col": 1, "row": 1, "kind": "parity", "term": [3, 4]},
        ],
        "plaquettes": [{"cell": [0, 0], "shape": "square", "group": 0}],
        "pins": [],
    }), encoding="utf-8")
    assert main(["stats", "--layout", str(path)]) == EXIT_OK
    stats = json.loads(capsys.readouterr().out)
    assert stats["qubits"]["parity"] == 4
    assert stats["plaquettes"]["square"] == 1
    assert stats["groups"] == 1


def test_render_ascii_shows_every_term(layout_file, tmp_path):
    out = tmp_path / "layout.txt"
    assert main(["render", "--layout", str(layout_file), "--format", "ascii", "--output", str(out)]) == EXIT_OK
    text = out.read_text(encoding="utf-8")
    for label in ("12", "23", "34", "14", "13", "4", "123"):
        assert label in text


def test_render_svg_draws_one_polygon_per_plaquette(layout_file):
    data = json.loads(layout_file.read_text(encoding="utf-8"))
    root = ET.fromstring(render_svg(data).encode("utf-8"))
    assert len(root.findall(f"{SVG_NS}polygon")) == len(data["plaquettes"])


def test_render_unknown_format(layout_file):
    assert main(["render", "--layout", str(layout_file), "--format", "png"]) == EXIT_IO


def test_render_empty_layout():
    assert render_ascii({"qubits": [], "plaquettes": [], "pins": []}) == ""
    ET.fromstring(render_svg({"qubits": [], "plaquettes": [], "pins": []}).encode("utf-8"))


def test_ascii_marks_ancillas():
    data = {
        "qubits": [
            {"id": 0, "col": 0, "row": 0, "kind": "parity", "term": [1, 2]},
            {"id": 1, "col": 1, "row": 0, "kind": "parity", "term": [2, 3]},
            {"id": 2, "col": 0, "row": 1, "kind": "fixed"},
            {"id": 3, "col": 1, "row": 1, "kind": "ancilla"},
        ],
        "plaquettes": [{"cell": [0, 0], "shape": "tri_missing_ul", "group": 0}],
        "pins": [2],
    }
    lines = render_ascii(data).splitlines()
    assert lines[0].split() == ["+", "·"]
    assert lines[1].strip() == "┘"
    assert lines[2].split() == ["12", "23"]


def test_verify_reports_malformed_layout(tmp_path, layout_file, problem_file, capsys):
    data = json.loads(layout_file.read_text(encoding="utf-8"))
    del data["qubits"][0]["kind"]
    broken = tmp_path / "broken.json"
    broken.write_text(json.dumps(data), encoding="utf-8")
    status = main(["verify", "--layout", str(broken), "--problem", str(problem_file)])
    assert status == EXIT_VERIFY
    report = json.loads(capsys.readouterr().out)
    assert report["rowspace"] == "fail"
    assert "kind" in report["witness"]["error"]


def test_stats_rejects_malformed_layout(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({"qubits": [{"id": 0, "col": 0, "row": 0}], "plaquettes": []}), encoding="utf-8")
    assert main(["stats", "--layout", str(path)]) == EXIT_PARSE
