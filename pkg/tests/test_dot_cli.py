import json
import re

import pytest

from sacksterms import constructions as C
from sacksterms.cli import main
from sacksterms.dot import UnsupportedObject, export_dot
from sacksterms.suites import Profile, run_suite
from sacksterms.trees import ClippedTree, splitting_fronts

FIG1 = ClippedTree.from_leaves(3, ["000", "001", "011", "110", "111"])


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


# -- DOT ----------------------------------------------------------------------


def test_tree_dot_highlights_fronts():
    dot = export_dot(FIG1)
    assert dot.startswith("digraph tree {") and dot.rstrip().endswith("}")
    filled = set(re.findall(r'"n([01]*)" \[label="[^"]*", color=(\w+)', dot))
    assert filled == {("", "red"), ("0", "blue"), ("11", "blue")}
    assert "// F0 = {ε}" in dot and "// F1 = {0, 11}" in dot
    assert dot.count("->") == len(FIG1.nodes) - 1


def test_tree_dot_is_stable():
    assert export_dot(FIG1) == export_dot(ClippedTree.from_json(FIG1.to_json()))


def test_front_family_dot():
    dot = export_dot(splitting_fronts(FIG1))
    assert "cluster_F0" in dot and "cluster_F1" in dot


def test_empty_window_is_an_empty_graph():
    dot = export_dot([])
    assert "->" not in dot and "[label" not in dot


def test_sigma_window_grid():
    rd = C.build_r_delta()
    dot = export_dot(rd.sigma(), rows=10, cols=20)
    cells = re.findall(r"c(\d+)_(\d+) \[label=\"([^\"]*)\"", dot)
    assert len(cells) == 200
    labelled = {(int(n), int(m)): lab for n, m, lab in cells}
    assert labelled[(2, 11)] == "x(0,0)"
    assert sum(lab.startswith("x(") for lab in labelled.values()) == sum(
        rd.cell(n, m).variable is not None for n in range(10) for m in range(20)
    )


def test_unsupported_object():
    with pytest.raises(UnsupportedObject):
        export_dot(42)


# -- suites ---------------------------------------------------------------------


def test_quick_profile_is_deterministic():
    profile = Profile(seed=3, suites=["figure1", "tau", "stack", "pipeline", "reconstruct"])
    a, code_a = run_suite(profile)
    b, code_b = run_suite(profile)
    assert code_a == code_b == 0
    assert json.dumps(a, sort_keys=True) == json.dumps(b, sort_keys=True)


def test_injected_fixture_fails_with_location():
    out, code = run_suite(Profile(suites=["rdelta"], inject="rdelta-top"))
    assert code == 1
    v = out["suites"]["rdelta"]["violations"][0]
    assert v["clause"] == "top-row" and v["cell"] == [3, "w^2+2"]


# -- CLI ------------------------------------------------------------------------


def test_cli_tau_and_ord(capsys):
    assert run(capsys, "tau", "1", "2")[1].strip() == "7"
    assert run(capsys, "tau", "--inverse", "7")[1].strip() == "7 = tau(1, 2)"
    assert run(capsys, "ord", "add", "w+3", "w*2+5")[1].strip() == "w*3+5"
    code, out, _ = run(capsys, "ord", "add", "w^2", "w+1", "--format", "json")
    assert json.loads(out)["ordinal"] == "w^2+w+1"


def test_cli_tree(capsys):
    code, out, _ = run(capsys, "--format", "json", "tree", "fronts", "figure1")
    assert json.loads(out) == {"F0": [""], "F1": ["0", "11"]}
    code, out, _ = run(capsys, "tree", "refine", "figure1", "--other", '{"depth": 3, "leaves": ["110", "111"]}',
                       "--format", "json")
    assert code == 0 and json.loads(out)["phi"]["0"]["term"] == "1"


def test_cli_entries(capsys):
    assert run(capsys, "rdelta", "entry", "1", "w+5")[1].strip() == "x(0,0)"
    assert run(capsys, "rmult", "entry", "1", "1")[1].strip() == "x(0,0)"


def test_cli_condition_commands(capsys, tmp_path):
    small = ["--window-rows", "4", "--window-cols", "6", "--coef-cap", "2"]
    code, out, _ = run(capsys, "cond", "validate", "rdelta", *small)
    assert code == 0 and out.startswith("ok")
    code, out, _ = run(capsys, "cond", "stack", "rcopy", "--other", "rdelta", "--format", "json")
    path = tmp_path / "stacked.json"
    path.write_text(out)
    code, out, _ = run(capsys, "cond", "stronger", str(path), "--other", "rcopy", *small)
    assert code == 0
    code, out, _ = run(capsys, "cond", "split", str(path), "--at", "w", "--format", "json", *small)
    assert code == 0 and json.loads(out)["upper"]["generator"] == "rDelta"
    code, out, _ = run(capsys, "cond", "eval", "rdelta", "--assignment", '{"0,0": 1}', "--format", "json",
                       "--window-rows", "3", "--window-cols", "12", "--coef-cap", "1")
    assert json.loads(out)["values"]["2@11"] == 1


def test_cli_builder_and_pipeline(capsys, tmp_path):
    small = ["--window-rows", "4", "--window-cols", "8", "--coef-cap", "2"]
    good = tmp_path / "good.json"
    good.write_text(json.dumps({"N": 1, "table": {"0": {"support": [0], "table": "10"}}}))
    assert run(capsys, "builder", "from-matrix", str(good), *small)[0] == 0
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps({"N": 2, "table": {"0": {"support": [1], "table": "10"}}}))
    code, out, _ = run(capsys, "builder", "from-matrix", str(bad), "--format", "json", *small)
    assert code == 1 and json.loads(out)["clause"] == "3"
    assert run(capsys, "pipeline", "run", "rdelta", str(good), *small)[0] == 0


def test_cli_qstar(capsys):
    code, out, _ = run(capsys, "qstar", "sigma-rdelta", "--window-rows", "5", "--window-cols", "5")
    assert code == 0
    code, out, _ = run(capsys, "qstar", '{"N": 1, "table": {"0": {"support": [2], "table": "01"}}}')
    assert code == 1 and "dependence" in out


def test_cli_parse_error_has_position(capsys, tmp_path):
    path = tmp_path / "broken.json"
    path.write_text('{"N": 1,\n  "table" {}}')
    code, _, err = run(capsys, "qstar", str(path))
    assert code == 2
    assert f"{path}:2:11:" in err


def test_cli_verify_and_profile(capsys, tmp_path, monkeypatch):
    code, out, err = run(capsys, "verify", "--suite", "tau", "--suite", "figure1")
    assert code == 0 and out.splitlines() == ["PASS figure1", "PASS tau"] and "seed 0" in err
    code, out, _ = run(capsys, "verify", "--suite", "rdelta", "--inject", "rdelta-top")
    assert code == 1 and out.startswith("FAIL rdelta: [top-row]")
    prof = tmp_path / "profile.json"
    prof.write_text(json.dumps({"seed": 9, "suites": ["tau"]}))
    monkeypatch.setenv("SACKSTERMS_PROFILE", str(prof))
    code, out, err = run(capsys, "verify")
    assert code == 0 and out.strip() == "PASS tau" and "seed 9" in err
    code, out, err = run(capsys, "verify", "--seed", "4")
    assert "seed 4" in err


def test_cli_export(capsys):
    code, out, _ = run(capsys, "export", "tree", "figure1")
    assert out == export_dot(FIG1)
    code, out, _ = run(capsys, "export", "window", "rdelta", "--window-rows", "2", "--window-cols", "3")
    assert out.count("[label=") == 6
