from __future__ import annotations

import io
import json
import subprocess
import sys

import pytest

from cantor.cli import main


def run(argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(argv, out, err)
    return code, out.getvalue(), err.getvalue()


def write(tmp_path, obj, name="s.json"):
    path = tmp_path / name
    path.write_text(obj if isinstance(obj, str) else json.dumps(obj))
    return str(path)


def test_digits_example(tmp_path):
    path = write(tmp_path, {"base": {"kind": "constant", "value": 10}, "numbers": {"r": {"rational": "1/4"}}})
    code, out, _ = run(["digits", "--scenario", path, "--n", "4"])
    assert code == 0 and json.loads(out)["digits"] == [2, 5, 0, 0]
    code, out, _ = run(["digits", "--scenario", path, "--n", "2", "--csv"])
    assert out == "position,digit\n1,2\n2,5\n"


def test_inclusion_example():
    code, out, _ = run(["inclusion", "--x", "odds", "--y", "evens"])
    doc = json.loads(out)
    assert code == 0 and doc["result"] == "NotIncludedOnIntervals" and doc["first"][:3] == [1, 3, 5]
    code, out, _ = run(["inclusion", "--x", "evens", "--y", "evens"])
    assert json.loads(out) == {"result": "Included"}


def test_separate_example_matches_module():
    code, out, _ = run(["separate", "--x", "odds", "--y", "evens", "--count", "3"])
    doc = json.loads(out)
    first = doc["witnesses"][0]
    assert code == 0 and first["k"] == 5
    assert first["phi_x_jw"] == f"{2**16 - 1}/{2**31}"
    assert first["w"] == "101010101010101/10000000000000000000000000000000"


def test_rho_phi_member(tmp_path):
    path = write(tmp_path, {"base": 10, "x": [1], "numbers": {"r": "1/4", "s": "1/20"}})
    code, out, _ = run(["rho", "--scenario", path])
    assert code == 0 and json.loads(out) == {"distance": "1/5", "phi": {"kind": "exact", "value": "1/2"}, "depth": 128}
    path = write(tmp_path, {"base": 10, "x": "evens", "numbers": {"r": "1/7"}})
    code, out, _ = run(["member", "--scenario", path])
    assert code == 0 and json.loads(out)["verdict"]["status"] == "out"
    code, out, _ = run(["phi", "--scenario", path])
    assert json.loads(out)["phi"] == {"kind": "infinite"}
    code, out, _ = run(["phi", "--x", "odds", "--set", "4,5,6,7"])
    assert json.loads(out)["phi"] == {"kind": "exact", "value": "15/128"}


def test_jump_respects_depth_precedence(tmp_path, monkeypatch):
    path = write(tmp_path, {"base": 10, "numbers": {"r": "1/7"}, "depth": 6})
    monkeypatch.setenv("CANTOR_DEPTH", "9")
    assert json.loads(run(["jump", "--scenario", path])[1])["depth"] == 6
    assert json.loads(run(["jump", "--scenario", path, "--depth", "4"])[1])["depth"] == 4
    path = write(tmp_path, {"base": 10, "numbers": {"r": "1/7"}}, "t.json")
    assert json.loads(run(["jump", "--scenario", path])[1])["depth"] == 9
    monkeypatch.delenv("CANTOR_DEPTH")
    assert json.loads(run(["jump", "--scenario", path])[1])["depth"] == 128


def test_malformed_json_reports_position(tmp_path):
    path = write(tmp_path, '{"base": 10,\n "numbers": {"r": "1/3" oops}}')
    code, _, err = run(["digits", "--scenario", path])
    assert code == 1 and f"{path}:2:25:" in err


@pytest.mark.parametrize(
    "scenario, where",
    [
        ({"base": "ten"}, "$.base"),
        ({"x": "bogus"}, "$.x"),
        ({"numbers": {"r": "1/0"}}, "$.numbers.r"),
        ({"depth": -2}, "$.depth"),
        ({"colour": 1}, "$.colour"),
        ([1, 2], "top level"),
    ],
)
def test_malformed_fields_are_located(tmp_path, scenario, where):
    code, _, err = run(["digits", "--scenario", write(tmp_path, scenario)])
    assert code == 1 and where in err


def test_missing_file_and_bad_flags(tmp_path):
    assert run(["digits", "--scenario", str(tmp_path / "none.json")])[0] == 1
    assert run(["nope"])[0] == 1
    assert run(["verify", "nope"])[0] == 1


def test_precondition_exit_codes(tmp_path):
    path = write(tmp_path, {"base": {"kind": "periodic", "prefix": [], "period": [2, 3]}, "x": "evens", "numbers": {"r": "1/3"}})
    code, out, err = run(["member", "--scenario", path])
    assert code == 2 and json.loads(out)["verdict"]["status"] == "out" and "adapted" in err
    code, _, _ = run(["separate", "--x", "odds", "--y", "evens", "--c", "1/3"])
    assert code == 2
    code, _, _ = run(["separate", "--x", "odds", "--y", "odds"])
    assert code == 2


def test_unknown_verdict_exit_code(monkeypatch):
    from cantor import cli
    from cantor.submeasure import Verdict

    monkeypatch.setattr(cli, "h_membership", lambda phi, r, depth: Verdict("unknown", depth=depth))
    code, out, _ = run(["member", "--x", "odds", "--number", "1/3"])
    assert code == 3 and json.loads(out)["verdict"]["status"] == "unknown"


def test_verify_suite_and_determinism():
    code, out, err = run(["verify", "family", "--count", "6"])
    assert code == 0 and "319/420" in out and "E:smla" in err
    assert run(["verify", "family", "--count", "6"])[1] == out
    code, out, _ = run(["verify", "digit-rules", "--seed", "7", "--trials", "50"])
    assert code == 0 and out == run(["verify", "digit-rules", "--seed", "7", "--trials", "50"])[1]


def test_verify_failure_exit_code(monkeypatch):
    from cantor import cli
    from cantor.suites import LemmaRow, SuiteReport

    def broken(name, seed=0, trials=None, count=None):
        row = LemmaRow("fake")
        row.record(False, 1)
        return SuiteReport(name, seed, [row])

    monkeypatch.setattr(cli, "verify_suite", broken)
    assert run(["verify", "moduli"])[0] == 4


def test_module_entry_point_is_byte_identical():
    argv = [sys.executable, "-m", "cantor", "separate", "--x", "odds", "--y", "evens", "--count", "2", "--csv"]
    first = subprocess.run(argv, capture_output=True, check=True).stdout
    assert first == subprocess.run(argv, capture_output=True, check=True).stdout
    assert first.startswith(b"k,w,phi_x,phi_y\n5,")
