import json
import subprocess
import sys

import pytest

import ncrowmotion.verify as V
from ncrowmotion.cli import main, parse_args


def run(argv, capsys):
    code = main(argv)
    out, err = capsys.readouterr()
    return code, out, err


def test_parse_defaults():
    args = parse_args(["verify"])
    assert args.poset.spec == "rect:2x2" and args.ring.descriptor.spec == "mat:2"
    assert args.trials == 10 and args.seed == 0 and args.bound == 9
    assert parse_args(["conjecture"]).poset.spec == "delta:3"
    assert parse_args(["tropical"]).ring.descriptor.spec == "trop"
    assert parse_args(["verify", "--seed", "0x10"]).seed == 16


@pytest.mark.parametrize("argv", [
    [],
    ["bogus"],
    ["verify", "--poset", "rect:0x2"],
    ["verify", "--ring", "mat:0"],
    ["verify", "--trials", "0"],
    ["verify", "--seed", "-1"],
    ["orbit", "--max-iter", "x"],
])
def test_usage_errors_exit_2(argv, capsys):
    with pytest.raises(SystemExit) as exc:
        main(argv)
    assert exc.value.code == 2
    assert "error" in capsys.readouterr().err


def test_bad_poset_message_names_the_flag(capsys):
    with pytest.raises(SystemExit):
        main(["verify", "--poset", "rect:0x2"])
    assert "argument --poset" in capsys.readouterr().err


def test_verify_passes(capsys):
    code, out, _ = run(["verify", "--poset", "rect:2x3", "--trials", "3"], capsys)
    assert code == 0
    assert "periodicity" in out and "fail" not in out


def test_verify_json_and_output_file(tmp_path, capsys):
    path = tmp_path / "report.json"
    code, out, _ = run(["verify", "--trials", "2", "--json", "--output", str(path), "--slacks"], capsys)
    assert code == 0
    assert json.loads(out) == json.loads(path.read_text())
    assert json.loads(out)["status"] == "pass"


def test_failure_exits_1(monkeypatch, capsys):
    monkeypatch.setattr(V, "_twist", lambda ring, a, b, x: x)
    code, out, _ = run(["verify", "--trials", "2", "--json"], capsys)
    assert code == 1
    report = json.loads(out)
    assert report["status"] == "fail"
    failing = [v for v in report["verdicts"] if v["status"] == "fail"]
    assert failing and failing[0]["failures"][0]["labeling"]


def test_output_is_byte_identical(capsys):
    argv = ["verify", "--poset", "rect:2x3", "--trials", "3", "--seed", "7", "--json"]
    _, a, _ = run(argv, capsys)
    _, b, _ = run(argv, capsys)
    assert a == b


def test_cli_runs_as_module():
    proc = subprocess.run(
        [sys.executable, "-m", "ncrowmotion.cli", "orbit", "--poset", "rect:1x1", "--ring", "q", "--json"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert len(json.loads(proc.stdout)["orbit"]) == 3


def test_labeling_save_load_is_fixed_point(tmp_path, capsys):
    _, out, _ = run(["orbit", "--poset", "claw", "--seed", "4", "--json"], capsys)
    first = json.loads(out)["orbit"][0]
    path = tmp_path / "f.json"
    path.write_text(json.dumps(first))
    _, again, _ = run(["orbit", "--poset", "claw", "--labeling", str(path), "--json"], capsys)
    reloaded = json.loads(again)
    assert reloaded["orbit"][0] == first
    assert reloaded["orbit"] == json.loads(out)["orbit"]
    assert reloaded["seed"] is None


def test_labeling_errors(tmp_path, capsys):
    _, out, _ = run(["orbit", "--poset", "rect:2x2", "--ring", "q", "--json"], capsys)
    obj = json.loads(out)["orbit"][0]
    del obj["labels"]["(2,1)"]
    missing = tmp_path / "missing.json"
    missing.write_text(json.dumps(obj))
    code, _, err = run(["orbit", "--poset", "rect:2x2", "--labeling", str(missing)], capsys)
    assert code == 2 and "(2,1)" in err

    obj["labels"]["(2,1)"] = "p/0"
    bad = tmp_path / "bad.json"
    bad.write_text(json.dumps(obj))
    code, _, err = run(["orbit", "--poset", "rect:2x2", "--labeling", str(bad)], capsys)
    assert code == 2 and "p/0" in err

    code, _, err = run(["orbit", "--labeling", str(tmp_path / "nope.json")], capsys)
    assert code == 2 and "cannot read" in err

    garbage = tmp_path / "garbage.json"
    garbage.write_text("{")
    code, _, err = run(["orbit", "--labeling", str(garbage)], capsys)
    assert code == 2 and "not valid JSON" in err


def test_unwritable_output_exits_2(tmp_path, capsys):
    code, _, err = run(["claw", "--output", str(tmp_path / "no" / "such" / "dir.json")], capsys)
    assert code == 2 and "cannot write" in err


def test_orbit_with_zero_label_is_truncated(tmp_path, capsys):
    # the first toggle inverts the zero at (2,2)
    labels = {"BOT": "1/1", "(1,1)": "1/1", "(2,1)": "1/1", "(1,2)": "1/1", "(2,2)": "0/1", "TOP": "1/1"}
    path = tmp_path / "zero.json"
    path.write_text(json.dumps({"ring": {"kind": "exact_rational"}, "labels": labels}))
    code, out, _ = run(["orbit", "--labeling", str(path), "--json"], capsys)
    assert code == 0
    orbit = json.loads(out)["orbit"]
    assert orbit[0]["labels"] == labels and orbit[1:] == ["undefined"] * 4
    code, out, _ = run(["orbit", "--labeling", str(path)], capsys)
    assert "R^1 f = undefined" in out


def test_slacks_dump(capsys):
    code, out, _ = run(["slacks", "--poset", "rect:2x2", "--ring", "q", "--max-iter", "2", "--json"], capsys)
    assert code == 0
    rows = json.loads(out)["slacks"]
    assert len(rows) == 6 * 3
    assert rows[json.dumps(["BOT", 1])]["down"] == "1/1"
    assert rows[json.dumps(["TOP", 0])]["up"] == "1/1"


def test_claw_report(capsys):
    code, out, _ = run(["claw"], capsys)
    assert code == 0
    assert "(y, z) = (4/9, 5/9)" in out
    code, out, _ = run(["claw", "--json"], capsys)
    assert json.loads(out)["verdicts"][0]["detail"]["R6"]["y"] == "4/9"


def test_conjecture_command(capsys):
    code, out, _ = run(["conjecture", "--poset", "tria:2", "--trials", "3"], capsys)
    assert code == 0 and "consistent with conjecture" in out and "proved" not in out
    code, _, err = run(["conjecture", "--poset", "rect:2x2"], capsys)
    assert code == 2 and "--poset" in err


def test_invariant_and_tropical_commands(capsys):
    assert run(["invariant", "--trials", "3"], capsys)[0] == 0
    assert run(["tropical", "--poset", "rect:2x3", "--trials", "5"], capsys)[0] == 0
    code, _, err = run(["tropical", "--ring", "q"], capsys)
    assert code == 2 and "--ring" in err
    code, _, err = run(["tropical", "--poset", "claw"], capsys)
    assert code == 2 and "--poset" in err


def test_report_save_load_save_is_fixed_point(tmp_path, capsys):
    from ncrowmotion.cli import save_report

    first = tmp_path / "a.json"
    run(["verify", "--trials", "2", "--output", str(first)], capsys)
    second = tmp_path / "b.json"
    save_report(str(second), json.loads(first.read_text()))
    assert first.read_bytes() == second.read_bytes()
