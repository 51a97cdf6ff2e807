import json
import pathlib
import shutil
import subprocess
import sys

import pytest

from carvelift.cli import cli_main

CALC_MC = pathlib.Path(__file__).parent.parent / "src" / "carvelift" / "examples" / "calc" / "prog.mc"


@pytest.fixture
def workdir(tmp_path):
    shutil.copy(CALC_MC, tmp_path / "calc.mc")
    (tmp_path / "one_plus_two.txt").write_bytes(b"1 + 2")
    return tmp_path


def test_run_prints_output(workdir, capsys):
    rc = cli_main(["run", str(workdir / "calc.mc"), "--stdin", str(workdir / "one_plus_two.txt")])
    assert rc == 0
    assert capsys.readouterr().out == "3\n"


def test_run_missing_stdin_file(workdir, capsys):
    rc = cli_main(["run", str(workdir / "calc.mc"), "--stdin", str(workdir / "nope.txt")])
    assert rc == 1
    assert "error" in capsys.readouterr().err


def test_parse_error_exit_code(workdir, capsys):
    bad = workdir / "bad.mc"
    bad.write_text("int main( {")
    rc = cli_main(["run", str(bad), "--stdin", str(workdir / "one_plus_two.txt")])
    assert rc == 2
    err = capsys.readouterr().err
    assert "parse error" in err and "1:11" in err


def test_usage_error_exit_code(capsys):
    assert cli_main(["carve"]) == 1


def test_carve_missing_trace(workdir, capsys):
    rc = cli_main(["carve", str(workdir / "calc.mc"), str(workdir / "missing.jsonl")])
    assert rc == 1
    assert "missing.jsonl" in capsys.readouterr().err


def test_full_stage_pipeline(workdir, capsys):
    calc = str(workdir / "calc.mc")
    stdin = str(workdir / "one_plus_two.txt")
    trace = str(workdir / "calc.jsonl")
    units = str(workdir / "calc.unit.jsonl")
    puts = str(workdir / "calc.put.jsonl")
    cands = str(workdir / "calc.cand.jsonl")

    assert cli_main(["run", calc, "--stdin", stdin, "--trace", trace]) == 0
    assert cli_main(["carve", calc, trace, "--out", units]) == 0
    assert cli_main(["parameterize", calc, units, "--input", stdin, "--out", puts]) == 0
    assert cli_main(["fuzz", calc, puts, "--budget", "25", "--seed", "7", "--out", cands]) == 0
    confirmed = str(workdir / "confirmed")
    assert cli_main(["lift", calc, cands, "--input", stdin, "--out", confirmed]) == 0
    out = capsys.readouterr().out
    assert "carved" in out and "candidates" in out
    manifest = json.loads((workdir / "confirmed" / "manifest.json").read_text())
    for entry in manifest:
        assert entry["classification"] in ("failure-confirmed", "coverage-confirmed")


def test_carve_function_filter(workdir, capsys):
    calc = str(workdir / "calc.mc")
    stdin = str(workdir / "one_plus_two.txt")
    trace = str(workdir / "t.jsonl")
    units = str(workdir / "t.unit.jsonl")
    cli_main(["run", calc, "--stdin", stdin, "--trace", trace])
    cli_main(["carve", calc, trace, "--function", "add", "--out", units])
    lines = [json.loads(l) for l in open(units)]
    assert [d["callee"] for d in lines] == ["add"]


def test_campaign_and_report(workdir, capsys):
    calc = str(workdir / "calc.mc")
    stdin = str(workdir / "one_plus_two.txt")
    report = str(workdir / "report.json")
    rc = cli_main(["campaign", calc, "--seed-input", stdin, "--time", "6", "--rng", "7",
                   "--fuzz-budget", "30", "--expand", "3", "--out", report])
    assert rc == 0
    out = capsys.readouterr().out
    assert "Execution times" in out and "Branch coverage" in out
    data = json.loads(open(report).read())
    assert data["meta"]["config"]["rng_seed"] == 7
    assert cli_main(["report", report, "--format", "table"]) == 0
    table = capsys.readouterr().out
    assert "Lifted unit tests" in table
    assert cli_main(["report", report, "--format", "json"]) == 0
    assert json.loads(capsys.readouterr().out) == data


def test_campaign_focus_flag(workdir, capsys):
    calc = str(workdir / "calc.mc")
    stdin = str(workdir / "one_plus_two.txt")
    report = str(workdir / "focus.json")
    rc = cli_main(["campaign", calc, "--seed-input", stdin, "--time", "4", "--rng", "1",
                   "--fuzz-budget", "20", "--expand", "0", "--focus", "add", "--out", report])
    assert rc == 0
    data = json.loads(open(report).read())
    assert data["meta"]["config"]["focus"] == ["add"]
    assert {r["callee"] for r in data["iterations"]} <= {"add"}


def test_repeated_invocations_reproduce_outputs(workdir):
    calc = str(workdir / "calc.mc")
    stdin = str(workdir / "one_plus_two.txt")
    blobs = []
    for suffix in ("a", "b"):
        trace = str(workdir / f"t{suffix}.jsonl")
        units = str(workdir / f"u{suffix}.jsonl")
        puts = str(workdir / f"p{suffix}.jsonl")
        cands = str(workdir / f"c{suffix}.jsonl")
        cli_main(["run", calc, "--stdin", stdin, "--trace", trace])
        cli_main(["carve", calc, trace, "--out", units])
        cli_main(["parameterize", calc, units, "--input", stdin, "--out", puts])
        cli_main(["fuzz", calc, puts, "--budget", "15", "--seed", "3", "--out", cands])
        blobs.append(tuple(open(f, "rb").read() for f in (trace, units, puts, cands)))
    assert blobs[0] == blobs[1]


def test_console_script_subprocess(workdir):
    """The installed entry point behaves like the in-process main."""
    result = subprocess.run(
        [sys.executable, "-m", "carvelift", "run", str(workdir / "calc.mc"),
         "--stdin", str(workdir / "one_plus_two.txt")],
        capture_output=True, text=True, timeout=120,
    )
    assert result.returncode == 0
    assert result.stdout == "3\n"


def test_run_with_args(workdir, tmp_path, capsys):
    fields_src = pathlib.Path(__file__).parent.parent / "src" / "carvelift" / "examples" / "fields" / "prog.mc"
    shutil.copy(fields_src, tmp_path / "fields.mc")
    (tmp_path / "line.txt").write_bytes(b"one two three")
    rc = cli_main(["run", str(tmp_path / "fields.mc"), "--stdin", str(tmp_path / "line.txt"),
                   "--arg", "3"])
    assert rc == 0
    assert capsys.readouterr().out == "three\n"
