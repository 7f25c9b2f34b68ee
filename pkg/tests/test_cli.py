import json
import pathlib

import jsonschema
import pytest

from redosbr.cli import main

SCHEMA = json.loads(
    (pathlib.Path(__file__).resolve().parent.parent / "docs" / "report-schema.json").read_text()
)
VALIDATOR = jsonschema.Draft202012Validator(SCHEMA)


def run_cli(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, out


def json_lines(out):
    rows = [json.loads(line) for line in out.splitlines() if line.strip()]
    for row in rows:
        VALIDATOR.validate(row)
    return rows


def test_detect_clean_pattern_exit_zero(capsys):
    code, out = run_cli(capsys, "detect", "abc")
    rows = json_lines(out)
    assert code == 0
    assert rows[-1]["type"] == "summary"
    assert rows[-1]["crosstab"]["none"] == 1


def test_detect_vulnerable_exit_one(capsys):
    code, out = run_cli(capsys, "detect", r"(a*)\1b")
    rows = json_lines(out)
    assert code == 1
    assert rows[0]["findings"][0]["kind"] == "P1"
    assert rows[-1]["counts"]["P1"] == 1


def test_detect_validate_adds_evidence(capsys):
    code, out = run_cli(capsys, "detect", r"(a*)\1b", "--validate")
    rows = json_lines(out)
    f = rows[0]["findings"][0]
    assert code == 1 and f["confirmed"] and f["evidence"] == "fit"
    assert f["dominant_degree"] == 2
    assert "attack_example" in f and "pump" in f


def test_detect_parse_error_is_diagnostic_not_fatal(capsys):
    code, out = run_cli(capsys, "detect", "(a", "abc")
    rows = json_lines(out)
    assert code == 0
    assert rows[0]["error"] is not None
    assert rows[-1]["errors"] == 1


def test_detect_empty_file(tmp_path, capsys):
    f = tmp_path / "empty.txt"
    f.write_text("")
    code, out = run_cli(capsys, "detect", "--file", str(f))
    rows = json_lines(out)
    assert code == 0 and rows[-1]["patterns"] == 0


def test_detect_missing_file_exit_two(capsys):
    code, _ = run_cli(capsys, "detect", "--file", "/nonexistent/xyz.txt")
    assert code == 2


def test_detect_unknown_pattern_id_exit_two(capsys):
    code, _ = run_cli(capsys, "detect", "a", "--patterns", "P9")
    assert code == 2


def test_detect_csv_format(capsys):
    code, out = run_cli(capsys, "detect", r"(a*)\1b", "--format", "csv")
    assert code == 1
    lines = out.strip().splitlines()
    assert lines[0].startswith("pattern,")
    assert "P1" in lines[1]


def test_detect_deterministic_modulo_timings(capsys):
    def strip(rows):
        for r in rows:
            r.pop("timings", None)
            for f in r.get("findings", []):
                f.pop("validate_seconds", None)
        return rows

    _, out1 = run_cli(capsys, "detect", r"(a*)ba*\1c", "a*a*")
    _, out2 = run_cli(capsys, "detect", r"(a*)ba*\1c", "a*a*")
    assert strip(json_lines(out1)) == strip(json_lines(out2))


def test_detect_rules_file_and_crosstab(tmp_path, capsys):
    rules = tmp_path / "demo.rules"
    rules.write_text(
        '# demo\n'
        'alert tcp any any -> any any (msg:"a"; pcre:"/(a*)\\1b/"; sid:1;)\n'
        'alert tcp any any -> any any (msg:"b"; pcre:"/a*a*/"; sid:2;)\n'
    )
    code, out = run_cli(capsys, "detect", "--file", str(rules))
    rows = json_lines(out)
    assert code == 1
    assert rows[0]["source"].endswith("sid:1")
    summary = rows[-1]
    assert summary["counts"] == {"IDA": 1, "P1": 1, "P2": 0, "P3": 0}
    assert summary["crosstab"]["pattern_only"] == 1
    assert summary["crosstab"]["ida_only"] == 1


def test_detect_jobs_parallel_same_output(capsys):
    _, out1 = run_cli(capsys, "detect", r"(a*)\1b", "abc", "a*a*")
    _, out2 = run_cli(capsys, "detect", r"(a*)\1b", "abc", "a*a*", "--jobs", "2")

    def strip(rows):
        for r in rows:
            r.pop("timings", None)
        return rows

    assert strip(json_lines(out1)) == strip(json_lines(out2))


def test_attack_length_and_sidecar(tmp_path, capsys):
    sidecar = tmp_path / "fam.json"
    code, out = run_cli(
        capsys, "attack", r"(a*)\1b", "--pattern-id", "P1", "--length", "4096",
        "--sidecar", str(sidecar),
    )
    assert code == 0
    s = out.rstrip("\n")
    assert set(s) == {"a"} and abs(len(s) - 4096) <= 4
    fam = json.loads(sidecar.read_text())
    VALIDATOR.validate(fam)
    assert fam["type"] == "family" and fam["length"] == len(s)


def test_attack_no_finding_exit_two(capsys):
    code, _ = run_cli(capsys, "attack", "abc", "--pattern-id", "P1")
    assert code == 2


def test_measure_default_ladder_fit(capsys):
    code, out = run_cli(capsys, "measure", r"(a*)\1b", "--pattern-id", "P1")
    rows = json_lines(out)
    assert code == 0
    fit = rows[-1]
    assert fit["type"] == "fit" and fit["degree"] == 2 and fit["r2"] >= 0.99
    assert fit["cost_model"]


def test_measure_ill_conditioned_ladder(capsys):
    code, _ = run_cli(capsys, "measure", r"(a*)\1b", "--pattern-id", "P1", "--ladder", "8,9,10,11,12,13")
    assert code == 2


def test_measure_csv(capsys):
    code, out = run_cli(capsys, "measure", r"(a*)\1b", "--pattern-id", "P1", "--format", "csv")
    assert code == 0 and out.splitlines()[0] == "k,length,steps,aborted"


def test_extract(tmp_path, capsys):
    rules = tmp_path / "x.rules"
    rules.write_text('alert (pcre:"/ab+c/si"; sid:9;)\n')
    code, out = run_cli(capsys, "extract", str(rules))
    rows = json_lines(out)
    assert code == 0
    assert rows[0]["pattern"] == "ab+c" and rows[0]["flags"] == "is" and rows[0]["sid"] == "9"


def test_match_single(capsys):
    code, out = run_cli(capsys, "match", r"(a*)\1b", "aab")
    row = json_lines(out)[0]
    assert code == 0 and row["accepted"] and not row["aborted"]


def test_match_batch(tmp_path, capsys):
    batch = tmp_path / "batch.jsonl"
    cases = [
        {"pattern": r"(a*)\1b", "input": "aab"},
        {"pattern": r"(a*)\1b", "input": "aaab", "anchored": True},
        {"pattern": "(?=x)", "input": "x"},
    ]
    batch.write_text("".join(json.dumps(c) + "\n" for c in cases))
    code, out = run_cli(capsys, "match", "--batch", str(batch))
    rows = json_lines(out)
    assert code == 0
    assert rows[0]["accepted"] is True
    assert rows[1]["accepted"] is False
    assert "error" in rows[2]
