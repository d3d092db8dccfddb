from __future__ import annotations

import csv
import io
import json
import os

import pytest

from hahnexton.cli import EXIT_DOMAIN, EXIT_FAIL, EXIT_OK, EXIT_USAGE, main, read_payload, write_atomic
from hahnexton.reports import VerificationReport


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def value_of(out: str) -> float:
    return float(read_payload(out).strip())


def test_eval_j_at_zero(capsys):
    code, out, _ = run(capsys, "eval", "j", "--v", "0", "--x", "0", "--q", "0.5")
    assert code == EXIT_OK and value_of(out) == 1.0
    assert out.startswith("# hahnexton eval j ") and "# qcontext q=0.5" in out


def test_eval_D_matches_closed_form(capsys):
    _, a, _ = run(capsys, "eval", "D", "--v", "0", "--m", "0", "--n", "0", "--k", "0", "--q", "0.5")
    _, b, _ = run(capsys, "eval", "D0closed", "--m", "0", "--n", "0", "--k", "0", "--q", "0.5")
    assert value_of(a) == pytest.approx(value_of(b), rel=1e-13)


def test_eval_c(capsys):
    code, out, _ = run(capsys, "eval", "c", "--v", "0", "--q", "0.5")
    assert code == EXIT_OK and value_of(out) == pytest.approx(2.0, rel=1e-15)


@pytest.mark.parametrize(
    "argv",
    [
        ["eval", "E", "--v", "0.3", "--x", "0.8", "--m", "1", "--z", "0", "--k", "2"],
        ["eval", "Eintegral", "--v", "0.3", "--x", "0.8", "--m", "1", "--z", "0", "--k", "2"],
        ["eval", "T", "--v", "0.3", "--w", "0.6", "--alpha", "0.3", "--m", "0", "--n", "1", "--k", "2"],
        ["eval", "A", "--v", "0.3", "--alpha", "0.2", "--mu", "0.5", "--n", "2"],
        ["eval", "phi_v", "--v", "0", "--q", "0.6"],
        ["eval", "J", "--v", "-2", "--x", "0.7", "--base", "q"],
        ["eval", "Evv", "--v", "0.5", "--m", "0", "--n", "1", "--k", "2"],
        ["eval", "Dhalfclosed", "--m", "0", "--n", "1", "--k", "2"],
        ["eval", "prop1", "--v", "0.5", "--n", "-3"],
    ],
)
def test_eval_targets_run(capsys, argv):
    code, out, _ = run(capsys, *argv)
    assert code == EXIT_OK
    float(read_payload(out).strip())


def test_eval_json(capsys):
    code, out, _ = run(capsys, "eval", "c", "--v", "0", "--q", "0.5", "--format", "json")
    assert json.loads(read_payload(out)) == {"target": "c", "value": 2.0}


def test_usage_errors(capsys):
    code, _, err = run(capsys, "eval", "D", "--v", "0")
    assert code == EXIT_USAGE and "--m" in err
    with pytest.raises(SystemExit) as info:
        main(["eval", "D", "--bogus", "1"])
    assert info.value.code == EXIT_USAGE
    with pytest.raises(SystemExit) as info:
        main(["frobnicate"])
    assert info.value.code == EXIT_USAGE
    code, _, _ = run(capsys, "scan", "--v", "0", "--grid", "0.1-0.9")
    assert code == EXIT_USAGE


def test_negative_flag_values(capsys):
    code, out, _ = run(capsys, "eval", "D", "--v", "-0.5", "--m", "-2", "--n", "0", "--k", "3", "--q", "0.3")
    _, ref, _ = run(capsys, "eval", "Dhalfclosed", "--m=-2", "--n", "0", "--k", "3", "--q", "0.3")
    assert code == EXIT_OK and value_of(out) == pytest.approx(value_of(ref), rel=1e-9, abs=1e-15)


def test_domain_errors(capsys):
    code, _, err = run(capsys, "eval", "D", "--v", "-1.5", "--m", "0", "--n", "0", "--k", "0")
    assert code == EXIT_DOMAIN and "exceed -1" in err and err.count("\n") == 1
    code, _, err = run(capsys, "eval", "c", "--v", "0", "--q", "1.2")
    assert code == EXIT_DOMAIN and "q must lie" in err


def test_config_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\nq = 0.3\nv = 0\n")
    _, out, _ = run(capsys, "eval", "c", "--config", str(cfg))
    assert value_of(out) == pytest.approx(1 / 0.7) and "q=0.3" in out.splitlines()[0]
    _, out, _ = run(capsys, "eval", "c", "--config", str(cfg), "--q", "0.5")
    assert value_of(out) == pytest.approx(2.0)
    cfg.write_text("nonsense = 1\n")
    code, _, _ = run(capsys, "eval", "c", "--config", str(cfg))
    assert code == EXIT_USAGE


def test_scan_csv_and_json_carry_the_same_numbers(capsys):
    code, out_csv, _ = run(capsys, "scan", "--v", "0", "--grid", "0.1:0.9:0.1", "--window", "-2:4")
    assert code == EXIT_OK
    rows = list(csv.DictReader(io.StringIO(read_payload(out_csv))))
    assert len(rows) == 9 and all(r["is_positive"] == "true" for r in rows)
    assert list(rows[0]) == ["q", "v", "window", "min_value", "argmin_m", "argmin_n", "argmin_k", "is_positive", "error"]
    _, out_json, _ = run(capsys, "scan", "--v", "0", "--grid", "0.1:0.9:0.1", "--window", "-2:4", "--format", "json")
    data = json.loads(read_payload(out_json))
    for r, d in zip(rows, data):
        assert float(r["min_value"]) == d["min_value"] and float(r["q"]) == d["q"]
        assert int(r["argmin_k"]) == d["argmin_k"]


def test_scan_negative_rows_and_transition(capsys):
    _, out, _ = run(capsys, "scan", "--v", "-0.3", "--grid", "0.5:0.95:0.05", "--window", "-2:4")
    rows = list(csv.DictReader(io.StringIO(read_payload(out))))
    assert any(r["is_positive"] == "false" for r in rows)


def test_scan_is_deterministic(capsys):
    argv = ("scan", "--v", "-0.5", "--grid", "0.3:0.5:0.1", "--window", "-1:2")
    assert run(capsys, *argv)[1] == run(capsys, *argv)[1]


def test_verify_transform_writes_reports(tmp_path, capsys):
    path = tmp_path / "reports.json"
    code, _, err = run(capsys, "verify", "transform", "--q", "0.3", "--v", "-0.4", "--output", str(path))
    assert code == EXIT_OK and "0 failed" in err
    text = path.read_text()
    assert text.startswith("# hahnexton verify transform")
    reports = json.loads(read_payload(text))
    assert {r["identity_id"] for r in reports} == {"fourier_inversion", "plancherel"}
    keys = {"identity_id", "params", "lhs", "rhs", "abs_residual", "rel_residual", "tolerance", "pass", "window",
            "terms_used", "status"}
    assert all(keys <= set(r) and r["pass"] for r in reports)


def test_verify_failure_exit_code(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, _, _ = run(capsys, "verify", "lemma1", "--q", "0.5", "--v", "0.3", "--tol", "1e-30", "--output", str(path))
    assert code == EXIT_FAIL


def test_verify_invalid_rows_do_not_fail(tmp_path, capsys):
    path = tmp_path / "r.json"
    code, _, err = run(capsys, "verify", "lemma1", "--q", "0.5", "--v", "-0.8", "--output", str(path))
    reports = json.loads(read_payload(path.read_text()))
    assert any(r["status"] == "invalid-domain" for r in reports)
    assert code == EXIT_OK


def test_zeros(capsys):
    code, out, _ = run(capsys, "zeros", "q1")
    assert code == EXIT_OK
    line = read_payload(out).strip()
    assert line.startswith("q1 ") and abs(float(line.split()[1]) - 0.658) < 1e-3 and "bracket=[0.5,0.7]" in line
    code, out, _ = run(capsys, "zeros", "both", "--tol", "1e-8", "--format", "json")
    data = json.loads(read_payload(out))
    assert [d["name"] for d in data] == ["q0", "q1"] and data[0]["tol"] == 1e-8
    assert "1phi1" in data[0]["definition"]


def test_atomic_write_leaves_no_partial_file(tmp_path):
    target = tmp_path / "out.txt"
    write_atomic(str(target), "hello\n")
    assert target.read_text() == "hello\n"


    with pytest.raises(TypeError):
        write_atomic(str(tmp_path / "bad.txt"), 12345)  # type: ignore[arg-type]
    assert sorted(os.listdir(tmp_path)) == ["out.txt"]


def test_unwritable_output_is_not_a_success(tmp_path, capsys):
    code, _, _ = run(capsys, "eval", "c", "--v", "0", "--output", str(tmp_path / "missing" / "x.txt"))
    assert code == EXIT_FAIL


def test_report_dict_uses_17_digits():
    r = VerificationReport.compare("x", {"a": 1.0 / 3.0}, 1.0 / 3.0, 0.1, 1.0)
    d = r.to_dict()
    assert d["lhs"] == float(f"{1 / 3:.17g}") and d["pass"] is True
