import json
import subprocess
import sys

import jsonschema
import pytest

from pideletion.cli import CODESPEC_SCHEMA, REPORT_SCHEMA, run


def call(capsys, *argv):
    code = run(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def bad_spec(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "N": 4, "t": 1, "levels": [[0, 4], [2]],
        "f_sq": {"0": "1/2", "2": "1/5", "4": "1/2"},
    }))
    return path


def test_check_gnu(capsys):
    code, out, _ = call(capsys, "check", "--gnu", "2,2,1", "--t", "1")
    assert code == 0
    report = json.loads(out)
    assert report["d1_ok"] and report["d2_ok"] and report["d3_ok"]
    assert report["d2_sums"] == {"0": ["1/2", "1/2"], "1": ["1/2", "1/2"]}


def test_check_bad_spec_reports_d1(capsys, bad_spec):
    code, out, err = call(capsys, "check", "--spec", str(bad_spec))
    assert code == 1
    assert json.loads(out)["witness"] == {"condition": "D1", "level": 1, "sum": "6/5"}
    assert "D1" in err


def test_verify_bad_spec_refuses(capsys, bad_spec):
    code, out, err = call(capsys, "verify", "--spec", str(bad_spec))
    assert code == 1
    assert "D1" in err


def test_verify_nine_qubit(capsys, tmp_path):
    out_path = tmp_path / "report.json"
    code, _, _ = call(capsys, "verify", "--gnu", "3,3,1", "--t", "2", "--positions", "all",
                      "--out", str(out_path))
    assert code == 0
    report = json.loads(out_path.read_text())
    jsonschema.validate(report, REPORT_SCHEMA)
    assert report["pass"]
    assert report["worst_fidelity"] >= 1 - 1e-9
    assert len({tuple(r["positions"]) for r in report["records"]}) == 36


def test_verify_output_reproducible(capsys):
    args = ["verify", "--gnu", "2,2,1", "--t", "1", "--positions", "sampled", "--samples", "2",
            "--seed", "4", "--no-timing"]
    _, first, _ = call(capsys, *args)
    _, second, _ = call(capsys, *args)
    assert first == second
    _, third, _ = call(capsys, *args[:-1])
    a, b = json.loads(first), json.loads(third)
    a.pop("elapsed_ms"), b.pop("elapsed_ms")
    assert a == b


def test_build_and_reload(capsys, tmp_path):
    code, out, _ = call(capsys, "build", "--gnu", "3,3,1", "--t", "2")
    assert code == 0
    spec = json.loads(out)
    jsonschema.validate(spec, CODESPEC_SCHEMA)
    assert spec["f_sq"] == {"0": "1/4", "3": "1/112", "6": "1/112", "9": "1/4"}
    path = tmp_path / "spec.json"
    path.write_text(out)
    code, out, _ = call(capsys, "check", "--spec", str(path))
    assert code == 0 and json.loads(out)["max_correctable_t"] == 2


def test_build_symmetric(capsys):
    code, out, _ = call(capsys, "build", "--symmetric", "0,8;2,6;4", "--N", "8")
    assert code == 0
    assert json.loads(out)["levels"] == [[0, 8], [2, 6], [4]]


def test_encode(capsys):
    code, out, _ = call(capsys, "encode", "--gnu", "2,2,1", "--t", "1", "--logical", "0,1")
    assert code == 0
    data = json.loads(out)
    assert data["coeffs"]["2"][0] == pytest.approx(6 ** -0.5)
    assert data["norm_sq"] == pytest.approx(1.0)


def test_kl_check_exit_codes(capsys):
    assert call(capsys, "kl-check", "--gnu", "3,3,1", "--t", "2", "--weight", "1")[0] == 0
    code, out, _ = call(capsys, "kl-check", "--gnu", "2,2,1", "--t", "1", "--weight", "1")
    assert code == 1 and not json.loads(out)["pass"]


def test_combined(capsys):
    code, out, _ = call(capsys, "combined", "--t", "1", "--probes", "2")
    assert code == 0
    data = json.loads(out)
    assert data["pass"] and data["kl"]["pass"]


def test_combined_size_bound(capsys):
    code, _, err = call(capsys, "combined", "--t", "2")
    assert code == 2 and "dense cap" in err


def test_search(capsys):
    code, out, _ = call(capsys, "search", "--N", "8", "--levels", "3")
    assert code == 0
    levels = [c["levels"] for c in json.loads(out)["codes"]]
    assert [[0, 8], [2, 6], [4]] in levels
    code, out, _ = call(capsys, "search", "--N", "2", "--levels", "2")
    assert json.loads(out)["count"] == 0
    assert call(capsys, "search", "--N", "30")[0] == 2


def test_report_schema(capsys):
    code, out, _ = call(capsys, "report-schema")
    assert code == 0
    schemas = json.loads(out)
    jsonschema.Draft202012Validator.check_schema(schemas["VerificationReport"])


def test_usage_errors(capsys, tmp_path):
    assert call(capsys, "check", "--gnu", "2,2,1", "--bogus")[0] == 2
    assert call(capsys, "check")[0] == 2
    assert call(capsys, "check", "--gnu", "2,2,1", "--spec", "x.json")[0] == 2
    assert call(capsys, "check", "--spec", str(tmp_path / "missing.json"))[0] == 2
    assert call(capsys, "check", "--gnu", "2,2,1/2")[0] == 2


def test_malformed_spec_names_line_and_field(capsys, tmp_path):
    broken = tmp_path / "broken.json"
    broken.write_text('{\n  "N": 4,\n  "t": 1\n  "levels": []\n}')
    code, _, err = call(capsys, "check", "--spec", str(broken))
    assert code == 2 and "line 4" in err
    wrong = tmp_path / "wrong.json"
    wrong.write_text(json.dumps({"N": 4, "t": 1, "levels": [[0, 4], [2]], "f_sq": {"0": 0.5, "2": "1/6", "4": "1/2"}}))
    code, _, err = call(capsys, "check", "--spec", str(wrong))
    assert code == 2 and "f_sq[0]" in err


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "pideletion", "check", "--gnu", "2,2,1", "--t", "1"],
        capture_output=True, text=True,
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["d1_ok"]
