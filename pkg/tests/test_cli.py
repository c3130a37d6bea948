import json
import subprocess
import sys

import pytest

from tencrofton.cli import EXIT_FAILED, EXIT_INVALID, EXIT_OK, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_coeffs_csv_single_row(capsys):
    code, out, _ = run(capsys, "coeffs", "--formula", "cor_s3", "--n", "3", "--k", "2", "--j", "1", "--format", "csv")
    assert code == EXIT_OK
    rows = out.strip().splitlines()
    assert len(rows) == 2 and rows[1].endswith(",1/3,0")


def test_coeffs_json_value(capsys):
    code, out, _ = run(capsys, "coeffs", "--formula", "thm_j_eq_k", "--n", "3", "--k", "1", "--i", "1")
    assert code == EXIT_OK
    (entry,) = json.loads(out)["entries"]
    assert entry["value"] == "1/3"


def test_coeffs_precondition_error(capsys):
    code, _, err = run(capsys, "coeffs", "--formula", "thm_local_general", "--n", "3", "--k", "1", "--j", "0")
    assert code == EXIT_INVALID
    assert "k > 1" in err


def test_missing_option_is_invalid_input(capsys):
    code, _, err = run(capsys, "coeffs")
    assert code == EXIT_INVALID and "--formula" in err


@pytest.mark.parametrize("j,s,expected", [(3, 0, 1.0), (1, 0, 18.84955592153876)])
def test_tensor_scalar_values(capsys, j, s, expected):
    code, out, _ = run(capsys, "tensor", "--body", "cube:3", "--j", str(j), "--s", str(s))
    assert code == EXIT_OK
    components = json.loads(out)["tensor"]["entries"]
    assert components[0][1] == pytest.approx(expected)


def test_tensor_normal_balance_csv(capsys):
    code, out, _ = run(capsys, "tensor", "--body", "cube:3", "--j", "2", "--s", "1", "--format", "csv")
    assert code == EXIT_OK
    values = [float(line.split(",")[1]) for line in out.strip().splitlines()[1:]]
    assert len(values) == 3 and max(map(abs, values)) < 1e-12


def test_tensor_with_box(capsys):
    code, out, _ = run(capsys, "tensor", "--body", "cube:3", "--j", "1", "--box", "0", "0.5", "0", "2", "0", "2")
    assert code == EXIT_OK
    assert json.loads(out)["tensor"]["entries"][0][1] == pytest.approx(9.42477796076938)


def test_bad_box_and_body(capsys):
    assert run(capsys, "tensor", "--body", "cube:3", "--j", "1", "--box", "0", "1")[0] == EXIT_INVALID
    assert run(capsys, "tensor", "--body", "sphere:3", "--j", "1")[0] == EXIT_INVALID


def test_identities_csv_report(capsys):
    code, out, _ = run(capsys, "identities", "--suite", "measures", "--format", "csv")
    assert code == EXIT_OK
    assert out.splitlines()[0] == "suite,group,passed,total,pass"


def test_verify_pass_and_fail_exit_codes(capsys):
    code, out, _ = run(capsys, "verify", "--formula", "thm_k1_local", "--body", "cube:3", "--s", "2",
                       "--samples", "20000", "--seed", "7")
    assert code == EXIT_OK and json.loads(out)["pass"] is True
    code, _, _ = run(capsys, "verify", "--formula", "thm_k1_local", "--body", "cube:3", "--s", "2",
                     "--samples", "20000", "--threshold", "0")
    assert code == EXIT_FAILED


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"command": "coeffs", "formula": "cor_s3", "n": 4, "k": 2, "j": 1}))
    code, out, _ = run(capsys, "coeffs", "--config", str(cfg))
    assert code == EXIT_OK and json.loads(out)["entries"][0]["value"] == "1/6"
    code, out, _ = run(capsys, "coeffs", "--config", str(cfg), "--n", "3")
    assert json.loads(out)["entries"][0]["value"] == "1/3"
    cfg.write_text(json.dumps({"command": "verify"}))
    assert run(capsys, "coeffs", "--config", str(cfg))[0] == EXIT_INVALID


def test_reports_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for p in paths:
        assert main(["verify", "--formula", "thm_j_eq_k", "--body", "cube:3", "--k", "2", "--samples", "3000",
                     "--seed", "1", "--output", str(p)]) == EXIT_OK
    assert paths[0].read_bytes() == paths[1].read_bytes()


def test_catalog_listing(capsys):
    code, out, _ = run(capsys, "catalog")
    assert code == EXIT_OK
    assert [b["name"] for b in json.loads(out)["bodies"]] == ["cube", "simplex", "crosspolytope"]
    code, out, _ = run(capsys, "catalog", "--body", "crosspolytope:3")
    assert json.loads(out)["face_counts"] == [6, 12, 8]


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "tencrofton", "coeffs", "--formula", "cor_s3", "--n", "3",
                           "--k", "2", "--j", "1", "--format", "csv"], capture_output=True, text=True)
    assert proc.returncode == 0 and ",1/3," in proc.stdout
