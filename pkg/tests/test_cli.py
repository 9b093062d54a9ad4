import csv
import json
import math
import subprocess
import sys

import pytest

from sftescape.cli import CSV_HEADER, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


@pytest.fixture
def model_file(tmp_path, capsys):
    path = tmp_path / "example.json"
    assert main(["analyze", "--example", "paper4", "--out", str(path)]) == 0
    capsys.readouterr()
    return path


def write_json(path, data):
    path.write_text(json.dumps(data))
    return path


# -- analyze -----------------------------------------------------------------

def test_analyze_example(capsys):
    code, out, _ = run(capsys, "analyze", "--example", "paper4")
    assert code == 0
    doc = json.loads(out)
    a = doc["analysis"]
    assert a["m"] == 2
    assert a["classes"] == [["1"], ["2"]]
    assert abs(a["P_Delta"] - 0.5 * math.log(0.06)) <= 1e-12
    assert a["d"] == pytest.approx([0.2, 0.3], abs=1e-12)
    assert a["h"][0] == pytest.approx([1, 0, 1], abs=1e-12)
    assert a["h"][1] == pytest.approx([0, 1, 1], abs=1e-12)
    assert a["stationary"] == pytest.approx([1 / 6, 3 / 13, 47 / 78], abs=1e-12)
    assert a["converges_overall"] is False
    assert a["verdict"] == "non-convergent"
    assert abs(a["spread"] - 0.0199612) <= 1e-7
    assert a["z_masks"] == [[True, False, True], [False, True, True]]
    assert max(a["invariants"].values()) <= 1e-12
    assert doc["delta"] == ["1", "2"] and doc["normalize"] is False


def test_analyze_equal_weights(capsys):
    code, out, _ = run(capsys, "analyze", "--example", "paper4", "--ep", "0.25", "--eq", "0.25")
    a = json.loads(out)["analysis"]
    assert code == 0 and a["converges_overall"] is True and a["spread"] <= 1e-10


def test_analyze_delta_override(capsys):
    code, out, _ = run(capsys, "analyze", "--example", "paper4", "--delta", "1,3")
    a = json.loads(out)["analysis"]
    assert code == 0 and a["m"] == 1
    assert a["limits"][0] == pytest.approx(100 / 91, abs=1e-12)


def test_normalize_flag_yields_zero_pressure(tmp_path, capsys):
    data = {
        "alphabet": ["a", "b", "c"],
        "matrix": [[0, 1, 1], [1, 0, 1], [1, 1, 1]],
        "potential": {"order": 2, "entries": [
            {"word": list(w), "value": v} for w, v in
            [("ab", 0.3), ("ac", -1.0), ("ba", 0.7), ("bc", 0.1), ("ca", -0.4), ("cb", 0.2), ("cc", 0.0)]
        ]},
        "normalize": True,
        "delta": ["a", "b"],
    }
    path = write_json(tmp_path / "m.json", data)
    code, out, _ = run(capsys, "analyze", "--model", str(path))
    assert code == 0
    assert abs(json.loads(out)["analysis"]["pressure"]) <= 1e-10
    data["normalize"] = False
    write_json(path, data)
    code, _, err = run(capsys, "analyze", "--model", str(path))
    assert code == 3 and "normalized" in err


# -- sequence ----------------------------------------------------------------

def test_sequence_csv(capsys):
    code, out, _ = run(capsys, "sequence", "--example", "paper4", "--nmax", "40")
    assert code == 0
    lines = out.splitlines()
    assert lines[0] == CSV_HEADER
    rows = list(csv.DictReader(lines))
    assert len(rows) == 41
    assert float(rows[30]["scaled"]) == pytest.approx(2.5 / 1.56, abs=1e-9)
    assert float(rows[31]["scaled"]) == pytest.approx(1.6225253, abs=1e-7)
    assert rows[31]["residue"] == "1"
    assert float(rows[2]["mu_delta_n"]) == pytest.approx(0.2 * 3 / 13 + 0.3 / 6, abs=1e-15)


def test_sequence_aperiodic_errors_decay(capsys):
    code, out, _ = run(capsys, "sequence", "--example", "paper4", "--delta", "1,3", "--nmax", "30")
    rows = list(csv.DictReader(out.splitlines()))
    err = [float(r["abs_error"]) for r in rows]
    rho = 0.2 / 0.7
    assert code == 0
    assert all(err[n + 1] <= (rho + 1e-6) * err[n] + 1e-14 for n in range(1, 30))


def test_sequence_json_and_companion(tmp_path, capsys):
    code, out, _ = run(capsys, "sequence", "--example", "paper4", "--format", "json", "--nmax", "20")
    summary = json.loads(out)
    assert code == 0 and summary["m"] == 2 and summary["converges_overall"] is False
    csv_path = tmp_path / "seq.csv"
    assert main(["sequence", "--example", "paper4", "--out", str(csv_path)]) == 0
    companion = json.loads(csv_path.with_suffix(".json").read_text())
    assert companion["n_max"] == 40
    assert companion["verdict"] == "non-convergent"


def test_sequence_tolerance(capsys):
    code, out, _ = run(capsys, "sequence", "--example", "paper4", "--format", "json", "--tol", "0.05")
    assert code == 0 and json.loads(out)["converges_overall"] is True


def test_round_trip_is_byte_identical(model_file, tmp_path, capsys):
    direct, via_file = tmp_path / "a.csv", tmp_path / "b.csv"
    assert main(["sequence", "--example", "paper4", "--out", str(direct)]) == 0
    assert main(["sequence", "--model", str(model_file), "--out", str(via_file)]) == 0
    assert direct.read_bytes() == via_file.read_bytes()
    again = tmp_path / "again.json"
    assert main(["analyze", "--model", str(model_file), "--out", str(again)]) == 0
    assert again.read_bytes() == model_file.read_bytes()


def test_nmax_below_period(capsys):
    code, _, err = run(capsys, "sequence", "--example", "paper4", "--nmax", "1")
    assert code == 1 and "period" in err


# -- verify ------------------------------------------------------------------

def test_verify_example_passes(capsys):
    code, out, _ = run(capsys, "verify", "--example", "paper4")
    assert code == 0
    assert "FAIL" not in out and out.strip().endswith("all checks passed")


def test_verify_aperiodic_variant(capsys):
    code, out, _ = run(capsys, "verify", "--example", "paper4", "--delta", "1,3")
    assert code == 0 and "FAIL" not in out


def test_verify_detects_corrupted_potential(model_file, capsys):
    data = json.loads(model_file.read_text())
    data["potential"]["entries"][0]["value"] += 0.1
    write_json(model_file, data)
    code, out, _ = run(capsys, "verify", "--model", str(model_file))
    assert code == 1
    assert "FAIL  potential normalized" in out


def test_verify_zero_tolerance_is_usage_error(capsys):
    code, _, err = run(capsys, "verify", "--example", "paper4", "--tol", "0")
    assert code == 2 and "positive" in err


# -- errors ------------------------------------------------------------------

def test_full_delta_is_precondition_failure(capsys):
    code, _, err = run(capsys, "analyze", "--example", "paper4", "--delta", "1,2,3")
    assert code == 3 and "proper subset" in err


@pytest.mark.parametrize("mutate", [
    lambda d: d["potential"]["entries"].append(dict(d["potential"]["entries"][0])),
    lambda d: d["potential"]["entries"].pop(),
    lambda d: d["potential"]["entries"][0].update(word=["1", "9"]),
    lambda d: d["potential"]["entries"][0].update(value="x"),
    lambda d: d.update(alphabet=["1", "2"]),
    lambda d: d.update(matrix=[[0, 2, 1], [1, 0, 1], [1, 1, 1]]),
    lambda d: d.update(delta=["7"]),
    lambda d: d.pop("potential"),
    lambda d: d.update(normalize="yes"),
])
def test_malformed_model_files(model_file, capsys, mutate):
    data = json.loads(model_file.read_text())
    mutate(data)
    write_json(model_file, data)
    code, _, err = run(capsys, "analyze", "--model", str(model_file))
    assert code == 2 and err.startswith("error:")


def test_invalid_json(tmp_path, capsys):
    path = tmp_path / "bad.json"
    path.write_text("{not json")
    code, _, err = run(capsys, "analyze", "--model", str(path))
    assert code == 2 and "not valid JSON" in err


@pytest.mark.parametrize("argv", [
    ["analyze"],
    ["analyze", "--example", "nope"],
    ["analyze", "--example", "paper4", "--ep", "0.8", "--eq", "0.3"],
    ["analyze", "--example", "paper4", "--model", "x.json"],
    ["frobnicate"],
    ["sequence", "--example", "paper4", "--nmax", "abc"],
])
def test_usage_errors(capsys, argv):
    assert run(capsys, *argv)[0] == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "sftescape", "verify", "--example", "paper4"],
        capture_output=True, text=True, check=False,
    )
    assert proc.returncode == 0, proc.stderr
    assert "all checks passed" in proc.stdout
