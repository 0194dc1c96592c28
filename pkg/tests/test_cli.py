"""Command line interface: subcommands, exit codes, file formats."""

import json
import shutil
import subprocess
import sys

from growthcert import cli


def write_json(path, obj):
    path.write_text(json.dumps(obj) + "\n", encoding="utf-8")
    return str(path)


def sanov_file(tmp_path):
    return write_json(
        tmp_path / "sanov.json",
        {
            "n": 2,
            "generators": [[[1, 2], [0, 1]], [[1, 0], [2, 1]]],
            "labels": ["a", "b"],
        },
    )


def heisenberg_file(tmp_path):
    return write_json(
        tmp_path / "heis.json",
        {
            "n": 3,
            "generators": [
                [[1, 1, 0], [0, 1, 0], [0, 0, 1]],
                [[1, 0, 0], [0, 1, 1], [0, 0, 1]],
            ],
        },
    )


def run(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_growth_sanov(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    code, out, _ = run(capsys, ["growth", gens, "--radius", "6"])
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "growthcert.growth.v1"
    assert data["ball_sizes"] == [[0, 1], [1, 5], [2, 17], [3, 53], [4, 161], [5, 485], [6, 1457]]
    assert data["alphabet_size"] == 4
    assert data["omega_estimate"] == "882639/262144"
    assert data["omega_estimates"][-1] == [6, "882639/262144"]
    assert data["verdict"] == "exponential-evidence"
    assert data["exhausted"] is False and data["budget_exceeded"] is False


def test_growth_csv_output(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    csv_path = tmp_path / "table.csv"
    code, _, _ = run(capsys, ["growth", gens, "--radius", "2", "--csv", str(csv_path)])
    assert code == 0
    assert csv_path.read_text() == "n,count\n0,1\n1,5\n2,17\n"


def test_growth_budget_exit(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    code, out, _ = run(capsys, ["growth", gens, "--radius", "10", "--budget", "30"])
    assert code == 3
    data = json.loads(out)
    assert data["budget_exceeded"] is True
    # completed radii stay exact
    assert data["ball_sizes"][0] == [0, 1]
    for radius, count in data["ball_sizes"][1:3]:
        assert count == [1, 5, 17][radius]


def test_growth_pretty_adds_float_keys(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    code, out, _ = run(capsys, ["growth", gens, "--radius", "3", "--pretty"])
    assert code == 0
    data = json.loads(out)
    assert abs(data["omega_estimate~"] - 53 ** (1 / 3)) < 0.001
    assert data["omega_estimate"] == "3938751/1048576"


def test_heisenberg_growth_verdict(capsys, tmp_path):
    gens = heisenberg_file(tmp_path)
    code, out, _ = run(capsys, ["growth", gens, "--radius", "12"])
    assert code == 0
    data = json.loads(out)
    assert data["verdict"] == "polynomial-evidence"
    assert data["poly_fit_degree"] == 4
    assert data["ball_sizes"][-1] == [12, 8871]


def test_find_pair_sanov(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    code, out, _ = run(capsys, ["find-pair", gens])
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "growthcert.pair.v1"
    assert data["word_A"] == "0 1" and data["word_B"] == "0"
    assert data["disc"] == "32"
    assert data["l1_grid"] == {"archimedean/m=1": True}
    assert data["genericity"]["shemesh"] is True
    assert data["genericity"]["burnside_dim"] == 4


def test_find_pair_failure(capsys, tmp_path):
    gens = heisenberg_file(tmp_path)
    code, out, _ = run(capsys, ["find-pair", gens])
    assert code == 4
    data = json.loads(out)
    assert data["schema"] == "growthcert.failure.v1"
    assert data["failed_stage"] == "find_regular_pair"


def test_certify_verify_round_trip(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    cert_path = tmp_path / "cert.json"
    trace_path = tmp_path / "trace.jsonl"
    code, out, _ = run(
        capsys,
        ["certify", gens, "--out", str(cert_path), "--trace", str(trace_path)],
    )
    assert code == 0
    stdout_cert = json.loads(out)
    file_cert = json.loads(cert_path.read_text())
    assert stdout_cert == file_cert
    assert file_cert["schema"] == "growthcert.certificate.v1"
    assert file_cert["word_A"] == "0 1" and file_cert["word_B"] == "0"
    assert file_cert["exponent"] == 1 and file_cert["cone_param"] == "1/16"
    assert file_cert["growth_bound"] == "1204497/1048576"
    lines = trace_path.read_text().splitlines()
    assert len(lines) == 8
    assert json.loads(lines[-1])["stage"] == "certificate"

    code, out, _ = run(capsys, ["verify", str(cert_path), gens])
    assert code == 0
    verdict = json.loads(out)
    assert verdict == {"schema": "growthcert.verdict.v1", "valid": True, "reason": "ok"}


def test_certify_failure_writes_partial_trace(capsys, tmp_path):
    gens = heisenberg_file(tmp_path)
    trace_path = tmp_path / "trace.jsonl"
    code, out, _ = run(capsys, ["certify", gens, "--trace", str(trace_path)])
    assert code == 4
    data = json.loads(out)
    assert data["failed_stage"] == "find_regular_pair"
    lines = trace_path.read_text().splitlines()
    assert len(lines) == 1
    assert json.loads(lines[0])["ok"] is False


def test_verify_rejects_tampered_certificate(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    cert_path = tmp_path / "cert.json"
    assert run(capsys, ["certify", gens, "--out", str(cert_path)])[0] == 0
    cert = json.loads(cert_path.read_text())
    cert["exponent"] += 1
    tampered = write_json(tmp_path / "tampered.json", cert)
    code, out, _ = run(capsys, ["verify", tampered, gens])
    assert code == 5
    verdict = json.loads(out)
    assert verdict["valid"] is False
    assert "growth bound" in verdict["reason"]


def test_verify_schema_gate(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    bogus = write_json(tmp_path / "bogus.json", {"schema": "something.else"})
    code, out, _ = run(capsys, ["verify", bogus, gens])
    assert code == 5
    assert "unknown certificate schema" in json.loads(out)["reason"]


def test_verify_malformed_certificate(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    broken = write_json(
        tmp_path / "broken.json", {"schema": "growthcert.certificate.v1", "n": 2}
    )
    code, out, _ = run(capsys, ["verify", broken, gens])
    assert code == 5
    assert "malformed certificate" in json.loads(out)["reason"]


def test_parse_errors_exit_2(capsys, tmp_path):
    code, _, err = run(capsys, ["growth", str(tmp_path / "missing.json"), "--radius", "2"])
    assert code == 2 and "cannot read" in err

    notjson = tmp_path / "notjson.json"
    notjson.write_text("{", encoding="utf-8")
    code, _, err = run(capsys, ["growth", str(notjson), "--radius", "2"])
    assert code == 2 and "not valid JSON" in err

    bad_det = write_json(tmp_path / "bad.json", {"n": 2, "generators": [[[1, 1], [1, 1]]]})
    code, _, err = run(capsys, ["growth", bad_det, "--radius", "2"])
    assert code == 2 and "determinant" in err

    bad_n = write_json(tmp_path / "badn.json", {"n": 1, "generators": [[[1]]]})
    code, _, err = run(capsys, ["growth", bad_n, "--radius", "2"])
    assert code == 2 and "dimension" in err

    bad_entry = write_json(
        tmp_path / "bade.json", {"n": 2, "generators": [[[1, "x"], [0, 1]]]}
    )
    code, _, err = run(capsys, ["growth", bad_entry, "--radius", "2"])
    assert code == 2 and "bad entry" in err

    bad_labels = write_json(
        tmp_path / "badl.json",
        {"n": 2, "generators": [[[1, 2], [0, 1]]], "labels": ["a", "b"]},
    )
    code, _, err = run(capsys, ["growth", bad_labels, "--radius", "2"])
    assert code == 2 and "labels" in err


def test_invalid_flag_value_exits_2(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    code, _, err = run(capsys, ["growth", gens, "--radius", "2", "--budget", "0"])
    assert code == 2 and "budget" in err


def test_spectrum(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    code, out, _ = run(capsys, ["spectrum", gens, "--word", "0 1"])
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "growthcert.spectrum.v1"
    assert data["charpoly"] == ["1", "-6", "1"]
    assert data["finite_valuations"] == {}
    sep = data["separation"]
    assert sep["disc"] == "32" and sep["passes"] is True
    assert sep["per_place_lower"] == {"archimedean": "16/7"}
    # top eigenvalue is 3 + 2*sqrt(2) = 5.82842712...
    lo, hi = data["arch_moduli"][0]
    from fractions import Fraction

    assert Fraction(5828, 1000) < Fraction(lo) <= Fraction(hi) < Fraction(5829, 1000)

    code, _, err = run(capsys, ["spectrum", gens, "--word", "9"])
    assert code == 2 and "bad word" in err


def test_report(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    trace_path = tmp_path / "trace.jsonl"
    run(capsys, ["certify", gens, "--trace", str(trace_path)])
    code, out, _ = run(capsys, ["report", str(trace_path)])
    assert code == 0
    data = json.loads(out)
    assert data["schema"] == "growthcert.tracereport.v1"
    assert data["records"] == 8
    assert data["ok"] is True and data["failed_stage"] is None

    gens_h = heisenberg_file(tmp_path)
    run(capsys, ["certify", gens_h, "--trace", str(trace_path)])
    code, out, _ = run(capsys, ["report", str(trace_path)])
    assert code == 0
    data = json.loads(out)
    assert data["ok"] is False and data["failed_stage"] == "find_regular_pair"


def test_config_file_sets_oracle_depth(capsys, tmp_path):
    gens = sanov_file(tmp_path)
    cfg = write_json(tmp_path / "cfg.json", {"oracle_depth": 5})
    code, out, _ = run(capsys, ["certify", gens, "--config", cfg])
    assert code == 0
    assert json.loads(out)["oracle_depth_validated"] == 5


def test_config_env_and_flag_override(capsys, tmp_path, monkeypatch):
    gens = sanov_file(tmp_path)
    cfg = write_json(tmp_path / "cfg.json", {"budget": 30})
    monkeypatch.setenv(cli.CONFIG_ENV, cfg)
    code, out, _ = run(capsys, ["growth", gens, "--radius", "6"])
    assert code == 3
    # an explicit flag beats the environment config
    code, out, _ = run(capsys, ["growth", gens, "--radius", "6", "--budget", "1000000"])
    assert code == 0
    assert json.loads(out)["ball_sizes"][-1] == [6, 1457]


def test_console_entry_point(tmp_path):
    gens = sanov_file(tmp_path)
    exe = shutil.which("growthcert")
    assert exe is not None
    proc = subprocess.run(
        [exe, "growth", gens, "--radius", "2"], capture_output=True, text=True
    )
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["ball_sizes"] == [[0, 1], [1, 5], [2, 17]]


def test_module_invocation(tmp_path):
    gens = sanov_file(tmp_path)
    proc = subprocess.run(
        [sys.executable, "-m", "growthcert.cli", "growth", gens, "--radius", "1"],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == 0
