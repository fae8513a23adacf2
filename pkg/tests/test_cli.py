import json

import numpy as np
import pytest

from qbound.cli import main

FAST_FLAGS = ["--grid-points", "64", "--refine-iterations", "16"]


def run_cli(capsys, argv):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBoundCommand:
    def test_json_record_schema(self, capsys):
        code, out, _ = run_cli(capsys, ["bound", "--entropy", "0.6", "--m", "1",
                                        "--kind", "qab", "--order", "1,1", *FAST_FLAGS])
        assert code == 0
        record = json.loads(out)
        assert set(record) == {"bound_kind", "order", "m", "theta", "bound_value",
                               "ratio_to_qcrb", "optimal_offsets", "optimal_a",
                               "attained_at_limit", "diagnostics", "config_hash",
                               "seed", "version"}
        assert record["ratio_to_qcrb"] > 1.0
        assert record["optimal_offsets"][0] == pytest.approx(np.pi, abs=1e-9)

    def test_qab_01_aliases_qcrb(self, capsys):
        _, out_a, _ = run_cli(capsys, ["bound", "--entropy", "0.6", "--kind", "qab",
                                       "--order", "0,1", *FAST_FLAGS])
        _, out_b, _ = run_cli(capsys, ["bound", "--entropy", "0.6", "--kind", "qcrb",
                                       *FAST_FLAGS])
        a, b = json.loads(out_a), json.loads(out_b)
        assert a["bound_value"] == b["bound_value"]
        assert a["ratio_to_qcrb"] == b["ratio_to_qcrb"] == 1.0

    def test_malformed_order_exits_2(self, capsys):
        code, _, err = run_cli(capsys, ["bound", "--entropy", "0.6", "--kind", "qab",
                                        "--order", "banana"])
        assert code == 2
        assert "order" in err

    def test_missing_model_parameters_exit_2(self, capsys):
        code, _, _ = run_cli(capsys, ["bound", "--kind", "qcrb"])
        assert code == 2

    def test_numerical_failure_exits_3(self, capsys):
        # pure state with a shifted test point: support condition fails
        code, _, err = run_cli(capsys, ["bound", "--r", "1.0", "--kind", "qhcrb",
                                        *FAST_FLAGS])
        assert code == 3
        assert "SupportViolation" in err

    def test_unknown_config_key_exits_2(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": {"kind": "qubit", "r": 0.42, "wat": 1}}))
        code, _, err = run_cli(capsys, ["bound", "--config", str(cfg)])
        assert code == 2
        assert "wat" in err

    def test_config_file_with_flag_override(self, capsys, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"model": {"kind": "qubit", "r": 0.42},
                                   "bound": {"kind": "qcrb"}}))
        code, out, _ = run_cli(capsys, ["bound", "--config", str(cfg), "--m", "4"])
        assert code == 0
        record = json.loads(out)
        assert record["m"] == 4
        assert record["bound_value"] == pytest.approx(1 / (4 * 0.42 ** 2), rel=1e-12)

    def test_csv_format(self, capsys):
        code, out, _ = run_cli(capsys, ["bound", "--r", "0.42", "--kind", "qcrb",
                                        "--format", "csv"])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("# qbound version=")
        assert lines[1] == ("bound_kind,order_r,order_s,m,theta,bound_value,"
                            "ratio_to_qcrb,argmax_lambda,attained_at_limit")
        assert lines[2].startswith("qcrb,0,1,1,0,")

    def test_output_file(self, capsys, tmp_path):
        path = tmp_path / "out.json"
        code, out, _ = run_cli(capsys, ["bound", "--r", "0.42", "--kind", "qcrb",
                                        "--output", str(path)])
        assert code == 0 and out == ""
        assert json.loads(path.read_text())["bound_kind"] == "qcrb"


class TestSweepCommand:
    def test_csv_schema_and_threshold_content(self, capsys):
        code, out, _ = run_cli(capsys, ["sweep-fig1", "--m-range", "1:3", *FAST_FLAGS])
        assert code == 0
        lines = out.strip().split("\n")
        assert lines[0].startswith("# qbound version=")
        assert lines[1] == "m,bound_kind,value,ratio_to_qcrb,argmax_lambda,attained_at_limit"
        assert len(lines) == 2 + 3 * 3
        rows = [line.split(",") for line in lines[2:]]
        by_key = {(int(r[0]), r[1]): r for r in rows}
        # lowest-order rows pin the ratio at exactly one
        for m in (1, 2, 3):
            assert float(by_key[(m, "qcrb")][3]) == 1.0
            assert by_key[(m, "qcrb")][4] == ""
        # threshold: edge maximum below 3 copies, vanishing-offset limit at 3
        assert float(by_key[(1, "qhcrb")][3]) > 1.0001
        assert by_key[(1, "qhcrb")][5] == "false"
        assert float(by_key[(3, "qhcrb")][3]) == pytest.approx(1.0, abs=1e-6)
        assert by_key[(3, "qhcrb")][5] == "true"
        # hybrid rows keep their maximum at the edge
        for m in (1, 2, 3):
            assert float(by_key[(m, "qab11")][4]) == pytest.approx(np.pi, abs=1e-9)

    def test_deterministic_under_threads(self, capsys, monkeypatch):
        monkeypatch.setenv("QBOUND_THREADS", "1")
        _, out_serial, _ = run_cli(capsys, ["sweep-fig1", "--m-range", "1:2", *FAST_FLAGS])
        monkeypatch.setenv("QBOUND_THREADS", "3")
        _, out_parallel, _ = run_cli(capsys, ["sweep-fig1", "--m-range", "1:2", *FAST_FLAGS])
        assert out_serial == out_parallel

    def test_bad_thread_env_exits_2(self, capsys, monkeypatch):
        monkeypatch.setenv("QBOUND_THREADS", "zero")
        code, _, _ = run_cli(capsys, ["sweep-fig1", "--m-range", "1:1", *FAST_FLAGS])
        assert code == 2


class TestMonteCarloCommand:
    def test_zero_samples_exits_2(self, capsys):
        code, _, _ = run_cli(capsys, ["montecarlo", "--entropy", "0.6",
                                      "--n-samples", "0"])
        assert code == 2

    def test_report_and_reproducibility(self, capsys):
        argv = ["montecarlo", "--entropy", "0.6", "--kind", "qcrb",
                "--n-samples", "20000", "--seed", "9", *FAST_FLAGS]
        code, out_a, _ = run_cli(capsys, argv)
        assert code == 0
        code, out_b, _ = run_cli(capsys, argv)
        assert out_a == out_b
        record = json.loads(out_a)
        assert record["rng"] == "philox4x64"
        assert record["ratio"] == pytest.approx(1.0, abs=0.05)

    def test_hybrid_configuration(self, capsys):
        code, out, _ = run_cli(capsys, ["montecarlo", "--entropy", "0.6", "--kind", "qab",
                                        "--order", "1,1", "--n-samples", "50000",
                                        "--seed", "4", *FAST_FLAGS])
        assert code == 0
        record = json.loads(out)
        assert record["ratio"] == pytest.approx(1.0, abs=0.05)

    def test_limit_attained_configuration(self, capsys):
        # above the threshold the one-point supremum sits at the vanishing
        # offset; the sampled configuration is then the derivative constraint
        code, out, _ = run_cli(capsys, ["montecarlo", "--entropy", "0.6", "--kind", "qhcrb",
                                        "--m", "3", "--n-samples", "50000",
                                        "--seed", "4", *FAST_FLAGS])
        assert code == 0
        record = json.loads(out)
        assert record["ratio"] == pytest.approx(1.0, abs=0.05)


class TestCheckCommand:
    def test_filtered_run_passes(self, capsys):
        code, out, _ = run_cli(capsys, ["check", "--filter", "omega"])
        assert code == 0
        assert "omega-symmetric-division-identity" in out
        assert "FAIL" not in out

    def test_perturbation_is_detected(self, capsys):
        code, out, _ = run_cli(capsys, ["check", "--filter", "omega",
                                        "--dev-perturb", "omega"])
        assert code == 1
        assert "FAIL  omega-symmetric-division-identity" in out

    def test_unknown_filter_fails(self, capsys):
        code, _, err = run_cli(capsys, ["check", "--filter", "nonexistent-check"])
        assert code == 1
