"""Command-line interface: exit codes, output formats, determinism."""

import json
import math
import shutil
import subprocess

import pytest

import exptails.cli as cli
from exptails.core import NumericFailureError
from exptails.harness import PropertyResult, PropertySuiteReport
from exptails.cli import run

# Frozen reference values from tests/oracles/closed_forms.py (mpmath, 50 dps).
LAPLACE_UPPER_T2 = 0.252953855321830831452
HYPOEXP21_AT_6 = 0.0970953845590615275356
MOMENT_EXACT_P3_W21 = 3.95789160968040547894
MOMENT_LOWER_P2_N1_PAPER = 2.38943012775881533751


def run_json(capsys, argv):
    code = run(argv)
    captured = capsys.readouterr()
    assert code == 0, captured.err
    return json.loads(captured.out)


class TestUsageErrors:
    @pytest.mark.parametrize(
        "argv",
        [
            ["frobnicate", "--dist", "laplace", "--weights", "1"],
            ["bounds", "--dist", "laplace", "--t", "2"],  # missing --weights
            ["bounds", "--dist", "laplace", "--weights", "2,1"],  # no threshold
            ["bounds", "--dist", "laplace", "--weights", "2,1", "--t", "2", "--threshold", "3"],
            ["bounds", "--dist", "gamma", "--weights", "1", "--t", "2"],  # no shape
            ["bounds", "--dist", "laplace", "--shape", "2", "--weights", "1", "--t", "2"],
            ["bounds", "--dist", "laplace", "--weights", "1,oops", "--t", "2"],
            ["bounds", "--dist", "laplace", "--weights", "2,1", "--t", "2", "--format", "xml"],
            ["moments", "--dist", "exponential", "--weights", "2,1"],
            ["exact", "--dist", "laplace", "--weights", "2,1", "--t", ""],
        ],
    )
    def test_exit_code_one(self, capsys, argv):
        assert run(argv) == 1
        capsys.readouterr()

    def test_numeric_failure_exit_code(self, capsys, monkeypatch):
        def broken(d, w, threshold):
            raise NumericFailureError("inversion stalled")

        monkeypatch.setattr(cli, "exact_tail", broken)
        assert run(["exact", "--dist", "laplace", "--weights", "2,1", "--t", "2"]) == 3
        assert "numeric failure" in capsys.readouterr().err


class TestBoundsCommand:
    def test_laplace_pair(self, capsys):
        payload = run_json(
            capsys, ["bounds", "--dist", "laplace", "--weights", "2,1", "--t", "2"]
        )
        rows = payload["rows"]
        assert [r["kind"] for r in rows] == ["laplace_lower", "laplace_upper"]
        upper = rows[1]
        assert math.isclose(upper["value"], LAPLACE_UPPER_T2, rel_tol=1e-9)
        assert upper["valid"] is True
        assert math.isclose(upper["threshold"], 2.0 * math.sqrt(10.0), rel_tol=1e-15)
        assert payload["meta"]["config"]["subcommand"] == "bounds"

    def test_exponential_emits_all_routes(self, capsys):
        payload = run_json(
            capsys, ["bounds", "--dist", "exponential", "--weights", "2,1", "--t", "2"]
        )
        kinds = [r["kind"] for r in payload["rows"]]
        assert kinds == [
            "janson_lower",
            "janson_upper",
            "generic_lower",
            "generic_upper",
            "s_ineq_upper",
        ]

    def test_threshold_grid(self, capsys):
        payload = run_json(
            capsys,
            ["bounds", "--dist", "exponential", "--weights", "2,1", "--threshold", "6,9"],
        )
        # absolute thresholds divide by E S = 3 to recover t
        ts = sorted({r["t"] for r in payload["rows"]})
        assert ts == [2.0, 3.0]

    def test_csv_format(self, capsys):
        code = run(
            ["bounds", "--dist", "laplace", "--weights", "2,1", "--t", "2", "--format", "csv"]
        )
        out = capsys.readouterr().out
        assert code == 0
        lines = out.splitlines()
        assert lines[0].startswith("# generated_at=")
        assert lines[1].startswith("# config=")
        assert lines[2] == "t,threshold,kind,value,log_value,valid"
        cells = lines[4].split(",")
        assert math.isclose(float(cells[3]), LAPLACE_UPPER_T2, rel_tol=1e-9)


class TestExactCommand:
    def test_absolute_threshold(self, capsys):
        payload = run_json(
            capsys, ["exact", "--dist", "exponential", "--weights", "2,1", "--threshold", "6"]
        )
        row = payload["rows"][0]
        assert math.isclose(row["tail"], HYPOEXP21_AT_6, rel_tol=1e-10)
        assert row["source"] == "mixture"
        assert row["t"] == 2.0

    def test_relative_threshold_matches(self, capsys):
        payload = run_json(
            capsys, ["exact", "--dist", "exponential", "--weights", "2,1", "--t", "2"]
        )
        assert math.isclose(payload["rows"][0]["tail"], HYPOEXP21_AT_6, rel_tol=1e-10)

    def test_gamma_uses_inversion(self, capsys):
        payload = run_json(
            capsys,
            ["exact", "--dist", "gamma", "--shape", "2", "--weights", "2,1", "--t", "2"],
        )
        assert payload["rows"][0]["source"] == "cf_inversion"


class TestSimulateCommand:
    def test_plain_estimate(self, capsys):
        argv = [
            "simulate", "--dist", "laplace", "--weights", "2,1",
            "--t", "1.5", "--samples", "2000", "--seed", "7",
        ]
        payload = run_json(capsys, argv)
        row = payload["rows"][0]
        assert row["method"] == "plain"
        assert row["n"] == 2000
        assert 0.0 <= row["ci_low"] <= row["p_hat"] <= row["ci_high"] <= 1.0

    def test_tilted_estimate(self, capsys):
        argv = [
            "simulate", "--dist", "exponential", "--weights", "2,1",
            "--t", "5", "--samples", "2000", "--method", "tilted",
        ]
        payload = run_json(capsys, argv)
        row = payload["rows"][0]
        assert row["method"] == "tilted"
        assert row["tilt_theta"] > 0.0


class TestMomentsCommand:
    def test_sandwich_holds(self, capsys):
        payload = run_json(
            capsys, ["moments", "--dist", "laplace", "--weights", "2,1", "--p", "2,3"]
        )
        for row in payload["rows"]:
            assert row["lower"] <= row["exact"] <= row["upper"]
            assert row["mode"] == "proof_derived"
        assert math.isclose(payload["rows"][1]["exact"], MOMENT_EXACT_P3_W21, rel_tol=1e-12)

    def test_paper_mode_counterexample_is_visible(self, capsys):
        # the published constant overshoots E S^2 for a single weight; the
        # CLI reports the numbers as they are instead of hiding the clash
        payload = run_json(
            capsys,
            ["moments", "--dist", "laplace", "--weights", "1", "--p", "2", "--mode", "paper"],
        )
        row = payload["rows"][0]
        assert math.isclose(row["lower"], MOMENT_LOWER_P2_N1_PAPER, rel_tol=1e-12)
        assert row["lower"] > row["exact"]


class TestDeterminism:
    def test_json_reruns_identical_modulo_timestamp(self, capsys):
        argv = ["simulate", "--dist", "laplace", "--weights", "2,1", "--t", "2",
                "--samples", "1000"]
        first = run_json(capsys, argv)
        second = run_json(capsys, argv)
        first["meta"].pop("generated_at")
        second["meta"].pop("generated_at")
        assert first == second

    def test_csv_reruns_identical_modulo_timestamp(self, capsys):
        argv = ["bounds", "--dist", "exponential", "--weights", "2,1", "--t", "1.5,2,3",
                "--format", "csv"]

        def stripped():
            assert run(argv) == 0
            out = capsys.readouterr().out
            return [ln for ln in out.splitlines() if not ln.startswith("# generated_at=")]

        assert stripped() == stripped()

    def test_csv_and_json_carry_identical_values(self, capsys):
        base = ["exact", "--dist", "laplace", "--weights", "2,1", "--t", "1.5,2"]
        payload = run_json(capsys, base)
        assert run(base + ["--format", "csv"]) == 0
        out = capsys.readouterr().out
        data_lines = [ln for ln in out.splitlines() if not ln.startswith("#")]
        for row, line in zip(payload["rows"], data_lines[1:]):
            cells = line.split(",")
            assert float(cells[2]) == row["tail"]


class TestOutFile:
    def test_writes_file_instead_of_stdout(self, capsys, tmp_path):
        target = tmp_path / "bounds.json"
        argv = ["bounds", "--dist", "laplace", "--weights", "2,1", "--t", "2",
                "--out", str(target)]
        assert run(argv) == 0
        assert capsys.readouterr().out == ""
        payload = json.loads(target.read_text())
        assert payload["rows"][0]["kind"] == "laplace_lower"


class TestVerifyCommand:
    def test_small_campaign_passes(self, capsys):
        argv = ["verify", "--dist", "laplace", "--instances", "3", "--t", "1.5,2"]
        code = run(argv)
        captured = capsys.readouterr()
        assert code == 0
        payload = json.loads(captured.out)
        assert payload["pass"] is True
        assert len(payload["sandwich"]) == 6
        assert len(payload["properties"]) == 6
        assert "verify: 6 rows (0 failing), 6 properties (0 failing)" in captured.err

    def test_csv_carries_property_lines(self, capsys):
        argv = ["verify", "--dist", "exponential", "--instances", "2", "--t", "2",
                "--format", "csv"]
        assert run(argv) == 0
        out = capsys.readouterr().out
        assert "# property squared_weight_floor pass=true" in out
        assert "# suite_pass=true" in out
        header = next(ln for ln in out.splitlines() if not ln.startswith("#"))
        assert header == "instance,dist,n,t,lower,exact,upper,pass,source"

    def test_failing_property_sets_exit_code(self, capsys, monkeypatch):
        def failing_suite(seed):
            result = PropertyResult(
                name="squared_weight_floor", passed=False,
                detail="forced failure", witness="(1)",
            )
            return PropertySuiteReport(seed=seed, results=(result,))

        monkeypatch.setattr(cli, "property_suite", failing_suite)
        argv = ["verify", "--dist", "laplace", "--instances", "1", "--t", "2"]
        code = run(argv)
        captured = capsys.readouterr()
        assert code == 2
        assert json.loads(captured.out)["pass"] is False

    def test_bad_t_grid(self, capsys):
        argv = ["verify", "--dist", "laplace", "--instances", "1", "--t", "0.5"]
        assert run(argv) == 1
        capsys.readouterr()


def test_console_script_entry_point(tmp_path):
    exe = shutil.which("exptails")
    if exe is None:
        pytest.skip("console script not on PATH")
    proc = subprocess.run(
        [exe, "exact", "--dist", "exponential", "--weights", "2,1", "--threshold", "6"],
        capture_output=True, text=True, timeout=120,
    )
    assert proc.returncode == 0
    payload = json.loads(proc.stdout)
    assert math.isclose(payload["rows"][0]["tail"], HYPOEXP21_AT_6, rel_tol=1e-10)
