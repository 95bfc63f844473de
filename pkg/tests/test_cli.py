"""Command-line tests: exit codes, byte-level determinism, and report files.

Every invocation goes through cli.main(argv) in-process; stdout is captured
with capsys where the printed text is part of the contract.
"""

import csv
import json

import pytest

from hybridsim import cli
from hybridsim.problems import instance_from_obj
from hybridsim.stats import wilson_interval


def run_cli(*argv):
    return cli.main([str(a) for a in argv])


class TestGen:
    def test_same_seed_is_byte_identical(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        for path in (a, b):
            assert run_cli("gen", "--problem", "scs", "--n", 4, "--d", 2,
                           "--seed", 7, "--out", path) == 0
        assert a.read_bytes() == b.read_bytes()

    def test_seed_changes_the_file(self, tmp_path):
        a, b = tmp_path / "a.json", tmp_path / "b.json"
        run_cli("gen", "--problem", "scs", "--n", 4, "--d", 2, "--seed", 7, "--out", a)
        run_cli("gen", "--problem", "scs", "--n", 4, "--d", 2, "--seed", 8, "--out", b)
        assert a.read_bytes() != b.read_bytes()

    def test_serial_instance_reloads_and_verifies(self, tmp_path):
        path = tmp_path / "serial.json"
        assert run_cli("gen", "--problem", "serial", "--n", 3, "--d", 2,
                       "--seed", 1, "--out", path) == 0
        obj = json.loads(path.read_text())
        inst = instance_from_obj(obj)  # loader runs the gate checks
        assert (inst.c, inst.n) == (2, 3)
        assert obj["seed"] == 1

    def test_decision_variant_round_trips(self, tmp_path):
        path = tmp_path / "dec.json"
        run_cli("gen", "--problem", "serial", "--n", 3, "--d", 1,
                "--variant", "decision", "--seed", 4, "--out", path)
        inst = instance_from_obj(json.loads(path.read_text()))
        assert inst.variant == "decision"
        assert inst.label in (0, 1)

    def test_oversized_n_is_a_usage_error(self, capsys):
        assert run_cli("gen", "--problem", "serial", "--n", 99, "--d", 1) == 2
        assert "n in 2..8" in capsys.readouterr().err

    def test_missing_d_is_a_usage_error(self):
        assert run_cli("gen", "--problem", "ss", "--n", 3) == 2

    def test_simon_rejects_a_depth(self):
        assert run_cli("gen", "--problem", "simon", "--n", 3, "--d", 1) == 2

    def test_default_name_under_env_dir(self, tmp_path, monkeypatch):
        monkeypatch.setenv(cli.OUT_ENV, str(tmp_path / "inst"))
        assert run_cli("gen", "--problem", "simon", "--n", 3, "--seed", 5) == 0
        assert (tmp_path / "inst" / "simon-n3-s5.json").is_file()


class TestSolve:
    def test_passing_run_exits_zero(self, tmp_path, capsys):
        code = run_cli("solve", "--problem", "serial", "--model", "cq",
                       "--n", 4, "--d", 2, "--trials", 10, "--seed", 3,
                       "--out", tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert out.startswith("PASS serial/cq")
        report = json.loads((tmp_path / "solve-serial-n4-d2-cq-depth1-t10-s3.json").read_text())
        assert report["aggregate"]["trials"] == 10
        assert len(report["rows"]) == 10
        assert report["config"]["threshold"] == pytest.approx(2 / 3)

    def test_aggregate_recomputes_from_rows(self, tmp_path):
        run_cli("solve", "--problem", "simon", "--model", "qnc", "--n", 3,
                "--trials", 12, "--seed", 9, "--out", tmp_path)
        report = json.loads((tmp_path / "solve-simon-n3-qnc-depth1-t12-s9.json").read_text())
        wins = sum(r["success"] for r in report["rows"])
        agg = report["aggregate"]
        assert agg["successes"] == wins
        assert agg["rate"] == pytest.approx(wins / 12)
        assert tuple(agg["ci"]) == pytest.approx(wilson_interval(wins, 12))
        assert [r["seed"] for r in report["rows"]] == [[9, t] for t in range(12)]

    def test_threshold_miss_exits_one(self, tmp_path, capsys):
        code = run_cli("solve", "--problem", "serial", "--model", "cq",
                       "--n", 4, "--d", 2, "--trials", 10, "--seed", 3,
                       "--threshold", "1.01", "--out", tmp_path)
        assert code == 1
        assert capsys.readouterr().out.startswith("FAIL")

    def test_rerun_is_byte_identical(self, tmp_path):
        first, second = tmp_path / "one", tmp_path / "two"
        for outdir in (first, second):
            run_cli("solve", "--problem", "scs", "--model", "qc", "--n", 3,
                    "--d", 2, "--trials", 6, "--seed", 11, "--out", outdir)
        stem = "solve-scs-n3-d2-qc-depth4-t6-s11"
        assert (first / f"{stem}.json").read_bytes() == (second / f"{stem}.json").read_bytes()
        assert (first / f"{stem}.csv").read_bytes() == (second / f"{stem}.csv").read_bytes()

    def test_timing_lives_outside_the_canonical_report(self, tmp_path):
        run_cli("solve", "--problem", "simon", "--model", "qnc", "--n", 3,
                "--trials", 4, "--seed", 2, "--out", tmp_path)
        stem = "solve-simon-n3-qnc-depth1-t4-s2"
        report = (tmp_path / f"{stem}.json").read_text()
        assert "seconds" not in report
        timing = json.loads((tmp_path / f"{stem}.timing.json").read_text())
        assert len(timing["per_trial_seconds"]) == 4

    def test_instance_file_mode(self, tmp_path):
        inst_path = tmp_path / "inst.json"
        run_cli("gen", "--problem", "ss", "--n", 3, "--d", 1, "--seed", 6,
                "--out", inst_path)
        code = run_cli("solve", "--instance", inst_path, "--model", "cq",
                       "--trials", 6, "--seed", 1, "--out", tmp_path)
        assert code == 0
        report = json.loads((tmp_path / "solve-inst-cq-depth3-t6-s1.json").read_text())
        assert report["config"]["problem"] == "ss"
        assert report["config"]["source"] == "inst.json"

    def test_short_depth_budget_is_a_validation_violation(self, tmp_path, capsys):
        code = run_cli("solve", "--problem", "ss", "--model", "cq", "--n", 3,
                       "--d", 2, "--depth", 4, "--trials", 5, "--out", tmp_path)
        assert code == 3
        assert "DEPTH_EXCEEDED" in capsys.readouterr().err
        report = json.loads((tmp_path / "solve-ss-n3-d2-cq-depth4-t5-s0.json").read_text())
        assert report["violations"] == ["DEPTH_EXCEEDED"]
        assert "aggregate" not in report

    def test_fixed_depth_solver_rejects_smaller_budget(self, tmp_path, capsys):
        code = run_cli("solve", "--problem", "scs", "--model", "qc", "--n", 3,
                       "--d", 2, "--depth", 3, "--trials", 5, "--out", tmp_path)
        assert code == 3
        assert "DEPTH_EXCEEDED" in capsys.readouterr().err

    def test_unsupported_pair_is_a_usage_error(self, capsys):
        assert run_cli("solve", "--problem", "simon", "--model", "cq", "--n", 3) == 2
        assert "no solver" in capsys.readouterr().err

    def test_missing_instance_file_is_a_usage_error(self, tmp_path):
        assert run_cli("solve", "--instance", tmp_path / "nope.json",
                       "--model", "cq") == 2

    def test_corrupt_instance_is_a_validation_violation(self, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text('{"format": 1, "kind": "simon", "n": 2, "s": 0, '
                       '"table": {"in_bits": 2, "out_bits": 2, "entries": [0, 1, 2, 3]}}')
        assert run_cli("solve", "--instance", bad, "--model", "qnc") == 3
        assert "validation violation" in capsys.readouterr().err

    def test_unknown_subcommand_is_a_usage_error(self):
        with pytest.raises(SystemExit) as err:
            run_cli("frobnicate")
        assert err.value.code == 2


class TestVerify:
    def test_suite_runs_and_reports_each_check(self, tmp_path, capsys):
        code = run_cli("verify", "--suite", "combinatorics", "--out", tmp_path)
        assert code == 0
        out = capsys.readouterr().out
        assert out.count("PASS") == 2
        report = json.loads((tmp_path / "verify-combinatorics-s0.json").read_text())
        assert report["passed"] is True
        assert {c["name"] for c in report["checks"]} == {
            "counting-identities", "part-space-sizes",
        }

    def test_sampled_suite_is_byte_identical_per_seed(self, tmp_path):
        first, second = tmp_path / "one", tmp_path / "two"
        for outdir in (first, second):
            assert run_cli("verify", "--suite", "decomposition", "--seed", 11,
                           "--trials", 3, "--out", outdir) == 0
        name = "verify-decomposition-s11-t3.json"
        assert (first / name).read_bytes() == (second / name).read_bytes()

    def test_csv_mirrors_the_checks(self, tmp_path):
        run_cli("verify", "--suite", "combinatorics", "--out", tmp_path)
        with (tmp_path / "verify-combinatorics-s0.csv").open() as fh:
            rows = list(csv.DictReader(fh))
        report = json.loads((tmp_path / "verify-combinatorics-s0.json").read_text())
        assert [r["name"] for r in rows] == [c["name"] for c in report["checks"]]
        assert all(r["passed"] == "True" for r in rows)

    def test_unknown_suite_is_a_usage_error(self):
        with pytest.raises(SystemExit) as err:
            run_cli("verify", "--suite", "nonsense")
        assert err.value.code == 2


class TestReport:
    @pytest.fixture()
    def populated(self, tmp_path):
        run_cli("solve", "--problem", "serial", "--model", "cq", "--n", 4,
                "--d", 2, "--trials", 8, "--seed", 3, "--out", tmp_path)
        run_cli("solve", "--problem", "simon", "--model", "qnc", "--n", 3,
                "--trials", 8, "--seed", 4, "--out", tmp_path)
        return tmp_path

    def test_matrix_lists_each_run(self, populated, capsys):
        assert run_cli("report", "--out", populated) == 0
        out = capsys.readouterr().out
        assert "serial" in out and "simon" in out
        assert out.index("serial") < out.index("simon")  # sorted by problem

    def test_csv_reparses_to_the_same_aggregates(self, populated, capsys):
        run_cli("report", "--out", populated)
        capsys.readouterr()
        with (populated / "summary.csv").open() as fh:
            rows = {r["problem"]: r for r in csv.DictReader(fh)}
        for stem in ("solve-serial-n4-d2-cq-depth1-t8-s3", "solve-simon-n3-qnc-depth1-t8-s4"):
            report = json.loads((populated / f"{stem}.json").read_text())
            agg, row = report["aggregate"], rows[report["config"]["problem"]]
            assert float(row["rate"]) == pytest.approx(agg["rate"], abs=5e-5)
            assert float(row["ci_lo"]) == pytest.approx(agg["ci"][0], abs=5e-5)
            assert float(row["ci_hi"]) == pytest.approx(agg["ci"][1], abs=5e-5)
            assert int(row["trials"]) == agg["trials"]

    def test_renders_a_figure(self, populated, capsys):
        run_cli("report", "--out", populated)
        capsys.readouterr()
        png = populated / "summary.png"
        assert png.is_file()
        assert png.read_bytes()[:8] == b"\x89PNG\r\n\x1a\n"

    def test_empty_directory_says_so(self, tmp_path, capsys):
        assert run_cli("report", "--out", tmp_path / "void") == 0
        assert "no solve reports" in capsys.readouterr().out

    def test_violation_runs_are_skipped_not_crashed(self, tmp_path, capsys):
        run_cli("solve", "--problem", "scs", "--model", "qc", "--n", 3, "--d", 2,
                "--depth", 3, "--trials", 2, "--out", tmp_path)
        capsys.readouterr()
        assert run_cli("report", "--out", tmp_path) == 0
        captured = capsys.readouterr()
        assert "skipping" in captured.err
        assert "no solve reports" in captured.out


class TestGroundTruth:
    def test_hidden_period_finds_the_xor_mask(self):
        assert cli._hidden_period([5, 5, 9, 9]) == 1
        assert cli._hidden_period([3, 7, 7, 3]) == 3
        assert cli._hidden_period([0, 1, 2, 3]) is None

    def test_natural_depths(self):
        assert cli._natural_depth("serial", "qc", 2) == 6
        assert cli._natural_depth("serial", "cq", 5) == 1
        assert cli._natural_depth("ss", "cq", 3) == 7
        assert cli._natural_depth("scs", "qc", 3) == 4
        assert cli._natural_depth("scs", "cq", 3) == 9
        assert cli._natural_depth("simon", "qnc", None) == 1
