"""Suite orchestration and the CLI: determinism, exit codes, report schema,
and the negative-control fixtures for every suite."""

import json
import subprocess
import sys

import numpy as np
import pytest

from paracheck.manifest import save_manifest
from paracheck.models import get_model
from paracheck.hypersurface_lab import get_bundle
from paracheck.report import EXIT_CHECK_FAILED, EXIT_INPUT_ERROR, EXIT_OK
from paracheck.suites import ANCHORS, RunConfig, run_suite, run_synthetic

CFG = RunConfig(points=30, seed=7)


def _strip_variable_fields(report_json: str) -> str:
    doc = json.loads(report_json)
    doc.pop("engine_version", None)
    doc.pop("generated_at", None)
    return json.dumps(doc, sort_keys=True)


class TestRunSuite:
    def test_e1_all_exits_zero(self):
        """Every record pass or vacuous at seed 7 and 100 points."""
        report = run_suite(get_model("E1"), "all", RunConfig(points=100, seed=7))
        assert report.exit_code == EXIT_OK
        statuses = {c.status for c in report.checks}
        assert "fail" not in statuses and "not-applicable" not in statuses

    def test_e2_lie_has_exactly_two_printed_form_records(self):
        report = run_suite(get_model("E2"), "lie", CFG)
        assert report.exit_code == EXIT_OK
        mismatches = [c.id for c in report.checks if c.status == "printed-form-mismatch"]
        assert sorted(mismatches) == ["lie.lie-c11-printed", "lie.lie-phi-form-printed"]

    def test_n1_structure_fails(self):
        report = run_suite(get_model("N1"), "structure", CFG)
        assert report.exit_code == EXIT_CHECK_FAILED

    def test_unknown_suite(self):
        with pytest.raises(ValueError, match="unknown suite"):
            run_suite(get_model("E1"), "everything", CFG)

    def test_hypersurface_needs_bundle(self):
        with pytest.raises(ValueError, match="bundle"):
            run_suite(get_model("E1"), "hypersurface", CFG)

    def test_every_suite_has_a_failing_fixture(self):
        """Checks that can never fail are defects: each suite must reject at
        least one builtin (or synthetic) negative fixture."""
        failing = {
            "structure": run_suite(get_model("N1"), "structure", CFG),
            "sasakian": run_suite(get_model("N1"), "sasakian", CFG),
            "curvature": run_suite(get_model("F0"), "curvature", CFG),
            "einstein": run_suite(get_bundle("E3b"), "einstein", CFG),
            "lie": run_suite(get_model("F0"), "lie", CFG),
            "hypersurface": run_suite(get_bundle("B1"), "hypersurface", CFG),
            "synthetic": run_synthetic(RunConfig(seed=7, trials=3, epsilon=1, dim=3,
                                                 perturb_a=5e-3)),
        }
        for suite, report in failing.items():
            assert report.exit_code == EXIT_CHECK_FAILED, suite

    def test_f0_fails_r_identity_specifically(self):
        report = run_suite(get_model("F0"), "curvature", CFG)
        failed = {c.id for c in report.checks if c.status == "fail"}
        assert "curvature.r-xy-xi" in failed

    def test_bundle_all_runs_every_family(self):
        report = run_suite(get_bundle("E3a"), "all", RunConfig(points=15, seed=7))
        prefixes = {c.id.split(".")[0] for c in report.checks}
        assert prefixes == {"structure", "sasakian", "curvature", "einstein", "lie", "hypersurface"}

    def test_hypersurface_subsets(self):
        for subset, expected_ids in [
            ("induced", {"hypersurface.jn-tangent", "hypersurface.induced-axioms"}),
            ("gauss", {"hypersurface.gauss-equation", "hypersurface.ambient-j-parallel"}),
            ("characterization", {"hypersurface.characterization-iff", "hypersurface.quasi-umbilical"}),
        ]:
            cfg = RunConfig(points=10, seed=7, hypersurface_subset=subset)
            report = run_suite(get_bundle("E3b"), "hypersurface", cfg)
            ids = {c.id for c in report.checks}
            assert expected_ids <= ids, subset

    def test_every_record_has_an_anchor(self):
        for report in (run_suite(get_model("E1"), "all", CFG),
                       run_suite(get_bundle("E3b"), "all", RunConfig(points=10, seed=7)),
                       run_synthetic(RunConfig(seed=7, trials=2, epsilon=-1, dim=3))):
            for c in report.checks:
                assert c.anchor, c.id
                assert c.id in ANCHORS

    def test_checks_sorted_by_id(self):
        report = run_suite(get_model("E1"), "all", CFG)
        ids = [c.id for c in report.checks]
        assert ids == sorted(ids)


class TestDeterminism:
    def test_reports_byte_identical_modulo_variable_fields(self):
        a = run_suite(get_model("E1"), "curvature", RunConfig(points=20, seed=11))
        b = run_suite(get_model("E1"), "curvature", RunConfig(points=20, seed=11))
        assert _strip_variable_fields(a.to_json()) == _strip_variable_fields(b.to_json())

    def test_different_seed_changes_samples(self):
        a = run_suite(get_model("E1"), "einstein", RunConfig(points=20, seed=11))
        b = run_suite(get_model("E1"), "einstein", RunConfig(points=20, seed=12))
        ra = {c.id: c.residual for c in a.checks}
        rb = {c.id: c.residual for c in b.checks}
        assert any(ra[k] != rb[k] for k in ra)

    def test_synthetic_determinism(self):
        a = run_synthetic(RunConfig(seed=3, trials=5, epsilon=-1, dim=4))
        b = run_synthetic(RunConfig(seed=3, trials=5, epsilon=-1, dim=4))
        assert _strip_variable_fields(a.to_json()) == _strip_variable_fields(b.to_json())


class TestReportSchema:
    def test_json_fields(self):
        report = run_suite(get_model("E1"), "structure", CFG)
        doc = json.loads(report.to_json())
        assert set(doc) == {"model", "suite", "seed", "points", "engine_version",
                            "generated_at", "checks"}
        for c in doc["checks"]:
            assert set(c) == {"id", "anchor", "residual", "tolerance", "status", "detail"}
            assert c["status"] in {"pass", "fail", "vacuous", "not-applicable",
                                   "printed-form-mismatch"}

    def test_text_format_mentions_every_check(self):
        report = run_suite(get_model("E1"), "structure", CFG)
        text = report.to_text()
        for c in report.checks:
            assert c.id in text
        assert "exit 0" in text

    def test_tol_scale(self):
        tight = run_suite(get_model("N1"), "structure", RunConfig(points=10, seed=7, tol_scale=1.0))
        loose = run_suite(get_model("N1"), "structure", RunConfig(points=10, seed=7, tol_scale=1e9))
        assert tight.exit_code == EXIT_CHECK_FAILED
        assert loose.exit_code == EXIT_OK


def _cli(*args):
    proc = subprocess.run([sys.executable, "-m", "paracheck.cli", *args],
                          capture_output=True, text=True)
    return proc


class TestCli:
    def test_list_models(self):
        proc = _cli("list-models")
        assert proc.returncode == 0
        for name in ("E1", "E2", "E3a", "E3b", "N1", "F0"):
            assert name in proc.stdout

    def test_check_pass_and_fail_exit_codes(self):
        assert _cli("check", "E1", "--suite", "structure", "--points", "10").returncode == 0
        assert _cli("check", "N1", "--suite", "structure", "--points", "10").returncode == 1

    def test_unknown_model_is_input_error(self):
        proc = _cli("check", "XX", "--suite", "structure")
        assert proc.returncode == EXIT_INPUT_ERROR
        assert "unknown model" in proc.stderr

    def test_malformed_manifest_position_diagnostic(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text('{"name": "m",\n "dim": }')
        proc = _cli("check", str(path), "--suite", "structure")
        assert proc.returncode == EXIT_INPUT_ERROR
        assert "line 2" in proc.stderr and "column" in proc.stderr

    def test_manifest_model_accepted(self, tmp_path):
        path = tmp_path / "e1.json"
        save_manifest(get_model("E1"), path)
        proc = _cli("check", str(path), "--suite", "structure", "--points", "10")
        assert proc.returncode == 0

    def test_json_output_to_file(self, tmp_path):
        out = tmp_path / "report.json"
        proc = _cli("check", "E1", "--suite", "structure", "--points", "10",
                    "--format", "json", "--out", str(out))
        assert proc.returncode == 0
        doc = json.loads(out.read_text())
        assert doc["model"] == "E1"
        assert doc["suite"] == "structure"

    def test_hypersurface_subcommand(self):
        proc = _cli("hypersurface", "E3b", "--suite", "characterization", "--points", "10")
        assert proc.returncode == 0
        proc = _cli("hypersurface", "E1", "--suite", "all")
        assert proc.returncode == EXIT_INPUT_ERROR

    def test_synthetic_subcommand(self):
        proc = _cli("synthetic", "--epsilon", "-1", "--dim", "3", "--trials", "5",
                    "--seed", "9", "--format", "json")
        assert proc.returncode == 0
        doc = json.loads(proc.stdout)
        ids = {c["id"] for c in doc["checks"]}
        assert "synthetic.quasi-umbilical-exact" in ids

    def test_cli_repeated_runs_identical(self, tmp_path):
        a = _cli("check", "E1", "--suite", "sasakian", "--points", "15",
                 "--seed", "5", "--format", "json")
        b = _cli("check", "E1", "--suite", "sasakian", "--points", "15",
                 "--seed", "5", "--format", "json")
        assert _strip_variable_fields(a.stdout) == _strip_variable_fields(b.stdout)
