"""
Tests for the experiment driver, the report writer and the command line.
"""

import csv
import json
from fractions import Fraction

import pytest

from config import EXIT_CAP_EXCEEDED, EXIT_CERT_FAIL, EXIT_PASS, EXIT_SPEC_ERROR, REPORT_CSV_NAME, REPORT_JSON_NAME
from src.cli.cli import _parse_assignment, load_spec, main
from src.cli.report import csv_rows, emit_report, render_csv
from src.cli.runner import (
    RunOptions,
    encode_report,
    exit_code_for_error,
    run_experiment,
    validate_parameters,
)
from src.common.errors import (
    CapExceededError,
    PreconditionError,
    SearchFailure,
    SpecError,
    StructuralError,
    TruncationTooSmallError,
)
from src.common.protocol import ExperimentSpec


def read_csv(path):
    with open(path, newline="", encoding="utf-8") as fh:
        return list(csv.DictReader(fh))


INTERVAL = {
    "model": {"dim": 1, "has_limit": False, "norm": {"kind": "sup"}},
    "vertices": [{"coords": ["1"], "limit": None}, {"coords": ["-1"], "limit": None}],
}

TRANSFER_SPEC = {
    "kind": "l1sum_combo_transfer",
    "parameters": {
        "B1": INTERVAL,
        "B2": INTERVAL,
        "slices": [{"functional": {"coeffs": ["1"], "limit_coeff": "0"}, "alpha": "1/2"}],
        "mu": "1/4",
    },
}


class TestValidateParameters:
    """Test spec validation before any computation."""

    @pytest.mark.parametrize(
        "spec, field",
        [
            (ExperimentSpec("prop99"), "kind"),
            (ExperimentSpec("prop21", {"p": 2, "bogus": 1}), "parameters.bogus"),
            (ExperimentSpec("build_stages"), "parameters.N"),
            (ExperimentSpec("prop21"), "parameters.p"),
            (ExperimentSpec("prop21", {"p": 2, "eps_prime": 0.01}), "parameters.eps_prime"),
            (ExperimentSpec("prop21", {"p": 1.5}), "parameters.p"),
            (ExperimentSpec("build_stages", {"N": 0}), "parameters.N"),
            (ExperimentSpec("ball", {"symmetric": "yes"}), "parameters.symmetric"),
            (ExperimentSpec("lemma24", {"A": {"model": {"dim": 1, "norm": "sup"}, "vertices": [{"coords": ["1"]}]}}), "parameters.B"),
        ],
    )
    def test_field_named(self, spec, field):
        """Test each bad spec names the offending field."""
        with pytest.raises(SpecError) as info:
            validate_parameters(spec)
        assert info.value.field == field

    def test_slices_and_count_conflict(self):
        """Test explicit slices cannot be combined with a random count."""
        slices = [{"functional": {"coeffs": ["1", "0", "0", "0"]}, "alpha": "1/2"}]
        with pytest.raises(SpecError) as info:
            validate_parameters(ExperimentSpec("prop21", {"p": 2, "slices": slices, "count": 3}))
        assert info.value.field == "parameters.count"

    def test_defaults_filled(self):
        """Test defaults appear decoded."""
        values = validate_parameters(ExperimentSpec("k0_open"))
        assert values["N"] == 3
        assert values["radius"] == Fraction(1, 4)
        assert values["functionals"] == []


class TestRunExperiment:
    """Test running experiments programmatically."""

    def test_prop21_default(self):
        """Test the default p = 1 run certifies 99/100."""
        report = run_experiment(ExperimentSpec("prop21", {"p": 1}))
        assert report.passed
        rows = csv_rows([encode_report(report)])
        assert rows == [
            ["prop21", "prop21_lower_bound", "", rows[0][3], "99/100", "0.99", "pass"],
        ]

    def test_prop21_exact_adds_certificate(self):
        """Test exact=true at p = 1 adds the exact-diameter certificate."""
        report = run_experiment(ExperimentSpec("prop21", {"p": 1, "exact": True}))
        assert [c.kind.value for c in report.certificates] == ["prop21_lower_bound", "prop21_exact_p1"]

    def test_seed_precedence(self):
        """Test the option seed beats the spec seed, which beats the default."""
        spec = ExperimentSpec("lemma24", {"count": 2}, seed=4)
        assert run_experiment(spec).spec.seed == 4
        assert run_experiment(spec, RunOptions(seed=9)).spec.seed == 9

    def test_same_seed_same_report(self):
        """Test a seeded random suite is reproducible."""
        spec = ExperimentSpec("l1sum_inclusion", {"count": 5}, seed=13)
        a = encode_report(run_experiment(spec))
        b = encode_report(run_experiment(spec))
        assert a == b
        assert "timing" not in a

    def test_timing_opt_in(self):
        """Test timing is recorded only when asked."""
        report = run_experiment(ExperimentSpec("build_stages", {"N": 2}), RunOptions(timing=True))
        assert "seconds" in encode_report(report)["timing"]

    def test_recheck_recorded(self):
        """Test --recheck results land in the report."""
        report = run_experiment(ExperimentSpec("k0_small_combo", {"N": 2}), RunOptions(recheck=True))
        assert report.passed
        assert [r["agrees"] for r in report.rechecks] == [True]

    def test_cap_sums_bounds_combinations(self):
        """Test the candidate-sum cap reaches the Minkowski sums behind an l1-sum transfer."""
        spec = ExperimentSpec(TRANSFER_SPEC["kind"], TRANSFER_SPEC["parameters"])
        assert run_experiment(spec).passed
        with pytest.raises(CapExceededError) as info:
            run_experiment(spec, RunOptions(cap_sums=1))
        assert info.value.cap_name == "cap_sums"

    def test_build_stages_artifact(self):
        """Test build_stages reports diam(K_N) = 1 and a hashed ledger."""
        report = run_experiment(ExperimentSpec("build_stages", {"N": 2}))
        assert report.value == 1
        assert len(report.artifacts["ledger"]["hash"]) == 64
        assert not report.certificates

    def test_exit_code_mapping(self):
        """Test errors map onto the documented exit codes."""
        assert exit_code_for_error(CapExceededError("cap_sums", "too many")) == EXIT_CAP_EXCEEDED
        assert exit_code_for_error(SearchFailure("none")) == EXIT_CERT_FAIL
        assert exit_code_for_error(TruncationTooSmallError("none")) == EXIT_CERT_FAIL
        assert exit_code_for_error(SpecError("kind", "bad")) == EXIT_SPEC_ERROR
        assert exit_code_for_error(StructuralError("bad")) == EXIT_SPEC_ERROR


class TestReport:
    """Test report rendering."""

    def test_empty_report_list(self, tmp_path):
        """Test emitting nothing is an error."""
        with pytest.raises(PreconditionError):
            emit_report([], "csv", tmp_path)

    def test_unknown_format(self, tmp_path):
        """Test unknown formats are refused."""
        report = encode_report(run_experiment(ExperimentSpec("build_stages", {"N": 2})))
        with pytest.raises(PreconditionError):
            emit_report([report], "xml", tmp_path)

    def test_artifact_row(self):
        """Test artifact-only experiments get one n/a row with the headline value."""
        report = encode_report(run_experiment(ExperimentSpec("build_stages", {"N": 2})))
        text = render_csv([report])
        header, row = text.strip().split("\n")
        assert header == "experiment,kind,N,parameters,bound,bound_approx,verdict"
        assert row == "build_stages,-,,{},1,1,n/a"


class TestCommandLine:
    """Test the argparse front end end to end."""

    def test_parse_assignment(self):
        """Test --set values parse as JSON with a string fallback."""
        assert _parse_assignment("N=3") == ("N", 3)
        assert _parse_assignment("eps=1/4") == ("eps", "1/4")
        assert _parse_assignment("exact=true") == ("exact", True)
        with pytest.raises(SpecError):
            _parse_assignment("N")

    def test_load_spec_kind_mismatch(self, tmp_path):
        """Test a spec file of another kind is refused by the subcommand."""
        path = tmp_path / "spec.json"
        path.write_text(json.dumps({"kind": "prop21", "parameters": {"p": 2}}))
        with pytest.raises(SpecError):
            load_spec("construct", path, [])
        spec = load_spec("verify-prop21", path, ["p=3"])
        assert spec.parameters == {"p": 3}

    def test_verify_prop21(self, tmp_path, capsys):
        """Test verify-prop21 writes both files and exits 0."""
        code = main(["verify-prop21", "--set", "p=1", "--out", str(tmp_path)])
        assert code == EXIT_PASS
        rows = read_csv(tmp_path / REPORT_CSV_NAME)
        assert rows[0]["bound"] == "99/100"
        assert rows[0]["verdict"] == "pass"
        data = json.loads((tmp_path / REPORT_JSON_NAME).read_text())
        assert data[0]["spec"]["kind"] == "prop21"
        assert "PASS" in capsys.readouterr().out

    def test_construct(self, tmp_path):
        """Test construct N=2 writes a ledger artifact."""
        assert main(["construct", "--set", "N=2", "--out", str(tmp_path), "--format", "json"]) == EXIT_PASS
        data = json.loads((tmp_path / REPORT_JSON_NAME).read_text())
        assert data[0]["value"] == "1"
        assert data[0]["artifacts"]["ledger"]["data"]["N"] == 2
        assert not (tmp_path / REPORT_CSV_NAME).exists()

    def test_deterministic_bytes(self, tmp_path):
        """Test two identical runs write identical files."""
        args = ["verify-lemma24", "--set", "count=3", "--seed", "21"]
        assert main(args + ["--out", str(tmp_path / "a")]) == EXIT_PASS
        assert main(args + ["--out", str(tmp_path / "b")]) == EXIT_PASS
        for name in (REPORT_JSON_NAME, REPORT_CSV_NAME):
            assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()

    def test_malformed_spec_exits_2(self, tmp_path, capsys):
        """Test invalid JSON and bad parameters exit with the spec-error code."""
        path = tmp_path / "spec.json"
        path.write_text("{not json")
        assert main(["verify-prop21", "--spec", str(path), "--out", str(tmp_path)]) == EXIT_SPEC_ERROR
        assert main(["verify-prop21", "--set", "p=0.5", "--out", str(tmp_path)]) == EXIT_SPEC_ERROR
        assert "Spec error at parameters.p" in capsys.readouterr().err

    def test_cap_exceeded_exits_3(self, tmp_path):
        """Test a vertex cap below the generator count exits 3."""
        assert main(["ball", "--set", "N=2", "--cap-vertices", "5", "--out", str(tmp_path)]) == EXIT_CAP_EXCEEDED

    def test_cap_sums_exits_3(self, tmp_path):
        """Test --cap-sums below the needed candidate sums exits 3."""
        path = tmp_path / "spec.json"
        path.write_text(json.dumps(TRANSFER_SPEC))
        args = ["verify-l1sum", "--spec", str(path), "--out", str(tmp_path)]
        assert main(args) == EXIT_PASS
        assert main(args + ["--cap-sums", "1"]) == EXIT_CAP_EXCEEDED

    def test_search_failure_exits_1(self, tmp_path):
        """Test an empty witness search exits with the certificate-failure code."""
        path = tmp_path / "spec.json"
        spec = {
            "kind": "thm_open",
            "parameters": {
                "N": 2,
                "functionals": [{"coeffs": ["1", "0"], "limit_coeff": "0"}],
                "center": {"coords": ["3", "0"], "limit": "0"},
                "radius": "1/4",
            },
        }
        path.write_text(json.dumps(spec))
        assert main(["verify-thm-open", "--spec", str(path), "--out", str(tmp_path)]) == EXIT_CERT_FAIL

    def test_report_aggregates(self, tmp_path):
        """Test report merges several report.json files into one CSV."""
        main(["construct", "--set", "N=2", "--out", str(tmp_path / "a")])
        main(["verify-prop21", "--set", "p=2", "--out", str(tmp_path / "b")])
        code = main(
            [
                "report",
                str(tmp_path / "a" / REPORT_JSON_NAME),
                str(tmp_path / "b" / REPORT_JSON_NAME),
                "--out",
                str(tmp_path / "all"),
            ]
        )
        assert code == EXIT_PASS
        rows = read_csv(tmp_path / "all" / REPORT_CSV_NAME)
        assert [r["experiment"] for r in rows] == ["build_stages", "prop21"]
        assert rows[1]["bound"] == "(99/100)^(1/2)"
