"""
Tests for the command-line entry point.

Covers:
- exit-code contract (0 success, 1 hard verdict failure, 2 usage/config error)
- phase scans on single-point grids and the critical-curve series
- mean-field tables and their schemas
- chain runs: determinism, mandatory seed, embedded configuration
- verification reports and suite preconditions
- enumeration tables and zeros
"""
import json
from pathlib import Path

import pandas as pd
import pytest

from src.cli.config import SampleDocument, VerifyDocument, load_config_file, validate_document
from src.cli.main import (
    EXIT_OK,
    EXIT_USAGE,
    EXIT_VERIFICATION_FAILED,
    build_parser,
    cmd_verify,
    main,
)
from src.core.exceptions import ConfigurationError
from src.export.writers import read_csv, read_csv_metadata
from src.harness.verdicts import TheoremVerdict
from src.phase.solver import ALPHA_C, H_C

CONFIG_DIR = Path(__file__).resolve().parents[2] / "configs"


def _write_toml(path, text: str):
    path.write_text(text)
    return str(path)


CHAIN_TOML = """
n = 5
alpha = 1.0
h = 0.0
seed = 123
burn_in_sweeps = 10
sweeps = 200
thinning = 1
"""


@pytest.mark.unit
class TestParser:
    """Test argument parsing."""

    def test_subcommands(self):
        """Test every subcommand is registered."""
        parser = build_parser()
        for argv in (["phase"], ["meanfield"], ["sample", "x.toml"], ["verify"], ["enumerate"]):
            assert parser.parse_args(argv).command == argv[0]

    def test_unknown_subcommand_exits_2(self):
        """Test argparse usage errors exit with status 2."""
        with pytest.raises(SystemExit) as exc_info:
            main(["bogus"])
        assert exc_info.value.code == 2


@pytest.mark.unit
class TestPhase:
    """Test the phase subcommand."""

    def test_origin_row(self, tmp_path, fresh_settings):
        """Test a grid holding (0, 0) gives a uniqueness row with u* = 0.5."""
        out = tmp_path / "phase.csv"
        code = main(["phase", "--alpha-range", "0", "0", "--h-range", "0", "0", "--grid", "1", "1",
                     "--output", str(out)])
        assert code == EXIT_OK
        table = read_csv(out)
        assert table.loc[0, "regime"] == "uniqueness"
        assert table.loc[0, "u_low"] == pytest.approx(0.5)

    def test_critical_point_row(self, tmp_path, fresh_settings):
        """Test a grid holding (27/8, ln 2 - 3/2) reports the critical point."""
        out = tmp_path / "phase.csv"
        main(["phase", "--alpha-range", repr(ALPHA_C), repr(ALPHA_C), "--h-range", repr(H_C), repr(H_C),
              "--grid", "1", "1", "--output", str(out)])
        assert read_csv(out).loc[0, "regime"] == "critical_point"

    def test_curve_series_endpoint(self, tmp_path, fresh_settings):
        """Test the critical-curve series starts at (27/8, -0.806853)."""
        out = tmp_path / "phase.json"
        main(["phase", "--alpha-range", "4", "4", "--h-range", "-1", "-1", "--grid", "1", "1",
              "--curve-points", "2", "--format", "json", "--output", str(out)])
        records = json.loads(out.read_text())["records"]
        curve = [r for r in records if r["series"] == "critical_curve"]
        assert curve[0]["alpha"] == pytest.approx(3.375)
        assert curve[0]["h"] == pytest.approx(-0.806853, abs=1e-6)

    def test_missing_range_is_usage_error(self, tmp_path, fresh_settings):
        """Test a scan without ranges exits 2."""
        assert main(["phase", "--output", str(tmp_path / "p.csv")]) == EXIT_USAGE


@pytest.mark.unit
class TestMeanField:
    """Test the meanfield subcommand."""

    def test_distribution(self, tmp_path, fresh_settings):
        """Test n = 3 at (0, 0): four rows summing to one."""
        out = tmp_path / "dist.csv"
        assert main(["meanfield", "--n", "3", "--alpha", "0", "--h", "0", "--what", "distribution",
                     "--output", str(out)]) == EXIT_OK
        table = read_csv(out)
        assert len(table) == 4
        assert table["probability"].sum() == pytest.approx(1.0, abs=1e-12)

    def test_critical_mgf_symmetric(self, tmp_path, fresh_settings):
        """Test the critical MGF over a symmetric t grid is nearly even."""
        out = tmp_path / "mgf.csv"
        main(["meanfield", "--n", "500", "--alpha", repr(ALPHA_C), "--h", repr(H_C), "--what", "mgf",
              "--center", "maximizer", "--t-range", "-1", "1", "--t-steps", "5", "--output", str(out)])
        mgf = read_csv(out)["mgf"].to_numpy()
        assert mgf == pytest.approx(mgf[::-1], rel=0.1)

    def test_laplace_schema(self, tmp_path, fresh_settings):
        """Test the Laplace table carries a discrepancy column."""
        out = tmp_path / "laplace.csv"
        main(["meanfield", "--n", "500", "--alpha", "0", "--h", "0", "--what", "laplace", "--output", str(out)])
        assert "discrepancy" in read_csv(out).columns

    def test_resolved_lattice_in_metadata(self, tmp_path, fresh_settings):
        """Test the default lattice is written into the artifact."""
        out = tmp_path / "rate.csv"
        main(["meanfield", "--n", "20", "--alpha", "1", "--h", "0", "--what", "rate", "--output", str(out)])
        assert read_csv_metadata(out)["config"]["lattice"] == "edge"

    def test_rejects_alpha_below_floor(self, tmp_path, fresh_settings):
        """Test alpha <= -2 is refused before dispatch."""
        assert main(["meanfield", "--n", "10", "--alpha", "-2.5", "--h", "0",
                     "--output", str(tmp_path / "x.csv")]) == EXIT_USAGE

    def test_size_error_exit(self, tmp_path, fresh_settings):
        """Test a size error from the model exits 2."""
        assert main(["meanfield", "--n", "30000", "--alpha", "0", "--h", "0",
                     "--output", str(tmp_path / "x.csv")]) == EXIT_USAGE


@pytest.mark.unit
class TestSample:
    """Test the sample subcommand."""

    def test_byte_identical(self, tmp_path, fresh_settings):
        """Test the same config twice gives byte-identical traces."""
        config = _write_toml(tmp_path / "chain.toml", CHAIN_TOML)
        first, second = tmp_path / "a.csv", tmp_path / "b.csv"
        assert main(["sample", config, "--output", str(first)]) == EXIT_OK
        assert main(["sample", config, "--output", str(second)]) == EXIT_OK
        assert first.read_bytes() == second.read_bytes()

    def test_metadata(self, tmp_path, fresh_settings):
        """Test the artifact records seed, config hash, version and resolved lengths."""
        config = _write_toml(tmp_path / "chain.toml", CHAIN_TOML)
        out = tmp_path / "trace.csv"
        main(["sample", config, "--output", str(out)])
        metadata = read_csv_metadata(out)
        assert metadata["seed"] == 123
        assert metadata["config"]["config_hash"]
        assert metadata["config"]["init"] == {"kind": "empty", "value": None}
        assert metadata["version"]
        assert len(read_csv(out)) == 200

    def test_missing_seed_exit(self, tmp_path, fresh_settings):
        """Test a config without a seed exits 2."""
        config = _write_toml(tmp_path / "chain.toml", CHAIN_TOML.replace("seed = 123\n", ""))
        assert main(["sample", config, "--output", str(tmp_path / "t.csv")]) == EXIT_USAGE

    def test_missing_seed_names_field(self, tmp_path):
        """Test the validation error names the seed field."""
        data = load_config_file(_write_toml(tmp_path / "chain.toml", CHAIN_TOML.replace("seed = 123\n", "")))
        with pytest.raises(ConfigurationError) as exc_info:
            validate_document(SampleDocument, data)
        assert "seed" in exc_info.value.details["fields"]
        assert "seed" in str(exc_info.value)

    def test_missing_file_exit(self, tmp_path, fresh_settings):
        """Test a missing config file exits 2."""
        assert main(["sample", str(tmp_path / "absent.toml")]) == EXIT_USAGE

    def test_json_config(self, tmp_path, fresh_settings):
        """Test JSON run documents are accepted."""
        path = tmp_path / "chain.json"
        path.write_text(json.dumps({"n": 5, "alpha": 0.0, "h": 0.0, "seed": 1, "sweeps": 120}))
        out = tmp_path / "trace.json"
        assert main(["sample", str(path), "--output", str(out), "--format", "json"]) == EXIT_OK
        assert len(json.loads(out.read_text())["records"]) == 120

    def test_example_config_parses(self):
        """Test the shipped chain example validates."""
        document = validate_document(SampleDocument, load_config_file(CONFIG_DIR / "chain.toml"))
        assert document.chain_config().init.value == pytest.approx(0.5847)


@pytest.mark.unit
class TestVerify:
    """Test the verify subcommand."""

    def test_free_energy_pass(self, tmp_path, fresh_settings):
        """Test a passing exact suite exits 0 and writes JSON verdicts."""
        out = tmp_path / "verdicts.json"
        assert main(["verify", "--suite", "free_energy", "--format", "json", "--output", str(out)]) == EXIT_OK
        records = json.loads(out.read_text())["records"]
        assert records[0]["claim_id"] == "free-energy-limit"
        assert records[0]["theorem"] == "Thm9.2"
        assert records[0]["passed"] is True

    def test_mixture_off_curve(self, tmp_path, fresh_settings):
        """Test the mixture suite at a uniqueness point is a regime error with exit 2."""
        config = _write_toml(tmp_path / "v.toml", 'suite = "mixture"\nalpha = 1.0\nh = 0.0\n')
        assert main(["verify", "--config", config, "--output", str(tmp_path / "v.csv")]) == EXIT_USAGE

    @pytest.mark.parametrize("name", ["verify_clt", "verify_critical", "verify_mixture", "verify_oracle", "verify_slln"])
    def test_example_configs_parse(self, name):
        """Test the shipped verify examples validate."""
        document = validate_document(VerifyDocument, load_config_file(CONFIG_DIR / f"{name}.toml"))
        assert document.suite is not None

    def test_missing_suite(self, tmp_path, fresh_settings):
        """Test verify without a suite exits 2."""
        assert main(["verify", "--output", str(tmp_path / "v.csv")]) == EXIT_USAGE

    def test_hard_failure_exit(self, tmp_path, fresh_settings, monkeypatch):
        """Test a failed non-evidence verdict maps to exit 1; a failed evidence verdict does not."""
        import src.cli.main as cli

        def verdicts(evidence_only):
            return [TheoremVerdict(claim_id="c", theorem="Thm9.2", title="t", tolerance_policy="p", passed=False,
                                   evidence_only=evidence_only)]

        document = VerifyDocument(suite="free_energy", output=str(tmp_path / "v.csv"))
        monkeypatch.setattr(cli, "run_suite", lambda d: verdicts(False))
        assert cmd_verify(document) == EXIT_VERIFICATION_FAILED
        monkeypatch.setattr(cli, "run_suite", lambda d: verdicts(True))
        assert cmd_verify(document) == EXIT_OK

    def test_csv_report(self, tmp_path, fresh_settings):
        """Test the CSV report has one row per verdict with JSON value columns."""
        out = tmp_path / "verdicts.csv"
        config = _write_toml(tmp_path / "v.toml", 'suite = "oracle"\noracle_n = 4\n')
        assert main(["verify", "--config", config, "--output", str(out)]) == EXIT_OK
        table = read_csv(out)
        assert table.loc[0, "claim_id"] == "small-n-oracle"
        assert table.loc[0, "theorem"] == "Eq4.3"
        assert "polynomial_relative_error" in json.loads(table.loc[0, "estimated"])

    @pytest.mark.slow
    def test_critical_kurtosis(self, tmp_path, fresh_settings):
        """Test the exact critical suite reports kurtosis near 2.1884."""
        out = tmp_path / "critical.json"
        config = _write_toml(tmp_path / "v.toml", 'suite = "critical"\nn_list = [500, 1000, 2000]\n')
        assert main(["verify", "--config", config, "--format", "json", "--output", str(out)]) == EXIT_OK
        record = json.loads(out.read_text())["records"][0]
        assert record["estimated"]["kurtosis"] == pytest.approx(2.1884, abs=0.05)

    @pytest.mark.slow
    def test_clt_origin_pass(self, tmp_path, fresh_settings):
        """Test the CLT suite at (0, 0) passes on a moderate budget."""
        config = _write_toml(tmp_path / "v.toml", (
            'suite = "clt"\nalpha = 0.0\nh = 0.0\nn = 40\n\n'
            '[budget]\nseed = 3\nburn_in_sweeps = 200\nsweeps = 10000\n'
        ))
        assert main(["verify", "--config", config, "--output", str(tmp_path / "clt.csv")]) == EXIT_OK


@pytest.mark.unit
class TestEnumerate:
    """Test the enumerate subcommand."""

    def test_law_and_coefficients(self, tmp_path, fresh_settings):
        """Test the n = 3 table carries the law and log coefficients."""
        out = tmp_path / "enum.csv"
        assert main(["enumerate", "--n", "3", "--alpha", "3", "--h", "0", "--output", str(out)]) == EXIT_OK
        table = read_csv(out)
        assert list(table["log_coefficient"]) == pytest.approx([0.0, 1.0986123, 1.0986123, 1.0], abs=1e-6)
        assert table["probability"].sum() == pytest.approx(1.0)

    def test_zeros_sibling(self, tmp_path, fresh_settings):
        """Test --zeros writes a second table next to the first."""
        out = tmp_path / "enum.csv"
        main(["enumerate", "--n", "3", "--alpha", "0", "--h", "0", "--zeros", "--output", str(out)])
        zeros = pd.read_csv(tmp_path / "enum_zeros.csv", comment="#")
        assert len(zeros) == 3

    def test_size_limit_exit(self, tmp_path, fresh_settings):
        """Test n > 7 exits 2."""
        assert main(["enumerate", "--n", "8", "--alpha", "0", "--h", "0",
                     "--output", str(tmp_path / "e.csv")]) == EXIT_USAGE
