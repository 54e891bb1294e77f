"""
Tests for the command line entry point
"""

import io
import math

import pytest

from cli.cli_interface import EXIT_CHECK_FAILED, EXIT_CONFIG_ERROR, EXIT_OK, HyperHOMCLI
from main import DEFAULT_CONFIG, build_parser, collect_overrides, main
from utils.config import Config


def run_main(tmp_path, *args):
    out = tmp_path / "out"
    argv = ["--log-dir", str(tmp_path / "logs")] + list(args) + ["--output-dir", str(out)]
    return main(argv), out


class TestParser:

    def test_overrides_from_flags(self):
        args = build_parser().parse_args(
            ["scan-delay", "--seed", "3", "--counts", "--workers", "2", "--set", "source.v_pol=0.5"]
        )
        assert collect_overrides(args) == [
            ("source.v_pol", 0.5), ("seed", 3), ("counts", True), ("workers", 2),
        ]

    def test_subcommand_required(self):
        with pytest.raises(SystemExit):
            build_parser().parse_args([])

    def test_default_config_file(self):
        args = build_parser().parse_args(["scan-delay"])
        assert args.config == str(DEFAULT_CONFIG)
        assert DEFAULT_CONFIG.is_file()


class TestExitCodes:

    def test_success(self, tmp_path):
        code, out = run_main(tmp_path, "scan-plate")
        assert code == EXIT_OK
        assert sorted(p.name for p in out.iterdir()) == [
            "scan_plate.csv", "scan_plate_config.yaml", "scan_plate_summary.json",
        ]

    def test_failed_check(self, tmp_path):
        code, _ = run_main(
            tmp_path, "falsify", "--set", f"wiring.analyzers=[{math.pi / 4!r},{math.pi / 4!r}]",
            "--set", "scan.step=1.0e-05",
        )
        assert code == EXIT_CHECK_FAILED

    def test_bad_value(self, tmp_path):
        code, _ = run_main(tmp_path, "scan-delay", "--set", "source.v_pol=2")
        assert code == EXIT_CONFIG_ERROR

    def test_unknown_key(self, tmp_path):
        code, _ = run_main(tmp_path, "scan-delay", "--set", "source.bandwidth=1")
        assert code == EXIT_CONFIG_ERROR

    def test_missing_config_file(self, tmp_path):
        code = main(["--log-dir", str(tmp_path / "logs"), "--config", str(tmp_path / "nope.yaml"), "scan-delay"])
        assert code == EXIT_CONFIG_ERROR

    def test_counts_without_seed(self, tmp_path):
        code, _ = run_main(tmp_path, "scan-plate", "--counts")
        assert code == EXIT_CONFIG_ERROR

    def test_fully_blocked_scan_still_writes_results(self, tmp_path):
        code, out = run_main(
            tmp_path, "scan-delay", "--set", "elements=[{kind: blocker, modes: [a1, a2]}]",
            "--set", "scan.step=5.0e-05",
        )
        assert code == EXIT_OK
        rows = (out / "scan_delay.csv").read_text().splitlines()[1:]
        assert len(rows) == 7
        assert all(row.split(",")[1] == "0" for row in rows)

    def test_config_file(self, tmp_path):
        path = tmp_path / "run.yaml"
        path.write_text("state:\n  kind: momentum\nscan:\n  start: 0.0\n  stop: 2.0e-05\n  step: 1.0e-05\n")
        out = tmp_path / "out"
        code = main(["--log-dir", str(tmp_path / "logs"), "--config", str(path), "scan-delay", "--output-dir", str(out)])
        assert code == EXIT_OK
        assert len((out / "scan_delay.csv").read_text().splitlines()) == 4


def test_seeded_runs_are_reproducible(tmp_path):
    first, _ = run_main(tmp_path / "a", "scan-plate", "--seed", "42", "--counts")
    second, _ = run_main(tmp_path / "b", "scan-plate", "--seed", "42", "--counts")
    assert first == second == EXIT_OK
    a = (tmp_path / "a" / "out" / "scan_plate.csv").read_bytes()
    b = (tmp_path / "b" / "out" / "scan_plate.csv").read_bytes()
    assert a == b


def test_printed_summary(tmp_path):
    buffer = io.StringIO()
    cli = HyperHOMCLI(Config(), output_dir=str(tmp_path), out=buffer)
    assert cli.run("scan-plate") == EXIT_OK
    assert "fringe visibility 0.8200" in buffer.getvalue()


def test_unknown_command(tmp_path):
    assert HyperHOMCLI(Config(), output_dir=str(tmp_path)).run("scan-everything") == EXIT_CONFIG_ERROR
