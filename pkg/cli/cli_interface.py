"""
Command Line Interface for HyperHOM
Maps subcommands to experiments, runs the engine and writes the artifacts
"""

import sys
import logging
from typing import Any, Callable, Dict, List, Optional, TextIO, Tuple

from core.engine import ExperimentEngine, ExperimentResult
from core.errors import ConfigError, HyperHOMError
from reports.report_generator import ReportGenerator
from utils.config import Config, resolve_output_dir
from utils.logger import RunAuditLogger

EXIT_OK = 0
EXIT_CHECK_FAILED = 1
EXIT_CONFIG_ERROR = 2
EXIT_RUNTIME_ERROR = 3

MICRONS = 1e6


def _fmt(value: Optional[float]) -> str:
    return "n/a" if value is None else f"{value:.4f}"


class HyperHOMCLI:
    """Command Line Interface for HyperHOM"""

    def __init__(self, config: Config, output_dir: Optional[str] = None,
                 audit: Optional[RunAuditLogger] = None, out: TextIO = sys.stdout):
        self.config = config
        self.output_dir = output_dir
        self.audit = audit
        self.out = out
        self.logger = logging.getLogger(__name__)

        self.commands: Dict[str, Callable[[ExperimentResult], None]] = {
            'scan-delay': self._cmd_scan_delay,
            'scan-mirror': self._cmd_fringe,
            'scan-plate': self._cmd_fringe,
            'scan-hyper': self._cmd_scan_hyper,
            'falsify': self._cmd_falsify,
            'oracle-check': self._cmd_oracle_check,
            'pol-correlation': self._cmd_fringe,
        }

    def run(self, command: str, overrides: List[Tuple[str, Any]] = ()) -> int:
        """Run one subcommand; returns the process exit status"""
        if command not in self.commands:
            self.logger.error(f"Unknown command: {command}")
            return EXIT_CONFIG_ERROR
        experiment = command.replace('-', '_')

        try:
            for key, value in overrides:
                self.config.set(key, value)
            self.config.set('experiment', experiment)
            experiment_config = self.config.to_experiment()
        except ConfigError as e:
            self.logger.error(f"Configuration error: {e}")
            return EXIT_CONFIG_ERROR

        if self.audit:
            self.audit.log_run_start(experiment, experiment_config.seed, self.config.config_path)

        output_dir = resolve_output_dir(experiment_config, self.output_dir)
        try:
            result = ExperimentEngine(experiment_config).run()
            paths = ReportGenerator(output_dir).generate(result, experiment_config)
        except HyperHOMError as e:
            self.logger.error(f"{experiment} failed: {e}")
            return self._finish(experiment, EXIT_RUNTIME_ERROR)
        except OSError as e:
            self.logger.error(f"Cannot write results to {output_dir}: {e}")
            return self._finish(experiment, EXIT_RUNTIME_ERROR)

        self.commands[command](result)
        for path in paths:
            print(f"  wrote {path}", file=self.out)
        if self.audit:
            for check in result.checks:
                self.audit.log_check(check.name, check.passed, check.metric)
            for path in paths:
                self.audit.log_artifact(path)

        return self._finish(experiment, EXIT_OK if result.passed else EXIT_CHECK_FAILED)

    def _finish(self, experiment: str, code: int) -> int:
        if self.audit:
            self.audit.log_run_end(experiment, code)
        return code

    def _cmd_scan_delay(self, result: ExperimentResult):
        s = result.summary
        print(f"HOM delay scan: dip visibility {_fmt(s['dip_visibility'])}", file=self.out)
        if s.get('fwhm') is not None:
            print(f"  FWHM {s['fwhm'] * MICRONS:.2f} um", file=self.out)

    def _cmd_fringe(self, result: ExperimentResult):
        print(f"{result.experiment}: fringe visibility {_fmt(result.summary['visibility'])}", file=self.out)

    def _cmd_scan_hyper(self, result: ExperimentResult):
        s = result.summary
        for label, vis in s['visibility'].items():
            print(f"  {label}: visibility {_fmt(vis)}", file=self.out)
        print(f"  model visibility {s['model_visibility']:.4f} "
              f"(observed {s['observed_visibility']:.2f})", file=self.out)

    def _cmd_falsify(self, result: ExperimentResult):
        for check in result.checks:
            status = "PASS" if check.passed else "FAIL"
            print(f"  [{status}] {check.name}: {check.detail}", file=self.out)
        control = result.summary['control']
        print(f"  control dip visibility {control['dip_visibility']:.4f} "
              f"(expected {control['expected']:.4f})", file=self.out)

    def _cmd_oracle_check(self, result: ExperimentResult):
        s = result.summary
        print(f"Oracle check over {s['n_random']} random states and the hyper grid: "
              f"max deviation {s['max_deviation']:.3g}", file=self.out)
        for check in result.checks:
            print(f"  [{'PASS' if check.passed else 'FAIL'}] {check.name}", file=self.out)
