"""
Report generation module for HyperHOM
Writes one CSV per curve, a JSON summary and the resolved configuration
"""

import os
import csv
import logging
import re
from typing import Dict, List, Optional

from core.engine import ExperimentResult
from core.optics.detection import Curve
from utils.config import ExperimentConfig, emit_config
from utils.json_utils import safe_json_dumps

CSV_HEADER = ['x', 'probability', 'counts']
# 17 significant digits round-trip every double
FLOAT_FORMAT = '.17g'


def curve_filename(experiment: str, label: str = "") -> str:
    if not label:
        return f"{experiment}.csv"
    slug = re.sub(r'[^A-Za-z0-9_.+-]+', '_', label)
    return f"{experiment}_{slug}.csv"


class ReportGenerator:
    """Write experiment artifacts into one output directory"""

    def __init__(self, output_dir: str):
        self.output_dir = output_dir
        self.logger = logging.getLogger(__name__)

    def _ensure_dir(self):
        try:
            os.makedirs(self.output_dir, exist_ok=True)
        except OSError as e:
            self.logger.error(f"Cannot create output directory {self.output_dir}: {e}")
            raise

    def write_curve(self, curve: Curve, experiment: str) -> str:
        """CSV with header x,probability,counts; counts empty when not sampled"""
        self._ensure_dir()
        filepath = os.path.join(self.output_dir, curve_filename(experiment, curve.label))
        try:
            with open(filepath, 'w', newline='', encoding='utf-8') as csvfile:
                writer = csv.writer(csvfile, lineterminator='\n')
                writer.writerow(CSV_HEADER)
                for pt in curve.points:
                    writer.writerow([
                        format(pt.x, FLOAT_FORMAT),
                        format(pt.p, FLOAT_FORMAT),
                        '' if pt.counts is None else str(pt.counts),
                    ])
        except OSError as e:
            self.logger.error(f"Error writing CSV report {filepath}: {e}")
            raise
        self.logger.info(f"CSV report generated: {filepath}")
        return filepath

    def write_summary(self, result: ExperimentResult, extra: Optional[Dict] = None) -> str:
        self._ensure_dir()
        filepath = os.path.join(self.output_dir, f"{result.experiment}_summary.json")
        summary = {
            'experiment': result.experiment,
            'summary': result.summary,
            'checks': [
                {'name': c.name, 'passed': c.passed, 'metric': c.metric, 'detail': c.detail}
                for c in result.checks
            ],
            'passed': result.passed,
        }
        if extra:
            summary.update(extra)
        try:
            with open(filepath, 'w', encoding='utf-8') as f:
                f.write(safe_json_dumps(summary, indent=2, sort_keys=True))
                f.write('\n')
        except OSError as e:
            self.logger.error(f"Error writing summary {filepath}: {e}")
            raise
        self.logger.info(f"Summary written: {filepath}")
        return filepath

    def write_config(self, config: ExperimentConfig) -> str:
        """Resolved configuration, re-runnable with --config"""
        self._ensure_dir()
        filepath = os.path.join(self.output_dir, f"{config.experiment}_config.yaml")
        try:
            with open(filepath, 'w', encoding='utf-8') as f:
                f.write(emit_config(config))
        except OSError as e:
            self.logger.error(f"Error writing configuration {filepath}: {e}")
            raise
        return filepath

    def generate(self, result: ExperimentResult, config: ExperimentConfig) -> List[str]:
        """Write every artifact of a run; returns the paths in write order"""
        paths = [self.write_curve(curve, result.experiment) for curve in result.curves]
        paths.append(self.write_summary(result))
        paths.append(self.write_config(config))
        return paths
