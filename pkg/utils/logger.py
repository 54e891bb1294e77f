"""
Logging configuration and utilities for HyperHOM
"""

import os
import logging
import logging.handlers
from datetime import datetime
from pathlib import Path
from typing import Any, Dict


def setup_logging(log_level: str = "INFO", log_dir: str = "data/logs"):
    """Setup logging configuration for HyperHOM"""

    Path(log_dir).mkdir(parents=True, exist_ok=True)

    level = getattr(logging, log_level.upper(), logging.INFO)

    detailed_formatter = logging.Formatter(
        '%(asctime)s - %(name)s - %(levelname)s - %(message)s'
    )
    simple_formatter = logging.Formatter(
        '%(levelname)s: %(message)s'
    )

    root_logger = logging.getLogger()
    root_logger.setLevel(level)
    root_logger.handlers.clear()

    console_handler = logging.StreamHandler()
    console_handler.setLevel(level)
    console_handler.setFormatter(simple_formatter)
    root_logger.addHandler(console_handler)

    file_handler = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, "hyperhom.log"),
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=5
    )
    file_handler.setLevel(level)
    file_handler.setFormatter(detailed_formatter)
    root_logger.addHandler(file_handler)

    error_handler = logging.handlers.RotatingFileHandler(
        os.path.join(log_dir, "hyperhom_errors.log"),
        maxBytes=10 * 1024 * 1024,  # 10MB
        backupCount=3
    )
    error_handler.setLevel(logging.ERROR)
    error_handler.setFormatter(detailed_formatter)
    root_logger.addHandler(error_handler)

    logging.info("Logging system initialized")


class RunAuditLogger:
    """Append-only record of runs, check outcomes and written artifacts"""

    def __init__(self, log_dir: str = "data/logs"):
        self.logger = logging.getLogger('run_audit')
        self.log_dir = log_dir

        if not self.logger.handlers:
            self._setup_audit_logger()

    def _setup_audit_logger(self):
        Path(self.log_dir).mkdir(parents=True, exist_ok=True)
        audit_handler = logging.handlers.RotatingFileHandler(
            os.path.join(self.log_dir, "audit.log"),
            maxBytes=10 * 1024 * 1024,
            backupCount=5
        )
        audit_handler.setFormatter(logging.Formatter(
            '%(asctime)s - AUDIT - %(levelname)s - %(message)s'
        ))
        self.logger.addHandler(audit_handler)
        self.logger.setLevel(logging.INFO)
        self.logger.propagate = False

    def log_event(self, event_type: str, details: Dict[str, Any]):
        try:
            self.logger.info(f"{event_type}: {details}")
        except Exception as e:
            logging.error(f"Failed to log audit event: {e}")

    def log_run_start(self, experiment: str, seed, config_path):
        self.log_event("RUN_START", {
            'experiment': experiment,
            'seed': seed,
            'config': config_path,
            'timestamp': datetime.now().isoformat()
        })

    def log_check(self, name: str, passed: bool, metric: float):
        self.log_event("CHECK", {'name': name, 'passed': passed, 'metric': metric})

    def log_artifact(self, path: str):
        self.log_event("ARTIFACT", {'path': path})

    def log_run_end(self, experiment: str, exit_code: int):
        self.log_event("RUN_END", {
            'experiment': experiment,
            'exit_code': exit_code,
            'timestamp': datetime.now().isoformat()
        })
