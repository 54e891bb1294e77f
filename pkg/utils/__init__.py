"""
Initialization file for the utils package
"""

from .config import Config, ExperimentConfig, emit_config, load_config, parse_config
from .logger import setup_logging, RunAuditLogger

__all__ = [
    'Config',
    'ExperimentConfig',
    'emit_config',
    'load_config',
    'parse_config',
    'setup_logging',
    'RunAuditLogger',
]
