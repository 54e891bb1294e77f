"""
Tests for report generation
"""

import json

import pytest

from core.engine import CheckResult, ExperimentEngine, ExperimentResult
from core.optics.detection import Curve
from reports.report_generator import ReportGenerator, curve_filename
from utils.config import load_config, parse_document


def test_curve_csv_text(tmp_path):
    path = ReportGenerator(str(tmp_path)).write_curve(Curve.from_arrays([0.0], [0.5]), "scan_delay")
    with open(path, 'rb') as f:
        assert f.read() == b"x,probability,counts\n0,0.5,\n"


def test_counts_column(tmp_path):
    curve = Curve.from_arrays([0.5, 1.0], [0.25, 0.125], counts=[2500, 1250])
    path = ReportGenerator(str(tmp_path)).write_curve(curve, "scan_delay")
    with open(path) as f:
        assert f.read().splitlines()[1:] == ["0.5,0.25,2500", "1,0.125,1250"]


@pytest.mark.parametrize("label, name", [
    ("", "scan_plate.csv"),
    ("theta_3.14159", "scan_plate_theta_3.14159.csv"),
    ("block a1/b2", "scan_plate_block_a1_b2.csv"),
])
def test_curve_filename(label, name):
    assert curve_filename("scan_plate", label) == name


def test_summary_json(tmp_path):
    result = ExperimentResult(
        "falsify",
        summary={'control': {'dip_visibility': 0.82}, 'ratio': float('nan')},
        checks=[CheckResult("block_a1_a2", True, 0.0, "dark")],
    )
    path = ReportGenerator(str(tmp_path)).write_summary(result)
    with open(path) as f:
        data = json.load(f)
    assert data['passed'] is True
    assert data['summary']['ratio'] is None
    assert data['checks'][0]['name'] == "block_a1_a2"


def test_generate_writes_every_artifact(tmp_path):
    config = parse_document({"experiment": "scan_hyper", "scan": {"start": 0.0, "stop": 3.2, "step": 0.8}})
    result = ExperimentEngine(config).run()
    paths = ReportGenerator(str(tmp_path / "out")).generate(result, config)
    names = [p.split("/")[-1] for p in paths]
    assert names == [
        "scan_hyper_theta_0.csv",
        "scan_hyper_theta_3.14159.csv",
        "scan_hyper_summary.json",
        "scan_hyper_config.yaml",
    ]
    assert load_config(paths[-1]) == config


def test_unwritable_directory(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    with pytest.raises(OSError):
        ReportGenerator(str(blocker / "sub")).write_curve(Curve.from_arrays([0.0], [0.5]), "scan_delay")
