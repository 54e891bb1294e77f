"""
Configuration management for HyperHOM
Experiment documents are YAML; they are validated into frozen dataclasses
with every default filled in, so an emitted config is fully explicit.
"""

import copy
import math
import os
import logging
from dataclasses import asdict, dataclass, field, fields
from typing import Any, Dict, Iterable, Optional, Tuple

import numpy as np
import yaml

from core.errors import (
    ConfigError,
    ConfigSyntaxError,
    ConfigValueError,
    HyperHOMError,
    UnknownKeyError,
)
from core.optics.detection import DetectorWiring
from core.optics.elements import ElementKind, ElementOp, ModeSelector
from core.optics.fock import Pol, Spot
from core.optics.source import MEASURED_QUARTZ_LENGTH, SourceParams

logger = logging.getLogger(__name__)

OUTPUT_DIR_ENV = "HYPERHOM_OUTPUT_DIR"
DEFAULT_OUTPUT_DIR = os.path.join("data", "results")

EXPERIMENTS = (
    "scan_delay",
    "scan_mirror",
    "scan_plate",
    "scan_hyper",
    "falsify",
    "oracle_check",
    "pol_correlation",
)
STATE_KINDS = ("phi", "psi", "momentum", "hyper")

# state kinds each experiment accepts
ALLOWED_STATES: Dict[str, Tuple[str, ...]] = {
    "scan_delay": STATE_KINDS,
    "scan_mirror": ("phi", "psi", "hyper"),
    "scan_plate": ("momentum", "hyper"),
    "scan_hyper": ("hyper",),
    "falsify": ("momentum",),
    "oracle_check": STATE_KINDS,
    "pol_correlation": ("phi", "psi"),
}

STATE_DEFAULTS: Dict[str, Dict[str, Any]] = {
    "scan_delay": {"kind": "psi", "theta": 0.0},
    "scan_mirror": {"kind": "psi", "theta": 0.0},
    "scan_plate": {"kind": "momentum"},
    "scan_hyper": {"kind": "hyper"},
    "falsify": {"kind": "momentum"},
    "oracle_check": {"kind": "hyper"},
    "pol_correlation": {"kind": "phi", "theta": math.pi},
}

_DELAY_GRID = (-150e-6, 150e-6, 2e-6)
_PHASE_GRID = (0.0, 2.0 * math.pi, math.pi / 24.0)
SCAN_DEFAULTS: Dict[str, Tuple[float, float, float]] = {
    "scan_delay": _DELAY_GRID,
    "scan_mirror": (0.0, 140e-6, 2e-6),
    "scan_plate": _PHASE_GRID,
    "scan_hyper": _PHASE_GRID,
    "falsify": _DELAY_GRID,
    "oracle_check": (0.0, 0.0, 1.0),
    "pol_correlation": (0.0, math.pi, math.pi / 24.0),
}

ELEMENT_KEYS: Dict[str, Tuple[str, ...]] = {
    "waveplate": ("modes", "retardance", "axis"),
    "phase_shift": ("modes", "phi"),
    "delay": ("modes", "tau"),
    "blocker": ("modes",),
    "quartz": ("length",),
}

TOP_LEVEL_KEYS = (
    "experiment", "state", "source", "elements", "wiring", "scan",
    "thetas", "seed", "counts", "mean_pairs", "output", "workers", "n_random",
)


@dataclass(frozen=True)
class StateSpec:
    kind: str = "psi"
    theta: float = 0.0
    phi: float = 0.0
    paths: Tuple[str, str] = ("a1", "a2")
    cone: str = "H"


_SOURCE_DEFAULTS = SourceParams()


@dataclass(frozen=True)
class SourceSpec:
    """Source overrides; anything not given keeps the SourceParams default"""
    sigma_t: float = _SOURCE_DEFAULTS.sigma_t
    walkoff: float = _SOURCE_DEFAULTS.walkoff
    v_pol: float = _SOURCE_DEFAULTS.v_pol
    v_mom: float = _SOURCE_DEFAULTS.v_mom
    mirror_period: float = _SOURCE_DEFAULTS.mirror_period
    quartz_length: float = MEASURED_QUARTZ_LENGTH

    def to_params(self) -> SourceParams:
        return SourceParams(**asdict(self))


@dataclass(frozen=True)
class ElementSpec:
    kind: str
    modes: Tuple[str, ...] = ()
    retardance: float = 0.0
    axis: float = 0.0
    phi: float = 0.0
    tau: float = 0.0
    length: float = 0.0

    def to_op(self) -> ElementOp:
        return ElementOp(
            ElementKind(self.kind),
            ModeSelector(self.modes),
            retardance=self.retardance,
            axis=self.axis,
            phi=self.phi,
            tau=self.tau,
            length=self.length,
        )

    def to_dict(self) -> Dict[str, Any]:
        out: Dict[str, Any] = {"kind": self.kind}
        for key in ELEMENT_KEYS[self.kind]:
            value = getattr(self, key)
            out[key] = list(value) if key == "modes" else value
        return out


@dataclass(frozen=True)
class WiringSpec:
    side1: Tuple[str, ...] = ("a1", "b1")
    side2: Tuple[str, ...] = ("a2", "b2")
    analyzers: Optional[Tuple[float, float]] = None

    def to_wiring(self) -> DetectorWiring:
        return DetectorWiring(self.side1, self.side2, self.analyzers)


@dataclass(frozen=True)
class ScanSpec:
    start: float
    stop: float
    step: float

    def values(self) -> np.ndarray:
        """Inclusive grid start, start + step, ... up to stop"""
        n = int(math.floor((self.stop - self.start) / self.step + 1e-9)) + 1
        return self.start + self.step * np.arange(n, dtype=float)


@dataclass(frozen=True)
class ExperimentConfig:
    experiment: str
    state: StateSpec = field(default_factory=StateSpec)
    source: SourceSpec = field(default_factory=SourceSpec)
    elements: Tuple[ElementSpec, ...] = ()
    wiring: WiringSpec = field(default_factory=WiringSpec)
    scan: ScanSpec = field(default_factory=lambda: ScanSpec(*_DELAY_GRID))
    thetas: Tuple[float, ...] = (0.0, math.pi)
    seed: Optional[int] = None
    counts: bool = False
    mean_pairs: float = 1e4
    output: Optional[str] = None
    workers: int = 1
    n_random: int = 100

    def to_dict(self) -> Dict[str, Any]:
        return {
            "experiment": self.experiment,
            "state": {
                "kind": self.state.kind,
                "theta": self.state.theta,
                "phi": self.state.phi,
                "paths": list(self.state.paths),
                "cone": self.state.cone,
            },
            "source": asdict(self.source),
            "elements": [e.to_dict() for e in self.elements],
            "wiring": {
                "side1": list(self.wiring.side1),
                "side2": list(self.wiring.side2),
                "analyzers": list(self.wiring.analyzers) if self.wiring.analyzers is not None else None,
            },
            "scan": asdict(self.scan),
            "thetas": list(self.thetas),
            "seed": self.seed,
            "counts": self.counts,
            "mean_pairs": self.mean_pairs,
            "output": self.output,
            "workers": self.workers,
            "n_random": self.n_random,
        }


# ---------------------------------------------------------------- coercion

def _float(value: Any, key: str) -> float:
    if isinstance(value, bool):
        raise ConfigValueError(key, f"expected a number, got {value!r}")
    try:
        result = float(value)
    except (TypeError, ValueError):
        raise ConfigValueError(key, f"expected a number, got {value!r}") from None
    if not math.isfinite(result):
        raise ConfigValueError(key, f"must be finite, got {value!r}")
    return result


def _int(value: Any, key: str, minimum: Optional[int] = None) -> int:
    if isinstance(value, bool):
        raise ConfigValueError(key, f"expected an integer, got {value!r}")
    if isinstance(value, str):
        try:
            value = int(value)
        except ValueError:
            raise ConfigValueError(key, f"expected an integer, got {value!r}") from None
    if isinstance(value, float) and value.is_integer():
        value = int(value)
    if not isinstance(value, int):
        raise ConfigValueError(key, f"expected an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigValueError(key, f"must be at least {minimum}, got {value}")
    return value


def _bool(value: Any, key: str) -> bool:
    if not isinstance(value, bool):
        raise ConfigValueError(key, f"expected true or false, got {value!r}")
    return value


def _choice(value: Any, key: str, choices: Iterable[str]) -> str:
    choices = tuple(choices)
    if value not in choices:
        raise ConfigValueError(key, f"expected one of {', '.join(choices)}, got {value!r}")
    return value


def _tokens(value: Any, key: str) -> Tuple[str, ...]:
    if isinstance(value, str):
        value = [value]
    if not isinstance(value, (list, tuple)) or not all(isinstance(v, str) for v in value):
        raise ConfigValueError(key, f"expected a list of mode labels, got {value!r}")
    return tuple(value)


def _floats(value: Any, key: str) -> Tuple[float, ...]:
    if not isinstance(value, (list, tuple)):
        raise ConfigValueError(key, f"expected a list of numbers, got {value!r}")
    return tuple(_float(v, f"{key}.{i}") for i, v in enumerate(value))


def _mapping(value: Any, key: str, allowed: Iterable[str]) -> Dict[str, Any]:
    if value is None:
        return {}
    if not isinstance(value, dict):
        raise ConfigValueError(key, f"expected a mapping, got {type(value).__name__}")
    allowed = set(allowed)
    for name in value:
        if name not in allowed:
            raise UnknownKeyError(f"{key}.{name}" if key else str(name))
    return value


def _field_names(cls) -> Tuple[str, ...]:
    return tuple(f.name for f in fields(cls))


# ----------------------------------------------------------------- sections

def _parse_state(raw: Any, experiment: str) -> StateSpec:
    section = _mapping(raw, "state", _field_names(StateSpec))
    values: Dict[str, Any] = dict(STATE_DEFAULTS[experiment])
    for name in ("theta", "phi"):
        if name in section:
            values[name] = _float(section[name], f"state.{name}")
    if "kind" in section:
        values["kind"] = _choice(section["kind"], "state.kind", STATE_KINDS)
    allowed = ALLOWED_STATES[experiment]
    if values["kind"] not in allowed:
        raise ConfigValueError(
            "state.kind", f"{experiment} runs on {', '.join(allowed)} states, got {values['kind']!r}"
        )
    if "paths" in section:
        paths = _tokens(section["paths"], "state.paths")
        try:
            spots = [Spot.parse(p) for p in paths]
        except HyperHOMError as e:
            raise ConfigValueError("state.paths", str(e)) from None
        if len(spots) != 2 or spots[0].arm == spots[1].arm:
            raise ConfigValueError("state.paths", "expected one arm-1 and one arm-2 spatial mode")
        values["paths"] = paths
    if "cone" in section:
        values["cone"] = _choice(section["cone"], "state.cone", [p.name for p in Pol])
    return StateSpec(**values)


def _parse_source(raw: Any) -> SourceSpec:
    section = _mapping(raw, "source", _field_names(SourceSpec))
    spec = SourceSpec(**{k: _float(v, f"source.{k}") for k, v in section.items()})
    try:
        spec.to_params()
    except HyperHOMError as e:
        raise ConfigValueError("source", str(e)) from None
    return spec


def _parse_element(raw: Any, key: str) -> ElementSpec:
    if not isinstance(raw, dict) or "kind" not in raw:
        raise ConfigValueError(key, "each element needs a 'kind'")
    kind = _choice(raw["kind"], f"{key}.kind", ELEMENT_KEYS)
    section = _mapping(raw, key, ("kind",) + ELEMENT_KEYS[kind])
    values: Dict[str, Any] = {}
    for name, value in section.items():
        if name == "kind":
            continue
        if name == "modes":
            values[name] = _tokens(value, f"{key}.modes")
        else:
            values[name] = _float(value, f"{key}.{name}")
    spec = ElementSpec(kind, **values)
    try:
        selector = ModeSelector(spec.modes)
    except HyperHOMError as e:
        raise ConfigValueError(f"{key}.modes", str(e)) from None
    if selector.selects_output:
        raise ConfigValueError(f"{key}.modes", "elements act before the beamsplitter; primed output modes never match")
    if kind == "waveplate" and not selector.is_spatial:
        raise ConfigValueError(f"{key}.modes", "a waveplate acts on whole spatial modes")
    if kind == "quartz" and spec.length < 0.0:
        raise ConfigValueError(f"{key}.length", "must be non-negative")
    return spec


def _parse_elements(raw: Any) -> Tuple[ElementSpec, ...]:
    if raw is None:
        return ()
    if not isinstance(raw, list):
        raise ConfigValueError("elements", "expected a list of elements")
    return tuple(_parse_element(item, f"elements.{i}") for i, item in enumerate(raw))


def _parse_wiring(raw: Any, experiment: str) -> WiringSpec:
    section = _mapping(raw, "wiring", _field_names(WiringSpec))
    values: Dict[str, Any] = {}
    for side in ("side1", "side2"):
        if side in section:
            values[side] = _tokens(section[side], f"wiring.{side}")
    if section.get("analyzers") is not None:
        angles = _floats(section["analyzers"], "wiring.analyzers")
        if len(angles) != 2:
            raise ConfigValueError("wiring.analyzers", "expected two analyzer angles")
        values["analyzers"] = angles
    elif "analyzers" not in section and experiment == "pol_correlation":
        values["analyzers"] = (math.pi / 4.0, math.pi / 4.0)
    spec = WiringSpec(**values)
    try:
        spec.to_wiring()
    except HyperHOMError as e:
        raise ConfigValueError("wiring", str(e)) from None
    return spec


def _parse_scan(raw: Any, experiment: str) -> ScanSpec:
    section = _mapping(raw, "scan", _field_names(ScanSpec))
    start, stop, step = SCAN_DEFAULTS[experiment]
    spec = ScanSpec(
        _float(section.get("start", start), "scan.start"),
        _float(section.get("stop", stop), "scan.stop"),
        _float(section.get("step", step), "scan.step"),
    )
    if spec.step <= 0.0:
        raise ConfigValueError("scan.step", f"must be positive, got {spec.step}")
    if spec.stop < spec.start:
        raise ConfigValueError("scan.stop", "scan range is empty")
    return spec


def parse_document(doc: Any) -> ExperimentConfig:
    """Validate a loaded YAML document and fill in per-experiment defaults"""
    doc = _mapping(doc, "", TOP_LEVEL_KEYS)
    if "experiment" not in doc:
        raise ConfigValueError("experiment", "missing")
    experiment = _choice(doc["experiment"], "experiment", EXPERIMENTS)

    seed = None if doc.get("seed") is None else _int(doc["seed"], "seed", minimum=0)
    counts = _bool(doc.get("counts", False), "counts")
    if counts and seed is None:
        raise ConfigValueError("seed", "a seed is required when counts are requested")

    mean_pairs = _float(doc.get("mean_pairs", 1e4), "mean_pairs")
    if mean_pairs < 0.0:
        raise ConfigValueError("mean_pairs", "must be non-negative")

    thetas = _floats(doc.get("thetas", [0.0, math.pi]), "thetas")
    if not thetas:
        raise ConfigValueError("thetas", "at least one theta is required")

    output = doc.get("output")
    if output is not None and not isinstance(output, str):
        raise ConfigValueError("output", f"expected a path, got {output!r}")

    return ExperimentConfig(
        experiment=experiment,
        state=_parse_state(doc.get("state"), experiment),
        source=_parse_source(doc.get("source")),
        elements=_parse_elements(doc.get("elements")),
        wiring=_parse_wiring(doc.get("wiring"), experiment),
        scan=_parse_scan(doc.get("scan"), experiment),
        thetas=thetas,
        seed=seed,
        counts=counts,
        mean_pairs=mean_pairs,
        output=output,
        workers=_int(doc.get("workers", 1), "workers", minimum=1),
        n_random=_int(doc.get("n_random", 100), "n_random", minimum=0),
    )


# ------------------------------------------------------------------ text IO

def load_document(text: str) -> Any:
    try:
        return yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ConfigSyntaxError(str(getattr(e, "problem", None) or e), line) from None


def parse_config(text: str) -> ExperimentConfig:
    return parse_document(load_document(text))


def emit_config(config: ExperimentConfig) -> str:
    return yaml.safe_dump(config.to_dict(), sort_keys=False, default_flow_style=False)


def load_config(path: str) -> ExperimentConfig:
    return Config(path).to_experiment()


def apply_override(document: Dict[str, Any], key_path: str, value: Any):
    """Set a value in a raw document using dot notation; list items by index"""
    keys = key_path.split('.')
    if not all(keys):
        raise ConfigValueError(key_path, "malformed key path")
    node: Any = document
    for depth, key in enumerate(keys[:-1]):
        here = '.'.join(keys[:depth + 1])
        if isinstance(node, list):
            node = node[_list_index(node, key, here)]
            continue
        if not isinstance(node, dict):
            raise ConfigValueError(here, "is not a section")
        if node.get(key) is None:
            node[key] = {}
        node = node[key]
    if isinstance(node, list):
        node[_list_index(node, keys[-1], key_path)] = value
    elif isinstance(node, dict):
        node[keys[-1]] = value
    else:
        raise ConfigValueError(key_path, "parent is not a section")


def _list_index(items: list, key: str, key_path: str) -> int:
    try:
        index = int(key)
        items[index]
    except (ValueError, IndexError):
        raise ConfigValueError(key_path, f"no list item {key!r}") from None
    return index


def parse_override(assignment: str) -> Tuple[str, Any]:
    """Split a ``key.path=value`` flag; the value is read as YAML"""
    key, sep, raw = assignment.partition('=')
    if not sep or not key.strip():
        raise ConfigValueError(assignment, "expected KEY=VALUE")
    return key.strip(), load_document(raw)


def resolve_output_dir(config: ExperimentConfig, override: Optional[str] = None) -> str:
    return override or config.output or os.environ.get(OUTPUT_DIR_ENV) or DEFAULT_OUTPUT_DIR


class Config:
    """Raw experiment document with dot-notation access, validated on demand"""

    def __init__(self, config_path: Optional[str] = None):
        self.config_path = config_path
        self.config_data: Dict[str, Any] = {}
        self.logger = logging.getLogger(__name__)

        if config_path:
            self.load_config()

    def load_config(self):
        """Load configuration from YAML file"""
        try:
            with open(self.config_path, 'r') as f:
                text = f.read()
        except OSError as e:
            raise ConfigError(f"cannot read configuration {self.config_path}: {e}") from None
        data = load_document(text)
        if data is not None and not isinstance(data, dict):
            raise ConfigValueError("<root>", "expected a mapping at the top level")
        self.config_data = data or {}
        self.logger.info(f"Configuration loaded from {self.config_path}")

    def get(self, key_path: str, default: Any = None) -> Any:
        """Get configuration value using dot notation"""
        value: Any = self.config_data
        for key in key_path.split('.'):
            if isinstance(value, dict) and key in value:
                value = value[key]
            else:
                return default
        return value

    def set(self, key_path: str, value: Any):
        """Set configuration value using dot notation"""
        apply_override(self.config_data, key_path, value)
        self.logger.debug(f"Override {key_path} = {value!r}")

    def to_experiment(self) -> ExperimentConfig:
        return parse_document(copy.deepcopy(self.config_data))
