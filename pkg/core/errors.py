"""
Exception hierarchy for HyperHOM
"""

from typing import Optional


class HyperHOMError(ValueError):
    """Base class for every error raised by the simulator"""


class InvalidParameterError(HyperHOMError):
    """A numeric parameter is outside its allowed range"""


class IncompatibleStateError(HyperHOMError):
    """Two states cannot be combined (e.g. different temporal widths)"""


class ZeroStateError(HyperHOMError):
    """The state has zero norm and cannot be normalized"""


class InvalidStageError(HyperHOMError):
    """A photon sits at the wrong side of the beamsplitter for the operation"""


class InvalidWiringError(HyperHOMError):
    """Spatial modes or detector sides are wired inconsistently"""


class ShapeError(HyperHOMError):
    """A curve does not have the shape an estimator needs"""


class ScanError(HyperHOMError):
    """A scan point failed; carries the offending scan value"""

    def __init__(self, message: str, x: Optional[float] = None):
        super().__init__(message)
        self.x = x


class ConfigError(HyperHOMError):
    """Invalid experiment configuration document"""


class ConfigSyntaxError(ConfigError):
    """Malformed YAML; `line` is 1-based when known"""

    def __init__(self, message: str, line: Optional[int] = None):
        super().__init__(f"line {line}: {message}" if line is not None else message)
        self.line = line


class ConfigValueError(ConfigError):
    """A key holds a value of the wrong type or out of range"""

    def __init__(self, key: str, message: str):
        super().__init__(f"{key}: {message}")
        self.key = key


class UnknownKeyError(ConfigError):
    """A key the schema does not define"""

    def __init__(self, key: str):
        super().__init__(f"unknown configuration key '{key}'")
        self.key = key
