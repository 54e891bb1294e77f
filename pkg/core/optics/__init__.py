"""
Initialization file for the optics package
Two-photon states, optical elements, the photon-pair source and detection
"""

from .fock import Mode, Path, Pol, Spot, Stage, TwoPhotonState, TwoPhotonTerm, inner_product, normalize
from .elements import ElementKind, ElementOp, ModeSelector, apply_beamsplitter, apply_element
from .source import BellState, SourceParams, make_bell_pol, make_hyper, make_momentum, make_polarization
from .detection import Curve, DetectorWiring, coincidence_probability, visibility

__all__ = [
    'Mode',
    'Path',
    'Pol',
    'Spot',
    'Stage',
    'TwoPhotonState',
    'TwoPhotonTerm',
    'inner_product',
    'normalize',
    'ElementKind',
    'ElementOp',
    'ModeSelector',
    'apply_beamsplitter',
    'apply_element',
    'BellState',
    'SourceParams',
    'make_bell_pol',
    'make_hyper',
    'make_momentum',
    'make_polarization',
    'Curve',
    'DetectorWiring',
    'coincidence_probability',
    'visibility',
]
