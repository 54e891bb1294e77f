"""
Optical elements acting on two-photon states
Waveplates, phase plates, delays, masks (blockers), the quartz walk-off
compensator and the 50/50 nonpolarizing beamsplitter.
"""

import cmath
import math
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import InvalidParameterError, InvalidStageError
from core.optics.fock import (
    ALL_SPOTS,
    Ensemble,
    Mode,
    PhotonOccupation,
    Pol,
    Spot,
    Stage,
    TwoPhotonState,
    TwoPhotonTerm,
)

logger = logging.getLogger(__name__)

# Quartz group-delay difference between V and H: 30 fs per mm of plate
QUARTZ_DELAY_PER_METER = 30e-15 / 1e-3

StateLike = Union[TwoPhotonState, Ensemble]
PhotonMap = Callable[[PhotonOccupation], Sequence[Tuple[PhotonOccupation, complex]]]


class ElementKind(str, Enum):
    WAVEPLATE = "waveplate"
    PHASE_SHIFT = "phase_shift"
    DELAY = "delay"
    BLOCKER = "blocker"
    QUARTZ = "quartz"
    BEAMSPLITTER = "beamsplitter"


Atom = Tuple[Optional[Spot], Optional[Pol], Optional[Stage]]


def _parse_atom(token: str) -> Atom:
    """(spot, pol, stage); None matches anything, a prime marks an output mode"""
    token = token.strip()
    if token == "*":
        return (None, None, None)
    if token in ("H", "V"):
        return (None, Pol[token], None)
    stage = Stage.OUTPUT if "'" in token else None
    bare = token.replace("'", "")
    if len(bare) == 3 and bare[2] in "HV":
        return (Spot.parse(bare[:2]), Pol[bare[2]], stage)
    return (Spot.parse(bare), None, stage)


@dataclass(frozen=True)
class ModeSelector:
    """
    Predicate over modes.

    Tokens: ``*`` (every mode), ``H``/``V`` (a polarization on every spot),
    ``a1`` (both polarizations of a spot) or ``a1H`` (one mode). A primed
    token (``a1'``, ``b2'V``) matches output modes only. An optional stage
    restricts every match to input or output modes.
    """
    tokens: Tuple[str, ...] = ("*",)
    stage: Optional[Stage] = None
    _atoms: FrozenSet[Atom] = field(
        default=frozenset(), init=False, repr=False, compare=False
    )

    def __post_init__(self):
        tokens = tuple(self.tokens)
        object.__setattr__(self, "tokens", tokens)
        object.__setattr__(self, "_atoms", frozenset(_parse_atom(t) for t in tokens))

    @classmethod
    def of_spots(cls, spots: Iterable[Union[Spot, str]], stage: Optional[Stage] = None) -> "ModeSelector":
        return cls(tuple(str(s) for s in spots), stage)

    @property
    def is_spatial(self) -> bool:
        """True when every atom selects whole spatial modes (both polarizations)"""
        return all(pol is None for _, pol, _ in self._atoms)

    @property
    def selects_output(self) -> bool:
        return any(stage is Stage.OUTPUT for _, _, stage in self._atoms)

    def __call__(self, mode: Mode) -> bool:
        if self.stage is not None and mode.stage is not self.stage:
            return False
        for spot, pol, stage in self._atoms:
            if stage is not None and mode.stage is not stage:
                continue
            if (spot is None or spot == mode.spot) and (pol is None or pol is mode.pol):
                return True
        return False


ARM2_INPUTS = ModeSelector(("a2", "b2"), Stage.INPUT)
V_MODES = ModeSelector(("V",))


@dataclass(frozen=True)
class ElementOp:
    """Declarative optical element: kind, the modes it touches, kind-specific parameters"""
    kind: ElementKind
    selector: ModeSelector = ModeSelector()
    retardance: float = 0.0
    axis: float = 0.0
    phi: float = 0.0
    tau: float = 0.0
    length: float = 0.0

    def __post_init__(self):
        object.__setattr__(self, "kind", ElementKind(self.kind))
        if self.kind is ElementKind.QUARTZ and self.length < 0.0:
            raise InvalidParameterError(f"quartz length must be non-negative, got {self.length}")


def _transform_photons(state: TwoPhotonState, photon_map: PhotonMap) -> TwoPhotonState:
    """Apply a single-photon linear map to both photons of every term"""
    def expand(term: TwoPhotonTerm) -> List[TwoPhotonTerm]:
        out = []
        for pa, ca in photon_map(term.photon_a):
            for pb, cb in photon_map(term.photon_b):
                out.append(TwoPhotonTerm(pa, pb, term.amplitude * ca * cb, term.branch))
        return out
    return state.map_terms(expand)


def jones_matrix(retardance: float, axis: float) -> np.ndarray:
    """Waveplate with fast axis at `axis`: R(axis) diag(1, e^{i retardance}) R(-axis)"""
    c, s = math.cos(axis), math.sin(axis)
    e = cmath.exp(1j * retardance)
    off = c * s * (1.0 - e)
    return np.array([[c * c + e * s * s, off],
                     [off, s * s + e * c * c]], dtype=complex)


def apply_waveplate(state: TwoPhotonState, selector: ModeSelector,
                    retardance: float, axis: float) -> TwoPhotonState:
    if not selector.is_spatial:
        raise InvalidParameterError("a waveplate acts on whole spatial modes, not single polarizations")
    jones = jones_matrix(retardance, axis)

    def rotate(p: PhotonOccupation):
        if not selector(p.mode):
            return [(p, 1.0)]
        col = int(p.mode.pol)
        return [
            (PhotonOccupation(p.mode.with_pol(out), p.delay), complex(jones[int(out), col]))
            for out in Pol
        ]
    return _transform_photons(state, rotate)


def apply_phase(state: TwoPhotonState, selector: ModeSelector, phi: float) -> TwoPhotonState:
    """Every photon in a selected mode contributes a factor e^{i phi}"""
    factor = cmath.exp(1j * phi)

    def phase(term: TwoPhotonTerm):
        n = sum(1 for p in term.photons if selector(p.mode))
        return [term.with_amplitude(term.amplitude * factor ** n)]
    return state.map_terms(phase)


def apply_delay(state: TwoPhotonState, selector: ModeSelector, tau: float) -> TwoPhotonState:
    def delay(p: PhotonOccupation):
        return [(p.shifted(tau) if selector(p.mode) else p, 1.0)]
    return _transform_photons(state, delay)


def quartz_compensator(state: TwoPhotonState, length: float) -> TwoPhotonState:
    """Birefringent plate: V photons delayed relative to H by length * 30 fs/mm"""
    if length < 0.0:
        raise InvalidParameterError(f"quartz length must be non-negative, got {length}")
    if length == 0.0:
        return state
    return apply_delay(state, V_MODES, length * QUARTZ_DELAY_PER_METER)


def apply_blocker(state: TwoPhotonState, selector: ModeSelector) -> TwoPhotonState:
    """Drop every term with a photon in a selected mode; no renormalization"""
    return state.map_terms(
        lambda term: [] if any(selector(p.mode) for p in term.photons) else [term]
    )


# Spot order of the one-photon beamsplitter matrix: a1, a2, b1, b2
BS_SPOTS: Tuple[Spot, ...] = ALL_SPOTS


def beamsplitter_matrix() -> np.ndarray:
    """
    One-photon matrix over (a1, a2, b1, b2), column = input, row = output.

    Symmetric convention: transmission 1/sqrt(2), reflection i/sqrt(2);
    a-modes and b-modes never mix.
    """
    block = np.array([[1.0, 1j], [1j, 1.0]], dtype=complex) / math.sqrt(2.0)
    u = np.zeros((4, 4), dtype=complex)
    u[:2, :2] = block
    u[2:, 2:] = block
    return u


_BS_U = beamsplitter_matrix()


def apply_beamsplitter(state: TwoPhotonState) -> TwoPhotonState:
    def split(p: PhotonOccupation):
        if p.mode.stage is not Stage.INPUT:
            raise InvalidStageError(f"photon in {p.mode} has already passed the beamsplitter")
        col = BS_SPOTS.index(p.mode.spot)
        out = []
        for row, spot in enumerate(BS_SPOTS):
            coef = _BS_U[row, col]
            if coef != 0:
                mode = Mode(spot.path, spot.arm, p.mode.pol, Stage.OUTPUT)
                out.append((PhotonOccupation(mode, p.delay), complex(coef)))
        return out
    return _transform_photons(state, split)


def apply_element(op: ElementOp, state: StateLike) -> StateLike:
    """Dispatch a declarative element; ensembles are transformed component-wise"""
    if isinstance(state, Ensemble):
        return state.map(lambda s: apply_element(op, s))
    if op.kind is ElementKind.WAVEPLATE:
        return apply_waveplate(state, op.selector, op.retardance, op.axis)
    if op.kind is ElementKind.PHASE_SHIFT:
        return apply_phase(state, op.selector, op.phi)
    if op.kind is ElementKind.DELAY:
        return apply_delay(state, op.selector, op.tau)
    if op.kind is ElementKind.BLOCKER:
        return apply_blocker(state, op.selector)
    if op.kind is ElementKind.QUARTZ:
        return quartz_compensator(state, op.length)
    return apply_beamsplitter(state)


def apply_chain(ops: Iterable[ElementOp], state: StateLike) -> StateLike:
    for op in ops:
        state = apply_element(op, state)
    return state
