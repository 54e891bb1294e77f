"""
Entangled photon-pair source
Polarization Bell states, momentum Bell states and their hyper-entangled
product, built the way the double-pass source emits them: a phi-type
polarization pair (the V,V branch advanced by the birefringent walk-off),
an optional quartz compensator, then a local half-wave plate on arm 2 for
psi-type states.
"""

import cmath
import math
import logging
from dataclasses import dataclass, replace
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from core.errors import InvalidParameterError, InvalidWiringError
from core.optics.elements import ModeSelector, apply_waveplate, quartz_compensator
from core.optics.fock import (
    Coherence,
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

SPEED_OF_LIGHT = 299_792_458.0

# Measured source characterization
MEASURED_DIP_FWHM = 60e-6
MEASURED_WALKOFF = 540e-15
MEASURED_QUARTZ_LENGTH = 18e-3
MEASURED_MIRROR_PERIOD = 70e-6
MEASURED_V_POL = 0.87
MEASURED_V_MOM = 0.82
MEASURED_V_HYPER_OBSERVED = 0.60
MEASURED_POL_CORRELATION_VISIBILITY = 0.90

INV_SQRT2 = 1.0 / math.sqrt(2.0)


def calibrated_sigma_t(fwhm_dx: float = MEASURED_DIP_FWHM) -> float:
    """
    Single-photon RMS width giving a HOM envelope exp(-dt^2 / (4 sigma^2))
    whose FWHM, expressed as path difference, equals `fwhm_dx`.
    """
    return fwhm_dx / SPEED_OF_LIGHT / (4.0 * math.sqrt(math.log(2.0)))


CALIBRATED_SIGMA_T = calibrated_sigma_t()


@dataclass(frozen=True)
class SourceParams:
    """Source settings; defaults are the measured values of the double-pass source"""
    wavelength: float = 795e-9
    pump_wavelength: float = 397.5e-9
    sigma_t: float = CALIBRATED_SIGMA_T
    walkoff: float = MEASURED_WALKOFF
    mirror_period: float = MEASURED_MIRROR_PERIOD
    v_pol: float = MEASURED_V_POL
    v_mom: float = MEASURED_V_MOM
    quartz_length: float = 0.0

    def __post_init__(self):
        # degenerate down-conversion: 1/lambda + 1/lambda = 1/lambda_p
        if abs(self.wavelength - 2.0 * self.pump_wavelength) > 1e-12 * self.wavelength:
            raise InvalidParameterError(
                f"wavelength {self.wavelength} is not twice the pump wavelength {self.pump_wavelength}"
            )
        if not self.sigma_t > 0.0:
            raise InvalidParameterError(f"sigma_t must be positive, got {self.sigma_t}")
        if not self.mirror_period > 0.0:
            raise InvalidParameterError(f"mirror_period must be positive, got {self.mirror_period}")
        if self.quartz_length < 0.0:
            raise InvalidParameterError(f"quartz_length must be non-negative, got {self.quartz_length}")
        for name in ("v_pol", "v_mom"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")

    @classmethod
    def ideal(cls, **overrides) -> "SourceParams":
        """Unit visibilities and no walk-off"""
        values = dict(v_pol=1.0, v_mom=1.0, walkoff=0.0)
        values.update(overrides)
        return cls(**values)

    @property
    def coherence(self) -> Coherence:
        return Coherence(self.v_pol, self.v_mom)


@dataclass(frozen=True)
class SourceGeometry:
    """Set-up geometry and operating point. Recorded only; no state depends on it."""
    mirror_radius: float = 0.15
    ring_diameter: float = 0.016
    hole_diameter: float = 1.5e-3
    alpha: float = math.radians(25.0)
    alpha_range: Tuple[float, float] = (math.radians(10.0), math.radians(40.0))
    crystal_thickness: float = 0.5e-3
    pump_power: float = 0.4
    repetition_rate: float = 76e6
    filter_bandwidth: float = 3e-9
    coherence_time: float = 400e-15


class BellState(str, Enum):
    PHI_PLUS = "Phi+"
    PHI_MINUS = "Phi-"
    PSI_PLUS = "Psi+"
    PSI_MINUS = "Psi-"

    @property
    def family(self) -> str:
        return "phi" if self.name.startswith("PHI") else "psi"

    @property
    def theta(self) -> float:
        return 0.0 if self.value.endswith("+") else math.pi


SpotPair = Tuple[Spot, Spot]
PAIR_A1_B2: SpotPair = (Spot.parse("a1"), Spot.parse("b2"))
PAIR_B1_A2: SpotPair = (Spot.parse("b1"), Spot.parse("a2"))
# the rotated mask puts the correlated pair on BS-coupled holes
PAIR_A1_A2: SpotPair = (Spot.parse("a1"), Spot.parse("a2"))


def theta_from_mirror(delta_d: float, params: SourceParams) -> float:
    """Phase between the two emission cones for a mirror displacement delta_d"""
    return 2.0 * math.pi * delta_d / params.mirror_period


def _check_pair(on_paths: Sequence[Union[Spot, str]]) -> SpotPair:
    if len(on_paths) != 2:
        raise InvalidWiringError(f"a photon pair needs two spatial modes, got {len(on_paths)}")
    first, second = (p if isinstance(p, Spot) else Spot.parse(p) for p in on_paths)
    if first.arm == second.arm:
        raise InvalidWiringError(f"{first} and {second} lie in the same arm")
    return (first, second) if first.arm == 1 else (second, first)


def _emit(pol_branches: Iterable[Tuple[int, Pol, complex]],
          mom_branches: Iterable[Tuple[int, SpotPair, complex]],
          psi_family: bool, params: SourceParams, coherence: Coherence) -> TwoPhotonState:
    """
    Product of a phi-frame polarization factor (both photons share `Pol`)
    and a momentum factor, with walk-off, compensator and half-wave plate.
    """
    mom_branches = list(mom_branches)
    terms: List[TwoPhotonTerm] = []
    for p_branch, pol, p_amp in pol_branches:
        # the V,V cone leaves the crystal ahead of the H,H cone
        delay = -params.walkoff if pol is Pol.V else 0.0
        for m_branch, (spot1, spot2), m_amp in mom_branches:
            terms.append(TwoPhotonTerm(
                PhotonOccupation(Mode(spot1.path, spot1.arm, pol, Stage.INPUT), delay),
                PhotonOccupation(Mode(spot2.path, spot2.arm, pol, Stage.INPUT), delay),
                p_amp * m_amp,
                (p_branch, m_branch),
            ))
    state = TwoPhotonState.from_terms(terms, params.sigma_t, coherence)
    state = quartz_compensator(state, params.quartz_length)
    if psi_family:
        arm2 = ModeSelector.of_spots(sorted({pair[1] for _, pair, _ in mom_branches}))
        state = apply_waveplate(state, arm2, math.pi, math.pi / 4.0)
    return state


def polarization_factor(theta: float) -> List[Tuple[int, Pol, complex]]:
    """(|H,H> + e^{i theta}|V,V>)/sqrt(2) as (branch, pol, amplitude)"""
    return [(0, Pol.H, INV_SQRT2), (1, Pol.V, INV_SQRT2 * cmath.exp(1j * theta))]


def momentum_factor(phi: float) -> List[Tuple[int, SpotPair, complex]]:
    """(|a1,b2> + e^{i phi}|b1,a2>)/sqrt(2) as (branch, spot pair, amplitude)"""
    return [(0, PAIR_A1_B2, INV_SQRT2), (1, PAIR_B1_A2, INV_SQRT2 * cmath.exp(1j * phi))]


def make_polarization(family: str, theta: float, params: SourceParams,
                      on_paths: Sequence[Union[Spot, str]] = PAIR_A1_A2) -> TwoPhotonState:
    """
    Phase-controlled polarization state on one spatial pair:
    phi family (|H1,H2> + e^{i theta}|V1,V2>)/sqrt(2),
    psi family (|H1,V2> + e^{i theta}|V1,H2>)/sqrt(2).
    """
    if family not in ("phi", "psi"):
        raise InvalidParameterError(f"unknown polarization family {family!r}")
    pair = _check_pair(on_paths)
    return _emit(
        polarization_factor(theta),
        [(0, pair, 1.0)],
        family == "psi",
        params,
        Coherence(params.v_pol, 1.0),
    )


def make_bell_pol(which: Union[BellState, str], params: SourceParams,
                  on_paths: Sequence[Union[Spot, str]] = PAIR_A1_A2) -> TwoPhotonState:
    which = BellState(which)
    return make_polarization(which.family, which.theta, params, on_paths)


def make_momentum(phi: float, params: SourceParams, cone: Pol = Pol.H) -> TwoPhotonState:
    """(|a1,b2> + e^{i phi}|b1,a2>)/sqrt(2) on one emission cone"""
    return _emit(
        [(0, Pol(cone), 1.0)],
        momentum_factor(phi),
        False,
        params,
        Coherence(1.0, params.v_mom),
    )


def make_hyper(theta: float, phi: float, params: SourceParams) -> TwoPhotonState:
    """
    Polarization-momentum product state:
    1/2 {a1H b2V + e^{i theta} a1V b2H + e^{i phi} b1H a2V + e^{i(theta+phi)} b1V a2H}|0>
    """
    return _emit(
        polarization_factor(theta),
        momentum_factor(phi),
        True,
        params,
        params.coherence,
    )


def dephase(state: TwoPhotonState, v_pol: Optional[float] = None,
            v_mom: Optional[float] = None) -> TwoPhotonState:
    """Same amplitudes, reduced residual coherence between source branches"""
    coherence = replace(
        state.coherence,
        **{k: v for k, v in (("v_pol", v_pol), ("v_mom", v_mom)) if v is not None},
    )
    return TwoPhotonState(state.terms, state.sigma_t, coherence)


def mixture(components: Iterable[Tuple[float, TwoPhotonState]]) -> Ensemble:
    components = tuple((float(w), s) for w, s in components)
    if not components:
        raise InvalidParameterError("a mixture needs at least one component")
    if any(w < 0.0 for w, _ in components):
        raise InvalidParameterError("mixture weights must be non-negative")
    total = sum(w for w, _ in components)
    if abs(total - 1.0) > 1e-9:
        raise InvalidParameterError(f"mixture weights sum to {total}, expected 1")
    return Ensemble(components)
