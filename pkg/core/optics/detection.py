"""
Coincidence detection
Post-selected coincidence and bunching probabilities behind the beamsplitter,
polarization-analyzer correlations, Poisson counting and curve estimators
(visibility, dip depth, FWHM).
"""

import math
import logging
from dataclasses import dataclass, field, replace
from typing import Callable, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from core.errors import InvalidParameterError, InvalidStageError, InvalidWiringError, ShapeError
from core.optics.fock import (
    Ensemble,
    PhotonOccupation,
    Pol,
    Spot,
    Stage,
    TwoPhotonState,
    TwoPhotonTerm,
    weighted_norm_squared,
)

logger = logging.getLogger(__name__)

PROBABILITY_SLACK = 1e-12
# fraction of curve samples (both wings together) used as the baseline
BASELINE_FRACTION = 0.10

StateLike = Union[TwoPhotonState, Ensemble]


def _spots(values: Iterable[Union[Spot, str]]) -> FrozenSet[Spot]:
    return frozenset(v if isinstance(v, Spot) else Spot.parse(v) for v in values)


@dataclass(frozen=True)
class DetectorWiring:
    """Which output spots feed each detector, plus optional linear analyzers"""
    side1: FrozenSet[Spot] = field(default_factory=lambda: _spots(("a1", "b1")))
    side2: FrozenSet[Spot] = field(default_factory=lambda: _spots(("a2", "b2")))
    analyzers: Optional[Tuple[float, float]] = None

    def __post_init__(self):
        object.__setattr__(self, "side1", _spots(self.side1))
        object.__setattr__(self, "side2", _spots(self.side2))
        if self.side1 & self.side2:
            shared = ", ".join(sorted(str(s) for s in self.side1 & self.side2))
            raise InvalidWiringError(f"spots wired to both detectors: {shared}")
        if self.analyzers is not None:
            object.__setattr__(self, "analyzers", tuple(float(a) for a in self.analyzers))

    @property
    def polarization_insensitive(self) -> bool:
        return self.analyzers is None

    def side_of(self, spot: Spot) -> int:
        if spot in self.side1:
            return 1
        if spot in self.side2:
            return 2
        return 0


@dataclass(frozen=True)
class CurvePoint:
    x: float
    p: float
    counts: Optional[int] = None


@dataclass(frozen=True)
class Curve:
    """Ordered (scan value, probability, optional counts) series"""
    points: Tuple[CurvePoint, ...]
    label: str = ""

    def __post_init__(self):
        object.__setattr__(self, "points", tuple(self.points))
        for pt in self.points:
            if not -PROBABILITY_SLACK <= pt.p <= 1.0 + PROBABILITY_SLACK:
                raise InvalidParameterError(f"probability {pt.p} at x={pt.x} is outside [0, 1]")
            if pt.counts is not None and pt.counts < 0:
                raise InvalidParameterError(f"negative counts at x={pt.x}")

    @classmethod
    def from_arrays(cls, xs: Sequence[float], ps: Sequence[float],
                    counts: Optional[Sequence[int]] = None, label: str = "") -> "Curve":
        counts = counts if counts is not None else [None] * len(xs)
        return cls(tuple(CurvePoint(float(x), float(p), c) for x, p, c in zip(xs, ps, counts)), label)

    @property
    def xs(self) -> np.ndarray:
        return np.array([pt.x for pt in self.points], dtype=float)

    @property
    def probabilities(self) -> np.ndarray:
        return np.array([pt.p for pt in self.points], dtype=float)

    def with_counts(self, counts: Sequence[int]) -> "Curve":
        return replace(self, points=tuple(replace(pt, counts=int(c)) for pt, c in zip(self.points, counts)))

    def __len__(self) -> int:
        return len(self.points)


def _expect(state: StateLike, fn: Callable[[TwoPhotonState], float]) -> float:
    if isinstance(state, Ensemble):
        return state.expectation(fn)
    return fn(state)


def _clip(p: float) -> float:
    return min(max(p, 0.0), 1.0)


def _require_stage(state: TwoPhotonState, stage: Stage):
    for p in state.photons():
        if p.mode.stage is not stage:
            raise InvalidStageError(f"photon in {p.mode} is not at the {stage.name.lower()} stage")


def _through_analyzer(p: PhotonOccupation, angle: float) -> Tuple[PhotonOccupation, float]:
    """Project onto cos(angle)|H> + sin(angle)|V>; the passed photon is labeled H"""
    factor = math.cos(angle) if p.mode.pol is Pol.H else math.sin(angle)
    return PhotonOccupation(p.mode.with_pol(Pol.H), p.delay), factor


def _analyzed_term(term: TwoPhotonTerm, angles: Tuple[float, float]) -> TwoPhotonTerm:
    """`angles` apply to photon_a and photon_b respectively"""
    pa, fa = _through_analyzer(term.photon_a, angles[0])
    pb, fb = _through_analyzer(term.photon_b, angles[1])
    return TwoPhotonTerm(pa, pb, term.amplitude * fa * fb, term.branch)


def _coincidence_terms(state: TwoPhotonState, wiring: DetectorWiring) -> List[TwoPhotonTerm]:
    kept = []
    for term in state.terms:
        sides = (wiring.side_of(term.photon_a.mode.spot), wiring.side_of(term.photon_b.mode.spot))
        if sorted(sides) != [1, 2]:
            continue
        if not wiring.polarization_insensitive:
            angles = wiring.analyzers if sides == (1, 2) else wiring.analyzers[::-1]
            term = _analyzed_term(term, angles)
        kept.append(term)
    return kept


def coincidence_probability(state: StateLike, wiring: DetectorWiring = DetectorWiring()) -> float:
    """Probability of exactly one photon at each detector side"""
    def pure(s: TwoPhotonState) -> float:
        _require_stage(s, Stage.OUTPUT)
        return _clip(weighted_norm_squared(_coincidence_terms(s, wiring), s.sigma_t, s.coherence))
    return _expect(state, pure)


def bunching_probability(state: StateLike, wiring: DetectorWiring = DetectorWiring(),
                         side: int = 1) -> float:
    """Probability that both photons reach the same detector side"""
    if side not in (1, 2):
        raise InvalidParameterError(f"side must be 1 or 2, got {side}")

    def pure(s: TwoPhotonState) -> float:
        _require_stage(s, Stage.OUTPUT)
        terms = [
            t for t in s.terms
            if wiring.side_of(t.photon_a.mode.spot) == side == wiring.side_of(t.photon_b.mode.spot)
        ]
        return _clip(weighted_norm_squared(terms, s.sigma_t, s.coherence))
    return _expect(state, pure)


def polarization_correlation(state: StateLike, angle1: float, angle2: float) -> float:
    """
    Joint pass probability of two linear analyzers placed directly on the
    source spots (no beamsplitter). angle1 sits on the arm-1 spot.
    """
    def pure(s: TwoPhotonState) -> float:
        _require_stage(s, Stage.INPUT)
        if s.is_zero:
            return 0.0
        spots = sorted(s.spots(), key=lambda spot: (spot.arm, spot.path))
        if len(spots) != 2:
            raise InvalidWiringError(
                f"analyzer correlation needs exactly two occupied spots, found {len(spots)}"
            )
        first = spots[0]
        terms = []
        for term in s.terms:
            if term.photon_a.mode.spot == term.photon_b.mode.spot:
                continue
            angles = (angle1, angle2) if term.photon_a.mode.spot == first else (angle2, angle1)
            terms.append(_analyzed_term(term, angles))
        return _clip(weighted_norm_squared(terms, s.sigma_t, s.coherence))
    return _expect(state, pure)


def monte_carlo_counts(p: float, mean_pairs: float,
                       seed: Union[int, np.random.SeedSequence, None]) -> int:
    """Poisson-distributed coincidence count with mean p * mean_pairs"""
    if not -PROBABILITY_SLACK <= p <= 1.0 + PROBABILITY_SLACK:
        raise InvalidParameterError(f"probability must lie in [0, 1], got {p}")
    if mean_pairs < 0.0:
        raise InvalidParameterError(f"mean_pairs must be non-negative, got {mean_pairs}")
    rng = np.random.default_rng(seed)
    return int(rng.poisson(_clip(p) * mean_pairs))


def visibility(curve: Curve) -> float:
    """Fringe visibility (max - min) / (max + min)"""
    if not len(curve):
        raise InvalidParameterError("visibility of an empty curve")
    ps = curve.probabilities
    hi, lo = float(ps.max()), float(ps.min())
    if hi + lo <= 0.0:
        raise InvalidParameterError("visibility undefined for an all-zero curve")
    return (hi - lo) / (hi + lo)


def _sorted_arrays(curve: Curve) -> Tuple[np.ndarray, np.ndarray]:
    xs, ps = curve.xs, curve.probabilities
    order = np.argsort(xs, kind="stable")
    return xs[order], ps[order]


def _baseline(ps: np.ndarray) -> float:
    """Mean of the outer samples on both wings"""
    k = max(1, int(round(0.5 * BASELINE_FRACTION * len(ps))))
    return float(np.mean(np.concatenate([ps[:k], ps[-k:]])))


def _extremum(curve: Curve) -> Tuple[np.ndarray, np.ndarray, float, int]:
    if len(curve) < 3:
        raise ShapeError("a dip needs at least three samples")
    xs, ps = _sorted_arrays(curve)
    base = _baseline(ps)
    i0 = int(np.argmax(np.abs(ps - base)))
    return xs, ps, base, i0


def dip_fwhm(curve: Curve) -> float:
    """Full width at half depth of a dip or peak, linearly interpolated"""
    xs, ps, base, i0 = _extremum(curve)
    depth = ps[i0] - base
    if depth == 0.0:
        raise ShapeError("curve is flat: no dip or peak")
    half = base + 0.5 * depth
    sign = math.copysign(1.0, depth)

    def crossing(step: int) -> float:
        j = i0
        while 0 <= j + step < len(ps):
            k = j + step
            if (ps[k] - half) * sign <= 0.0:
                return float(xs[j] + (half - ps[j]) * (xs[k] - xs[j]) / (ps[k] - ps[j]))
            j = k
        raise ShapeError("curve never returns to half depth")

    return crossing(1) - crossing(-1)


def dip_visibility(curve: Curve) -> float:
    """HOM visibility |baseline - extremum| / baseline"""
    _, ps, base, i0 = _extremum(curve)
    if base <= 0.0:
        raise ShapeError("baseline is zero")
    return abs(base - float(ps[i0])) / base
