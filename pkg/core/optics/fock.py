"""
Two-photon Fock algebra
Mode labels, the two-photon state with Gaussian temporal wavepackets,
and the bosonic inner product used by every probability in the simulator.
"""

import math
import logging
from dataclasses import dataclass, field, replace
from enum import IntEnum
from typing import Callable, Dict, Iterable, Iterator, List, Optional, Tuple

from core.errors import (
    IncompatibleStateError,
    InvalidParameterError,
    ZeroStateError,
)

logger = logging.getLogger(__name__)

# Amplitudes below this magnitude are dropped after merging
MERGE_THRESHOLD = 1e-14


class Path(IntEnum):
    A = 0
    B = 1

    @property
    def label(self) -> str:
        return self.name.lower()


class Pol(IntEnum):
    H = 0
    V = 1


class Stage(IntEnum):
    INPUT = 0
    OUTPUT = 1


@dataclass(frozen=True, order=True)
class Spot:
    """A spatial mode: one hole of the mask, i.e. (path, arm)"""
    path: Path
    arm: int

    def __post_init__(self):
        if self.arm not in (1, 2):
            raise InvalidParameterError(f"arm must be 1 or 2, got {self.arm}")

    @classmethod
    def parse(cls, token: str) -> "Spot":
        token = token.strip().rstrip("'")
        if len(token) != 2 or token[0] not in "ab" or token[1] not in "12":
            raise InvalidParameterError(f"not a spatial mode: {token!r}")
        return cls(Path.A if token[0] == "a" else Path.B, int(token[1]))

    def __str__(self) -> str:
        return f"{self.path.label}{self.arm}"


@dataclass(frozen=True, order=True)
class Mode:
    """A labeled electromagnetic mode, ordered by (path, arm, pol, stage)"""
    path: Path
    arm: int
    pol: Pol
    stage: Stage = Stage.INPUT

    def __post_init__(self):
        if self.arm not in (1, 2):
            raise InvalidParameterError(f"arm must be 1 or 2, got {self.arm}")

    @property
    def spot(self) -> Spot:
        return Spot(self.path, self.arm)

    def with_pol(self, pol: Pol) -> "Mode":
        return replace(self, pol=pol)

    def with_stage(self, stage: Stage) -> "Mode":
        return replace(self, stage=stage)

    @classmethod
    def parse(cls, token: str) -> "Mode":
        """Parse labels such as ``a1H`` (input) or ``b2'V`` (output)"""
        token = token.strip()
        stage = Stage.OUTPUT if "'" in token else Stage.INPUT
        bare = token.replace("'", "")
        if len(bare) != 3 or bare[2] not in "HV":
            raise InvalidParameterError(f"not a mode label: {token!r}")
        spot = Spot.parse(bare[:2])
        return cls(spot.path, spot.arm, Pol[bare[2]], stage)

    def __str__(self) -> str:
        prime = "'" if self.stage is Stage.OUTPUT else ""
        return f"{self.path.label}{self.arm}{prime}{self.pol.name}"


ALL_SPOTS: Tuple[Spot, ...] = tuple(Spot(p, a) for p in Path for a in (1, 2))
INPUT_MODES: Tuple[Mode, ...] = tuple(
    Mode(p, a, s, Stage.INPUT) for p in Path for a in (1, 2) for s in Pol
)
OUTPUT_MODES: Tuple[Mode, ...] = tuple(m.with_stage(Stage.OUTPUT) for m in INPUT_MODES)


@dataclass(frozen=True, order=True)
class PhotonOccupation:
    """One photon: its mode and the accumulated delay of its wavepacket (s)"""
    mode: Mode
    delay: float = 0.0

    def __post_init__(self):
        if not math.isfinite(self.delay):
            raise InvalidParameterError(f"photon delay must be finite, got {self.delay}")

    def shifted(self, tau: float) -> "PhotonOccupation":
        return PhotonOccupation(self.mode, self.delay + tau)

    def __str__(self) -> str:
        if self.delay == 0.0:
            return str(self.mode)
        return f"{self.mode}({self.delay:.3e})"


# (polarization branch, momentum branch) of the source term a term descends from
Branch = Tuple[int, int]


@dataclass(frozen=True)
class TwoPhotonTerm:
    """amplitude * a†(photon_a) a†(photon_b) |0>, stored with photon_a <= photon_b"""
    photon_a: PhotonOccupation
    photon_b: PhotonOccupation
    amplitude: complex = 1.0 + 0.0j
    branch: Branch = (0, 0)

    def __post_init__(self):
        if self.photon_b < self.photon_a:
            first, second = self.photon_b, self.photon_a
            object.__setattr__(self, "photon_a", first)
            object.__setattr__(self, "photon_b", second)
        object.__setattr__(self, "amplitude", complex(self.amplitude))

    @property
    def key(self) -> Tuple[PhotonOccupation, PhotonOccupation, Branch]:
        return (self.photon_a, self.photon_b, self.branch)

    @property
    def photons(self) -> Tuple[PhotonOccupation, PhotonOccupation]:
        return (self.photon_a, self.photon_b)

    def with_amplitude(self, amplitude: complex) -> "TwoPhotonTerm":
        return replace(self, amplitude=complex(amplitude))

    def __str__(self) -> str:
        return f"({self.amplitude:.4g}) {self.photon_a} {self.photon_b}"


@dataclass(frozen=True)
class Coherence:
    """
    Residual coherence between source branches.

    Cross contributions between terms of different polarization branches are
    weighted by v_pol, between different momentum branches by v_mom.
    """
    v_pol: float = 1.0
    v_mom: float = 1.0

    def __post_init__(self):
        for name in ("v_pol", "v_mom"):
            value = getattr(self, name)
            if not 0.0 <= value <= 1.0:
                raise InvalidParameterError(f"{name} must lie in [0, 1], got {value}")

    def weight(self, first: Branch, second: Branch) -> float:
        w = 1.0
        if first[0] != second[0]:
            w *= self.v_pol
        if first[1] != second[1]:
            w *= self.v_mom
        return w

    @property
    def is_ideal(self) -> bool:
        return self.v_pol == 1.0 and self.v_mom == 1.0


@dataclass(frozen=True)
class TwoPhotonState:
    """Superposition of two-photon terms sharing one single-photon width sigma_t"""
    terms: Tuple[TwoPhotonTerm, ...]
    sigma_t: float
    coherence: Coherence = field(default_factory=Coherence)

    def __post_init__(self):
        if not self.sigma_t > 0.0:
            raise InvalidParameterError(f"sigma_t must be positive, got {self.sigma_t}")
        object.__setattr__(self, "terms", tuple(self.terms))

    @classmethod
    def from_terms(cls, terms: Iterable[TwoPhotonTerm], sigma_t: float,
                   coherence: Coherence = Coherence()) -> "TwoPhotonState":
        return canonicalize(cls(tuple(terms), sigma_t, coherence))

    @classmethod
    def zero(cls, sigma_t: float, coherence: Coherence = Coherence()) -> "TwoPhotonState":
        return cls((), sigma_t, coherence)

    def with_terms(self, terms: Iterable[TwoPhotonTerm]) -> "TwoPhotonState":
        """Same width and coherence, new (canonicalized) terms"""
        return TwoPhotonState.from_terms(terms, self.sigma_t, self.coherence)

    def map_terms(self, fn: Callable[[TwoPhotonTerm], Iterable[TwoPhotonTerm]]) -> "TwoPhotonState":
        out: List[TwoPhotonTerm] = []
        for term in self.terms:
            out.extend(fn(term))
        return self.with_terms(out)

    def scaled(self, factor: complex) -> "TwoPhotonState":
        return self.with_terms(t.with_amplitude(t.amplitude * factor) for t in self.terms)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def photons(self) -> Iterator[PhotonOccupation]:
        for term in self.terms:
            yield term.photon_a
            yield term.photon_b

    def spots(self) -> List[Spot]:
        return sorted({p.mode.spot for p in self.photons()})

    def amplitude_of(self, first: Mode, second: Mode, branch: Optional[Branch] = None) -> complex:
        """Sum of amplitudes on the (first, second) mode pair, any delay"""
        wanted = tuple(sorted((first, second)))
        total = 0j
        for term in self.terms:
            if (term.photon_a.mode, term.photon_b.mode) == wanted:
                if branch is None or term.branch == branch:
                    total += term.amplitude
        return total

    def __len__(self) -> int:
        return len(self.terms)

    def __str__(self) -> str:
        if not self.terms:
            return "0"
        return " + ".join(str(t) for t in self.terms)


@dataclass(frozen=True)
class Ensemble:
    """Convex mixture of two-photon states; observables are weight averages"""
    components: Tuple[Tuple[float, TwoPhotonState], ...]

    def map(self, fn: Callable[[TwoPhotonState], TwoPhotonState]) -> "Ensemble":
        return Ensemble(tuple((w, fn(s)) for w, s in self.components))

    def expectation(self, fn: Callable[[TwoPhotonState], float]) -> float:
        return float(sum(w * fn(s) for w, s in self.components if w > 0.0))


def canonicalize(state: TwoPhotonState) -> TwoPhotonState:
    """
    Merge duplicate terms, drop negligible amplitudes, sort by key.

    With ideal coherence the branch tag carries no weight: terms on the same
    photon pair merge across branches and keep the lowest tag. Otherwise the
    tag is part of the key.
    """
    across_branches = state.coherence.is_ideal
    merged: Dict[Tuple, List] = {}
    for term in state.terms:
        key = term.photons if across_branches else term.key
        entry = merged.setdefault(key, [0j, term.branch])
        entry[0] += term.amplitude
        entry[1] = min(entry[1], term.branch)
    terms = sorted(
        (
            TwoPhotonTerm(key[0], key[1], amp, branch)
            for key, (amp, branch) in merged.items()
            if abs(amp) >= MERGE_THRESHOLD
        ),
        key=lambda t: t.key,
    )
    return TwoPhotonState(tuple(terms), state.sigma_t, state.coherence)


def temporal_overlap(d1: float, d2: float, sigma_t: float) -> float:
    """Overlap of two unit Gaussian wavepackets of RMS width sigma_t delayed by d1, d2"""
    if not sigma_t > 0.0:
        raise InvalidParameterError(f"sigma_t must be positive, got {sigma_t}")
    dt = d1 - d2
    return math.exp(-dt * dt / (8.0 * sigma_t * sigma_t))


def photon_overlap(p: PhotonOccupation, q: PhotonOccupation, sigma_t: float) -> float:
    if p.mode != q.mode:
        return 0.0
    return temporal_overlap(p.delay, q.delay, sigma_t)


def term_overlap(s: TwoPhotonTerm, t: TwoPhotonTerm, sigma_t: float) -> float:
    """<0| a(s_b) a(s_a) a†(t_a) a†(t_b) |0> for unit amplitudes: a 2x2 permanent"""
    direct = photon_overlap(s.photon_a, t.photon_a, sigma_t) * photon_overlap(s.photon_b, t.photon_b, sigma_t)
    crossed = photon_overlap(s.photon_a, t.photon_b, sigma_t) * photon_overlap(s.photon_b, t.photon_a, sigma_t)
    return direct + crossed


def _check_compatible(x: TwoPhotonState, y: TwoPhotonState):
    if x.sigma_t != y.sigma_t:
        raise IncompatibleStateError(
            f"states have different temporal widths: {x.sigma_t} vs {y.sigma_t}"
        )


def inner_product(x: TwoPhotonState, y: TwoPhotonState) -> complex:
    """Sesquilinear <x|y>, conjugate-linear in x"""
    _check_compatible(x, y)
    total = 0j
    for s in x.terms:
        for t in y.terms:
            k = term_overlap(s, t, x.sigma_t)
            if k:
                total += s.amplitude.conjugate() * t.amplitude * k
    return total


def norm_squared(x: TwoPhotonState) -> float:
    return max(inner_product(x, x).real, 0.0)


def weighted_norm_squared(terms: Iterable[TwoPhotonTerm], sigma_t: float,
                          coherence: Coherence) -> float:
    """
    Squared norm with branch cross contributions weighted by the coherence.

    Equals the trace of the dephased density operator restricted to the
    given terms; with ideal coherence it is the plain squared norm.
    """
    terms = list(terms)
    total = 0.0
    for i, s in enumerate(terms):
        total += abs(s.amplitude) ** 2 * term_overlap(s, s, sigma_t)
        for t in terms[i + 1:]:
            k = term_overlap(s, t, sigma_t)
            if not k:
                continue
            w = coherence.weight(s.branch, t.branch)
            if w:
                total += 2.0 * w * k * (s.amplitude.conjugate() * t.amplitude).real
    return total


def normalize(x: TwoPhotonState) -> TwoPhotonState:
    """Rescale to unit norm by a positive real factor"""
    n2 = inner_product(x, x).real
    if n2 <= MERGE_THRESHOLD ** 2:
        raise ZeroStateError("cannot normalize a zero-norm state")
    return x.scaled(1.0 / math.sqrt(n2))
