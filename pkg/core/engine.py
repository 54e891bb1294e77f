"""
Core experiment engine for HyperHOM
Runs delay, mirror, plate and hyper-entanglement scans, the blocking
(falsification) suite, the oracle cross-check and the analyzer correlation.
"""

import math
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Sequence, Tuple

import numpy as np

from core.errors import HyperHOMError, InvalidParameterError, ScanError, ShapeError
from core.optics.detection import (
    Curve,
    DetectorWiring,
    coincidence_probability,
    dip_fwhm,
    dip_visibility,
    monte_carlo_counts,
    polarization_correlation,
    visibility,
)
from core.optics.elements import (
    ARM2_INPUTS,
    ElementKind,
    ElementOp,
    ModeSelector,
    apply_beamsplitter,
    apply_chain,
    apply_element,
)
from core.optics.fock import (
    Coherence,
    INPUT_MODES,
    PhotonOccupation,
    Pol,
    TwoPhotonState,
    TwoPhotonTerm,
    normalize,
)
from core.optics.source import (
    MEASURED_POL_CORRELATION_VISIBILITY,
    MEASURED_V_HYPER_OBSERVED,
    SPEED_OF_LIGHT,
    SourceParams,
    make_hyper,
    make_momentum,
    make_polarization,
    theta_from_mirror,
)
from core.oracle import brute_force_coincidence
from utils.config import ExperimentConfig

# blocked-pair checks of the falsification suite
FLAT_VISIBILITY_LIMIT = 0.01
FLAT_LEVEL = 0.25
FLAT_LEVEL_TOLERANCE = 1e-6
DARK_LIMIT = 1e-12
ORACLE_TOLERANCE = 1e-10
HYPER_GRID_SIZE = 13


@dataclass
class CheckResult:
    """Outcome of one named check"""
    name: str
    passed: bool
    metric: float
    detail: str = ""
    curve: Optional[Curve] = None


@dataclass
class ExperimentResult:
    experiment: str
    curves: List[Curve] = field(default_factory=list)
    summary: Dict[str, Any] = field(default_factory=dict)
    checks: List[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)


def hyper_closed_form(theta: float, phi: float) -> float:
    """Ideal coincidence probability of the hyper-entangled state at zero delay"""
    return 0.5 * (1.0 - math.cos(theta) * math.cos(phi))


def random_state(rng: np.random.Generator, sigma_t: float, n_terms: int = 4) -> TwoPhotonState:
    """Normalized random state on input modes with up to two delay bins and random branches"""
    bins = [0.0]
    if rng.random() < 0.5:
        bins.append(float(rng.uniform(0.1, 3.0)) * sigma_t)
    while True:
        terms = []
        for _ in range(n_terms):
            i, j = rng.integers(0, len(INPUT_MODES), size=2)
            terms.append(TwoPhotonTerm(
                PhotonOccupation(INPUT_MODES[i], bins[rng.integers(0, len(bins))]),
                PhotonOccupation(INPUT_MODES[j], bins[rng.integers(0, len(bins))]),
                complex(rng.normal(), rng.normal()),
                (int(rng.integers(0, 2)), int(rng.integers(0, 2))),
            ))
        coherence = Coherence(float(rng.uniform()), float(rng.uniform()))
        state = TwoPhotonState.from_terms(terms, sigma_t, coherence)
        try:
            return normalize(state)
        except HyperHOMError:
            continue


class ExperimentEngine:
    """Experiment engine for HyperHOM"""

    def __init__(self, config: ExperimentConfig):
        self.config = config
        self.logger = logging.getLogger(__name__)

        self.params: SourceParams = config.source.to_params()
        self.elements: List[ElementOp] = [e.to_op() for e in config.elements]
        self.wiring: DetectorWiring = config.wiring.to_wiring()
        if config.state.kind in ("psi", "hyper") and any(e.kind is ElementKind.QUARTZ for e in self.elements):
            self.logger.warning(
                "A quartz element acts after the arm-2 half-wave plate and cannot undo the walk-off "
                f"of {config.state.kind} states; set source.quartz_length instead"
            )

        self._seeds = np.random.SeedSequence(config.seed) if config.seed is not None else None
        self.handlers: Dict[str, Callable[[], ExperimentResult]] = {
            'scan_delay': self._run_scan_delay,
            'scan_mirror': self._run_scan_mirror,
            'scan_plate': self._run_scan_plate,
            'scan_hyper': self._run_scan_hyper,
            'falsify': self._run_falsify,
            'oracle_check': self._run_oracle_check,
            'pol_correlation': self._run_pol_correlation,
        }

    def run(self) -> ExperimentResult:
        """Run the configured experiment"""
        name = self.config.experiment
        self.logger.info(f"Running {name}")
        result = self.handlers[name]()
        for check in result.checks:
            level = logging.INFO if check.passed else logging.WARNING
            self.logger.log(level, f"Check {check.name}: {'pass' if check.passed else 'FAIL'} ({check.metric:.3g})")
        return result

    # ------------------------------------------------------------ states

    def prepare_state(self, theta: Optional[float] = None, phi: Optional[float] = None) -> TwoPhotonState:
        """Source state of the configured kind; theta/phi default to the config values"""
        spec = self.config.state
        theta = spec.theta if theta is None else theta
        phi = spec.phi if phi is None else phi
        if spec.kind in ("phi", "psi"):
            return make_polarization(spec.kind, theta, self.params, spec.paths)
        if spec.kind == "momentum":
            return make_momentum(phi, self.params, Pol[spec.cone])
        return make_hyper(theta, phi, self.params)

    def hom_probability(self, state: TwoPhotonState, delta_x: float = 0.0,
                        extra: Sequence[ElementOp] = ()) -> float:
        """Arm-2 delay, configured elements, beamsplitter, coincidence"""
        state = apply_element(ElementOp(ElementKind.DELAY, ARM2_INPUTS, tau=delta_x / SPEED_OF_LIGHT), state)
        state = apply_chain(list(extra) + self.elements, state)
        state = apply_element(ElementOp(ElementKind.BEAMSPLITTER), state)
        return coincidence_probability(state, self.wiring)

    # ------------------------------------------------------------- scans

    def _sweep(self, xs: Sequence[float], point: Callable[[float], float], label: str) -> Curve:
        """Evaluate independent scan points; results keep scan order"""
        xs = [float(x) for x in xs]

        def evaluate(x: float) -> float:
            try:
                p = point(x)
            except HyperHOMError as e:
                raise ScanError(f"{label or self.config.experiment}: {e} at x={x:.6g}", x) from e
            self.logger.debug(f"{label} x={x:.6g} p={p:.6g}")
            return p

        if self.config.workers > 1 and len(xs) > 1:
            with ThreadPoolExecutor(max_workers=self.config.workers) as pool:
                ps = list(pool.map(evaluate, xs))
        else:
            ps = [evaluate(x) for x in xs]

        curve = Curve.from_arrays(xs, ps, label=label)
        self.logger.info(f"Scanned {label or self.config.experiment}: {len(curve)} points")
        return self._with_counts(curve)

    def _with_counts(self, curve: Curve) -> Curve:
        if not self.config.counts:
            return curve
        if self._seeds is None:
            raise InvalidParameterError("counts requested without a seed")
        seeds = self._seeds.spawn(len(curve))
        counts = [
            monte_carlo_counts(pt.p, self.config.mean_pairs, s)
            for pt, s in zip(curve.points, seeds)
        ]
        return curve.with_counts(counts)

    def _grid(self, xs: Optional[Sequence[float]]) -> Sequence[float]:
        return self.config.scan.values() if xs is None else xs

    def scan_delay(self, xs: Optional[Sequence[float]] = None, label: str = "",
                   extra: Sequence[ElementOp] = ()) -> Curve:
        """Coincidence probability against the arm-2 path difference (m)"""
        state = self.prepare_state()
        return self._sweep(self._grid(xs), lambda dx: self.hom_probability(state, dx, extra), label)

    def scan_mirror(self, xs: Optional[Sequence[float]] = None) -> Curve:
        """Coincidence probability against the mirror displacement (m) at zero delay"""
        def point(dd: float) -> float:
            theta = self.config.state.theta + theta_from_mirror(dd, self.params)
            return self.hom_probability(self.prepare_state(theta=theta))
        return self._sweep(self._grid(xs), point, "")

    def scan_plate(self, xs: Optional[Sequence[float]] = None, theta: Optional[float] = None,
                   label: str = "") -> Curve:
        """Coincidence probability against the momentum phase (rad) at zero delay"""
        def point(phi: float) -> float:
            return self.hom_probability(self.prepare_state(theta=theta, phi=phi))
        return self._sweep(self._grid(xs), point, label)

    def scan_hyper(self, xs: Optional[Sequence[float]] = None,
                   thetas: Optional[Sequence[float]] = None) -> List[Curve]:
        """One plate scan of the hyper-entangled state per theta"""
        thetas = self.config.thetas if thetas is None else thetas
        return [self.scan_plate(xs, theta, label=f"theta_{theta:.6g}") for theta in thetas]

    def pol_correlation(self, xs: Optional[Sequence[float]] = None) -> Curve:
        """Analyzer correlation without the beamsplitter against the arm-2 analyzer angle"""
        angle1 = self.wiring.analyzers[0] if self.wiring.analyzers is not None else math.pi / 4.0
        state = apply_chain(self.elements, self.prepare_state())
        return self._sweep(
            self._grid(xs), lambda angle2: polarization_correlation(state, angle1, angle2), ""
        )

    # ---------------------------------------------------- falsification

    def falsification_suite(self, xs: Optional[Sequence[float]] = None) -> Tuple[List[CheckResult], CheckResult]:
        """
        Blocking tests on the momentum state. Blocking one photon of each
        emission pair leaves a flat quarter; blocking both photons of a
        BS-coupled pair leaves no coincidences at all. The unblocked dip is
        returned separately as the control.
        """
        checks = []
        for pair in (("a1", "b2"), ("b1", "a2")):
            curve = self._blocked(pair, xs)
            vis = self._estimate(visibility, curve)
            vis = math.nan if vis is None else vis
            level = float(np.max(np.abs(curve.probabilities - FLAT_LEVEL)))
            checks.append(CheckResult(
                name=f"block_{pair[0]}_{pair[1]}",
                passed=vis < FLAT_VISIBILITY_LIMIT and level < FLAT_LEVEL_TOLERANCE,
                metric=vis,
                detail=f"visibility {vis:.3g}, max deviation from 1/4 {level:.3g}",
                curve=curve,
            ))
        for pair in (("a1", "a2"), ("b1", "b2")):
            curve = self._blocked(pair, xs)
            peak = float(curve.probabilities.max())
            checks.append(CheckResult(
                name=f"block_{pair[0]}_{pair[1]}",
                passed=peak < DARK_LIMIT,
                metric=peak,
                detail=f"max probability {peak:.3g}",
                curve=curve,
            ))

        curve = self.scan_delay(xs, label="control")
        depth = self._estimate(dip_visibility, curve)
        depth = math.nan if depth is None else depth
        control = CheckResult(
            name="control",
            passed=abs(depth - self.params.v_mom) < FLAT_VISIBILITY_LIMIT,
            metric=depth,
            detail=f"dip visibility {depth:.4f}, expected {self.params.v_mom:.4f}",
            curve=curve,
        )
        return checks, control

    def _blocked(self, pair: Tuple[str, str], xs: Optional[Sequence[float]]) -> Curve:
        blocker = ElementOp(ElementKind.BLOCKER, ModeSelector.of_spots(pair))
        return self.scan_delay(xs, label=f"block_{pair[0]}_{pair[1]}", extra=[blocker])

    # ------------------------------------------------------------ oracle

    def oracle_check(self, n_random: Optional[int] = None) -> Dict[str, float]:
        """
        Compare the term-based coincidence with the dense oracle on seeded
        random states and on the hyper-entangled (theta, phi) grid.
        """
        n_random = self.config.n_random if n_random is None else n_random
        rng = np.random.default_rng(self.config.seed if self.config.seed is not None else 0)
        sigma_t = self.params.sigma_t

        random_dev = 0.0
        for _ in range(n_random):
            state = random_state(rng, sigma_t)
            fast = coincidence_probability(apply_beamsplitter(state), self.wiring)
            random_dev = max(random_dev, abs(fast - brute_force_coincidence(state, self.wiring)))

        ideal = SourceParams.ideal(sigma_t=sigma_t)
        grid = np.linspace(0.0, 2.0 * math.pi, HYPER_GRID_SIZE)
        grid_dev = closed_form_dev = 0.0
        for theta in grid:
            for phi in grid:
                state = make_hyper(theta, phi, ideal)
                fast = coincidence_probability(apply_beamsplitter(state))
                grid_dev = max(grid_dev, abs(fast - brute_force_coincidence(state)))
                closed_form_dev = max(closed_form_dev, abs(fast - hyper_closed_form(theta, phi)))

        self.logger.info(f"Oracle deviation: random {random_dev:.3g}, grid {grid_dev:.3g}")
        return {
            'n_random': n_random,
            'random_max_deviation': random_dev,
            'grid_max_deviation': grid_dev,
            'closed_form_max_deviation': closed_form_dev,
            'max_deviation': max(random_dev, grid_dev),
        }

    # -------------------------------------------------------- dispatch

    def _estimate(self, estimator: Callable[[Curve], float], curve: Curve) -> Optional[float]:
        """Curve estimate, or None when the curve does not define one"""
        try:
            return estimator(curve)
        except (InvalidParameterError, ShapeError) as e:
            self.logger.info(f"No {estimator.__name__} for {curve.label or self.config.experiment}: {e}")
            return None

    def _delay_summary(self, curve: Curve) -> Dict[str, Any]:
        return {
            'visibility': self._estimate(visibility, curve),
            'dip_visibility': self._estimate(dip_visibility, curve),
            'fwhm': self._estimate(dip_fwhm, curve),
        }

    def _run_scan_delay(self) -> ExperimentResult:
        curve = self.scan_delay()
        return ExperimentResult('scan_delay', [curve], self._delay_summary(curve))

    def _run_scan_mirror(self) -> ExperimentResult:
        curve = self.scan_mirror()
        return ExperimentResult('scan_mirror', [curve], {'visibility': self._estimate(visibility, curve)})

    def _run_scan_plate(self) -> ExperimentResult:
        curve = self.scan_plate()
        return ExperimentResult('scan_plate', [curve], {'visibility': self._estimate(visibility, curve)})

    def _run_scan_hyper(self) -> ExperimentResult:
        curves = self.scan_hyper()
        summary = {
            'visibility': {c.label: self._estimate(visibility, c) for c in curves},
            'model_visibility': self.params.v_pol * self.params.v_mom,
            'observed_visibility': MEASURED_V_HYPER_OBSERVED,
        }
        summary['model_is_upper_bound'] = summary['model_visibility'] >= MEASURED_V_HYPER_OBSERVED
        return ExperimentResult('scan_hyper', curves, summary)

    def _run_falsify(self) -> ExperimentResult:
        checks, control = self.falsification_suite()
        summary = {
            'checks': {c.name: {'passed': c.passed, 'metric': c.metric, 'detail': c.detail} for c in checks},
            'control': {'dip_visibility': control.metric, 'expected': self.params.v_mom,
                        'consistent': control.passed},
            'checks_passed': all(c.passed for c in checks),
        }
        curves = [c.curve for c in checks] + [control.curve]
        return ExperimentResult('falsify', curves, summary, checks)

    def _run_oracle_check(self) -> ExperimentResult:
        report = self.oracle_check()
        checks = [
            CheckResult('oracle_equivalence', report['max_deviation'] < ORACLE_TOLERANCE,
                        report['max_deviation'], f"tolerance {ORACLE_TOLERANCE:g}"),
            CheckResult('hyper_closed_form', report['closed_form_max_deviation'] < ORACLE_TOLERANCE,
                        report['closed_form_max_deviation'], f"tolerance {ORACLE_TOLERANCE:g}"),
        ]
        summary = dict(report)
        summary['checks_passed'] = all(c.passed for c in checks)
        return ExperimentResult('oracle_check', [], summary, checks)

    def _run_pol_correlation(self) -> ExperimentResult:
        curve = self.pol_correlation()
        return ExperimentResult('pol_correlation', [curve], {
            'visibility': self._estimate(visibility, curve),
            'observed_visibility': MEASURED_POL_CORRELATION_VISIBILITY,
        })
