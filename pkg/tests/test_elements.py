"""
Tests for optical elements
"""

import math

import numpy as np
import pytest

from core.engine import random_state
from core.errors import InvalidParameterError, InvalidStageError
from core.optics.detection import coincidence_probability
from core.optics.elements import (
    ElementKind,
    ElementOp,
    ModeSelector,
    QUARTZ_DELAY_PER_METER,
    apply_beamsplitter,
    apply_blocker,
    apply_delay,
    apply_element,
    apply_phase,
    apply_waveplate,
    beamsplitter_matrix,
    jones_matrix,
    quartz_compensator,
)
from core.optics.fock import (
    Mode,
    PhotonOccupation,
    TwoPhotonState,
    TwoPhotonTerm,
    inner_product,
    norm_squared,
)
from core.optics.source import SourceParams, make_hyper, make_momentum, make_polarization

from tests.helpers import hom_point

SIGMA = 60e-15
ARM2 = ModeSelector(("a2", "b2"))
EVERYTHING = ModeSelector()


def pair_state(first: str, second: str, d1: float = 0.0, d2: float = 0.0) -> TwoPhotonState:
    term = TwoPhotonTerm(
        PhotonOccupation(Mode.parse(first), d1),
        PhotonOccupation(Mode.parse(second), d2),
    )
    return TwoPhotonState.from_terms([term], SIGMA)


def same_state(x: TwoPhotonState, y: TwoPhotonState, tol: float = 1e-12) -> bool:
    """|<x|y>|^2 = <x|x><y|y> and equal norms"""
    return (abs(norm_squared(x) - norm_squared(y)) < tol
            and abs(inner_product(x, y) - norm_squared(x)) < tol)


class TestSelector:

    def test_tokens(self):
        sel = ModeSelector(("a1", "b2V"))
        assert sel(Mode.parse("a1H")) and sel(Mode.parse("a1V"))
        assert sel(Mode.parse("b2V")) and not sel(Mode.parse("b2H"))
        assert not sel(Mode.parse("a2H"))

    def test_polarization_token(self):
        sel = ModeSelector(("V",))
        assert sel(Mode.parse("b1V")) and sel(Mode.parse("a2'V"))
        assert not sel(Mode.parse("b1H"))

    def test_stage_restriction(self):
        sel = ModeSelector(("a1",), stage=Mode.parse("a1H").stage)
        assert sel(Mode.parse("a1H"))
        assert not sel(Mode.parse("a1'H"))

    def test_nothing(self):
        assert not any(ModeSelector(())(Mode.parse(m)) for m in ("a1H", "b2V"))

    def test_primed_tokens_select_output_modes(self):
        spot = ModeSelector(("a1'",))
        assert spot(Mode.parse("a1'H")) and spot(Mode.parse("a1'V"))
        assert not spot(Mode.parse("a1H"))
        single = ModeSelector(("b2'V",))
        assert single(Mode.parse("b2'V"))
        assert not single(Mode.parse("b2V")) and not single(Mode.parse("b2'H"))
        assert spot.selects_output and not ModeSelector(("a1", "V")).selects_output


class TestWaveplate:

    def test_half_wave_swaps_polarizations(self):
        np.testing.assert_allclose(jones_matrix(math.pi, math.pi / 4), [[0, 1], [1, 0]], atol=1e-15)

    def test_jones_is_unitary(self, rng):
        for ret, axis in rng.uniform(0, 2 * math.pi, size=(20, 2)):
            j = jones_matrix(ret, axis)
            np.testing.assert_allclose(j @ j.conj().T, np.eye(2), atol=1e-12)

    def test_phi_frame_to_psi_frame(self):
        params = SourceParams.ideal()
        theta = 0.7
        phi_state = make_polarization("phi", theta, params)
        rotated = apply_waveplate(phi_state, ARM2, math.pi, math.pi / 4)
        assert rotated.amplitude_of(Mode.parse("a1H"), Mode.parse("a2V")) == pytest.approx(1 / math.sqrt(2))
        assert rotated.amplitude_of(Mode.parse("a1V"), Mode.parse("a2H")) == pytest.approx(
            np.exp(1j * theta) / math.sqrt(2))
        assert rotated.amplitude_of(Mode.parse("a1H"), Mode.parse("a2H")) == pytest.approx(0, abs=1e-12)

    def test_zero_retardance_is_identity(self, rng):
        s = random_state(rng, SIGMA)
        out = apply_waveplate(s, EVERYTHING, 0.0, 0.3)
        assert same_state(out, s)

    def test_two_half_waves_cancel(self, rng):
        s = random_state(rng, SIGMA)
        out = apply_waveplate(apply_waveplate(s, ARM2, math.pi, math.pi / 4), ARM2, math.pi, math.pi / 4)
        assert same_state(out, s)

    def test_rejects_single_polarization_selector(self, rng):
        with pytest.raises(InvalidParameterError):
            apply_waveplate(random_state(rng, SIGMA), ModeSelector(("a1H",)), math.pi, 0.0)


class TestPhaseAndDelay:

    def test_phase_on_b1_flips_momentum_state(self, ideal):
        flipped = apply_phase(make_momentum(0.0, ideal), ModeSelector(("b1",)), math.pi)
        target = make_momentum(math.pi, ideal)
        assert same_state(flipped, target)

    def test_zero_phase_is_identity(self, rng):
        s = random_state(rng, SIGMA)
        assert same_state(apply_phase(s, EVERYTHING, 0.0), s)

    def test_global_phase_changes_nothing(self, ideal):
        s = make_momentum(0.3, ideal)
        rotated = apply_phase(s, EVERYTHING, 1.1)
        assert hom_point(rotated, 10e-6) == pytest.approx(hom_point(s, 10e-6), abs=1e-12)

    def test_phase_counts_photons(self):
        s = pair_state("a1H", "a1H")
        out = apply_phase(s, ModeSelector(("a1",)), 0.4)
        assert out.terms[0].amplitude == pytest.approx(np.exp(0.8j))

    def test_delay_round_trip(self, rng):
        s = random_state(rng, SIGMA)
        back = apply_delay(apply_delay(s, ARM2, 37e-15), ARM2, -37e-15)
        assert same_state(back, s)

    def test_delay_on_unselected_modes(self):
        s = pair_state("a1H", "b1V")
        assert apply_delay(s, ARM2, 1e-12) == s

    def test_phase_and_delay_commute_on_disjoint_selectors(self, rng):
        s = random_state(rng, SIGMA)
        first = apply_delay(apply_phase(s, ModeSelector(("a1", "b1")), 0.9), ARM2, 50e-15)
        second = apply_phase(apply_delay(s, ARM2, 50e-15), ModeSelector(("a1", "b1")), 0.9)
        assert first.terms == second.terms


class TestQuartz:

    def test_full_compensation(self):
        params = SourceParams(v_pol=1.0)
        s = quartz_compensator(make_polarization("phi", 0.0, params), 18e-3)
        delays = [p.delay for p in s.photons()]
        assert max(delays) - min(delays) < 1e-18

    def test_half_compensation(self):
        params = SourceParams(v_pol=1.0, quartz_length=9e-3)
        s = make_polarization("psi", 0.0, params)
        residual = 540e-15 - 9e-3 * QUARTZ_DELAY_PER_METER
        assert residual == pytest.approx(270e-15)
        expected = 0.5 * (1 - math.exp(-residual ** 2 / (4 * params.sigma_t ** 2)))
        assert hom_point(s) == pytest.approx(expected, abs=1e-12)

    def test_zero_length(self, rng):
        s = random_state(rng, SIGMA)
        assert quartz_compensator(s, 0.0) == s

    def test_negative_length(self, rng):
        with pytest.raises(InvalidParameterError):
            quartz_compensator(random_state(rng, SIGMA), -1e-3)
        with pytest.raises(InvalidParameterError):
            ElementOp(ElementKind.QUARTZ, length=-1e-3)


class TestBlocker:

    def test_one_photon_of_each_pair(self, ideal):
        out = apply_blocker(make_momentum(0.0, ideal), ModeSelector(("a1", "b2")))
        assert len(out) == 1
        assert {str(s) for s in out.spots()} == {"b1", "a2"}
        assert norm_squared(out) == pytest.approx(0.5)

    def test_coupled_pair(self, ideal):
        out = apply_blocker(make_momentum(0.0, ideal), ModeSelector(("a1", "a2")))
        assert out.is_zero

    def test_nothing_blocked(self, ideal):
        s = make_momentum(0.0, ideal)
        assert apply_blocker(s, ModeSelector(())) == s

    def test_monotone(self, rng):
        for _ in range(50):
            s = random_state(rng, SIGMA)
            small = apply_blocker(s, ModeSelector(("a1",)))
            large = apply_blocker(s, ModeSelector(("a1", "b2V")))
            assert norm_squared(small) <= norm_squared(s) + 1e-12
            assert norm_squared(large) <= norm_squared(small) + 1e-12


class TestBeamsplitter:

    def test_matrix_is_unitary(self):
        u = beamsplitter_matrix()
        np.testing.assert_allclose(u @ u.conj().T, np.eye(4), atol=1e-12)

    def test_identical_photons_bunch(self):
        out = apply_beamsplitter(pair_state("a1H", "a2H"))
        assert coincidence_probability(out) == pytest.approx(0.0, abs=1e-15)
        for term in out.terms:
            assert term.photon_a.mode == term.photon_b.mode

    def test_hyper_fermionic_case_antibunches(self):
        out = apply_beamsplitter(make_hyper(0.0, math.pi, SourceParams.ideal()))
        assert coincidence_probability(out) == pytest.approx(1.0, abs=1e-12)
        for term in out.terms:
            assert term.photon_a.mode.arm != term.photon_b.mode.arm

    @pytest.mark.parametrize("theta, phi", [(0.0, 0.0), (0.0, math.pi), (math.pi, 0.3), (1.1, 2.2)])
    def test_ideal_output_has_one_term_per_photon_pair(self, theta, phi):
        out = apply_beamsplitter(make_hyper(theta, phi, SourceParams.ideal()))
        pairs = [term.photons for term in out.terms]
        assert len(pairs) == len(set(pairs))

    def test_output_stage_rejected(self):
        out = apply_beamsplitter(pair_state("a1H", "b2V"))
        with pytest.raises(InvalidStageError):
            apply_beamsplitter(out)

    def test_element_dispatch(self):
        s = pair_state("a1H", "a2H")
        assert apply_element(ElementOp(ElementKind.BEAMSPLITTER), s) == apply_beamsplitter(s)


def test_norm_preserved_over_random_states(rng):
    ops = [
        lambda s: apply_waveplate(s, ModeSelector(("a1", "b2")), *rng.uniform(0, 2 * math.pi, 2)),
        lambda s: apply_phase(s, ModeSelector(("b1", "a2H")), rng.uniform(0, 2 * math.pi)),
        lambda s: apply_delay(s, ModeSelector(("V",)), rng.uniform(-200e-15, 200e-15)),
        apply_beamsplitter,
    ]
    for _ in range(1000):
        s = random_state(rng, SIGMA)
        for op in ops:
            assert norm_squared(op(s)) == pytest.approx(1.0, abs=1e-12)
