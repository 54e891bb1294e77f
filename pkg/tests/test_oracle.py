"""
Tests for the brute-force coincidence oracle
"""

import math

import numpy as np
import pytest

from core.engine import hyper_closed_form, random_state
from core.errors import InvalidStageError
from core.optics.detection import DetectorWiring, coincidence_probability
from core.optics.elements import ARM2_INPUTS, ElementKind, ElementOp, apply_beamsplitter, apply_delay, apply_element
from core.optics.fock import Mode, PhotonOccupation, TwoPhotonState, TwoPhotonTerm
from core.optics.source import dephase, make_hyper, make_momentum, mixture
from core.oracle import N_MODES, brute_force_coincidence, single_photon_beamsplitter, symmetric_isometry

SIGMA = 60e-15


def fast(state, wiring=DetectorWiring()):
    return coincidence_probability(apply_element(ElementOp(ElementKind.BEAMSPLITTER), state), wiring)


class TestBuildingBlocks:

    def test_isometry_is_orthonormal(self):
        s = symmetric_isometry(N_MODES)
        assert s.shape == (64, 36)
        np.testing.assert_allclose(s.T @ s, np.eye(36), atol=1e-14)

    def test_beamsplitter_is_unitary(self):
        u = single_photon_beamsplitter()
        np.testing.assert_allclose(u @ u.conj().T, np.eye(N_MODES), atol=1e-14)


class TestAgreement:

    def test_distinguishable_pair(self):
        term = TwoPhotonTerm(PhotonOccupation(Mode.parse("a1H")), PhotonOccupation(Mode.parse("a2V")))
        assert brute_force_coincidence(TwoPhotonState.from_terms([term], SIGMA)) == pytest.approx(0.5)

    def test_hyper_grid(self, ideal):
        for theta in np.linspace(0.0, 2.0 * math.pi, 13):
            for phi in np.linspace(0.0, 2.0 * math.pi, 13):
                p = brute_force_coincidence(make_hyper(theta, phi, ideal))
                assert p == pytest.approx(hyper_closed_form(theta, phi), abs=1e-10)

    def test_random_states(self, rng):
        for _ in range(100):
            state = random_state(rng, SIGMA)
            assert brute_force_coincidence(state) == pytest.approx(fast(state), abs=1e-10)

    def test_random_states_with_analyzers(self, rng):
        for _ in range(30):
            state = random_state(rng, SIGMA)
            wiring = DetectorWiring(analyzers=tuple(rng.uniform(0.0, math.pi, 2)))
            assert brute_force_coincidence(state, wiring) == pytest.approx(fast(state, wiring), abs=1e-10)

    def test_delayed_momentum_state(self, ideal):
        state = apply_delay(make_momentum(0.0, ideal), ARM2_INPUTS, 50e-15)
        assert brute_force_coincidence(state) == pytest.approx(fast(state), abs=1e-10)

    def test_ensemble(self, ideal):
        pure = make_hyper(0.4, 1.2, ideal)
        ens = mixture([(0.6, pure), (0.4, dephase(pure, v_pol=0.0, v_mom=0.0))])
        assert brute_force_coincidence(ens) == pytest.approx(fast(ens), abs=1e-10)


def test_zero_state():
    assert brute_force_coincidence(TwoPhotonState.zero(SIGMA)) == 0.0


def test_rejects_output_stage(ideal):
    with pytest.raises(InvalidStageError):
        brute_force_coincidence(apply_beamsplitter(make_momentum(0.0, ideal)))
