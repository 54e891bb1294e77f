"""
Brute-force coincidence oracle
Expands a two-photon state in the symmetric two-photon space over the eight
input modes (times a temporal basis when delays differ), applies the
beamsplitter as an explicit unitary on that space and traces the density
operator against the coincidence projector. Deliberately slow and dense;
it shares no projection code with the term-based fast path.
"""

import math
import logging
from functools import lru_cache
from typing import Dict, Iterable, List, Tuple

import numpy as np

from core.errors import InvalidStageError
from core.optics.detection import DetectorWiring
from core.optics.fock import (
    Ensemble,
    INPUT_MODES,
    Mode,
    OUTPUT_MODES,
    Pol,
    Stage,
    temporal_overlap,
)

logger = logging.getLogger(__name__)

N_MODES = len(INPUT_MODES)
MODE_INDEX: Dict[Tuple, int] = {(m.path, m.arm, m.pol): i for i, m in enumerate(INPUT_MODES)}
# relative eigenvalue cutoff of the temporal Gram matrix
EIGEN_CUTOFF = 1e-13


def _temporal_basis(delays: Iterable[float], sigma_t: float) -> Tuple[Dict[float, np.ndarray], int]:
    """Coordinates of each wavepacket in an orthonormal basis of their span"""
    delays = sorted(set(delays))
    gram = np.array([[temporal_overlap(a, b, sigma_t) for b in delays] for a in delays])
    evals, evecs = np.linalg.eigh(gram)
    keep = evals > EIGEN_CUTOFF * evals.max()
    coords = np.sqrt(evals[keep])[:, None] * evecs[:, keep].T
    return {d: coords[:, k].astype(complex) for k, d in enumerate(delays)}, int(keep.sum())


@lru_cache(maxsize=8)
def symmetric_isometry(n: int) -> np.ndarray:
    """Columns: orthonormal basis of the symmetric subspace of C^n (x) C^n"""
    s = np.zeros((n * n, n * (n + 1) // 2))
    col = 0
    for i in range(n):
        for j in range(i, n):
            if i == j:
                s[i * n + i, col] = 1.0
            else:
                s[i * n + j, col] = s[j * n + i, col] = 1.0 / math.sqrt(2.0)
            col += 1
    return s


def single_photon_beamsplitter() -> np.ndarray:
    """8x8 one-photon unitary, same mode ordering at input and output"""
    t, r = 1.0 / math.sqrt(2.0), 1j / math.sqrt(2.0)
    u = np.zeros((N_MODES, N_MODES), dtype=complex)
    for (path, arm_in, pol), col in MODE_INDEX.items():
        for arm_out in (1, 2):
            row = MODE_INDEX[(path, arm_out, pol)]
            u[row, col] = t if arm_out == arm_in else r
    return u


def _side_projector(wiring: DetectorWiring, side: int, rank: int) -> np.ndarray:
    """One-photon projector onto the output modes wired to `side`"""
    p = np.zeros((N_MODES, N_MODES))
    for i, mode in enumerate(OUTPUT_MODES):
        if wiring.side_of(mode.spot) != side:
            continue
        if wiring.polarization_insensitive:
            p[i, i] = 1.0
            continue
        angle = wiring.analyzers[side - 1]
        ket = {Pol.H: math.cos(angle), Pol.V: math.sin(angle)}
        for j, other in enumerate(OUTPUT_MODES):
            if other.spot == mode.spot:
                p[i, j] = ket[mode.pol] * ket[other.pol]
    return np.kron(p, np.eye(rank))


def brute_force_coincidence(state, wiring: DetectorWiring = DetectorWiring()) -> float:
    """Coincidence probability behind the beamsplitter for an input-stage state"""
    if isinstance(state, Ensemble):
        return state.expectation(lambda s: brute_force_coincidence(s, wiring))
    for p in state.photons():
        if p.mode.stage is not Stage.INPUT:
            raise InvalidStageError(f"oracle expects input-stage photons, found {p.mode}")
    if state.is_zero:
        return 0.0

    basis, rank = _temporal_basis((p.delay for p in state.photons()), state.sigma_t)
    n = N_MODES * rank

    def photon_vector(mode: Mode, delay: float) -> np.ndarray:
        e = np.zeros(N_MODES, dtype=complex)
        e[MODE_INDEX[(mode.path, mode.arm, mode.pol)]] = 1.0
        return np.kron(e, basis[delay])

    # one symmetric two-photon vector per source branch
    branch_vectors: Dict[Tuple[int, int], np.ndarray] = {}
    for term in state.terms:
        u = photon_vector(term.photon_a.mode, term.photon_a.delay)
        w = photon_vector(term.photon_b.mode, term.photon_b.delay)
        psi = term.amplitude * (np.kron(u, w) + np.kron(w, u)) / math.sqrt(2.0)
        branch_vectors[term.branch] = branch_vectors.get(term.branch, 0.0) + psi

    s = symmetric_isometry(n)
    u1 = np.kron(single_photon_beamsplitter(), np.eye(rank))
    u_sym = s.T @ np.kron(u1, u1) @ s

    branches: List[Tuple[int, int]] = sorted(branch_vectors)
    outputs = {b: u_sym @ (s.T @ branch_vectors[b]) for b in branches}
    rho_sym = np.zeros((s.shape[1], s.shape[1]), dtype=complex)
    for b in branches:
        for c in branches:
            weight = state.coherence.weight(b, c)
            if weight:
                rho_sym += weight * np.outer(outputs[b], outputs[c].conj())
    rho = s @ rho_sym @ s.T

    p1 = _side_projector(wiring, 1, rank)
    p2 = _side_projector(wiring, 2, rank)
    projector = np.kron(p1, p2) + np.kron(p2, p1)
    return float(np.real(np.trace(projector @ rho)))
