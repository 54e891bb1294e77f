"""
Helpers shared by test modules
"""

from core.optics.detection import Curve, DetectorWiring, coincidence_probability
from core.optics.elements import ARM2_INPUTS, ElementKind, ElementOp, apply_element
from core.optics.source import SPEED_OF_LIGHT


def hom_curve(state, xs, wiring: DetectorWiring = DetectorWiring()) -> Curve:
    """Arm-2 delay then beamsplitter, coincidence per path difference"""
    ps = []
    for dx in xs:
        delayed = apply_element(ElementOp(ElementKind.DELAY, ARM2_INPUTS, tau=dx / SPEED_OF_LIGHT), state)
        out = apply_element(ElementOp(ElementKind.BEAMSPLITTER), delayed)
        ps.append(coincidence_probability(out, wiring))
    return Curve.from_arrays(xs, ps)


def hom_point(state, dx: float = 0.0, wiring: DetectorWiring = DetectorWiring()) -> float:
    return hom_curve(state, [dx], wiring).probabilities[0]
