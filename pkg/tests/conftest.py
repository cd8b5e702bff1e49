import math

import numpy as np
import pytest

from beamswarm.beam import BeamGeometry, WidthKnots

LENGTH = 0.180
THICKNESS = 1.15e-3
MODULUS = 45.36e9
WIDTH = 0.025
REFERENCE_KNOTS_MM = [22.6, 26.9, 30.0, 22.8, 22.8, 26.8, 28.1, 20.8, 23.7, 28.1, 29.6]
# w * t^3 / 12 and E * I, hand-evaluated: 25 mm * (1.15 mm)^3 / 12, times 45.36 GPa
I_UNIFORM = 3.168489583e-12
EI_UNIFORM = 0.1437226875


def reference_knots():
    return WidthKnots(tuple(w * 1e-3 for w in REFERENCE_KNOTS_MM))


@pytest.fixture(scope="session")
def uniform_beam():
    return BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, WIDTH, 200)


@pytest.fixture(scope="session")
def nonuniform_beam():
    return BeamGeometry.from_knots(LENGTH, THICKNESS, MODULUS, reference_knots(), 200)


@pytest.fixture
def quarter_turn_moment():
    # tip moment bending the uniform reference beam through pi/2
    return (math.pi / 2) * EI_UNIFORM / LENGTH


def chain_sum(n, step):
    """Closed-form sums of cos(k*step), sin(k*step) for k = 0..n-1."""
    if step == 0:
        return float(n), 0.0
    half = step / 2
    scale = math.sin(n * half) / math.sin(half)
    angle = (n - 1) * half
    return scale * math.cos(angle), scale * math.sin(angle)


np.set_printoptions(precision=17)
