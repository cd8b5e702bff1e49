import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from beamswarm.beam import (
    BeamGeometry,
    TipLoad,
    TipState,
    WidthKnots,
    generate_random_widths,
    integrate_deflection,
    interpolate_width_profile,
    moment_at,
    second_moment_profile,
)
from beamswarm.oracle import reference_solve

from conftest import EI_UNIFORM, I_UNIFORM, LENGTH, MODULUS, THICKNESS, WIDTH, chain_sum, reference_knots


# --- geometry -------------------------------------------------------------

def test_second_moment_reference_beam(uniform_beam):
    inertia = second_moment_profile(uniform_beam)
    assert inertia.shape == (200,)
    assert inertia == pytest.approx(I_UNIFORM, rel=1e-9)


def test_second_moment_linear_in_width():
    a = BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, WIDTH, 10)
    b = BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, 2 * WIDTH, 10)
    np.testing.assert_allclose(second_moment_profile(b), 2 * second_moment_profile(a), rtol=1e-15)


def test_second_moment_tracks_width_profile(nonuniform_beam):
    widths = np.asarray(nonuniform_beam.unit_widths)
    np.testing.assert_allclose(second_moment_profile(nonuniform_beam), widths * THICKNESS**3 / 12, rtol=1e-15)


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(length=-1.0),
        dict(thickness=0.0),
        dict(youngs_modulus=-5.0),
        dict(unit_widths=()),
        dict(unit_widths=(0.01, -0.01)),
    ],
)
def test_geometry_rejects_invalid(kwargs):
    base = dict(length=LENGTH, thickness=THICKNESS, youngs_modulus=MODULUS, unit_widths=(WIDTH,) * 4)
    base.update(kwargs)
    with pytest.raises(ValueError):
        BeamGeometry(**base)


def test_unit_length_is_derived(uniform_beam):
    assert uniform_beam.unit_length == LENGTH / 200


# --- width profile --------------------------------------------------------

def test_profile_hits_knots_at_stations():
    knots = reference_knots()
    prof = interpolate_width_profile(knots, 200)
    assert len(prof) == 200
    # unit i (1-based) sits i units from the root; every 20th lands on a knot
    for k in range(1, 11):
        assert prof[20 * k - 1] == knots.knot_widths[k]
    assert prof[19] == pytest.approx(26.9e-3, abs=0)


def test_profile_segment_midpoint():
    prof = interpolate_width_profile(reference_knots(), 200)
    assert prof[9] == pytest.approx((22.6e-3 + 26.9e-3) / 2, rel=1e-14)


def test_profile_constant_knots():
    prof = interpolate_width_profile(WidthKnots((0.025,) * 11), 200)
    assert prof == [0.025] * 200


def test_profile_rejects_misaligned_units():
    with pytest.raises(ValueError, match="multiple"):
        interpolate_width_profile(reference_knots(), 205)


@given(st.lists(st.floats(1e-3, 0.05), min_size=2, max_size=12), st.integers(1, 8))
def test_profile_stays_between_neighbour_knots(widths, per_seg):
    knots = WidthKnots(tuple(widths))
    prof = interpolate_width_profile(knots, per_seg * knots.n_segments)
    for i, w in enumerate(prof, start=1):
        seg = min((i - 1) // per_seg, knots.n_segments - 1)
        lo, hi = sorted(widths[seg : seg + 2])
        assert lo - 1e-15 <= w <= hi + 1e-15


def test_random_widths_degenerate_interval():
    knots = generate_random_widths(0.025, 0.025, 11, seed=123)
    assert knots.knot_widths == (0.025,) * 11


def test_random_widths_deterministic():
    a = generate_random_widths(0.02, 0.03, 11, seed=7)
    b = generate_random_widths(0.02, 0.03, 11, seed=7)
    c = generate_random_widths(0.02, 0.03, 11, seed=8)
    assert a == b
    assert a != c


def test_random_widths_law_of_large_numbers():
    # uniform on [20, 30] mm has mean 25 mm and sd 10/sqrt(12) mm; 10k draws -> sd of mean ~0.03 mm
    knots = generate_random_widths(0.020, 0.030, 10_000, seed=11)
    mean = np.mean(knots.knot_widths)
    assert 0.0247 <= mean <= 0.0253
    assert min(knots.knot_widths) >= 0.020 and max(knots.knot_widths) <= 0.030


@pytest.mark.parametrize("lower", [0.0, -0.01])
def test_random_widths_rejects_non_positive_lower(lower):
    with pytest.raises(ValueError):
        generate_random_widths(lower, 0.03, 11, seed=0)


# --- moment ---------------------------------------------------------------

def test_moment_pure_couple():
    assert moment_at(TipLoad(0.0, 0.3, 2.0), TipState(0.1, -0.05, 0.2), 0.03, 0.01) == 2.0


def test_moment_at_tip_is_couple():
    tip = TipState(0.15, -0.07, -0.8)
    assert moment_at(TipLoad(7.0, -2.0, -0.3), tip, tip.qx, tip.qy) == -0.3


def test_moment_downward_force_lever():
    # F sin(phi) (Qx - x) = 1 * sin(-pi/2) * 0.1
    m = moment_at(TipLoad(1.0, -math.pi / 2, 0.0), TipState(0.1, 0.0, 0.0), 0.0, 0.0)
    assert m == pytest.approx(-0.1, abs=1e-16)


@given(
    st.floats(0, 20), st.floats(-math.pi + 1e-9, math.pi), st.floats(-1, 1),
    st.floats(-0.2, 0.2), st.floats(-0.2, 0.2), st.floats(0.1, 5),
)
def test_moment_linear_in_loads(force, phi, couple, x, y, alpha):
    tip = TipState(0.15, -0.05, 0.0)
    base = moment_at(TipLoad(force, phi, couple), tip, x, y)
    scaled = moment_at(TipLoad(force * alpha, phi, couple * alpha), tip, x, y)
    assert scaled == pytest.approx(alpha * base, rel=1e-12, abs=1e-14)


# --- integration ----------------------------------------------------------

def test_unloaded_beam_is_straight(uniform_beam):
    curve, tip = integrate_deflection(uniform_beam, TipLoad(), TipState(0.05, 0.1, 1.0))
    assert (tip.qx, tip.qy, tip.theta0) == pytest.approx((LENGTH, 0.0, 0.0), abs=1e-15)
    assert np.all(curve.y == 0) and np.all(curve.theta == 0)
    np.testing.assert_allclose(curve.x, np.arange(201) * LENGTH / 200, rtol=0, atol=1e-15)


def test_root_is_clamped(uniform_beam):
    curve, _ = integrate_deflection(uniform_beam, TipLoad(5.0, -2.0, 0.1), TipState(0.1, -0.1, -1.0))
    assert tuple(curve.points[0]) == (0.0, 0.0, 0.0)
    assert curve.points.shape == (201, 3)


def test_pure_moment_matches_discrete_closed_form(uniform_beam, quarter_turn_moment):
    curve, tip = integrate_deflection(uniform_beam, TipLoad(0.0, 0.0, quarter_turn_moment), TipState(0, 0, 0))
    dl = LENGTH / 200
    step = (math.pi / 2) / 200
    cx, sy = chain_sum(200, step)
    assert tip.theta0 == pytest.approx(math.pi / 2, abs=1e-12)
    assert tip.qx == pytest.approx(dl * cx, rel=1e-12)
    assert tip.qy == pytest.approx(dl * sy, rel=1e-12)


def test_pure_moment_close_to_arc(uniform_beam, quarter_turn_moment):
    _, tip = integrate_deflection(uniform_beam, TipLoad(0.0, 0.0, quarter_turn_moment), TipState(0, 0, 0))
    radius = EI_UNIFORM / quarter_turn_moment
    err = math.hypot(tip.qx - radius, tip.qy - radius)
    # explicit chord scheme is first order: error ~ dl / sqrt(2)
    assert err < 2 * LENGTH / 200


@pytest.mark.parametrize("nl", [1, 7, 50, 200, 999])
def test_pure_moment_angle_independent_of_units(nl):
    beam = BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, WIDTH, nl)
    moment = 0.9 * EI_UNIFORM / LENGTH
    _, tip = integrate_deflection(beam, TipLoad(0.0, 0.0, moment), TipState(0, 0, 0))
    assert tip.theta0 == pytest.approx(0.9, abs=1e-12)


def test_linear_limit_at_oracle_tip(uniform_beam):
    load = TipLoad(0.1, -math.pi / 2, 0.0)
    oracle = reference_solve(uniform_beam, load).tip
    _, tip = integrate_deflection(uniform_beam, load, oracle)
    assert abs(tip.qy) == pytest.approx(1.353e-3, rel=0.01)


loads = st.builds(
    TipLoad,
    force=st.floats(0, 15),
    phi=st.floats(-math.pi + 1e-6, math.pi),
    moment=st.floats(-0.6, 0.6),
)
guesses = st.builds(TipState, st.floats(-0.18, 0.18), st.floats(-0.18, 0.18), st.floats(-math.pi, math.pi))


@settings(max_examples=200, deadline=None)
@given(loads, guesses)
def test_chords_keep_unit_length(load, guess):
    beam = BeamGeometry.from_knots(LENGTH, THICKNESS, MODULUS, reference_knots(), 200)
    curve, _ = integrate_deflection(beam, load, guess)
    np.testing.assert_allclose(curve.chord_lengths(), beam.unit_length, rtol=1e-12)


@settings(max_examples=100, deadline=None)
@given(loads, guesses)
def test_mirror_symmetry(load, guess):
    beam = BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, WIDTH, 200)
    phi = -load.phi if load.phi != math.pi else math.pi
    mirrored = TipLoad(load.force, phi, -load.moment)
    c1, _ = integrate_deflection(beam, load, guess)
    c2, _ = integrate_deflection(beam, mirrored, TipState(guess.qx, -guess.qy, -guess.theta0))
    np.testing.assert_allclose(c2.x, c1.x, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(c2.y, -c1.y, rtol=1e-12, atol=1e-15)
    np.testing.assert_allclose(c2.theta, -c1.theta, rtol=1e-12, atol=1e-15)


@settings(max_examples=50, deadline=None)
@given(loads, guesses, st.floats(0.1, 3))
def test_first_unit_bend_scales_with_load(load, guess, alpha):
    beam = BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, WIDTH, 200)
    c1, _ = integrate_deflection(beam, load, guess)
    c2, _ = integrate_deflection(beam, load.scaled(alpha), guess)
    # the first unit's moment arm is fixed by the guess, so its bend is linear in the loads
    assert c2.theta[1] == pytest.approx(alpha * c1.theta[1], rel=1e-12, abs=1e-300)


def test_discretisation_error_halves():
    load = TipLoad(6.958, -5 * math.pi / 6, 0.0)
    tips = []
    for nl in (100, 200, 400, 800):
        beam = BeamGeometry.uniform(LENGTH, THICKNESS, MODULUS, WIDTH, nl)
        tips.append(reference_solve(beam, load).tip.as_array()[:2])
    diffs = [np.linalg.norm(tips[k + 1] - tips[k]) for k in range(3)]
    assert diffs[0] < LENGTH / 100
    for a, b in zip(diffs, diffs[1:]):
        assert a / b == pytest.approx(2.0, rel=0.2)
