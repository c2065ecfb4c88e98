import math

import numpy as np
import pytest

from spiraldim import damping as dmp
from spiraldim import ode_sim, polar_curve
from spiraldim.errors import NotSpiralError, RangeError


def test_circle_arc_length_and_diameter(circle_curve):
    # polyline inscribed in the unit circle: 32 chords per turn
    one_turn = polar_curve.arc_length(circle_curve, 2 * math.pi, 4 * math.pi)
    chord_sum = 32 * 2 * math.sin(math.pi / 32)
    assert math.isclose(one_turn, chord_sum, rel_tol=1e-12)
    assert math.isclose(one_turn, 2 * math.pi, rel_tol=2e-3)
    assert math.isclose(polar_curve.diameter(circle_curve), 2.0, rel_tol=1e-12)


def test_to_polar_certifies_decaying_solution(curve_lam1, traj_lam1):
    assert curve_lam1.monotone_certified
    assert np.all(np.diff(curve_lam1.f) <= polar_curve.MONOTONE_SLACK)
    lo, hi = curve_lam1.phi_span
    assert hi - lo >= 4 * 2 * math.pi
    # grid step respected
    assert np.max(np.diff(curve_lam1.phi)) <= polar_curve.DEFAULT_GRID_STEP * (1 + 1e-9)
    # amplitude agrees with the trajectory radius at matching angles
    r = traj_lam1.r()
    phi_traj = -traj_lam1.theta_unwrapped()
    sel = (phi_traj > lo) & (phi_traj < hi)
    err = np.abs(curve_lam1.f_at(phi_traj[sel]) - r[sel]) / r[sel]
    assert np.max(err) < 5e-3


def test_turn_decrement_positive(curve_lam1):
    lo, hi = curve_lam1.phi_span
    probes = np.linspace(lo, hi - 2 * math.pi, 50)
    decs = np.array([polar_curve.turn_decrement(curve_lam1, p) for p in probes])
    assert np.all(decs > 0)


def test_f_at_outside_span_raises(curve_lam1):
    lo, hi = curve_lam1.phi_span
    with pytest.raises(RangeError):
        curve_lam1.f_at(lo - 1.0)
    with pytest.raises(RangeError):
        curve_lam1.f_at(hi + 1.0)


def test_arc_length_additivity(curve_lam1):
    lo, hi = curve_lam1.phi_span
    mid = 0.5 * (lo + hi)
    total = polar_curve.arc_length(curve_lam1, lo, hi)
    split = polar_curve.arc_length(curve_lam1, lo, mid) + polar_curve.arc_length(
        curve_lam1, mid, hi
    )
    assert math.isclose(total, split, rel_tol=1e-9)


def test_short_trajectory_not_a_spiral():
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    traj = ode_sim.integrate(ode_sim.SystemSpec.damped_oscillator(spec), (1.0, 1.0, 0.0), 10.0)
    with pytest.raises(NotSpiralError):
        polar_curve.to_polar(traj)


def test_curve_csv_roundtrip(tmp_path, curve_lam1):
    path = tmp_path / "curve.csv"
    polar_curve.curve_to_csv(curve_lam1, path)
    back = polar_curve.curve_from_csv(path)
    assert np.array_equal(back.phi, curve_lam1.phi)
    assert np.array_equal(back.f, curve_lam1.f)


def test_fprime_grid_nonpositive_for_decaying_spiral(curve_lam1):
    fp = polar_curve.fprime_grid(curve_lam1)
    assert np.max(fp) <= 1e-12 * np.max(curve_lam1.f)
