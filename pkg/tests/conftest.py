import math

import numpy as np
import pytest

from spiraldim import damping as dmp
from spiraldim import ode_sim, polar_curve, spiral_gen


@pytest.fixture(scope="session")
def traj_lam1():
    """Damped oscillator h = 1/t from (1, 0) at t = 1 up to t = 1e4."""
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    return ode_sim.integrate(ode_sim.SystemSpec.damped_oscillator(spec), (1.0, 1.0, 0.0), 1e4)


@pytest.fixture(scope="session")
def curve_lam1(traj_lam1):
    return polar_curve.to_polar(traj_lam1)


@pytest.fixture(scope="session")
def power_half():
    """Generator spiral f = phi^(-1/2) over [2*pi, 128*pi]."""
    return spiral_gen.generate(spiral_gen.SpiralSpec.power(0.5, 2 * math.pi, 128 * math.pi))


@pytest.fixture()
def circle_curve():
    """Constant amplitude 1 over five turns (not a contracting spiral)."""
    phi = np.arange(2 * math.pi, 12 * math.pi + 1e-12, math.pi / 16)
    return polar_curve.PolarCurve(
        phi, np.ones_like(phi), source="synthetic", monotone_certified=True
    )
