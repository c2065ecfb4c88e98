import math

import numpy as np
import pytest

from spiraldim import spiral_gen
from spiraldim.errors import SpecError


def test_power_spiral_samples():
    spec = spiral_gen.SpiralSpec.power(0.5, 2 * math.pi, 100 * math.pi)
    curve = spiral_gen.generate(spec)
    assert curve.monotone_certified
    assert math.isclose(curve.phi[0], 2 * math.pi)
    assert math.isclose(curve.f[0], (2 * math.pi) ** -0.5, rel_tol=1e-15)
    assert np.allclose(curve.f, curve.phi**-0.5, rtol=1e-15)
    assert np.max(np.diff(curve.phi)) <= math.pi / 16 * (1 + 1e-12)


def test_scaled_power_spiral_rescales_amplitude():
    base = spiral_gen.generate(spiral_gen.SpiralSpec.power(0.5, 2 * math.pi, 20 * math.pi))
    scaled = spiral_gen.generate(
        spiral_gen.SpiralSpec.scaled_power(7.3, 0.5, 2 * math.pi, 20 * math.pi)
    )
    assert np.allclose(scaled.f, 7.3 * base.f, rtol=1e-15)


def test_exponential_spiral_samples():
    curve = spiral_gen.generate(spiral_gen.SpiralSpec.exponential(0.1, 2 * math.pi, 20 * math.pi))
    assert np.allclose(curve.f, np.exp(-0.1 * curve.phi), rtol=1e-14)


def test_known_dimension():
    assert math.isclose(
        spiral_gen.known_dimension(spiral_gen.SpiralSpec.power(0.5, 2 * math.pi, 20 * math.pi)),
        4.0 / 3.0,
    )
    assert spiral_gen.known_dimension(
        spiral_gen.SpiralSpec.power(1.0, 2 * math.pi, 20 * math.pi)
    ) == 1.0
    assert spiral_gen.known_dimension(
        spiral_gen.SpiralSpec.exponential(0.1, 2 * math.pi, 20 * math.pi)
    ) == 1.0


def test_invalid_parameters():
    with pytest.raises(SpecError):
        spiral_gen.SpiralSpec.power(-0.5, 2 * math.pi, 20 * math.pi)
    with pytest.raises(SpecError):
        spiral_gen.SpiralSpec.power(0.5, 20 * math.pi, 2 * math.pi)
    with pytest.raises(SpecError):
        spiral_gen.SpiralSpec.exponential(-0.1, 2 * math.pi, 20 * math.pi)
