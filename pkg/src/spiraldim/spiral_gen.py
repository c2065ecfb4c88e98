"""Analytic spiral generators with known box-counting dimension.

``PowerSpiral(alpha)`` samples f(phi) = phi**(-alpha); its graph has box
dimension 2/(1+alpha) for alpha in (0,1) and 1 at alpha = 1.  ``ExpSpiral``
is a rectifiable negative control (finite length, dimension 1).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import SpecError
from .polar_curve import DEFAULT_GRID_STEP, PolarCurve

__all__ = ["SpiralSpec", "generate", "known_dimension"]


@dataclass(frozen=True)
class SpiralSpec:
    kind: str  # "power" | "scaled_power" | "exp"
    phi1: float
    phi2: float
    alpha: float = 0.5
    scale: float = 1.0
    rate: float = 0.1

    def __post_init__(self):
        if self.kind not in ("power", "scaled_power", "exp"):
            raise SpecError(f"unknown spiral kind {self.kind!r}")
        if self.phi1 <= 0 or self.phi2 <= self.phi1:
            raise SpecError("need 0 < phi1 < phi2")
        if self.kind in ("power", "scaled_power"):
            if not 0 < self.alpha <= 1:
                raise SpecError("power spiral exponent must lie in (0, 1]")
            if self.alpha == 1 and self.phi1 <= 1:
                raise SpecError("alpha = 1 requires phi1 > 1")
        if self.kind == "scaled_power" and self.scale <= 0:
            raise SpecError("scale must be positive")
        if self.kind == "exp" and self.rate <= 0:
            raise SpecError("decay rate must be positive")

    @staticmethod
    def power(alpha: float, phi1: float, phi2: float) -> "SpiralSpec":
        return SpiralSpec("power", phi1, phi2, alpha=alpha)

    @staticmethod
    def scaled_power(scale: float, alpha: float, phi1: float, phi2: float) -> "SpiralSpec":
        return SpiralSpec("scaled_power", phi1, phi2, alpha=alpha, scale=scale)

    @staticmethod
    def exponential(rate: float, phi1: float, phi2: float) -> "SpiralSpec":
        return SpiralSpec("exp", phi1, phi2, rate=rate)


def generate(spec: SpiralSpec, grid_step: float = DEFAULT_GRID_STEP) -> PolarCurve:
    """Sample the spiral on a uniform phi grid (step at most pi/16)."""
    if grid_step <= 0 or grid_step > DEFAULT_GRID_STEP + 1e-12:
        raise SpecError("grid_step must lie in (0, pi/16]")
    n = int(math.floor((spec.phi2 - spec.phi1) / grid_step)) + 1
    phi = spec.phi1 + grid_step * np.arange(n)
    if spec.kind == "power":
        f = phi ** (-spec.alpha)
    elif spec.kind == "scaled_power":
        f = spec.scale * phi ** (-spec.alpha)
    else:
        f = np.exp(-spec.rate * phi)
    return PolarCurve(phi, f, source=f"spiral:{spec.kind}", monotone_certified=True)


def known_dimension(spec: SpiralSpec) -> float:
    """The analytically known box dimension of the generated spiral."""
    if spec.kind in ("power", "scaled_power") and spec.alpha < 1:
        return 2.0 / (1.0 + spec.alpha)
    return 1.0
