"""Spiral normal form r = f(phi): angle unwrapping, resampling, lengths.

A clockwise solution spiral has unwrapped angle theta(t) decreasing to
-infinity; the analysis variable is phi = -theta, so that f(phi) = r at the
time theta = -phi.  Geometrically the curve (f(phi) cos phi, f(phi) sin phi)
is the mirror image (x, -y) of the trajectory, which has the same box
dimension by symmetry.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import PchipInterpolator
from scipy.spatial import ConvexHull, QhullError

from .errors import DomainError, NotSpiralError, PositivityError, RangeError
from .ode_sim import Trajectory

__all__ = [
    "PolarCurve",
    "to_polar",
    "arc_length",
    "turn_decrement",
    "diameter",
    "fprime_grid",
    "curve_to_csv",
    "curve_from_csv",
]

DEFAULT_GRID_STEP = math.pi / 16
MONOTONE_SLOPE = -0.1  # certified rotation needs d(theta)/dt below this
MIN_CERTIFIED_TURNS = 4
MONOTONE_SLACK = 1e-12


@dataclass(frozen=True)
class PolarCurve:
    """Amplitude f sampled on a strictly increasing winding-angle grid."""

    phi: np.ndarray
    f: np.ndarray
    source: str = "unknown"
    monotone_certified: bool = False
    mirrored: bool = False

    def __post_init__(self):
        if self.phi.size != self.f.size or self.phi.size < 2:
            raise DomainError("polar curve needs matching phi/f arrays with >= 2 samples")
        if np.any(np.diff(self.phi) <= 0):
            raise DomainError("phi must be strictly increasing")
        if np.any(self.f <= 0):
            raise PositivityError("amplitude f must be positive everywhere")
        if self.monotone_certified and np.any(np.diff(self.f) > MONOTONE_SLACK):
            raise DomainError("monotone_certified curve has increasing f samples")

    @property
    def phi_span(self) -> tuple:
        return float(self.phi[0]), float(self.phi[-1])

    def points(self) -> tuple:
        """Cartesian sample points (x, y) of the graph r = f(phi)."""
        return self.f * np.cos(self.phi), self.f * np.sin(self.phi)

    def f_at(self, phi):
        """Linear interpolation of f inside the span."""
        phi_arr = np.asarray(phi, dtype=float)
        lo, hi = self.phi_span
        if np.any(phi_arr < lo - 1e-12) or np.any(phi_arr > hi + 1e-12):
            raise RangeError(f"phi outside curve span [{lo}, {hi}]")
        out = np.interp(phi_arr, self.phi, self.f)
        return float(out) if np.ndim(out) == 0 else out


def to_polar(traj: Trajectory, mirror: bool = True, grid_step: float = DEFAULT_GRID_STEP) -> PolarCurve:
    """Convert a trajectory into the spiral normal form r = f(phi).

    Unwraps the angle, drops the head before rotation is certified monotone
    (and any samples with phi <= 0), then resamples f onto a uniform phi grid
    by shape-preserving cubic interpolation.
    """
    if grid_step > DEFAULT_GRID_STEP + 1e-12:
        raise DomainError("grid_step must not exceed pi/16")
    theta = traj.theta_unwrapped()
    r = traj.r()
    slopes = np.diff(theta) / np.diff(traj.t)
    bad = np.nonzero(slopes >= MONOTONE_SLOPE)[0]
    onset = int(bad[-1] + 1) if bad.size else 0

    phi = -theta[onset:]
    f = r[onset:]
    # keep only positive winding angles (phi is increasing past the onset)
    pos = np.nonzero(phi > 0)[0]
    if pos.size == 0:
        raise NotSpiralError("angle never wound past zero in the certified region")
    phi = phi[pos[0] :]
    f = f[pos[0] :]
    if phi.size < 2 or phi[-1] - phi[0] < MIN_CERTIFIED_TURNS * 2 * math.pi:
        raise NotSpiralError(
            f"fewer than {MIN_CERTIFIED_TURNS} certified monotone turns in the trajectory span"
        )

    n = int(math.floor((phi[-1] - phi[0]) / grid_step)) + 1
    grid = phi[0] + grid_step * np.arange(n)
    f_res = PchipInterpolator(phi, f)(grid)
    certified = bool(np.all(np.diff(f_res) <= MONOTONE_SLACK))
    return PolarCurve(
        phi=grid,
        f=f_res,
        source=f"trajectory[{traj.t_span[0]:g},{traj.t_span[1]:g}]",
        monotone_certified=certified,
        mirrored=mirror,
    )


def _cumulative_lengths(curve: PolarCurve) -> np.ndarray:
    x, y = curve.points()
    seg = np.hypot(np.diff(x), np.diff(y))
    return np.concatenate([[0.0], np.cumsum(seg)])


def arc_length(curve: PolarCurve, phi_a: float, phi_b: float) -> float:
    """Polyline length between two angles.

    The curve between grid samples is the Cartesian chord, and partial
    chords are split proportionally in the angle parameter, so lengths add
    exactly across intermediate split points.
    """
    lo, hi = curve.phi_span
    if not (lo - 1e-12 <= phi_a <= phi_b <= hi + 1e-12):
        raise RangeError(f"need {lo} <= phi_a <= phi_b <= {hi}")
    if phi_a == phi_b:
        return 0.0
    cum = _cumulative_lengths(curve)

    def at(p):
        i = np.searchsorted(curve.phi, p, side="right") - 1
        i = min(max(i, 0), curve.phi.size - 2)
        u = (p - curve.phi[i]) / (curve.phi[i + 1] - curve.phi[i])
        return cum[i] + u * (cum[i + 1] - cum[i])

    return float(at(phi_b) - at(phi_a))


def turn_decrement(curve: PolarCurve, phi: float) -> float:
    """f(phi) - f(phi + 2*pi); positive for genuinely contracting spirals."""
    lo, hi = curve.phi_span
    if phi < lo - 1e-12 or phi + 2 * math.pi > hi + 1e-12:
        raise RangeError("phi and phi+2*pi must both lie in the curve span")
    return float(curve.f_at(phi) - curve.f_at(phi + 2 * math.pi))


def diameter(curve: PolarCurve) -> float:
    """Largest pairwise distance between sample points (exact)."""
    x, y = curve.points()
    pts = np.column_stack([x, y])
    if pts.shape[0] > 16:
        try:
            hull = ConvexHull(pts)
            pts = pts[hull.vertices]
        except QhullError:
            pass  # degenerate (collinear) input: brute force below
    if pts.shape[0] > 4096:
        best = 0.0
        for i in range(0, pts.shape[0], 1024):
            blk = pts[i : i + 1024]
            d2 = ((blk[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
            best = max(best, float(d2.max()))
        return math.sqrt(best)
    d2 = ((pts[:, None, :] - pts[None, :, :]) ** 2).sum(-1)
    return float(np.sqrt(d2.max()))


def fprime_grid(curve: PolarCurve) -> np.ndarray:
    """df/dphi by central differences on the sample grid (one-sided at ends)."""
    return np.gradient(curve.f, curve.phi)


def curve_to_csv(curve: PolarCurve, path) -> None:
    data = np.column_stack([curve.phi, curve.f])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="phi,f", comments="")


def curve_from_csv(path, source: str = "csv", monotone_certified: bool = False) -> PolarCurve:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    return PolarCurve(data[:, 0], data[:, 1], source=source, monotone_certified=monotone_certified)
