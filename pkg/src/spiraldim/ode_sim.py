"""Adaptive integration of the damped oscillator and generalized Bessel systems.

The damped oscillator is x' = y, y' = -x - h(t) y.  The generalized Bessel
system is x' = y, y' = -(1 - nu^2/t^2) x - ((2-mu)/t) y; at mu = 1 its
solutions are the classical Bessel functions paired with their derivatives.

Integration uses an embedded Runge-Kutta 5(4) pair with dense output.
Samples are emitted so that the unwrapped polar angle changes by at most
``max_angle_step`` between consecutive rows, which keeps the angular
resolution uniform while the radius shrinks.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import RK45

from . import _rk45
from . import damping as dmp
from .errors import DomainError, OriginError, StiffnessError

__all__ = [
    "SystemSpec",
    "Trajectory",
    "integrate",
    "energy_constant",
    "trajectory_to_csv",
    "trajectory_from_csv",
]

DEFAULT_TOL = (1e-9, 1e-12)
DEFAULT_MAX_ANGLE_STEP = math.pi / 16


@dataclass(frozen=True)
class SystemSpec:
    """Either a damped oscillator (with a DampingSpec) or a Bessel system."""

    kind: str  # "oscillator" | "bessel"
    damping: dmp.DampingSpec | None = None
    mu: float = 1.0
    nu: float = 0.0
    t0: float = 1.0

    def __post_init__(self):
        if self.kind == "oscillator":
            if self.damping is None:
                raise DomainError("oscillator system needs a damping spec")
        elif self.kind == "bessel":
            if self.t0 <= 0:
                raise DomainError("bessel system coefficients are singular at t=0; t0 > 0 required")
        else:
            raise DomainError(f"unknown system kind {self.kind!r}")

    @staticmethod
    def damped_oscillator(damping: dmp.DampingSpec) -> "SystemSpec":
        return SystemSpec("oscillator", damping=damping, t0=damping.t0)

    @staticmethod
    def bessel_system(mu: float, nu: float = 0.0, t0: float = 1.0) -> "SystemSpec":
        return SystemSpec("bessel", mu=mu, nu=nu, t0=t0)

    def rhs(self):
        if self.kind == "oscillator":
            spec = self.damping

            def fun(t, z):
                x, y = z
                return (y, -x - dmp.eval_h(spec, t) * y)

        else:
            mu, nu = self.mu, self.nu

            def fun(t, z):
                x, y = z
                return (y, -(1.0 - nu**2 / t**2) * x - (2.0 - mu) / t * y)

        return fun

    def friction(self, t: float) -> float:
        """The coefficient of y in y' (the effective h at time t)."""
        if self.kind == "oscillator":
            return dmp.eval_h(self.damping, t)
        return (2.0 - self.mu) / t


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered samples of a planar solution, angle-step controlled."""

    t: np.ndarray
    x: np.ndarray
    y: np.ndarray
    t_span: tuple
    tolerances: tuple
    max_angle_step: float

    def __post_init__(self):
        if np.any(np.diff(self.t) <= 0):
            raise DomainError("trajectory times must be strictly increasing")
        if np.any((self.x == 0.0) & (self.y == 0.0)):
            raise OriginError("trajectory sample hit the origin")
        dtheta = np.diff(self.theta_unwrapped())
        if dtheta.size and np.max(np.abs(dtheta)) > self.max_angle_step * (1 + 1e-9):
            raise DomainError("angle step between consecutive samples exceeds the bound")

    def __len__(self):
        return self.t.size

    def r(self) -> np.ndarray:
        return np.hypot(self.x, self.y)

    def theta_unwrapped(self) -> np.ndarray:
        return np.unwrap(np.arctan2(self.y, self.x))


def _kernel_dispatch(sys: SystemSpec):
    """Map a SystemSpec onto the JIT kernel's coefficient codes (None -> fallback)."""
    if sys.kind == "bessel":
        return _rk45.BESSEL, sys.mu, sys.nu
    k = sys.damping.kind
    if isinstance(k, dmp.PowerLaw):
        return _rk45.OSC_POWERLAW, k.lam, k.gamma
    if isinstance(k, dmp.BesselStyle):
        return _rk45.OSC_INVT, k.mu, 0.0
    return None


def integrate(
    sys: SystemSpec,
    init: tuple,
    t_end: float,
    tol: tuple = DEFAULT_TOL,
    max_angle_step: float = DEFAULT_MAX_ANGLE_STEP,
    r_stop: float = 0.0,
) -> Trajectory:
    """Integrate from state ``init = (t1, x, y)`` up to t_end.

    ``r_stop`` > 0 truncates the trajectory once the amplitude falls below
    that value (useful when the solution decays below any epsilon of
    interest long before t_end).
    """
    t1, x0, y0 = float(init[0]), float(init[1]), float(init[2])
    if x0 == 0.0 and y0 == 0.0:
        raise OriginError("initial state is the origin; only the zero solution starts there")
    t_start_min = sys.damping.t0 if sys.kind == "oscillator" else sys.t0
    if t1 < t_start_min:
        raise DomainError(f"t1={t1} precedes the system domain start {t_start_min}")
    if t_end <= t1:
        raise DomainError("t_end must exceed t1")
    if not 0.0 < max_angle_step < math.pi / 2:
        raise DomainError("max_angle_step must lie in (0, pi/2)")

    rtol, atol = tol
    if r_stop > 0.0 and r_stop < 1000.0 * atol:
        raise DomainError("r_stop must stay above 1000x the absolute tolerance")

    kernel_args = _kernel_dispatch(sys)
    if kernel_args is not None:
        kind, p1, p2 = kernel_args
        ts, xs, ys, status = _rk45._integrate_kernel(
            kind, p1, p2, t1, x0, y0, float(t_end), rtol, atol, max_angle_step, r_stop
        )
        if status == _rk45.STATUS_STIFF:
            raise StiffnessError("step size underflow")
        return Trajectory(
            t=ts,
            x=xs,
            y=ys,
            t_span=(t1, float(ts[-1])),
            tolerances=(rtol, atol),
            max_angle_step=max_angle_step,
        )

    solver = RK45(sys.rhs(), t1, [x0, y0], t_end, rtol=rtol, atol=atol)

    ts = [t1]
    xs = [x0]
    ys = [y0]
    theta_last = math.atan2(y0, x0)
    t_last = t1
    stopped = False

    def emit(ti, xi, yi):
        nonlocal theta_last, t_last
        ts.append(ti)
        xs.append(xi)
        ys.append(yi)
        raw = math.atan2(yi, xi)
        # unwrap relative to previous sample (gap is < pi by construction)
        delta = (raw - theta_last + math.pi) % (2 * math.pi) - math.pi
        theta_last = theta_last + delta
        t_last = ti

    while solver.status == "running":
        solver.step()
        if solver.status == "failed":
            raise StiffnessError("integrator failed to advance")
        if solver.step_size is not None and solver.step_size < 1e-13 * max(abs(solver.t), 1.0):
            raise StiffnessError("step size underflow")
        dense = solver.dense_output()
        t_hi = solver.t
        # conservative angular speed bound: |theta'| <= 1 + h/2
        speed = 1.0 + 0.5 * sys.friction(max(t_last, t_start_min))
        dt = 0.95 * max_angle_step / max(speed, 1e-3)
        while t_last < t_hi - 1e-15 * max(abs(t_hi), 1.0):
            n = max(1, int(math.ceil((t_hi - t_last) / dt)))
            sub = t_last + (t_hi - t_last) * np.arange(1, n + 1) / n
            zs = dense(sub)
            ok = True
            prev = math.atan2(ys[-1], xs[-1])
            for j in range(n):
                raw = math.atan2(zs[1, j], zs[0, j])
                gap = abs((raw - prev + math.pi) % (2 * math.pi) - math.pi)
                if gap > max_angle_step:
                    ok = False
                    break
                prev = raw
            if not ok:
                dt /= 2.0
                if dt < 1e-13 * max(abs(t_hi), 1.0):
                    raise StiffnessError("angle-step refinement underflow")
                continue
            for j in range(n):
                emit(sub[j], float(zs[0, j]), float(zs[1, j]))
                if r_stop > 0.0 and math.hypot(xs[-1], ys[-1]) <= r_stop:
                    stopped = True
                    break
            break
        if stopped:
            break

    return Trajectory(
        t=np.asarray(ts),
        x=np.asarray(xs),
        y=np.asarray(ys),
        t_span=(t1, ts[-1]),
        tolerances=(rtol, atol),
        max_angle_step=max_angle_step,
    )


def energy_constant(traj: Trajectory, damping: dmp.DampingSpec) -> tuple:
    """Estimate C in r(t)^2 = exp(-H(t)) * (C + delta(t)) along a trajectory.

    Returns (C_estimate, delta_sup_tail) with the sup taken over the last
    quarter of the samples.
    """
    logE = dmp.eval_H(damping, traj.t) + 2.0 * np.log(traj.r())
    E = np.exp(logE)
    c_est = float(E[-1])
    tail = E[3 * len(E) // 4 :]
    return c_est, float(np.max(np.abs(tail - c_est)))


def trajectory_to_csv(traj: Trajectory, path) -> None:
    """Write samples as CSV with header t,x,y at 17 significant digits."""
    data = np.column_stack([traj.t, traj.x, traj.y])
    np.savetxt(path, data, fmt="%.17g", delimiter=",", header="t,x,y", comments="")


def trajectory_from_csv(
    path,
    tolerances: tuple = DEFAULT_TOL,
    max_angle_step: float = DEFAULT_MAX_ANGLE_STEP,
) -> Trajectory:
    data = np.loadtxt(path, delimiter=",", skiprows=1, ndmin=2)
    t, x, y = data[:, 0], data[:, 1], data[:, 2]
    return Trajectory(t, x, y, (float(t[0]), float(t[-1])), tolerances, max_angle_step)
