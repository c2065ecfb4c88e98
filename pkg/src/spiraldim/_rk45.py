"""Embedded Dormand-Prince 5(4) stepper with dense output, JIT-compiled.

The kernel integrates the two planar systems used in this package and emits
samples on the fly so that a rigorous bound on the polar-angle change between
consecutive samples never exceeds the requested maximum.  Closed-form
coefficient families only; sampled damping goes through the scipy fallback in
:mod:`spiraldim.ode_sim`.
"""

from __future__ import annotations

import numpy as np
from numba import njit

# system kind codes
OSC_POWERLAW = 0  # friction lam * t**-gamma      (p1=lam, p2=gamma)
OSC_INVT = 1      # friction (2-mu)/t             (p1=mu)
BESSEL = 2        # full generalized Bessel system (p1=mu, p2=nu)

STATUS_OK = 0
STATUS_RSTOP = 1
STATUS_STIFF = 2

# Dormand-Prince 5(4) tableau
_A21 = 1 / 5
_A31, _A32 = 3 / 40, 9 / 40
_A41, _A42, _A43 = 44 / 45, -56 / 15, 32 / 9
_A51, _A52, _A53, _A54 = 19372 / 6561, -25360 / 2187, 64448 / 6561, -212 / 729
_A61, _A62, _A63, _A64, _A65 = 9017 / 3168, -355 / 33, 46732 / 5247, 49 / 176, -5103 / 18656
_B1, _B3, _B4, _B5, _B6 = 35 / 384, 500 / 1113, 125 / 192, -2187 / 6784, 11 / 84
_E1, _E3, _E4, _E5, _E6, _E7 = (
    71 / 57600,
    -71 / 16695,
    71 / 1920,
    -17253 / 339200,
    22 / 525,
    -1 / 40,
)
# dense-output (continuous extension) coefficients, Hairer & Wanner
_D1 = -12715105075.0 / 11282082432.0
_D3 = 87487479700.0 / 32700410799.0
_D4 = -10690763975.0 / 1880347072.0
_D5 = 701980252875.0 / 199316789632.0
_D6 = -1453857185.0 / 822651844.0
_D7 = 69997945.0 / 29380423.0


@njit(cache=True, inline="always")
def _rhs(kind, p1, p2, t, x, y):
    if kind == OSC_POWERLAW:
        return y, -x - (p1 * t ** (-p2)) * y
    elif kind == OSC_INVT:
        return y, -x - ((2.0 - p1) / t) * y
    else:
        return y, -(1.0 - (p2 * p2) / (t * t)) * x - ((2.0 - p1) / t) * y


@njit(cache=True, inline="always")
def _angular_speed_bound(kind, p1, p2, t):
    # |theta'| <= 1 + h(t)/2 for the oscillator; the Bessel system gains a
    # nu^2/t^2 term from the modified restoring force.
    if kind == OSC_POWERLAW:
        return 1.0 + 0.5 * p1 * t ** (-p2)
    elif kind == OSC_INVT:
        return 1.0 + 0.5 * (2.0 - p1) / t
    else:
        return 1.0 + (p2 * p2) / (t * t) + 0.5 * (2.0 - p1) / t


@njit(cache=True)
def _integrate_kernel(kind, p1, p2, t1, x0, y0, t_end, rtol, atol, target, r_stop):
    cap = 65536
    ts = np.empty(cap)
    xs = np.empty(cap)
    ys = np.empty(cap)
    n = 0
    ts[n] = t1
    xs[n] = x0
    ys[n] = y0
    n += 1

    t = t1
    x = x0
    y = y0
    k1x, k1y = _rhs(kind, p1, p2, t, x, y)
    h = 1e-6 * max(abs(t_end - t1), 1.0)
    h = min(h, t_end - t1)

    t_lastemit = t1
    budget = 0.0  # rigorous bound on |theta(t) - theta(t_lastemit)|
    status = STATUS_OK

    while t < t_end:
        if h > t_end - t:
            h = t_end - t
        if h < 1e-13 * max(abs(t), 1.0):
            status = STATUS_STIFF
            break

        k2x, k2y = _rhs(kind, p1, p2, t + _A21 * h, x + h * _A21 * k1x, y + h * _A21 * k1y)
        k3x, k3y = _rhs(
            kind, p1, p2, t + 0.3 * h,
            x + h * (_A31 * k1x + _A32 * k2x),
            y + h * (_A31 * k1y + _A32 * k2y),
        )
        k4x, k4y = _rhs(
            kind, p1, p2, t + 0.8 * h,
            x + h * (_A41 * k1x + _A42 * k2x + _A43 * k3x),
            y + h * (_A41 * k1y + _A42 * k2y + _A43 * k3y),
        )
        k5x, k5y = _rhs(
            kind, p1, p2, t + (8.0 / 9.0) * h,
            x + h * (_A51 * k1x + _A52 * k2x + _A53 * k3x + _A54 * k4x),
            y + h * (_A51 * k1y + _A52 * k2y + _A53 * k3y + _A54 * k4y),
        )
        k6x, k6y = _rhs(
            kind, p1, p2, t + h,
            x + h * (_A61 * k1x + _A62 * k2x + _A63 * k3x + _A64 * k4x + _A65 * k5x),
            y + h * (_A61 * k1y + _A62 * k2y + _A63 * k3y + _A64 * k4y + _A65 * k5y),
        )
        x1 = x + h * (_B1 * k1x + _B3 * k3x + _B4 * k4x + _B5 * k5x + _B6 * k6x)
        y1 = y + h * (_B1 * k1y + _B3 * k3y + _B4 * k4y + _B5 * k5y + _B6 * k6y)
        k7x, k7y = _rhs(kind, p1, p2, t + h, x1, y1)

        errx = h * (_E1 * k1x + _E3 * k3x + _E4 * k4x + _E5 * k5x + _E6 * k6x + _E7 * k7x)
        erry = h * (_E1 * k1y + _E3 * k3y + _E4 * k4y + _E5 * k5y + _E6 * k6y + _E7 * k7y)
        sx = atol + rtol * max(abs(x), abs(x1))
        sy = atol + rtol * max(abs(y), abs(y1))
        errnorm = np.sqrt(0.5 * ((errx / sx) ** 2 + (erry / sy) ** 2))

        if errnorm > 1.0:
            h = h * max(0.2, 0.9 * errnorm ** (-0.2))
            continue

        # dense-output polynomial over [t, t+h]
        dx = x1 - x
        dy = y1 - y
        bx = h * k1x - dx
        by = h * k1y - dy
        r4x = dx - h * k7x - bx
        r4y = dy - h * k7y - by
        r5x = h * (_D1 * k1x + _D3 * k3x + _D4 * k4x + _D5 * k5x + _D6 * k6x + _D7 * k7x)
        r5y = h * (_D1 * k1y + _D3 * k3y + _D4 * k4y + _D5 * k5y + _D6 * k6y + _D7 * k7y)

        t_new = t + h
        s_a = _angular_speed_bound(kind, p1, p2, t)
        s_b = _angular_speed_bound(kind, p1, p2, t_new)
        speed = max(s_a, s_b)

        # margin absorbs dense-output interpolation error in the angle bound;
        # near the amplitude floor the polar angle carries noise ~ atol/r, so
        # the margin scales with it (clamped to half the nominal step)
        r_now = np.sqrt(x * x + y * y)
        tgt = target * (1.0 - 1e-6) - 8.0 * atol / max(r_now, 1e-300)
        if tgt < 0.5 * target:
            tgt = 0.5 * target

        tau = t + (tgt - budget) / speed
        emitted = False
        while tau <= t_new:
            th = (tau - t) / h
            ex = x + th * (dx + (1.0 - th) * (bx + th * (r4x + (1.0 - th) * r5x)))
            ey = y + th * (dy + (1.0 - th) * (by + th * (r4y + (1.0 - th) * r5y)))
            if n >= cap:
                cap *= 2
                nts = np.empty(cap)
                nxs = np.empty(cap)
                nys = np.empty(cap)
                nts[:n] = ts[:n]
                nxs[:n] = xs[:n]
                nys[:n] = ys[:n]
                ts, xs, ys = nts, nxs, nys
            ts[n] = tau
            xs[n] = ex
            ys[n] = ey
            n += 1
            emitted = True
            t_lastemit = tau
            if r_stop > 0.0 and ex * ex + ey * ey <= r_stop * r_stop:
                return ts[:n], xs[:n], ys[:n], STATUS_RSTOP
            tau += tgt / speed
        if emitted:
            budget = speed * (t_new - t_lastemit)
        else:
            budget += speed * h

        t = t_new
        x = x1
        y = y1
        k1x, k1y = k7x, k7y
        if errnorm == 0.0:
            h = 5.0 * h
        else:
            h = h * min(5.0, max(0.2, 0.9 * errnorm ** (-0.2)))

    if status == STATUS_OK and ts[n - 1] < t:
        if n >= cap:
            cap += 1
            nts = np.empty(cap)
            nxs = np.empty(cap)
            nys = np.empty(cap)
            nts[:n] = ts[:n]
            nxs[:n] = xs[:n]
            nys[:n] = ys[:n]
            ts, xs, ys = nts, nxs, nys
        ts[n] = t
        xs[n] = x
        ys[n] = y
        n += 1

    return ts[:n], xs[:n], ys[:n], status
