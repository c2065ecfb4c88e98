"""Damping coefficient h(t), its antiderivative H(t), and asymptotic exponent fits.

Three families are supported:

* ``PowerLaw``     -- h(t) = lambda * t**(-gamma)
* ``BesselStyle``  -- h(t) = (2 - mu) / t, the friction term of the
  generalized Bessel system written as a damped oscillator
* ``Sampled``      -- shape-preserving cubic interpolation through positive
  knots (t_i, h_i)
"""

from __future__ import annotations

import csv
from dataclasses import dataclass, field

import numpy as np
from scipy.integrate import quad
from scipy.interpolate import PchipInterpolator

from .errors import DomainError, FitDegenerateError, PositivityError

__all__ = [
    "PowerLaw",
    "BesselStyle",
    "Sampled",
    "DampingSpec",
    "AsymptoticFit",
    "eval_h",
    "eval_H",
    "eval_h_prime",
    "fit_alpha",
    "check_hw_condition",
    "damping_from_config",
]

# Margin on the fitted tail exponent when classifying improper integrals.
TAIL_MARGIN = 0.05


@dataclass(frozen=True)
class PowerLaw:
    lam: float
    gamma: float

    def __post_init__(self):
        if self.lam <= 0:
            raise PositivityError(f"power-law coefficient must be positive, got {self.lam}")


@dataclass(frozen=True)
class BesselStyle:
    mu: float
    nu: float

    def __post_init__(self):
        if self.mu >= 2:
            raise PositivityError(f"bessel-style damping (2-mu)/t needs mu < 2, got mu={self.mu}")


@dataclass(frozen=True)
class Sampled:
    knots_t: tuple
    knots_h: tuple

    def __post_init__(self):
        t = np.asarray(self.knots_t, dtype=float)
        h = np.asarray(self.knots_h, dtype=float)
        if t.size < 2:
            raise DomainError("sampled damping needs at least two knots")
        if np.any(np.diff(t) <= 0):
            raise DomainError("sampled knots must have strictly increasing t")
        if np.any(h <= 0):
            raise PositivityError("sampled damping knots must be positive")


@dataclass(frozen=True)
class DampingSpec:
    """A damping coefficient h together with its domain start t0."""

    kind: PowerLaw | BesselStyle | Sampled
    t0: float = 1.0

    def __post_init__(self):
        if isinstance(self.kind, PowerLaw):
            if self.kind.gamma > 0 and self.t0 <= 0:
                raise DomainError("power-law damping with gamma > 0 requires t0 > 0")
        elif isinstance(self.kind, BesselStyle):
            if self.t0 <= 0:
                raise DomainError("bessel-style damping requires t0 > 0")
        elif isinstance(self.kind, Sampled):
            if self.t0 < self.kind.knots_t[0]:
                raise DomainError("t0 precedes the first sampled knot")

    # -- convenience constructors ------------------------------------------

    @staticmethod
    def power_law(lam: float, gamma: float, t0: float = 1.0) -> "DampingSpec":
        return DampingSpec(PowerLaw(lam, gamma), t0)

    @staticmethod
    def bessel_style(mu: float, nu: float = 0.0, t0: float = 1.0) -> "DampingSpec":
        return DampingSpec(BesselStyle(mu, nu), t0)

    @staticmethod
    def sampled(knots, t0: float | None = None) -> "DampingSpec":
        knots = [(float(t), float(h)) for t, h in knots]
        ts = tuple(t for t, _ in knots)
        hs = tuple(h for _, h in knots)
        if t0 is None:
            t0 = ts[0]
        return DampingSpec(Sampled(ts, hs), t0)

    @property
    def t_max(self) -> float:
        """Upper end of the evaluable domain (inf except for Sampled)."""
        if isinstance(self.kind, Sampled):
            return self.kind.knots_t[-1]
        return np.inf


@dataclass(frozen=True)
class AsymptoticFit:
    """Least-squares fit of H(t) against 2*log(t): H ~ 2*alpha*log(t) + offset."""

    alpha: float
    offset: float
    residual_sup: float
    window: tuple = field(default=(0.0, 0.0))

    def __post_init__(self):
        lo, hi = self.window
        if not lo < hi:
            raise DomainError("fit window must satisfy t_lo < t_hi")
        if self.residual_sup < 0:
            raise DomainError("residual_sup must be nonnegative")


def _pchip(kind: Sampled) -> PchipInterpolator:
    return PchipInterpolator(np.asarray(kind.knots_t), np.asarray(kind.knots_h))


def _check_domain(spec: DampingSpec, t: np.ndarray) -> None:
    if np.any(t < spec.t0):
        raise DomainError(f"t below domain start t0={spec.t0}")
    if np.any(t > spec.t_max):
        raise DomainError(f"t beyond the sampled knot range (t_max={spec.t_max})")


def eval_h(spec: DampingSpec, t):
    """Evaluate h(t); accepts scalars or arrays, t >= t0 (and within knots for Sampled)."""
    t_arr = np.asarray(t, dtype=float)
    _check_domain(spec, t_arr)
    k = spec.kind
    if isinstance(k, PowerLaw):
        out = k.lam * t_arr ** (-k.gamma)
    elif isinstance(k, BesselStyle):
        out = (2.0 - k.mu) / t_arr
    else:
        out = _pchip(k)(t_arr)
        if np.any(out <= 0):
            raise PositivityError("interpolated damping dipped to a nonpositive value")
    return float(out) if np.ndim(out) == 0 else out


def eval_h_prime(spec: DampingSpec, t):
    """dh/dt: analytic for the closed-form families, spline derivative for Sampled."""
    t_arr = np.asarray(t, dtype=float)
    _check_domain(spec, t_arr)
    k = spec.kind
    if isinstance(k, PowerLaw):
        out = -k.lam * k.gamma * t_arr ** (-k.gamma - 1.0)
    elif isinstance(k, BesselStyle):
        out = -(2.0 - k.mu) / t_arr**2
    else:
        out = _pchip(k).derivative()(t_arr)
    return float(out) if np.ndim(out) == 0 else out


def eval_H(spec: DampingSpec, t):
    """H(t) = integral of h from t0 to t (closed form where available)."""
    t_arr = np.asarray(t, dtype=float)
    _check_domain(spec, t_arr)
    k = spec.kind
    t0 = spec.t0
    if isinstance(k, PowerLaw):
        if k.gamma == 1.0:
            out = k.lam * np.log(t_arr / t0)
        else:
            p = 1.0 - k.gamma
            out = k.lam / p * (t_arr**p - t0**p)
    elif isinstance(k, BesselStyle):
        out = (2.0 - k.mu) * np.log(t_arr / t0)
    else:
        anti = _pchip(k).antiderivative()
        out = anti(t_arr) - anti(t0)
    return float(out) if np.ndim(out) == 0 else out


def fit_alpha(spec: DampingSpec, window: tuple, n_samples: int = 64) -> AsymptoticFit:
    """Fit H(t) ~ 2*alpha*log(t) + c over log-spaced samples in the window.

    Raises FitDegenerateError if the window spans less than one decade.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    if t_lo < spec.t0:
        raise DomainError(f"window start {t_lo} below t0={spec.t0}")
    if t_hi > spec.t_max:
        raise DomainError("window end beyond the evaluable domain")
    if n_samples < 8:
        raise DomainError("fit needs at least 8 samples")
    if t_hi / t_lo < 10.0:
        raise FitDegenerateError("fit window spans less than one decade")

    ts = np.geomspace(t_lo, t_hi, n_samples)
    Hs = eval_H(spec, ts)
    design = np.column_stack([2.0 * np.log(ts), np.ones_like(ts)])
    (alpha, offset), *_ = np.linalg.lstsq(design, Hs, rcond=None)
    resid = Hs - design @ np.array([alpha, offset])
    return AsymptoticFit(float(alpha), float(offset), float(np.max(np.abs(resid))), (t_lo, t_hi))


def _tail_exponent(values: np.ndarray, ts: np.ndarray) -> float:
    """Log-log slope magnitude: values ~ c * t**(-p) gives p."""
    mask = values > 0
    if mask.sum() < 2:
        return np.inf  # identically zero tail decays faster than any power
    slope = np.polyfit(np.log(ts[mask]), np.log(values[mask]), 1)[0]
    return -float(slope)


def check_hw_condition(spec: DampingSpec, t_max: float) -> tuple:
    """Integral of |2h' + h^2| over [t0, t_max] plus a tail-convergence verdict.

    The verdict fits the tail integrand as c*t**(-p) over the last decade and
    declares convergence iff p > 1 + TAIL_MARGIN (or the integrand vanishes).
    """
    if t_max <= spec.t0:
        raise DomainError("t_max must exceed t0")

    def integrand(t):
        return np.abs(2.0 * eval_h_prime(spec, t) + eval_h(spec, t) ** 2)

    # Integrate over per-decade chunks so the absolute-value kink and the
    # wide range do not defeat the adaptive quadrature.
    edges = np.geomspace(spec.t0, t_max, max(2, int(np.ceil(np.log10(t_max / spec.t0))) + 1))
    value = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        part, _ = quad(integrand, a, b, limit=200)
        value += part

    probe_t = np.geomspace(max(spec.t0, t_max / 10.0), t_max, 32)
    probe_v = integrand(probe_t)
    scale = max(np.max(probe_v), value / max(t_max - spec.t0, 1.0))
    if np.max(probe_v) <= 1e-14 * max(scale, 1.0):
        return value, True  # integrand numerically zero on the tail
    p = _tail_exponent(probe_v, probe_t)
    return value, bool(p > 1.0 + TAIL_MARGIN)


def damping_from_config(section: dict) -> DampingSpec:
    """Build a DampingSpec from a key-value config section.

    Keys: kind=powerlaw|bessel|sampled, lambda=, gamma=, mu=, nu=, t0=,
    knots=path-to-CSV (two columns t,h; header optional).
    """
    kind = str(section.get("kind", "")).lower()
    t0 = float(section.get("t0", 1.0))
    if kind == "powerlaw":
        return DampingSpec.power_law(float(section["lambda"]), float(section["gamma"]), t0)
    if kind == "bessel":
        return DampingSpec.bessel_style(float(section["mu"]), float(section.get("nu", 0.0)), t0)
    if kind == "sampled":
        knots = []
        with open(section["knots"], newline="") as fh:
            for row in csv.reader(fh):
                if not row:
                    continue
                try:
                    knots.append((float(row[0]), float(row[1])))
                except ValueError:
                    continue  # header line
        spec_t0 = float(section["t0"]) if "t0" in section else None
        return DampingSpec.sampled(knots, spec_t0)
    raise DomainError(f"unknown damping kind {kind!r}")
