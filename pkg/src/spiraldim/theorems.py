"""Analytic predictors and hypothesis checkers for spiral dimension results.

Each checker returns a :class:`CriterionReport`: named hypotheses with
PASS/FAIL/UNDETERMINED statuses and fitted witness constants, plus a
conclusion (a predicted dimension, or a rectifiability verdict) that is only
present when every hypothesis passed.  Checkers never extrapolate beyond the
data window; when the data cannot settle a hypothesis they say UNDETERMINED.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.integrate import quad

from . import damping as dmp
from .errors import DomainError, RangeError
from .ode_sim import Trajectory
from .polar_curve import PolarCurve, fprime_grid

__all__ = [
    "CriterionReport",
    "predict_dimension",
    "classify_rectifiability",
    "check_spiral_criterion",
    "check_derivative_criterion",
    "validate_lemma_f_bound",
    "validate_polar_odes",
]

PASS = "PASS"
FAIL = "FAIL"
UNDETERMINED = "UNDETERMINED"

RECTIFIABLE = "RECTIFIABLE"
NON_RECTIFIABLE = "NON_RECTIFIABLE"

DEFAULT_RESIDUAL_THRESHOLD = 0.5
ALPHA_ONE_TOL = 1e-3
LIMSUP_SLOPE_TOL = 0.02
FPRIME_SLACK = 1e-12
FPRIME_ZERO_REL = 1e-10


@dataclass(frozen=True)
class CriterionReport:
    """Outcome of one theorem-hypothesis check."""

    criterion: str
    hypotheses: tuple  # of (name, status, witness or None)
    conclusion: float | str | None

    def __post_init__(self):
        if self.conclusion is not None and any(s != PASS for _, s, _ in self.hypotheses):
            raise DomainError("conclusion asserted although a hypothesis did not pass")

    @property
    def all_pass(self) -> bool:
        return all(s == PASS for _, s, _ in self.hypotheses)

    def hypothesis(self, name: str):
        for n, s, w in self.hypotheses:
            if n == name:
                return s, w
        raise KeyError(name)

    def to_dict(self) -> dict:
        return {
            "criterion": self.criterion,
            "hypotheses": [
                {"name": n, "status": s, "witness": w} for n, s, w in self.hypotheses
            ],
            "conclusion": self.conclusion,
        }

    def to_json(self, path=None) -> str:
        text = json.dumps(self.to_dict(), indent=2)
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _limsup_th_status(spec: dmp.DampingSpec, t_hi: float):
    """Probe t*h(t) over the last two decades below t_hi; a limsup cannot be
    computed, so bounded means: no upward log-log trend (slope <= 0.02)."""
    t = np.logspace(math.log10(t_hi) - 2.0, math.log10(t_hi), 64)
    th = t * dmp.eval_h(spec, t)
    if np.any(th <= 0):
        return UNDETERMINED, float(np.max(th))
    slope = np.polyfit(np.log(t), np.log(th), 1)[0]
    status = PASS if slope <= LIMSUP_SLOPE_TOL else FAIL
    return status, float(np.max(th))


def predict_dimension(
    spec: dmp.DampingSpec,
    fit: dmp.AsymptoticFit,
    residual_threshold: float = DEFAULT_RESIDUAL_THRESHOLD,
) -> CriterionReport:
    """Predict the solution-curve dimension from the damping coefficient.

    H(t) ~ 2*alpha*log(t) + O(1) with alpha in (0,1) and t*h(t) bounded gives
    dimension 2/(1+alpha); alpha = 1 gives dimension 1 (no t*h bound needed).
    """
    hw_value, hw_ok = dmp.check_hw_condition(spec, fit.window[1])
    hyps = [("hw_integrable", PASS if hw_ok else UNDETERMINED, hw_value)]

    log_ok = fit.residual_sup <= residual_threshold
    hyps.append(("H_log_growth", PASS if log_ok else FAIL, fit.residual_sup))

    alpha = fit.alpha
    if abs(alpha - 1.0) <= ALPHA_ONE_TOL:
        criterion = "Thm12_DimOne"
        hyps.append(("alpha_is_one", PASS, alpha))
        conclusion = 1.0 if all(s == PASS for _, s, _ in hyps) else None
        return CriterionReport(criterion, tuple(hyps), conclusion)

    criterion = "Thm11_Dim"
    in_range = 0.0 < alpha < 1.0
    hyps.append(("alpha_in_unit_interval", PASS if in_range else FAIL, alpha))
    if in_range:
        th_status, th_witness = _limsup_th_status(spec, fit.window[1])
        hyps.append(("limsup_th_bounded", th_status, th_witness))
    conclusion = 2.0 / (1.0 + alpha) if all(s == PASS for _, s, _ in hyps) else None
    return CriterionReport(criterion, tuple(hyps), conclusion)


def classify_rectifiability(spec: dmp.DampingSpec, t_max: float) -> CriterionReport:
    """Rectifiability dichotomy: finite integral of exp(-H/2) over [t0, inf).

    The integral to t_max is computed by quadrature; convergence beyond the
    window is judged by the fitted tail decay exponent of exp(-H/2)
    (divergent when the exponent is <= 1 within margin).
    """
    if t_max <= spec.t0:
        raise DomainError("t_max must exceed the damping domain start")

    probe_t = np.geomspace(max(spec.t0, t_max / 10.0), t_max, 32)

    # the damping itself must be non-integrable on [t0, inf)
    p_h = dmp._tail_exponent(dmp.eval_h(spec, probe_t), probe_t)
    if p_h <= 1.0 + 1e-9:
        h_status = PASS
    elif p_h > 1.0 + dmp.TAIL_MARGIN:
        h_status = FAIL
    else:
        h_status = UNDETERMINED
    hyps = [("h_nonintegrable", h_status, p_h if math.isfinite(p_h) else None)]

    hw_value, hw_ok = dmp.check_hw_condition(spec, t_max)
    hyps.append(("hw_integrable", PASS if hw_ok else UNDETERMINED, hw_value))

    def g(t):
        return np.exp(-0.5 * dmp.eval_H(spec, t))

    edges = np.logspace(math.log10(spec.t0), math.log10(t_max), 24)
    integral = sum(quad(g, a, b, limit=200)[0] for a, b in zip(edges[:-1], edges[1:]))
    q = dmp._tail_exponent(np.asarray(g(probe_t)), probe_t)
    hyps.append(("tail_exponent_resolved", PASS, q if math.isfinite(q) else None))

    if all(s == PASS for _, s, _ in hyps):
        conclusion = RECTIFIABLE if q > 1.0 + dmp.TAIL_MARGIN else NON_RECTIFIABLE
    else:
        conclusion = None
    report = CriterionReport("ThmA_Rectifiability", tuple(hyps), conclusion)
    # stash the partial integral as an extra witness without breaking the schema
    return CriterionReport(
        report.criterion,
        report.hypotheses + (("integral_to_t_max", PASS, float(integral)),),
        report.conclusion,
    )


def _require_turns(curve: PolarCurve, n_turns: int):
    lo, hi = curve.phi_span
    if hi - lo < n_turns * 2 * math.pi:
        raise RangeError(f"curve spans fewer than {n_turns} full turns")


def _decrements(curve: PolarCurve):
    """f(phi) - f(phi + 2*pi) at every sample with phi + 2*pi inside the span."""
    phi = curve.phi
    f = curve.f
    cut = np.searchsorted(phi, phi[-1] - 2 * math.pi, side="right")
    head_phi = phi[:cut]
    ahead = np.interp(head_phi + 2 * math.pi, phi, f)
    return head_phi, f[:cut] - ahead


def check_spiral_criterion(curve: PolarCurve, alpha: float) -> CriterionReport:
    """Geometric spiral criterion for dimension 2/(1+alpha), alpha in (0,1):
    power-law lower bound on f, positive power-bounded turn decrement, and
    power-bounded partial arc length; witnesses are the fitted constants."""
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if not curve.monotone_certified:
        raise DomainError("spiral criterion requires a monotone-certified curve")
    if curve.phi[0] <= 0:
        raise DomainError("spiral criterion needs a positive starting angle")
    _require_turns(curve, 3)

    phi = curve.phi
    f = curve.f
    m_lower = float(np.min(phi**alpha * f))
    hyps = [("lower_bound_f", PASS if m_lower > 0 else FAIL, m_lower)]

    dec_phi, dec = _decrements(curve)
    dec_min = float(np.min(dec))
    hyps.append(("decrement_positive", PASS if dec_min > 0 else FAIL, dec_min))
    a_bar = float(np.max(dec * dec_phi ** (alpha + 1.0)))
    hyps.append(
        ("decrement_power_bound", PASS if math.isfinite(a_bar) and a_bar > 0 else FAIL, a_bar)
    )

    x, y = curve.points()
    cum = np.concatenate([[0.0], np.cumsum(np.hypot(np.diff(x), np.diff(y)))])
    M = float(np.max(cum / phi ** (1.0 - alpha)))
    hyps.append(("length_power_bound", PASS if math.isfinite(M) else FAIL, M))

    ok = all(s == PASS for _, s, _ in hyps)
    return CriterionReport(
        "Thm13_SpiralCriterion", tuple(hyps), 2.0 / (1.0 + alpha) if ok else None
    )


def _per_turn_max_abs(values: np.ndarray, phi: np.ndarray) -> np.ndarray:
    """max |values| over each full 2*pi turn of the phi grid."""
    turn = np.floor((phi - phi[0]) / (2 * math.pi)).astype(np.int64)
    starts = np.concatenate([[0], np.nonzero(np.diff(turn))[0] + 1])
    full = turn[starts] < turn[-1]  # drop the trailing partial turn
    maxima = np.maximum.reduceat(np.abs(values), starts)
    return maxima[full] if np.any(full) else maxima[:1]


def check_derivative_criterion(curve: PolarCurve, alpha: float) -> CriterionReport:
    """Derivative-based criterion: -K*phi^(-alpha-1) <= f' <= 0 for alpha < 1
    (conclusion 2/(1+alpha)), or -K/phi <= f' <= 0 with f <= m_bar/phi for
    alpha = 1 (conclusion 1); f' must not vanish identically on any turn."""
    if not 0.0 < alpha <= 1.0:
        raise DomainError("alpha must lie in (0, 1]")
    _require_turns(curve, 3)
    phi = curve.phi
    f = curve.f
    fp = fprime_grid(curve)
    f_scale = float(np.max(f))

    nonpos = float(np.max(fp))
    hyps = [("fprime_nonpositive", PASS if nonpos <= FPRIME_SLACK * f_scale else FAIL, nonpos)]

    per_turn = _per_turn_max_abs(fp, phi)
    alive = float(np.min(per_turn))
    hyps.append(
        ("fprime_not_identically_zero", PASS if alive > FPRIME_ZERO_REL * f_scale else FAIL, alive)
    )

    if alpha < 1.0:
        K = float(np.max(-fp * phi ** (alpha + 1.0)))
        hyps.append(("K_power_bound", PASS if math.isfinite(K) else FAIL, K))
        m_lower = float(np.min(phi**alpha * f))
        hyps.append(("lower_bound_f", PASS if m_lower > 0 else FAIL, m_lower))
        criterion, conclusion = "Cor11_DerivativeCriterion", 2.0 / (1.0 + alpha)
    else:
        K = float(np.max(-fp * phi))
        hyps.append(("K_power_bound", PASS if math.isfinite(K) else FAIL, K))
        m_upper = float(np.max(phi * f))
        hyps.append(("upper_bound_f", PASS if math.isfinite(m_upper) else FAIL, m_upper))
        criterion, conclusion = "Cor12_DimOneDerivative", 1.0

    ok = all(s == PASS for _, s, _ in hyps)
    return CriterionReport(criterion, tuple(hyps), conclusion if ok else None)


def validate_lemma_f_bound(curve: PolarCurve, alpha: float, a_bar: float) -> tuple:
    """Explicit upper bound f(phi) <= m_bar * phi^(-alpha) with the proof's
    constant m_bar = a_bar*M1/(2*pi*alpha), M1 = (1 + 2*pi/phi1)^(alpha+1).

    Caller must have verified the decrement bound with this a_bar first.
    """
    if not 0.0 < alpha < 1.0:
        raise DomainError("alpha must lie in (0, 1)")
    if a_bar <= 0:
        raise DomainError("a_bar must be positive")
    phi1 = curve.phi[0]
    M1 = (1.0 + 2.0 * math.pi / phi1) ** (alpha + 1.0)
    m_bar = a_bar * M1 / (2.0 * math.pi * alpha)
    holds = bool(np.all(curve.f <= m_bar * curve.phi ** (-alpha) * (1.0 + 1e-12)))
    return m_bar, holds


def validate_polar_odes(
    traj: Trajectory,
    damping: dmp.DampingSpec,
    n_probes: int,
    seed: int = 0,
) -> tuple:
    """Check the polar-form identities r' = -h r sin^2(theta) and
    theta' = -1 - (h/2) sin(2 theta) at random interior samples.

    Derivatives come from local degree-6 polynomial fits through 11 adjacent
    samples.  Errors are reported relative to the local state scale: r(t)
    for the radial identity, |theta'| ~ 1 for the angular one.
    """
    half = 5
    n = len(traj)
    if n < 2 * half + 3:
        raise DomainError("trajectory too short for derivative probes")
    rng = np.random.default_rng(seed)
    idx = rng.integers(half, n - half, size=n_probes)

    t = traj.t
    r = traj.r()
    theta = traj.theta_unwrapped()
    h = dmp.eval_h(damping, t)

    err_r = 0.0
    err_th = 0.0
    for i in idx:
        sl = slice(i - half, i + half + 1)
        ts = t[sl] - t[i]
        cr = np.polynomial.polynomial.polyfit(ts, r[sl], 6)
        cth = np.polynomial.polynomial.polyfit(ts, theta[sl], 6)
        rp = cr[1]
        thp = cth[1]
        rhs_r = -h[i] * r[i] * math.sin(theta[i]) ** 2
        rhs_th = -1.0 - 0.5 * h[i] * math.sin(2.0 * theta[i])
        err_r = max(err_r, abs(rp - rhs_r) / r[i])
        err_th = max(err_th, abs(thp - rhs_th) / max(abs(rhs_th), 1.0))
    return err_r, err_th
