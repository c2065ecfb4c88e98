import math

import numpy as np
import pytest
from scipy.integrate import quad

from spiraldim import damping as dmp
from spiraldim.errors import DomainError, FitDegenerateError, PositivityError


def test_power_law_eval_closed_forms():
    spec = dmp.DampingSpec.power_law(3.0, 0.75)
    t = np.array([1.0, 4.0, 100.0])
    assert np.allclose(dmp.eval_h(spec, t), 3.0 * t**-0.75, rtol=1e-15)
    assert np.allclose(dmp.eval_h_prime(spec, t), -2.25 * t**-1.75, rtol=1e-15)
    # H(t) = 12 (t^{1/4} - 1)
    assert np.allclose(dmp.eval_H(spec, t), 12.0 * (t**0.25 - 1.0), rtol=1e-14)


def test_gamma_one_H_is_logarithmic():
    spec = dmp.DampingSpec.power_law(1.5, 1.0)
    t = np.geomspace(1.0, 1e6, 7)
    assert np.allclose(dmp.eval_H(spec, t), 1.5 * np.log(t), rtol=1e-14, atol=1e-14)


def test_eval_H_matches_quadrature_oracle():
    spec = dmp.DampingSpec.power_law(2.5, 0.6)
    for t in (2.0, 37.0, 501.0):
        ref, _ = quad(lambda s: dmp.eval_h(spec, s), 1.0, t)
        assert math.isclose(dmp.eval_H(spec, t), ref, rel_tol=1e-9)


def test_eval_h_prime_matches_finite_differences():
    spec = dmp.DampingSpec.bessel_style(0.7)
    t = np.geomspace(2.0, 200.0, 9)
    d = 1e-6 * t
    fd = (dmp.eval_h(spec, t + d) - dmp.eval_h(spec, t - d)) / (2 * d)
    assert np.allclose(dmp.eval_h_prime(spec, t), fd, rtol=1e-7)


def test_domain_and_positivity_validation():
    with pytest.raises(PositivityError):
        dmp.DampingSpec.power_law(-1.0, 1.0)
    spec = dmp.DampingSpec.power_law(1.0, 1.0, t0=1.0)
    with pytest.raises(DomainError):
        dmp.eval_h(spec, 0.5)


def test_sampled_matches_closed_form():
    knots_t = np.geomspace(1.0, 100.0, 400)
    spec = dmp.DampingSpec.sampled(np.column_stack([knots_t, 1.0 / knots_t]))
    t = np.geomspace(1.5, 90.0, 11)
    assert np.allclose(dmp.eval_h(spec, t), 1.0 / t, rtol=1e-6)
    assert np.allclose(dmp.eval_H(spec, t), np.log(t), atol=1e-5)
    with pytest.raises(DomainError):
        dmp.eval_h(spec, 200.0)


def test_fit_alpha_exact_for_gamma_one():
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    fit = dmp.fit_alpha(spec, (10.0, 1e4))
    assert math.isclose(fit.alpha, 0.5, abs_tol=1e-12)
    assert fit.residual_sup < 1e-10


def test_fit_alpha_rejects_narrow_window():
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    with pytest.raises(FitDegenerateError):
        dmp.fit_alpha(spec, (100.0, 500.0))


def test_fit_alpha_large_residual_for_sublinear_decay():
    # H grows like t^{1/4}, far from 2*alpha*log(t): huge sup residual
    spec = dmp.DampingSpec.power_law(3.0, 0.75)
    fit = dmp.fit_alpha(spec, (10.0, 1e4))
    assert fit.residual_sup > dmp.TAIL_MARGIN


def test_hw_condition_closed_form_oracle():
    # h=1/t: 2h' + h^2 = -1/t^2, integral over [1, T] = 1 - 1/T
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    value, converged = dmp.check_hw_condition(spec, 1e6)
    assert converged
    assert math.isclose(value, 1.0 - 1e-6, rel_tol=1e-6)
    # h=2/t: 2h' + h^2 = 0 identically
    value0, converged0 = dmp.check_hw_condition(dmp.DampingSpec.power_law(2.0, 1.0), 1e6)
    assert converged0
    assert value0 < 1e-12


def test_hw_condition_diverges_for_slow_decay():
    # h = 3 t^{-1/2}: h^2 = 9/t is not integrable at infinity
    value, converged = dmp.check_hw_condition(dmp.DampingSpec.power_law(3.0, 0.5), 1e6)
    assert not converged
    assert value > 10.0


def test_damping_from_config():
    spec = dmp.damping_from_config({"kind": "powerlaw", "lambda": "1.5", "gamma": "1", "t0": "2"})
    assert spec.t0 == 2.0
    assert math.isclose(dmp.eval_h(spec, 3.0), 0.5)
    spec_b = dmp.damping_from_config({"kind": "bessel", "mu": "1"})
    assert math.isclose(dmp.eval_h(spec_b, 2.0), 0.5)
    with pytest.raises(DomainError):
        dmp.damping_from_config({"kind": "nonsense"})
