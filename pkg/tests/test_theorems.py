import math

import numpy as np
import pytest

from spiraldim import damping as dmp
from spiraldim import ode_sim, spiral_gen, theorems
from spiraldim.errors import DomainError, RangeError
from spiraldim.polar_curve import PolarCurve


def _fit(spec, t_hi=1e5):
    return dmp.fit_alpha(spec, (max(spec.t0, t_hi / 1e3), t_hi))


def test_predict_dimension_power_law_family():
    for lam in (0.5, 1.0, 4.0 / 3.0, 5.0 / 3.0, 1.9):
        spec = dmp.DampingSpec.power_law(lam, 1.0)
        report = theorems.predict_dimension(spec, _fit(spec))
        assert report.criterion == "Thm11_Dim"
        assert abs(report.conclusion - 4.0 / (2.0 + lam)) < 1e-9


def test_predict_dimension_alpha_one_branch():
    spec = dmp.DampingSpec.power_law(2.0, 1.0)
    report = theorems.predict_dimension(spec, _fit(spec))
    assert report.criterion == "Thm12_DimOne"
    assert report.conclusion == 1.0


def test_predict_dimension_undetermined_without_log_growth():
    # H grows like t^{1/4}: not 2*alpha*log(t) + O(1)
    spec = dmp.DampingSpec.power_law(3.0, 0.75)
    report = theorems.predict_dimension(spec, _fit(spec))
    assert report.conclusion is None
    status, _ = report.hypothesis("H_log_growth")
    assert status == theorems.FAIL


def test_classify_rectifiability_reference_cases():
    expected = {
        (3.0, 0.75): theorems.RECTIFIABLE,
        (3.0, 1.0): theorems.RECTIFIABLE,
        (2.0, 1.0): theorems.NON_RECTIFIABLE,
        (5.0 / 3.0, 1.0): theorems.NON_RECTIFIABLE,
        (4.0 / 3.0, 1.0): theorems.NON_RECTIFIABLE,
        (1.0, 1.0): theorems.NON_RECTIFIABLE,
    }
    for (lam, gamma), verdict in expected.items():
        spec = dmp.DampingSpec.power_law(lam, gamma)
        report = theorems.classify_rectifiability(spec, 1e5)
        assert report.conclusion == verdict, (lam, gamma)


def test_exclusivity_invariant():
    # never jointly RECTIFIABLE and predicted dimension > 1
    for lam, gamma in ((0.5, 1.0), (1.0, 1.0), (2.0, 1.0), (3.0, 1.0), (3.0, 0.75)):
        spec = dmp.DampingSpec.power_law(lam, gamma)
        rect = theorems.classify_rectifiability(spec, 1e5)
        pred = theorems.predict_dimension(spec, _fit(spec))
        if rect.conclusion == theorems.RECTIFIABLE:
            assert pred.conclusion is None or pred.conclusion <= 1.0


def test_spiral_criterion_power_half(power_half):
    report = theorems.check_spiral_criterion(power_half, 0.5)
    assert report.all_pass
    assert math.isclose(report.conclusion, 4.0 / 3.0)
    _, m_lower = report.hypothesis("lower_bound_f")
    assert math.isclose(m_lower, 1.0, rel_tol=1e-6)
    _, a_bar = report.hypothesis("decrement_power_bound")
    assert math.isclose(a_bar, math.pi, rel_tol=0.05)


def test_spiral_criterion_rejects_circle(circle_curve):
    report = theorems.check_spiral_criterion(circle_curve, 0.5)
    status, _ = report.hypothesis("decrement_positive")
    assert status == theorems.FAIL
    assert report.conclusion is None


def test_spiral_criterion_needs_turns(power_half):
    short = PolarCurve(
        power_half.phi[:20], power_half.f[:20], monotone_certified=True
    )
    with pytest.raises(RangeError):
        theorems.check_spiral_criterion(short, 0.5)


def test_derivative_criterion_closed_forms(power_half):
    report = theorems.check_derivative_criterion(power_half, 0.5)
    assert report.all_pass
    assert math.isclose(report.conclusion, 4.0 / 3.0)
    _, K = report.hypothesis("K_power_bound")
    assert math.isclose(K, 0.5, rel_tol=0.01)

    alpha_one = spiral_gen.generate(
        spiral_gen.SpiralSpec.power(1.0, 2 * math.pi, 64 * math.pi)
    )
    report1 = theorems.check_derivative_criterion(alpha_one, 1.0)
    assert report1.criterion == "Cor12_DimOneDerivative"
    assert report1.conclusion == 1.0


def test_derivative_criterion_staircase_fails():
    # constant over full turns: f' vanishes identically on interior turns
    phi = np.arange(2 * math.pi, 14 * math.pi + 1e-12, math.pi / 16)
    f = np.where(phi < 8 * math.pi, 1.0, 0.5)
    curve = PolarCurve(phi, f, source="staircase", monotone_certified=True)
    report = theorems.check_derivative_criterion(curve, 0.5)
    status, _ = report.hypothesis("fprime_not_identically_zero")
    assert status == theorems.FAIL
    assert report.conclusion is None


def test_derivative_criterion_scale_invariance():
    base = spiral_gen.generate(spiral_gen.SpiralSpec.power(0.5, 2 * math.pi, 64 * math.pi))
    scaled = spiral_gen.generate(
        spiral_gen.SpiralSpec.scaled_power(13.7, 0.5, 2 * math.pi, 64 * math.pi)
    )
    rb = theorems.check_derivative_criterion(base, 0.5)
    rs = theorems.check_derivative_criterion(scaled, 0.5)
    assert [s for _, s, _ in rb.hypotheses] == [s for _, s, _ in rs.hypotheses]
    assert rb.conclusion == rs.conclusion


def test_lemma_f_bound(power_half):
    spiral = theorems.check_spiral_criterion(power_half, 0.5)
    _, a_bar = spiral.hypothesis("decrement_power_bound")
    m_bar, holds = theorems.validate_lemma_f_bound(power_half, 0.5, a_bar)
    assert holds
    assert m_bar > 0


def test_polar_ode_identities_tolerance_sensitivity():
    spec = dmp.DampingSpec.power_law(2.0, 1.0)
    sys = ode_sim.SystemSpec.damped_oscillator(spec)
    fine = ode_sim.integrate(sys, (1.0, 1.0, 0.0), 200.0, max_angle_step=math.pi / 64)
    err_r, err_th = theorems.validate_polar_odes(fine, spec, 1000)
    assert err_r < 1e-5 and err_th < 1e-5

    coarse = ode_sim.integrate(sys, (1.0, 1.0, 0.0), 200.0, tol=(1e-3, 1e-6))
    err_rc, err_thc = theorems.validate_polar_odes(coarse, spec, 200)
    assert err_rc < 1e-2 and err_thc < 1e-2


def test_polar_ode_probes_are_seeded(traj_lam1):
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    a = theorems.validate_polar_odes(traj_lam1, spec, 100, seed=0)
    b = theorems.validate_polar_odes(traj_lam1, spec, 100, seed=0)
    c = theorems.validate_polar_odes(traj_lam1, spec, 100, seed=1)
    assert a == b
    assert a != c


def test_report_consistency_enforced():
    with pytest.raises(DomainError):
        theorems.CriterionReport(
            criterion="Thm11_Dim",
            hypotheses=(("h", theorems.FAIL, None),),
            conclusion=1.5,
        )


def test_report_json(tmp_path):
    spec = dmp.DampingSpec.power_law(1.0, 1.0)
    report = theorems.predict_dimension(spec, _fit(spec))
    path = tmp_path / "report.json"
    report.to_json(path)
    import json

    data = json.loads(path.read_text())
    assert data["criterion"] == "Thm11_Dim"
    assert data["conclusion"] == pytest.approx(4.0 / 3.0)
    assert all({"name", "status", "witness"} <= set(h) for h in data["hypotheses"])
