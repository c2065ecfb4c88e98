"""Command-line interface: simulate, estimate dimensions, classify, verify.

Commands
--------
simulate        integrate a system, write trajectory CSV (optional SVG)
dim             simulate + polar conversion + dimension estimate (CSV + JSON)
rectifiability  classify the damping as (non)rectifiable (JSON)
verify-criteria run all analytic checkers against a damping spec (JSON)
spiral          emit an analytic generator spiral (CSV, optional SVG)
reproduce-table the six reference damping rows: predicted vs estimated

All outputs are deterministic for a fixed config and seed.  The environment
variable SPIRALDIM_THREADS caps worker threads (0 = auto); results do not
depend on the thread count.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import boxdim, damping as dmp, ode_sim, polar_curve, spiral_gen, theorems
from .errors import SpiraldimError

TABLE_TOL = 0.05
# a straight-line fit on the log-corrected sausage law exceeds 1 by roughly
# 1/|log eps|; at reachable eps that allows up to 0.08 for dimension-one rows
TABLE_TOL_DIM_ONE = 0.08


def _threads() -> int:
    try:
        return max(0, int(os.environ.get("SPIRALDIM_THREADS", "0")))
    except ValueError:
        return 0


def _apply_thread_cap() -> None:
    n = _threads()
    if n > 0:
        try:
            import numba

            numba.set_num_threads(n)
        except Exception:
            pass


# ---------------------------------------------------------------------------
# configuration


@dataclass
class RunConfig:
    command: str
    params: dict = field(default_factory=dict)
    seed: int = 0

    def get(self, key, default=None):
        return self.params.get(key, default)


def _read_config_file(path: str) -> dict:
    """key=value lines; '#' comments; later keys win."""
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key=value, got {raw!r}")
            key, value = line.split("=", 1)
            out[key.strip().replace("-", "_")] = value.strip()
    return out


def _damping_from_args(p: dict) -> dmp.DampingSpec:
    kind = p.get("damping", "powerlaw")
    required = {"powerlaw": ("lam", "gamma"), "bessel": ("mu",), "sampled": ("knots",)}
    for key in required.get(kind, ()):
        if p.get(key) is None:
            flag = "--lambda" if key == "lam" else f"--{key}"
            raise ConfigError(f"damping kind {kind!r} requires {flag}")
    section = {"kind": kind, "t0": p.get("t0", 1.0)}
    for src, dst in (("lam", "lambda"), ("gamma", "gamma"), ("mu", "mu"),
                     ("nu", "nu"), ("knots", "knots")):
        if p.get(src) is not None:
            section[dst] = p[src]
    return dmp.damping_from_config(section)


def _system_from_args(p: dict) -> ode_sim.SystemSpec:
    if p.get("system", "oscillator") == "bessel":
        return ode_sim.SystemSpec.bessel_system(
            float(p.get("mu", 1.0)), float(p.get("nu", 0.0)), float(p.get("t0", 1.0))
        )
    return ode_sim.SystemSpec.damped_oscillator(_damping_from_args(p))


def _simulate(p: dict) -> ode_sim.Trajectory:
    sys_spec = _system_from_args(p)
    t1 = float(p.get("t1", p.get("t0", 1.0)))
    init = (t1, float(p.get("x0", 1.0)), float(p.get("y0", 0.0)))
    return ode_sim.integrate(
        sys_spec,
        init,
        float(p.get("t_end", 1e4)),
        tol=(float(p.get("rtol", 1e-9)), float(p.get("atol", 1e-12))),
        max_angle_step=float(p.get("max_angle_step", math.pi / 16)),
        r_stop=float(p.get("r_stop", 0.0)),
    )


# ---------------------------------------------------------------------------
# SVG polyline plot


def write_svg(path, x, y, width: int = 640) -> None:
    """Static polyline plot with an auto-fit viewport and 5% margin."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xmin, xmax = float(x.min()), float(x.max())
    ymin, ymax = float(y.min()), float(y.max())
    span = max(xmax - xmin, ymax - ymin, 1e-30)
    margin = 0.05 * span
    x0, y0 = xmin - margin, ymin - margin
    side = span + 2 * margin
    scale = width / side
    px = (x - x0) * scale
    py = (ymax + margin - y) * scale  # flip: SVG y grows downward
    points = " ".join(f"{a:.3f},{b:.3f}" for a, b in zip(px, py))
    with open(path, "w") as fh:
        fh.write(
            f'<svg xmlns="http://www.w3.org/2000/svg" width="{width}" height="{width}" '
            f'viewBox="0 0 {width} {width}">\n'
            f'<polyline fill="none" stroke="black" stroke-width="1" points="{points}"/>\n'
            "</svg>\n"
        )


# ---------------------------------------------------------------------------
# predicted dimension for a damping spec (theorem prediction + rectifiability)


def _predicted_dimension(spec: dmp.DampingSpec, t_end: float):
    """Combine the analytic predictors: a rectifiable spec has dimension 1,
    otherwise the logarithmic-growth theorem supplies 2/(1+alpha) when its
    hypotheses hold.  Returns (predicted or None, rectifiability verdict)."""
    rect = theorems.classify_rectifiability(spec, t_end)
    if rect.conclusion == theorems.RECTIFIABLE:
        return 1.0, rect.conclusion
    try:
        fit = dmp.fit_alpha(spec, (max(spec.t0, t_end / 1e3), t_end))
    except SpiraldimError:
        return None, rect.conclusion
    pred = theorems.predict_dimension(spec, fit)
    return pred.conclusion, rect.conclusion


# ---------------------------------------------------------------------------
# commands


def _cmd_simulate(cfg: RunConfig) -> int:
    p = cfg.params
    traj = _simulate(p)
    out = p.get("out", "trajectory.csv")
    ode_sim.trajectory_to_csv(traj, out)
    if p.get("svg"):
        write_svg(p["svg"], traj.x, traj.y)
    print(f"wrote {out} ({len(traj)} samples, t in [{traj.t[0]:g}, {traj.t[-1]:g}])")
    return 0


def _cmd_dim(cfg: RunConfig) -> int:
    p = cfg.params
    traj = _simulate(p)
    curve = polar_curve.to_polar(traj)
    profile = boxdim.build_profile(
        curve,
        float(p.get("eps_max", 1e-1)),
        float(p.get("eps_min", 1e-3)),
        method=p.get("method", "sausage"),
        grid_factor=float(p.get("grid_factor", boxdim.DEFAULT_GRID_FACTOR)),
        max_cells=int(float(p.get("max_cells", boxdim.MAX_CELLS))),
    )
    predicted = None
    if p.get("system", "oscillator") == "bessel":
        mu = float(p.get("mu", 1.0))
        if 0.0 < mu < 2.0:
            predicted = 4.0 / (4.0 - mu)
    else:
        predicted, _ = _predicted_dimension(_damping_from_args(p), float(p.get("t_end", 1e4)))
    report = boxdim.fit_dimension(
        profile, window_policy=p.get("window", "auto"), predicted=predicted
    )
    profile_out = p.get("profile_out", "profile.csv")
    report_out = p.get("report_out", "report.json")
    profile.to_csv(profile_out)
    report.to_json(report_out)
    if p.get("svg"):
        write_svg(p["svg"], *curve.points())
    print(
        f"dim_estimate={report.dim_estimate:.4f} stderr={report.stderr:.2e} "
        f"method={report.method} predicted={report.predicted} verdict={report.verdict}"
    )
    return 0


def _cmd_rectifiability(cfg: RunConfig) -> int:
    p = cfg.params
    spec = _damping_from_args(p)
    report = theorems.classify_rectifiability(spec, float(p.get("t_max", 1e5)))
    out = p.get("report_out", "rectifiability.json")
    report.to_json(out)
    print(f"{report.conclusion or 'UNDETERMINED'} (wrote {out})")
    return 0


def _cmd_verify_criteria(cfg: RunConfig) -> int:
    p = cfg.params
    spec = _damping_from_args(p)
    t_end = float(p.get("t_end", 1e4))
    reports = []
    rect = theorems.classify_rectifiability(spec, t_end)
    reports.append(rect.to_dict())
    try:
        fit = dmp.fit_alpha(spec, (max(spec.t0, t_end / 1e3), t_end))
        pred = theorems.predict_dimension(spec, fit)
        reports.append(pred.to_dict())
        alpha = fit.alpha
    except SpiraldimError:
        pred = None
        alpha = None

    traj = _simulate(p)
    curve = polar_curve.to_polar(traj)
    if alpha is not None and curve.monotone_certified:
        if 0.0 < alpha < 1.0:
            reports.append(theorems.check_spiral_criterion(curve, alpha).to_dict())
        if 0.0 < alpha <= 1.0:
            reports.append(theorems.check_derivative_criterion(curve, alpha).to_dict())
    err_r, err_th = theorems.validate_polar_odes(
        traj, spec, int(p.get("n_probes", 256)), seed=cfg.seed
    )
    reports.append(
        {
            "criterion": "Lemma_PolarODEs",
            "hypotheses": [
                {"name": "radial_identity", "status": "PASS", "witness": err_r},
                {"name": "angular_identity", "status": "PASS", "witness": err_th},
            ],
            "conclusion": None,
        }
    )
    out = p.get("report_out", "criteria.json")
    with open(out, "w") as fh:
        json.dump(reports, fh, indent=2)
    print(f"wrote {out} ({len(reports)} reports)")
    return 0


def _cmd_spiral(cfg: RunConfig) -> int:
    p = cfg.params
    kind = p.get("kind", "power")
    phi1 = float(p.get("phi1", 2 * math.pi))
    phi2 = float(p.get("phi2", 100 * math.pi))
    if kind == "exp":
        spec = spiral_gen.SpiralSpec.exponential(float(p.get("rate", 0.1)), phi1, phi2)
    elif kind == "scaled_power":
        spec = spiral_gen.SpiralSpec.scaled_power(
            float(p.get("scale", 1.0)), float(p.get("alpha", 0.5)), phi1, phi2
        )
    else:
        spec = spiral_gen.SpiralSpec.power(float(p.get("alpha", 0.5)), phi1, phi2)
    curve = spiral_gen.generate(
        spec, grid_step=float(p.get("grid_step", polar_curve.DEFAULT_GRID_STEP))
    )
    out = p.get("out", "spiral.csv")
    polar_curve.curve_to_csv(curve, out)
    if p.get("svg"):
        write_svg(p["svg"], *curve.points())
    print(f"wrote {out} ({curve.phi.size} samples, dim={spiral_gen.known_dimension(spec)})")
    return 0


# reference rows: (label, lambda, gamma, predicted dim, t_end, r_stop,
#                  method, eps_max, eps_min, max_cells)
_TABLE_ROWS = (
    ("3t^-3/4", 3.0, 0.75, 1.0, 1e4, 1e-7, "sausage", 5e-2, 4e-4, int(4e8)),
    ("3/t", 3.0, 1.0, 1.0, 1e4, 0.0, "sausage", 5e-2, 4e-4, int(4e8)),
    ("2/t", 2.0, 1.0, 1.0, 1e5, 0.0, "box", 1e-1, 1.5e-6, int(2e12)),
    ("(5/3)/t", 5.0 / 3.0, 1.0, 12.0 / 11.0, 1e5, 0.0, "box", 1e-1, 1.2e-5, int(1e11)),
    ("(4/3)/t", 4.0 / 3.0, 1.0, 6.0 / 5.0, 1e5, 0.0, "box", 1e-1, 1.9e-4, int(1e11)),
    ("1/t", 1.0, 1.0, 4.0 / 3.0, 1e5, 0.0, "box", 1e-1, 1.9e-4, int(1e11)),
)


def table_rows(t_end_override: float | None = None) -> list:
    """Compute the six reference rows; returns dicts with predicted/estimated
    dimensions, the rectifiability verdict, and the per-row match flag."""
    rows = []
    for label, lam, gamma, pred_dim, t_end, r_stop, method, emax, emin, mc in _TABLE_ROWS:
        if t_end_override is not None:
            t_end = t_end_override
        spec = dmp.DampingSpec.power_law(lam, gamma, 1.0)
        predicted, rect = _predicted_dimension(spec, t_end)
        traj = ode_sim.integrate(
            ode_sim.SystemSpec.damped_oscillator(spec), (1.0, 1.0, 0.0), t_end, r_stop=r_stop
        )
        curve = polar_curve.to_polar(traj)
        profile = boxdim.build_profile(curve, emax, emin, method=method, max_cells=mc)
        report = boxdim.fit_dimension(profile, "auto", predicted=predicted)
        est = report.dim_estimate
        if predicted is None:
            match = False
        elif predicted == 1.0:
            match = est - 1.0 <= TABLE_TOL_DIM_ONE
        else:
            match = abs(est - predicted) <= TABLE_TOL
        expected_rect = (
            theorems.RECTIFIABLE if pred_dim == 1.0 and lam != 2.0 else theorems.NON_RECTIFIABLE
        )
        rows.append(
            {
                "h": label,
                "predicted": predicted,
                "reference": pred_dim,
                "estimated": est,
                "rectifiability": rect,
                "expected_rectifiability": expected_rect,
                "match": bool(
                    match
                    and rect == expected_rect
                    and predicted is not None
                    and abs(predicted - pred_dim) <= 1e-9
                ),
            }
        )
    return rows


def _cmd_reproduce_table(cfg: RunConfig) -> int:
    p = cfg.params
    t_end = float(p["t_end"]) if p.get("t_end") is not None else None
    rows = table_rows(t_end)
    out = p.get("out")
    header = f"{'h(t)':>10} {'predicted':>10} {'estimated':>10} {'rectifiable':>14} {'match':>6}"
    print(header)
    lines = ["h,predicted,estimated,rectifiability,match"]
    for row in rows:
        pred = "NA" if row["predicted"] is None else f"{row['predicted']:.6f}"
        print(
            f"{row['h']:>10} {pred:>10} {row['estimated']:>10.4f} "
            f"{row['rectifiability']:>14} {str(row['match']):>6}"
        )
        lines.append(
            f"{row['h']},{pred},{row['estimated']:.17g},{row['rectifiability']},{row['match']}"
        )
    if out:
        with open(out, "w") as fh:
            fh.write("\n".join(lines) + "\n")
    return 0 if all(row["match"] for row in rows) else 1


_COMMANDS = {
    "simulate": _cmd_simulate,
    "dim": _cmd_dim,
    "rectifiability": _cmd_rectifiability,
    "verify-criteria": _cmd_verify_criteria,
    "spiral": _cmd_spiral,
    "reproduce-table": _cmd_reproduce_table,
}


def _add_common(sp):
    sp.add_argument("--config", help="key=value config file; flags override it")
    sp.add_argument("--seed", type=int, default=0)


def _add_system(sp):
    sp.add_argument("--system", choices=["oscillator", "bessel"], default="oscillator")
    sp.add_argument("--damping", choices=["powerlaw", "bessel", "sampled"], default="powerlaw")
    sp.add_argument("--lambda", dest="lam", type=float)
    sp.add_argument("--gamma", type=float)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--nu", type=float)
    sp.add_argument("--knots", help="CSV of (t, h) samples for sampled damping")
    sp.add_argument("--t0", type=float)
    sp.add_argument("--t1", type=float)
    sp.add_argument("--x0", type=float)
    sp.add_argument("--y0", type=float)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--rtol", type=float)
    sp.add_argument("--atol", type=float)
    sp.add_argument("--max-angle-step", dest="max_angle_step", type=float)
    sp.add_argument("--r-stop", dest="r_stop", type=float)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="spiraldim", description=__doc__.split("\n")[0])
    sub = ap.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("simulate", help="integrate and write trajectory CSV")
    _add_common(sp)
    _add_system(sp)
    sp.add_argument("--out")
    sp.add_argument("--svg")

    sp = sub.add_parser("dim", help="simulate and estimate the box dimension")
    _add_common(sp)
    _add_system(sp)
    sp.add_argument("--eps-max", dest="eps_max", type=float)
    sp.add_argument("--eps-min", dest="eps_min", type=float)
    sp.add_argument("--method", choices=["sausage", "box"])
    sp.add_argument("--window", choices=["auto", "full"])
    sp.add_argument("--grid-factor", dest="grid_factor", type=float)
    sp.add_argument("--max-cells", dest="max_cells", type=float)
    sp.add_argument("--profile-out", dest="profile_out")
    sp.add_argument("--report-out", dest="report_out")
    sp.add_argument("--svg")

    sp = sub.add_parser("rectifiability", help="classify the damping spec")
    _add_common(sp)
    _add_system(sp)
    sp.add_argument("--t-max", dest="t_max", type=float)
    sp.add_argument("--report-out", dest="report_out")

    sp = sub.add_parser("verify-criteria", help="run all analytic checkers")
    _add_common(sp)
    _add_system(sp)
    sp.add_argument("--n-probes", dest="n_probes", type=int)
    sp.add_argument("--report-out", dest="report_out")

    sp = sub.add_parser("spiral", help="emit an analytic generator spiral")
    _add_common(sp)
    sp.add_argument("--kind", choices=["power", "scaled_power", "exp"])
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--scale", type=float)
    sp.add_argument("--rate", type=float)
    sp.add_argument("--phi1", type=float)
    sp.add_argument("--phi2", type=float)
    sp.add_argument("--grid-step", dest="grid_step", type=float)
    sp.add_argument("--out")
    sp.add_argument("--svg")

    sp = sub.add_parser("reproduce-table", help="recompute the six reference rows")
    _add_common(sp)
    sp.add_argument("--t-end", dest="t_end", type=float)
    sp.add_argument("--out")

    return ap


def parse_config(argv) -> RunConfig:
    args = build_parser().parse_args(argv)
    params = {}
    if getattr(args, "config", None):
        try:
            file_params = _read_config_file(args.config)
        except (OSError, ValueError) as exc:
            raise ConfigError(str(exc))
        if "lambda" in file_params:  # the flag is --lambda, stored as "lam"
            file_params["lam"] = file_params.pop("lambda")
        params.update(file_params)
    for key, value in vars(args).items():
        if key in ("command", "config", "seed") or value is None:
            continue
        params[key] = value
    return RunConfig(command=args.command, params=params, seed=args.seed)


class ConfigError(Exception):
    pass


def main(argv=None) -> int:
    _apply_thread_cap()
    try:
        cfg = parse_config(argv)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[cfg.command](cfg)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except SpiraldimError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
