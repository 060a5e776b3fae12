"""Command line runner for the verification suites.

Each suite is a named list of checks with pinned tolerances. A run writes a
deterministic ``report.json`` (no timestamps, sorted keys), a separate
``timing.json``, and any plot data as CSV. Exit code 0 means every check
passed, 1 means at least one failed, 2 means the invocation or config was bad.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np

from . import config as cfgmod
from . import geometry, global_checks, identities, potentials, quadrature, zeroset
from .errors import ConfigError, IoError, StaticPotError, UnboundedPotentialError
from .geodesics import GrowthBound, growth_bound_check, solve_curve_ode
from .geometry import Point3, PerturbationTerm


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    computed: float
    expected: float
    tolerance: float
    detail: str = ""


def _check(name, fn):
    """Run one check body, turning library errors into a failed result."""
    try:
        return fn()
    except StaticPotError as exc:
        return CheckResult(name, False, math.nan, math.nan, math.nan,
                           f"{type(exc).__name__}: {exc}")


def _ok(name, computed, expected, tolerance, detail=""):
    passed = bool(abs(computed - expected) <= tolerance)
    return CheckResult(name, passed, float(computed), float(expected),
                       float(tolerance), detail)


def _flag(name, passed, detail=""):
    return CheckResult(name, bool(passed), 1.0 if passed else 0.0, 1.0, 0.0, detail)


def emit_plot_data(out_dir, filename, header, rows):
    """Write one CSV of plot data; header-only when there are no rows."""
    path = os.path.join(out_dir, filename)
    try:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(header)
            for row in rows:
                writer.writerow(["%.17g" % v if isinstance(v, float) else v for v in row])
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


# ---------------------------------------------------------------------------
# suites


def _suite_euclidean_affine(cfg, rng, out_dir):
    n = cfgmod.as_int(cfg, "n_points")
    r_max = cfgmod.as_float(cfg, "r_max")
    tol = cfgmod.as_float(cfg, "tol")
    coeffs = cfgmod.as_float_list(cfg, "coeffs")
    if len(coeffs) != 4:
        raise ConfigError("coeffs must be four numbers a0,a1,a2,a3")
    metric = geometry.euclidean()
    f = potentials.affine(*coeffs)
    pts = [Point3.of(rng.uniform(-r_max, r_max, size=3)) for _ in range(n)]

    def curvature_zero():
        worst = 0.0
        for p in pts:
            bundle = geometry.curvature_at(metric, p)
            worst = max(worst, float(np.max(np.abs(bundle.riemann))),
                        abs(bundle.scalar))
        return _ok("curvature_zero", worst, 0.0, tol)

    def static_exact():
        worst = max(potentials.static_residual(f, metric, p).combined_norm
                    for p in pts)
        return _ok("static_residual_zero", worst, 0.0, tol)

    def frame_degenerate():
        bad = sum(1 for p in pts[:10]
                  if identities.ricci_eigenframe(metric, p).kind
                  != identities.ALL_EQUAL)
        return _flag("eigenframe_all_equal", bad == 0,
                     f"{bad} of 10 points misclassified")

    def fd_agreement():
        worst = 0.0
        for p in pts[:10]:
            a = geometry.curvature_at(metric, p, backend="dual").ricci
            b = geometry.curvature_at(metric, p, backend="fd").ricci
            worst = max(worst, float(np.max(np.abs(a - b))))
        return _ok("fd_backend_agreement", worst, 0.0, 1e-6)

    checks = [("curvature_zero", curvature_zero),
              ("static_residual_zero", static_exact),
              ("eigenframe_all_equal", frame_degenerate),
              ("fd_backend_agreement", fd_agreement)]
    return checks, []


def _suite_schwarzschild_static(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    n = cfgmod.as_int(cfg, "n_points")
    r_min = cfgmod.as_float(cfg, "r_min")
    r_max = cfgmod.as_float(cfg, "r_max")
    tol = cfgmod.as_float(cfg, "tol")
    metric = geometry.schwarzschild(mass)
    f = potentials.schwarzschild_potential(mass)
    pts = geometry.sample_shell(rng, n, r_min, r_max)
    rows = []

    def static_residual():
        worst = 0.0
        for p in pts:
            res = potentials.static_residual(f, metric, p).combined_norm
            rows.append((p.r, res))
            worst = max(worst, res)
        rows.sort()
        return _ok("static_residual_max", worst, 0.0, tol)

    def scalar_flat():
        worst = max(abs(geometry.curvature_at(metric, p).scalar) for p in pts)
        return _ok("scalar_curvature_zero", worst, 0.0, tol)

    def backend_agreement():
        worst = 0.0
        for p in pts[:20]:
            a = geometry.curvature_at(metric, p, backend="dual").ricci
            b = geometry.curvature_at(metric, p, backend="fd").ricci
            scale = max(1e-30, float(np.max(np.abs(a))))
            worst = max(worst, float(np.max(np.abs(a - b))) / scale)
        return _ok("backend_relative_agreement", worst, 0.0, 1e-6)

    def frame_structure():
        worst_kind = 0
        worst_angle = 0.0
        for p in pts[:20]:
            frame = identities.ricci_eigenframe(metric, p)
            if frame.kind != identities.TWO_EQUAL:
                worst_kind += 1
                continue
            d = frame.frame[:, frame.simple_index]
            radial = p.as_array() / p.r
            cosang = abs(float(d @ radial)) / float(np.linalg.norm(d))
            worst_angle = max(worst_angle, 1.0 - min(1.0, cosang))
        if worst_kind:
            return _flag("simple_direction_radial", False,
                         f"{worst_kind} points not of the two-equal kind")
        return _ok("simple_direction_radial", worst_angle, 0.0, 1e-8)

    def eigenvalue_ratio():
        worst = 0.0
        for p in pts[:20]:
            frame = identities.ricci_eigenframe(metric, p)
            lam = frame.eigenvalues
            simple = lam[frame.simple_index]
            pair = [lam[i] for i in range(3) if i != frame.simple_index]
            worst = max(worst, abs(simple + 2.0 * pair[0]) / abs(simple))
        return _ok("radial_eigenvalue_doubling", worst, 0.0, 1e-8)

    checks = [("static_residual_max", static_residual),
              ("scalar_curvature_zero", scalar_flat),
              ("backend_relative_agreement", backend_agreement),
              ("simple_direction_radial", frame_structure),
              ("radial_eigenvalue_doubling", eigenvalue_ratio)]
    plots = [("residuals.csv", ("r", "combined_residual"), rows)]
    return checks, plots


def _suite_tod_identities(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    n = cfgmod.as_int(cfg, "n_points")
    r_min = cfgmod.as_float(cfg, "r_min")
    r_max = cfgmod.as_float(cfg, "r_max")
    tol = cfgmod.as_float(cfg, "tol")
    metric = geometry.schwarzschild(mass)
    f = potentials.schwarzschild_potential(mass)
    pts = geometry.sample_shell(rng, n, r_min, r_max)
    rows = []

    def residual_max():
        worst = 0.0
        for p in pts:
            res = identities.tod_identity_residuals(f, metric, p)
            m = float(np.max(np.abs(res)))
            rows.append((p.r, m))
            worst = max(worst, m)
        rows.sort()
        return _ok("cyclic_identity_max", worst, 0.0, tol)

    def gap_scan():
        report = identities.eigenvalue_gap_scan(metric, pts[:20])
        bad = report.counts().get(identities.ALL_EQUAL, 0)
        return _flag("no_spurious_full_degeneracy", bad == 0,
                     f"{bad} points reported all eigenvalues equal")

    checks = [("cyclic_identity_max", residual_max),
              ("no_spurious_full_degeneracy", gap_scan)]
    plots = [("residuals.csv", ("r", "max_identity_residual"), rows)]
    return checks, plots


def _suite_growth_bound(cfg, rng, out_dir):
    epsilon = cfgmod.as_float(cfg, "epsilon")
    r0 = cfgmod.as_float(cfg, "r0")
    t_end = cfgmod.as_float(cfg, "t_end")
    n_trials = cfgmod.as_int(cfg, "n_trials")
    bound = GrowthBound.from_initial_data(epsilon, 1.0, r0)
    ts = np.geomspace(r0, t_end, 400)
    rows = []

    def envelope_trials():
        violations = 0
        for k in range(n_trials):
            scale = rng.uniform(-1.0, 1.0)
            h = lambda t, s=scale: s * epsilon / (t * t)
            sol_ts, fs, _ = solve_curve_ode(h, 1.0, 1.0, r0, t_end, t_eval=ts)
            verdict = growth_bound_check(sol_ts, fs, bound,
                                         slope_at_start=1.0,
                                         h_values=[h(t) for t in sol_ts])
            violations += verdict.violations
            if k == 0:
                for t, v in zip(sol_ts, fs):
                    rows.append((t, v, bound.w(t)))
        return _ok("envelope_violations", violations, 0.0, 0.0,
                   f"{n_trials} admissible coefficient trials")

    def extremal_match():
        w0, dw0 = 0.99 * bound.w(r0), 0.99 * bound.w_slope(r0)
        h = lambda t: epsilon / (t * t)
        sol_ts, fs, _ = solve_curve_ode(h, w0, dw0, r0, t_end, t_eval=ts)
        exact = 0.99 * bound.w(sol_ts)
        worst = float(np.max(np.abs(fs - exact) / np.abs(exact)))
        return _ok("extremal_reproduction", worst, 0.0, 1e-8,
                   "scaled extremal solution against the closed form")

    def exponent_identity():
        a = bound.alpha
        return _ok("exponent_identity", a * (a - 1.0), epsilon, 1e-13)

    def tail_slope_bounded():
        h = lambda t: 0.5 * t ** (-2.75)
        sol_ts, fs, slopes = solve_curve_ode(h, 1.0, 1.0, r0, 1e6)
        worst = float(np.max(np.abs(slopes)))
        return _ok("tail_slope_bounded", min(worst, 10.0), worst, 0.0,
                   "slope stays bounded when the coefficient decays faster")

    checks = [("envelope_violations", envelope_trials),
              ("extremal_reproduction", extremal_match),
              ("exponent_identity", exponent_identity),
              ("tail_slope_bounded", tail_slope_bounded)]
    plots = [("envelope.csv", ("t", "solution", "envelope"), rows)]
    return checks, plots


_GRAPH_EXPR = "x1 + 0.5*ln(x2^2 + x3^2)"


def _suite_zero_set_gauss_bonnet(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    inner = cfgmod.as_float(cfg, "inner")
    outer = cfgmod.as_float(cfg, "outer")
    radii = cfgmod.as_float_list(cfg, "radii")
    n_angles = cfgmod.as_int(cfg, "n_angles")
    tol = cfgmod.as_float(cfg, "tol")
    lo, hi = cfgmod.as_float_list(cfg, "bracket")
    metric = geometry.schwarzschild(mass)
    f = potentials.expression_potential(_GRAPH_EXPR, label="log graph")
    region = zeroset.AnnulusRegion(inner, outer)
    graph = zeroset.extract_zero_graph(f, metric, region, n_u=4, n_v=8,
                                       bracket=lambda u, v: (lo, hi))
    report = zeroset.gauss_bonnet_limit(graph, radii, n_angles=n_angles)
    rows = list(zip(report.radii, report.turning_integrals,
                    report.kappa_deviations))

    def limit_check():
        err = abs(report.extrapolated / (2.0 * math.pi) - 1.0)
        return _ok("turning_limit", err, 0.0, tol,
                   f"extrapolated {report.extrapolated:.6f} vs 2*pi")

    def exponent_check():
        return _ok("deviation_decay_exponent",
                   report.deviation_decay_exponent, -metric.tau, 0.3)

    def graph_flattens():
        du, dv = graph.chart.height_slopes(0.0, outer / 2.0)
        return _ok("graph_slope_decay", math.hypot(du, dv), 0.0, 0.2)

    checks = [("turning_limit", limit_check),
              ("deviation_decay_exponent", exponent_check),
              ("graph_slope_decay", graph_flattens)]
    plots = [("turning.csv",
              ("radius", "turning_integral", "mean_kappa_deviation"),
              rows)]
    return checks, plots


def _suite_mass_fit(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    lo, hi = cfgmod.as_float_list(cfg, "window")
    n_spheres = cfgmod.as_int(cfg, "n_spheres")
    tol = cfgmod.as_float(cfg, "tol")
    metric = geometry.schwarzschild(mass)
    f = potentials.schwarzschild_potential(mass)
    rows = []

    def recovered():
        fit = global_checks.fit_mass_expansion(f, metric, window=(lo, hi),
                                               n_spheres=n_spheres)
        for r, avg in zip(fit.radii, fit.averages):
            rows.append((r, avg, fit.model(r)))
        return _ok("mass_recovered", fit.mass / mass, 1.0, tol,
                   f"fitted mass {fit.mass:.8f}")

    def synthetic_exact():
        g = geometry.euclidean()
        fsyn = potentials.expression_potential("1 - 3/r + 5/(r*r)",
                                               label="synthetic expansion")
        fit = global_checks.fit_mass_expansion(fsyn, g, window=(lo, hi),
                                               n_spheres=n_spheres)
        return _ok("synthetic_mass_exact", fit.mass, 3.0, 5e-3)

    def unbounded_gate():
        try:
            global_checks.fit_mass_expansion(potentials.affine(0.0, 1.0, 0.0, 0.0),
                                             geometry.euclidean(),
                                             window=(lo, hi),
                                             n_spheres=n_spheres)
        except UnboundedPotentialError:
            return _flag("unbounded_rejected", True)
        return _flag("unbounded_rejected", False,
                     "a potential with linear growth was accepted")

    def remainder_decay():
        fit = potentials.fit_linear_part(
            f, metric, radii=list(np.geomspace(lo, hi, max(3, n_spheres))))
        if fit.remainder_exponent is None:
            return _flag("remainder_decay_exponent", False,
                         "remainder below resolution; widen the window inward")
        return _ok("remainder_decay_exponent", fit.remainder_exponent, -2.0, 0.4)

    checks = [("mass_recovered", recovered),
              ("synthetic_mass_exact", synthetic_exact),
              ("unbounded_rejected", unbounded_gate),
              ("remainder_decay_exponent", remainder_decay)]
    plots = [("averages.csv", ("r", "sphere_average", "fitted_model"), rows)]
    return checks, plots


def _suite_huisken_yau(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    amp = cfgmod.as_float(cfg, "perturb_amp")
    r_lo = cfgmod.as_float(cfg, "r_lo")
    r_hi = cfgmod.as_float(cfg, "r_hi")
    ratio_tol = cfgmod.as_float(cfg, "ratio_factor")
    pure = geometry.schwarzschild(mass)
    terms = [PerturbationTerm(0, 0, amp, (0, 0, 0)),
             PerturbationTerm(0, 1, 0.6 * amp, (0, 0, 0)),
             PerturbationTerm(2, 2, -0.8 * amp, (0, 0, 0))]
    bumpy = geometry.perturbed_as(mass, terms)
    dirs = quadrature.sphere_rule(4, 8).directions
    rows = []

    def sphere_max(metric, r):
        worst = 0.0
        for d in dirs:
            res = global_checks.curvature_decay_residual(metric, Point3.of(r * d))
            worst = max(worst, res.residual)
        return worst

    def exact_on_pure():
        worst = sphere_max(pure, r_lo)
        return _ok("model_exact_unperturbed", worst, 0.0, 1e-12)

    def perturbed_ratio():
        lo_val = sphere_max(bumpy, r_lo)
        hi_val = sphere_max(bumpy, r_hi)
        for rr in np.geomspace(r_lo, r_hi, 7):
            rows.append((rr, sphere_max(bumpy, rr)))
        expected = (r_lo / r_hi) ** 4
        ratio = hi_val / lo_val
        passed = expected / ratio_tol <= ratio <= expected * ratio_tol
        return CheckResult("residual_ratio_fourth_order", passed, ratio,
                           expected, expected * (ratio_tol - 1.0),
                           f"doubling the radius scales the defect by {ratio:.5f}")

    def rotation_covariant():
        theta = 0.3
        q = np.array([[math.cos(theta), -math.sin(theta), 0.0],
                      [math.sin(theta), math.cos(theta), 0.0],
                      [0.0, 0.0, 1.0]])
        rotated = geometry.rotate_chart(bumpy, q)
        p = Point3.of(r_lo * dirs[3])
        a = global_checks.curvature_decay_residual(bumpy, p).residual
        b = global_checks.curvature_decay_residual(
            rotated, Point3.of(q.T @ p.as_array())).residual
        scale = max(a, 1e-30)
        return _ok("rotation_covariance", abs(a - b) / scale, 0.0, 1e-8)

    checks = [("model_exact_unperturbed", exact_on_pure),
              ("residual_ratio_fourth_order", perturbed_ratio),
              ("rotation_covariance", rotation_covariant)]
    plots = [("decay.csv", ("r", "sphere_max_residual"), rows)]
    return checks, plots


def _suite_anisotropy_limit(cfg, rng, out_dir):
    masses = cfgmod.as_float_list(cfg, "masses")
    heights = cfgmod.as_float_list(cfg, "heights")
    inner = cfgmod.as_float(cfg, "inner")
    outer = cfgmod.as_float(cfg, "outer")
    tol = cfgmod.as_float(cfg, "tol")
    f = potentials.expression_potential(_GRAPH_EXPR, label="log graph")
    region = zeroset.AnnulusRegion(inner, outer)
    rows = []
    checks = []
    for m in masses:
        def one(mass=m):
            metric = geometry.schwarzschild(mass)
            graph = zeroset.extract_zero_graph(
                f, metric, region, n_u=4, n_v=8,
                bracket=lambda u, v: (-10.0, 2.0))
            report = global_checks.anisotropy_limit(metric, graph, heights)
            for y, v in zip(report.heights, report.scaled_differences):
                rows.append((mass, y, v))
            err = abs(report.extrapolated / (3.0 * mass) - 1.0)
            return _ok(f"limit_mass_{mass:g}", err, 0.0, tol,
                       f"extrapolated {report.extrapolated:.5f} vs {3.0 * mass:g}")
        checks.append((f"limit_mass_{m:g}", one))
    plots = [("scaled_differences.csv",
              ("mass", "height", "scaled_difference"), rows)]
    return checks, plots


def _suite_integral_identities(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    r_inner = cfgmod.as_float(cfg, "r_inner")
    r_outer = cfgmod.as_float(cfg, "r_outer")
    n_polar = cfgmod.as_int(cfg, "n_polar")
    n_azimuth = cfgmod.as_int(cfg, "n_azimuth")
    n_panels = cfgmod.as_int(cfg, "n_panels")
    nodes_per_panel = cfgmod.as_int(cfg, "nodes_per_panel")
    rel_tol = cfgmod.as_float(cfg, "rel_tol")
    capacity_tol = cfgmod.as_float(cfg, "capacity_tol")
    metric = geometry.schwarzschild(mass)
    f = potentials.schwarzschild_potential(mass)
    rule = quadrature.sphere_rule(n_polar, n_azimuth)
    rows = []

    def shell_defect():
        report = global_checks.integral_identity_check(
            f, metric, r_inner, r_outer, rule=rule,
            n_panels=n_panels, nodes_per_panel=nodes_per_panel)
        rows.append((r_inner, report.flux_inner))
        rows.append((r_outer, report.flux_outer))
        return _ok("shell_flux_defect", report.relative_defect, 0.0, rel_tol,
                   f"volume term {report.bulk:.10f}")

    def doubled_rule_stable():
        # doubling guard for the reduced angular rules: a radially symmetric
        # integrand must not move when the rule is refined
        coarse = quadrature.sphere_rule(6, 12)
        fine = quadrature.sphere_rule(12, 24)
        a = global_checks.integral_identity_check(
            f, metric, r_inner, 10.0, rule=coarse,
            n_panels=8, nodes_per_panel=6)
        b = global_checks.integral_identity_check(
            f, metric, r_inner, 10.0, rule=fine,
            n_panels=8, nodes_per_panel=6)
        drift = abs(a.relative_defect - b.relative_defect)
        return _ok("angular_refinement_stable", drift, 0.0, rel_tol,
                   f"coarse defect {a.relative_defect:.3e}")

    def capacity():
        full_chart = geometry.schwarzschild(mass, exterior_only=False)
        balance = global_checks.capacity_balance_instance(
            mass, f, full_chart, rule=quadrature.sphere_rule(6, 12))
        return _ok("capacity_balance", balance.relative_gap, 0.0, capacity_tol,
                   f"boundary factor {balance.boundary_gradient:.8f}, "
                   f"euler characteristic {balance.euler_characteristic}")

    checks = [("shell_flux_defect", shell_defect),
              ("angular_refinement_stable", doubled_rule_stable),
              ("capacity_balance", capacity)]
    plots = [("fluxes.csv", ("r", "flux"), rows)]
    return checks, plots


def _suite_conformal_double(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    n = cfgmod.as_int(cfg, "n_points")
    r_min = cfgmod.as_float(cfg, "r_min")
    r_max = cfgmod.as_float(cfg, "r_max")
    tol = cfgmod.as_float(cfg, "tol")
    metric = geometry.schwarzschild(mass)
    f = potentials.schwarzschild_potential(mass)
    pts = geometry.sample_shell(rng, n, r_min, r_max)
    rows = []

    def both_signs():
        worst = 0.0
        for p in pts:
            plus = global_checks.conformal_double_scalar(f, metric, 1, p)
            minus = global_checks.conformal_double_scalar(f, metric, -1, p)
            rows.append((p.r, plus, minus))
            worst = max(worst, abs(plus), abs(minus))
        rows.sort()
        return _ok("doubled_scalar_flat", worst, 0.0, tol)

    def nonstatic_control():
        g = geometry.euclidean()
        fq = potentials.expression_potential("x1*x1", label="quadratic control")
        val = global_checks.conformal_double_scalar(fq, g, 1, Point3(1.0, 0.0, 0.0))
        return _ok("control_scalar_nonzero", val, -0.5, 1e-10,
                   "a non-static pair must not look flat")

    checks = [("doubled_scalar_flat", both_signs),
              ("control_scalar_nonzero", nonstatic_control)]
    plots = [("doubled_scalars.csv", ("r", "scalar_plus", "scalar_minus"), rows)]
    return checks, plots


def _suite_flow_classify(cfg, rng, out_dir):
    mass = cfgmod.as_float(cfg, "mass")
    start = cfgmod.as_float_list(cfg, "start")
    r_escape = cfgmod.as_float(cfg, "r_escape")
    b_tol = cfgmod.as_float(cfg, "b_tol")
    if len(start) != 3:
        raise ConfigError("start must be three coordinates")
    metric = geometry.schwarzschild(mass)
    f = potentials.schwarzschild_potential(mass)
    budget = global_checks.FlowBudget(r_escape=r_escape, t_max=1e10)
    trace = global_checks.flow_classify(f, metric, Point3.of(start), budget)
    rows = [(s.t, float(np.linalg.norm(s.position)), s.f_value, s.grad_norm)
            for s in trace.samples]

    def classified():
        return _flag("escape_classification",
                     trace.classification == global_checks.ESCAPE_TO_END,
                     f"got {trace.classification}")

    def limit_value():
        return _ok("limit_estimate", trace.limit_estimate, 1.0, b_tol)

    def monotone():
        return _ok("monotone_violations", trace.monotone_violations, 0.0, 0.0)

    def critical_control():
        g = geometry.euclidean()
        fq = potentials.expression_potential("-(x1*x1 + x2*x2 + x3*x3)",
                                             label="sink control")
        tr = global_checks.flow_classify(
            fq, g, Point3(1.0, 0.0, 0.0),
            global_checks.FlowBudget(r_escape=50.0, t_max=50.0))
        return _flag("critical_point_detected",
                     tr.classification == global_checks.CONVERGE_CRITICAL,
                     f"got {tr.classification}")

    def unbounded_control():
        g = geometry.euclidean()
        fa = potentials.affine(0.0, 1.0, 0.0, 0.0)
        tr = global_checks.flow_classify(
            fa, g, Point3(0.1, 0.0, 0.0),
            global_checks.FlowBudget(r_escape=25.0, t_max=1e4))
        ok = (tr.classification == global_checks.ESCAPE_TO_END
              and math.isinf(tr.limit_estimate))
        return _flag("unbounded_escape_detected", ok,
                     f"got {tr.classification}, limit {tr.limit_estimate}")

    checks = [("escape_classification", classified),
              ("limit_estimate", limit_value),
              ("monotone_violations", monotone),
              ("critical_point_detected", critical_control),
              ("unbounded_escape_detected", unbounded_control)]
    plots = [("flow_trace.csv", ("t", "r", "potential", "gradient_norm"), rows)]
    return checks, plots


SUITES = {
    "euclidean_affine": (
        {"n_points": "40", "r_max": "10", "tol": "1e-10",
         "coeffs": "0.5, 1.0, -2.0, 3.0"},
        _suite_euclidean_affine),
    "schwarzschild_static": (
        {"mass": "2.0", "n_points": "50", "r_min": "1.5", "r_max": "10",
         "tol": "1e-7"},
        _suite_schwarzschild_static),
    "tod_identities": (
        {"mass": "1.5", "n_points": "50", "r_min": "1.2", "r_max": "15",
         "tol": "1e-5"},
        _suite_tod_identities),
    "growth_bound": (
        {"epsilon": "0.5", "r0": "1.0", "t_end": "1e4", "n_trials": "20"},
        _suite_growth_bound),
    "zero_set_gauss_bonnet": (
        {"mass": "2.0", "inner": "30", "outer": "500",
         "radii": "50, 100, 200", "n_angles": "128", "tol": "0.01",
         "bracket": "-8, 0"},
        _suite_zero_set_gauss_bonnet),
    "mass_fit": (
        {"mass": "2.0", "window": "50, 400", "n_spheres": "8", "tol": "0.01"},
        _suite_mass_fit),
    "huisken_yau": (
        {"mass": "1.0", "perturb_amp": "0.5", "r_lo": "20", "r_hi": "40",
         "ratio_factor": "1.5"},
        _suite_huisken_yau),
    "anisotropy_limit": (
        {"masses": "2, -1", "heights": "100, 140, 200, 280, 400, 560, 800",
         "inner": "50", "outer": "1000", "tol": "0.05"},
        _suite_anisotropy_limit),
    "integral_identities": (
        {"mass": "1.0", "r_inner": "2", "r_outer": "40", "n_polar": "8",
         "n_azimuth": "16", "n_panels": "18", "nodes_per_panel": "8",
         "rel_tol": "1e-5", "capacity_tol": "0.02"},
        _suite_integral_identities),
    "conformal_double": (
        {"mass": "1.0", "n_points": "50", "r_min": "0.8", "r_max": "15",
         "tol": "1e-6"},
        _suite_conformal_double),
    "flow_classify": (
        {"mass": "1.0", "start": "0.6, 0, 0", "r_escape": "700",
         "b_tol": "1e-3"},
        _suite_flow_classify),
}


# ---------------------------------------------------------------------------
# report plumbing


def _atomic_write_json(path, payload):
    tmp = path + ".tmp"
    try:
        with open(tmp, "w", encoding="utf-8") as fh:
            json.dump(payload, fh, indent=2, sort_keys=True)
            fh.write("\n")
        os.replace(tmp, path)
    except OSError as exc:
        raise IoError(f"cannot write {path}: {exc}") from None


def _number(x):
    if isinstance(x, float) and math.isnan(x):
        return "nan"
    if isinstance(x, float) and math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return x


def run_suite(suite, cfg_overrides, out_dir, seed=0, parallel=False):
    if suite not in SUITES:
        raise ConfigError(f"unknown suite {suite!r}; see list-suites")
    defaults, fn = SUITES[suite]
    cfg = cfgmod.merge_with_defaults(cfg_overrides, defaults, suite)
    rng = np.random.default_rng(seed)
    os.makedirs(out_dir, exist_ok=True)

    started = time.time()
    checks, plots = fn(cfg, rng, out_dir)
    if parallel:
        with ThreadPoolExecutor(max_workers=min(8, len(checks))) as pool:
            futures = [(name, pool.submit(_check, name, body))
                       for name, body in checks]
            results = [fut.result() for _, fut in futures]
    else:
        results = [_check(name, body) for name, body in checks]
    for filename, header, rows in plots:
        emit_plot_data(out_dir, filename, header, rows)
    elapsed = time.time() - started

    report = {
        "suite": suite,
        "seed": seed,
        "config": {k: cfg[k] for k in sorted(cfg)},
        "checks": [
            {"name": r.name, "passed": r.passed,
             "computed": _number(r.computed), "expected": _number(r.expected),
             "tolerance": _number(r.tolerance), "detail": r.detail}
            for r in results],
        "n_passed": sum(1 for r in results if r.passed),
        "n_failed": sum(1 for r in results if not r.passed),
        "passed": all(r.passed for r in results),
    }
    _atomic_write_json(os.path.join(out_dir, "report.json"), report)
    _atomic_write_json(os.path.join(out_dir, "timing.json"),
                       {"suite": suite, "elapsed_seconds": elapsed,
                        "started_unix": started})
    return report


def _parse_metric_spec(spec):
    family, _, rest = spec.partition(":")
    kwargs = {}
    for tok in filter(None, (t.strip() for t in rest.split(","))):
        if "=" not in tok:
            raise ConfigError(f"bad metric option {tok!r}")
        k, v = tok.split("=", 1)
        kwargs[k.strip()] = v.strip()
    if family == "euclidean":
        if kwargs:
            raise ConfigError("euclidean takes no options")
        return geometry.euclidean()
    if family == "schwarzschild":
        mass = float(kwargs.pop("mass", "1"))
        if kwargs:
            raise ConfigError(f"unknown schwarzschild option(s): {sorted(kwargs)}")
        return geometry.schwarzschild(mass)
    raise ConfigError(f"unknown metric family {family!r}")


def _parse_points(arg, path):
    triples = []
    if path is not None:
        try:
            with open(path, "r", encoding="utf-8") as fh:
                lines = [ln.strip() for ln in fh if ln.strip()]
        except OSError as exc:
            raise ConfigError(f"cannot read points file: {exc}") from None
        triples.extend(lines)
    if arg:
        triples.extend(t for t in arg.split(";") if t.strip())
    pts = []
    for t in triples:
        vals = [float(v) for v in t.split(",")]
        if len(vals) != 3:
            raise ConfigError(f"point {t!r} is not three coordinates")
        pts.append(Point3.of(vals))
    if not pts:
        raise ConfigError("no points given; use --points or --points-file")
    return pts


def _cmd_dump_curvature(args):
    metric = _parse_metric_spec(args.metric)
    pts = _parse_points(args.points, args.points_file)
    os.makedirs(args.out, exist_ok=True)
    rows = []
    for p in pts:
        bundle = geometry.curvature_at(metric, p, backend=args.backend)
        ric = bundle.ricci
        rows.append((p.x1, p.x2, p.x3, bundle.scalar,
                     ric[0, 0], ric[0, 1], ric[0, 2],
                     ric[1, 1], ric[1, 2], ric[2, 2]))
    emit_plot_data(args.out, "curvature.csv",
                   ("x1", "x2", "x3", "scalar",
                    "ric_11", "ric_12", "ric_13",
                    "ric_22", "ric_23", "ric_33"), rows)
    print(f"wrote {len(rows)} rows to {os.path.join(args.out, 'curvature.csv')}")
    return 0


def build_parser():
    parser = argparse.ArgumentParser(
        prog="staticpot",
        description="numerical verification suites for static potentials")
    sub = parser.add_subparsers(dest="command", required=True)

    p_verify = sub.add_parser("verify", help="run one verification suite")
    p_verify.add_argument("suite")
    p_verify.add_argument("--config", default=None,
                          help="flat key = value file overriding suite defaults")
    p_verify.add_argument("--out", default="out",
                          help="directory for report.json, timing.json and CSVs")
    p_verify.add_argument("--seed", type=int, default=0)
    p_verify.add_argument("--parallel", action="store_true",
                          help="run the suite's checks in a thread pool")

    sub.add_parser("list-suites", help="print suite names and their config keys")

    p_dump = sub.add_parser("dump-curvature",
                            help="tabulate curvature of a metric at points")
    p_dump.add_argument("--metric", default="euclidean",
                        help="family[:key=value,...], e.g. schwarzschild:mass=2")
    p_dump.add_argument("--points", default="",
                        help="semicolon-separated x1,x2,x3 triples")
    p_dump.add_argument("--points-file", default=None,
                        help="file with one x1,x2,x3 triple per line")
    p_dump.add_argument("--backend", default="dual", choices=("dual", "fd"))
    p_dump.add_argument("--out", default="out")
    return parser


def main(argv=None):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "list-suites":
            for name in sorted(SUITES):
                keys = ", ".join(sorted(SUITES[name][0]))
                print(f"{name}: {keys}")
            return 0
        if args.command == "dump-curvature":
            return _cmd_dump_curvature(args)
        overrides = cfgmod.load_config(args.config) if args.config else {}
        report = run_suite(args.suite, overrides, args.out,
                           seed=args.seed, parallel=args.parallel)
        for chk in report["checks"]:
            mark = "PASS" if chk["passed"] else "FAIL"
            print(f"[{mark}] {report['suite']}.{chk['name']}")
        print(f"{report['n_passed']} passed, {report['n_failed']} failed; "
              f"report in {os.path.join(args.out, 'report.json')}")
        return 0 if report["passed"] else 1
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except IoError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
