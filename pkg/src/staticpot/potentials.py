"""Scalar potential fields and the static-system residuals.

A potential is a scalar closure with the same genericity contract as metric
components: it must accept floats or jets. The static system under test is

    Hess_g f = f * Ric_g      and      Laplace_g f = 0

whose pointwise defect is reported by :func:`static_residual`. The Bochner
identity residual and the asymptotic linear-part fit live here too.
"""

from __future__ import annotations

import ast
import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import ConfigError, NonConvergentError, NotStaticError, ZeroPotentialError
from .geometry import (MetricField, Point3, _inv3, christoffel_at, curvature_at)
from .quadrature import SphereRule, aitken_limit, sphere_rule


@dataclass(frozen=True)
class PotentialField:
    """A scalar field on the chart, with optional known linear part."""

    expr: Callable
    label: str = "potential"
    linear_part: tuple | None = None

    def value(self, point) -> float:
        p = Point3.of(point)
        return float(jets.value(self.expr(p.x1, p.x2, p.x3)))

    def gradient(self, point) -> np.ndarray:
        p = Point3.of(point)
        Xs = jets.seed(p.coords(), 1)
        _, grad = jets.taylor1(self.expr(Xs[0], Xs[1], Xs[2]))
        return np.array([float(v) for v in grad])

    def hessian(self, point) -> np.ndarray:
        """Coordinate second partials (no metric involved)."""
        p = Point3.of(point)
        Xs = jets.seed(p.coords(), 2)
        _, _, hess = jets.taylor2(self.expr(Xs[0], Xs[1], Xs[2]))
        return np.array([[float(hess[i][j]) for j in range(3)] for i in range(3)])


def affine(a0: float, a1: float, a2: float, a3: float) -> PotentialField:
    """a0 + a1 x1 + a2 x2 + a3 x3; static on the flat metric."""

    def expr(X1, X2, X3):
        return a0 + a1 * X1 + a2 * X2 + a3 * X3

    return PotentialField(expr=expr, label="affine", linear_part=(a1, a2, a3))


def schwarzschild_potential(mass: float) -> PotentialField:
    """(1 - m/2r) / (1 + m/2r), the bounded potential of the conformal slice."""
    m = float(mass)

    def expr(X1, X2, X3):
        r = jets.sqrt(X1 * X1 + X2 * X2 + X3 * X3)
        w = (0.5 * m) / r
        return (1.0 - w) / (1.0 + w)

    return PotentialField(expr=expr, label=f"schwarzschild_potential(m={m:g})",
                          linear_part=(0.0, 0.0, 0.0))


def from_callable(fn: Callable, label: str = "custom", linear_part: tuple | None = None) -> PotentialField:
    return PotentialField(expr=fn, label=label, linear_part=linear_part)


### Expression grammar: + - * / ^, sqrt, ln, names x1 x2 x3 r, numbers

_BIN_OPS = {ast.Add: lambda a, b: a + b,
            ast.Sub: lambda a, b: a - b,
            ast.Mult: lambda a, b: a * b,
            ast.Div: lambda a, b: a / b}
_FUNCS = {"sqrt": jets.sqrt, "ln": jets.log}


def _const_subtree(node) -> bool:
    return not any(isinstance(n, (ast.Name, ast.Call)) for n in ast.walk(node))


def _validate(node) -> None:
    if isinstance(node, ast.Expression):
        _validate(node.body)
    elif isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            if not _const_subtree(node.right):
                raise ConfigError("exponents must be constants")
        elif type(node.op) not in _BIN_OPS:
            raise ConfigError(f"operator {type(node.op).__name__} not allowed")
        _validate(node.left)
        _validate(node.right)
    elif isinstance(node, ast.UnaryOp):
        if not isinstance(node.op, (ast.USub, ast.UAdd)):
            raise ConfigError("only unary +/- allowed")
        _validate(node.operand)
    elif isinstance(node, ast.Call):
        if not (isinstance(node.func, ast.Name) and node.func.id in _FUNCS):
            raise ConfigError("only sqrt() and ln() calls allowed")
        if len(node.args) != 1 or node.keywords:
            raise ConfigError("functions take exactly one argument")
        _validate(node.args[0])
    elif isinstance(node, ast.Name):
        if node.id not in ("x1", "x2", "x3", "r"):
            raise ConfigError(f"unknown name {node.id!r}")
    elif isinstance(node, ast.Constant):
        if not isinstance(node.value, (int, float)):
            raise ConfigError("only numeric constants allowed")
    else:
        raise ConfigError(f"construct {type(node).__name__} not allowed")


def _eval_node(node, env):
    if isinstance(node, ast.Expression):
        return _eval_node(node.body, env)
    if isinstance(node, ast.BinOp):
        if isinstance(node.op, ast.Pow):
            base = _eval_node(node.left, env)
            expo = _eval_node(node.right, {})
            return jets.power(base, expo)
        return _BIN_OPS[type(node.op)](_eval_node(node.left, env), _eval_node(node.right, env))
    if isinstance(node, ast.UnaryOp):
        v = _eval_node(node.operand, env)
        return -v if isinstance(node.op, ast.USub) else v
    if isinstance(node, ast.Call):
        return _FUNCS[node.func.id](_eval_node(node.args[0], env))
    if isinstance(node, ast.Name):
        return env[node.id]
    if isinstance(node, ast.Constant):
        return float(node.value)
    raise ConfigError(f"construct {type(node).__name__} not allowed")


def expression_potential(text: str, label: str | None = None) -> PotentialField:
    """Parse a potential from the small arithmetic grammar."""
    try:
        tree = ast.parse(text.replace("^", "**"), "<potential>", "eval")
    except SyntaxError as exc:
        raise ConfigError(f"cannot parse potential {text!r}: {exc}") from None
    _validate(tree)
    # sqrt has no jet derivative at the origin, so only build "r" when used
    uses_r = any(isinstance(n, ast.Name) and n.id == "r" for n in ast.walk(tree))

    def expr(X1, X2, X3):
        env = {"x1": X1, "x2": X2, "x3": X3}
        if uses_r:
            env["r"] = jets.sqrt(X1 * X1 + X2 * X2 + X3 * X3)
        return _eval_node(tree, env)

    return PotentialField(expr=expr, label=label if label is not None else text.strip())


### Residuals of the static system


@dataclass(frozen=True)
class StaticResidual:
    point: Point3
    f_value: float
    tensor_residual: np.ndarray
    laplacian_residual: float

    @property
    def combined_norm(self) -> float:
        return float(np.linalg.norm(self.tensor_residual) + abs(self.laplacian_residual))


def covariant_hessian(f: PotentialField, metric: MetricField, point) -> np.ndarray:
    """Hess_g f at a point: coordinate Hessian minus the Christoffel term."""
    p = Point3.of(point)
    gamma = christoffel_at(metric, p)
    grad = f.gradient(p)
    hess = f.hessian(p)
    return hess - np.einsum("kij,k->ij", gamma, grad)


def gradient_norm(f: PotentialField, metric: MetricField, point) -> float:
    """|grad f|_g at a point."""
    p = Point3.of(point)
    g = metric.matrix(p)
    grad = f.gradient(p)
    return float(math.sqrt(grad @ np.linalg.inv(g) @ grad))


def static_residual(f: PotentialField, metric: MetricField, point, backend: str = "dual") -> StaticResidual:
    """Pointwise defect of the static system for (f, metric)."""
    p = Point3.of(point)
    bundle = curvature_at(metric, p, backend=backend)
    grad = f.gradient(p)
    hess = f.hessian(p)
    cov_hess = hess - np.einsum("kij,k->ij", bundle.gamma, grad)
    fval = f.value(p)
    tensor = cov_hess - fval * bundle.ricci
    ginv = np.linalg.inv(bundle.metric_matrix)
    lap = float(np.tensordot(ginv, cov_hess))
    return StaticResidual(point=p, f_value=fval, tensor_residual=tensor, laplacian_residual=lap)


def require_static(f: PotentialField, metric: MetricField, point, tol: float = 1e-6) -> StaticResidual:
    res = static_residual(f, metric, point)
    if res.combined_norm > tol * (1.0 + abs(res.f_value)):
        raise NotStaticError(
            f"{f.label} on {metric.label}: static residual {res.combined_norm:.3e} "
            f"at {res.point.coords()} exceeds gate {tol:g}*(1+|f|)")
    return res


def bochner_residual(f: PotentialField, metric: MetricField, point, static_tol: float = 1e-6) -> float:
    """Defect of the gradient-norm identity satisfied by static potentials.

    Checks (1/2) Laplace |grad f|^2 = |Hess f|^2 + (1/2f) <grad f, grad |grad f|^2>
    at a point where f does not vanish.
    """
    p = Point3.of(point)
    fval = f.value(p)
    if abs(fval) < 1e-10:
        raise ZeroPotentialError(f"{f.label}: potential vanishes at {p.coords()}")
    require_static(f, metric, p, tol=static_tol)

    def phi_expr(X1, X2, X3):
        # |grad f|^2 as a scalar field, generic over the coordinate type
        Ys = jets.seed((X1, X2, X3), 1)
        F = f.expr(Ys[0], Ys[1], Ys[2])
        fi = [jets.peel_grad(F, i) for i in range(3)]
        G = metric.components(X1, X2, X3)
        ginv, _ = _inv3(G)
        acc = 0.0
        for i in range(3):
            for j in range(3):
                acc = acc + ginv[i][j] * fi[i] * fi[j]
        return acc

    Xs = jets.seed(p.coords(), 2)
    _, phi_grad_l, phi_hess_l = jets.taylor2(phi_expr(Xs[0], Xs[1], Xs[2]))
    phi_grad = np.array([float(v) for v in phi_grad_l])
    phi_hess = np.array([[float(phi_hess_l[i][j]) for j in range(3)] for i in range(3)])

    gamma = christoffel_at(metric, p)
    g = metric.matrix(p)
    ginv = np.linalg.inv(g)
    lap_phi = float(np.tensordot(ginv, phi_hess - np.einsum("kij,k->ij", gamma, phi_grad)))

    H = covariant_hessian(f, metric, p)
    hess_sq = float(np.einsum("ik,jl,ij,kl->", ginv, ginv, H, H))
    grad_f = f.gradient(p)
    pairing = float(grad_f @ ginv @ phi_grad)
    return 0.5 * lap_phi - hess_sq - 0.5 * pairing / fval


### Asymptotic linear part


@dataclass(frozen=True)
class LinearPartFit:
    coefficients: np.ndarray      # limits of the averaged partials
    radii: np.ndarray
    averages: np.ndarray          # (n_radii, 3) sphere averages of grad f
    remainder_rms: np.ndarray     # (n_radii,) spread of grad f around the limit
    remainder_exponent: float | None


def fit_linear_part(f: PotentialField, metric: MetricField, radii: Sequence[float],
                    rule: SphereRule | None = None) -> LinearPartFit:
    """Estimate the linear part of a potential from sphere averages of its gradient.

    The averaged partials are extrapolated in the sphere radius; the scatter of
    the gradient around the limit gives the remainder decay exponent. Raises
    NonConvergentError when the averages show no Cauchy trend.
    """
    radii = np.array(sorted(float(r) for r in radii))
    if len(radii) < 3:
        raise ValueError("need at least three radii")
    if rule is None:
        rule = sphere_rule()

    node_grads = []
    for r in radii:
        grads = np.array([f.gradient(Point3(*(r * d))) for d in rule.directions])
        node_grads.append(grads)
    averages = np.array([
        (rule.weights[:, None] * grads).sum(axis=0) / (4.0 * np.pi)
        for grads in node_grads
    ])

    coeffs = np.array([aitken_limit(averages[:, i]) for i in range(3)])

    scale = 1.0 + np.abs(averages[-1]).max()
    diffs = np.abs(np.diff(averages, axis=0)).max(axis=1)
    for k in range(1, len(diffs)):
        if diffs[k] > 1.5 * diffs[k - 1] + 1e-13 * scale and diffs[k] > 1e-10 * scale:
            raise NonConvergentError(
                f"{f.label}: sphere-averaged gradient is not settling "
                f"(step {diffs[k]:.3e} after {diffs[k - 1]:.3e})")

    rms = []
    for grads in node_grads:
        dev = grads - coeffs
        rms.append(math.sqrt(float((rule.weights * (dev ** 2).sum(axis=1)).sum() / (4.0 * np.pi))))
    rms = np.array(rms)

    exponent = None
    if np.all(rms > 1e-14 * scale):
        slope = np.polyfit(np.log(radii), np.log(rms), 1)[0]
        exponent = float(slope)
    return LinearPartFit(coefficients=coeffs, radii=radii, averages=averages,
                         remainder_rms=rms, remainder_exponent=exponent)
