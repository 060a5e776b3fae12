"""Chart-level Riemannian geometry on a single coordinate patch of R^3.

Metrics are fields of 3x3 matrices produced by a components closure that is
generic over its scalar type: fed floats it returns floats, fed jets it returns
jets. All curvature quantities follow the convention in which the Riemann
tensor is

    R^d_{abc} = d_b Gamma^d_{ac} - d_c Gamma^d_{ab}
                + Gamma^k_{ac} Gamma^d_{bk} - Gamma^k_{ab} Gamma^d_{ck}

and the Ricci tensor is the contraction Ric_{ac} = R^d_{adc}; with this choice
the round sphere has positive scalar curvature.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Sequence

import numpy as np

from . import jets
from .errors import DomainError, NotOrthogonalError, SingularMetricError

_EIG_FLOOR = 1e-10  # smallest admissible metric eigenvalue


@dataclass(frozen=True)
class Point3:
    """A point of the chart."""

    x1: float
    x2: float
    x3: float

    @property
    def r(self) -> float:
        return math.sqrt(self.x1 ** 2 + self.x2 ** 2 + self.x3 ** 2)

    def coords(self) -> tuple:
        return (self.x1, self.x2, self.x3)

    def as_array(self) -> np.ndarray:
        return np.array([self.x1, self.x2, self.x3], dtype=float)

    @staticmethod
    def of(obj) -> "Point3":
        if isinstance(obj, Point3):
            return obj
        x1, x2, x3 = (float(v) for v in obj)
        return Point3(x1, x2, x3)


@dataclass(frozen=True)
class PerturbationTerm:
    """One decaying correction to an asymptotically flat metric.

    Contributes ``amplitude * r^-2 * (x1/r)^p1 (x2/r)^p2 (x3/r)^p3`` to the
    (i, j) and (j, i) metric entries. Exponents are nonnegative integers with
    total degree at most two, which keeps each term's k-th derivatives decaying
    like r^(-2-k).
    """

    i: int
    j: int
    amplitude: float
    powers: tuple = (0, 0, 0)

    def __post_init__(self):
        if not (0 <= self.i <= 2 and 0 <= self.j <= 2):
            raise ValueError("term indices must lie in 0..2")
        if len(self.powers) != 3 or any(int(p) != p or p < 0 for p in self.powers):
            raise ValueError("powers must be three nonnegative integers")
        if sum(self.powers) > 2:
            raise ValueError("total angular degree must be at most 2")


@dataclass(frozen=True)
class MetricField:
    """A metric on a chart, with its decay class and domain bookkeeping.

    ``components(X1, X2, X3)`` returns a 3x3 nested list of scalars and must be
    generic over the scalar type. ``contains`` answers point membership;
    ``boundary_margin`` is a continuous function positive inside the domain,
    used as a termination event by the ODE drivers.
    """

    label: str
    components: Callable
    tau: float
    mass: float
    contains: Callable
    boundary_margin: Callable

    def matrix(self, point) -> np.ndarray:
        """Metric matrix at a point, positive-definiteness checked."""
        p = Point3.of(point)
        if not self.contains(p):
            raise DomainError(f"{self.label}: point {p.coords()} outside chart domain")
        g = np.array(self.components(p.x1, p.x2, p.x3), dtype=float)
        _check_positive(g, self.label, p)
        return g


def _check_positive(g: np.ndarray, label: str, p: Point3) -> None:
    if not np.all(np.isfinite(g)):
        raise SingularMetricError(f"{label}: non-finite metric entries at {p.coords()}")
    if np.linalg.eigvalsh(0.5 * (g + g.T)).min() <= _EIG_FLOOR:
        raise SingularMetricError(f"{label}: metric not positive definite at {p.coords()}")


def _validate_tau(tau: float) -> float:
    tau = float(tau)
    if not (0.5 < tau <= 1.0):
        raise ValueError(f"decay rate tau must lie in (1/2, 1], got {tau}")
    return tau


### Metric families


def euclidean() -> MetricField:
    """The flat metric in Cartesian coordinates."""

    def comps(X1, X2, X3):
        return [[1.0, 0.0, 0.0], [0.0, 1.0, 0.0], [0.0, 0.0, 1.0]]

    return MetricField(
        label="euclidean",
        components=comps,
        tau=1.0,
        mass=0.0,
        contains=lambda p: True,
        boundary_margin=lambda p: 1.0,
    )


def schwarzschild(mass: float, exterior_only: bool = True) -> MetricField:
    """Conformally flat time-symmetric slice of mass ``mass``.

    The conformal factor is (1 + mass/(2r))^4. For positive mass the chart is
    either the exterior r > mass/2 (default) or the full punctured space; for
    negative mass the factor degenerates at r = |mass|/2 and the domain is
    always r > |mass|/2.
    """
    m = float(mass)
    if m == 0.0:
        raise ValueError("mass must be nonzero; use euclidean() for mass 0")
    if m > 0.0:
        r_floor = m / 2.0 if exterior_only else 0.0
    else:
        r_floor = abs(m) / 2.0

    def comps(X1, X2, X3):
        r = jets.sqrt(X1 * X1 + X2 * X2 + X3 * X3)
        phi = 1.0 + (0.5 * m) / r
        c = phi * phi
        c = c * c
        return [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, c]]

    return MetricField(
        label=f"schwarzschild(m={m:g})",
        components=comps,
        tau=1.0,
        mass=m,
        contains=lambda p: p.r > r_floor * (1.0 + 1e-12) + 1e-300,
        boundary_margin=lambda p: p.r - r_floor,
    )


def perturbed_as(mass: float, terms: Sequence[PerturbationTerm], r_min: float | None = None) -> MetricField:
    """Asymptotically flat metric: conformal part plus explicit r^-2 terms."""
    m = float(mass)
    terms = tuple(terms)
    total = sum(abs(t.amplitude) for t in terms)
    if r_min is None:
        # keep the perturbation well below the conformal part so the matrix
        # stays positive definite with margin
        r_min = max(abs(m), 2.0 * math.sqrt(total) if total > 0 else 0.0, 1e-3)
    r_min = float(r_min)

    def comps(X1, X2, X3):
        r2 = X1 * X1 + X2 * X2 + X3 * X3
        r = jets.sqrt(r2)
        phi = 1.0 + (0.5 * m) / r
        c = phi * phi
        c = c * c
        g = [[c, 0.0, 0.0], [0.0, c, 0.0], [0.0, 0.0, c]]
        X = (X1, X2, X3)
        for t in terms:
            s = sum(t.powers)
            w = t.amplitude / jets.power(r, 2 + s)
            for axis in range(3):
                for _ in range(t.powers[axis]):
                    w = w * X[axis]
            g[t.i][t.j] = g[t.i][t.j] + w
            if t.i != t.j:
                g[t.j][t.i] = g[t.j][t.i] + w
        return g

    return MetricField(
        label=f"perturbed_as(m={m:g},terms={len(terms)})",
        components=comps,
        tau=1.0,
        mass=m,
        contains=lambda p: p.r > r_min,
        boundary_margin=lambda p: p.r - r_min,
    )


def generic_metric(components: Callable, tau: float = 1.0, contains: Callable | None = None,
                   boundary_margin: Callable | None = None, label: str = "generic",
                   mass: float = 0.0) -> MetricField:
    """Wrap a user-supplied components closure as a metric field."""
    return MetricField(
        label=label,
        components=components,
        tau=_validate_tau(tau),
        mass=float(mass),
        contains=contains if contains is not None else (lambda p: True),
        boundary_margin=boundary_margin if boundary_margin is not None else (lambda p: 1.0),
    )


def rotate_chart(metric: MetricField, rotation) -> MetricField:
    """Pull a metric back along the linear chart map x = Q y.

    ``rotation`` must be orthogonal to 1e-12; the rotated field represents the
    same geometry expressed in the rotated coordinates.
    """
    Q = np.array(rotation, dtype=float)
    if Q.shape != (3, 3) or np.abs(Q.T @ Q - np.eye(3)).max() > 1e-12:
        raise NotOrthogonalError("rotation matrix fails the orthogonality check")
    rows = [[float(Q[i, j]) for j in range(3)] for i in range(3)]

    def comps(Y1, Y2, Y3):
        Y = (Y1, Y2, Y3)
        X = [rows[i][0] * Y[0] + rows[i][1] * Y[1] + rows[i][2] * Y[2] for i in range(3)]
        G = metric.components(X[0], X[1], X[2])
        out = []
        for a in range(3):
            row = []
            for b in range(3):
                acc = 0.0
                for i in range(3):
                    for j in range(3):
                        acc = acc + rows[i][a] * G[i][j] * rows[j][b]
                row.append(acc)
            out.append(row)
        return out

    def to_base(p: Point3) -> Point3:
        y = p.as_array()
        return Point3.of(Q @ y)

    return MetricField(
        label=metric.label + "+rotated",
        components=comps,
        tau=metric.tau,
        mass=metric.mass,
        contains=lambda p: metric.contains(to_base(p)),
        boundary_margin=lambda p: metric.boundary_margin(to_base(p)),
    )


### Curvature assembly, generic over the scalar type


def _inv3(m):
    """Inverse and determinant of a 3x3 nested list via the adjugate."""
    c00 = m[1][1] * m[2][2] - m[1][2] * m[2][1]
    c01 = m[0][2] * m[2][1] - m[0][1] * m[2][2]
    c02 = m[0][1] * m[1][2] - m[0][2] * m[1][1]
    c10 = m[1][2] * m[2][0] - m[1][0] * m[2][2]
    c11 = m[0][0] * m[2][2] - m[0][2] * m[2][0]
    c12 = m[0][2] * m[1][0] - m[0][0] * m[1][2]
    c20 = m[1][0] * m[2][1] - m[1][1] * m[2][0]
    c21 = m[0][1] * m[2][0] - m[0][0] * m[2][1]
    c22 = m[0][0] * m[1][1] - m[0][1] * m[1][0]
    det = m[0][0] * c00 + m[0][1] * c10 + m[0][2] * c20
    return ([[c00 / det, c01 / det, c02 / det],
             [c10 / det, c11 / det, c12 / det],
             [c20 / det, c21 / det, c22 / det]], det)


def _christoffel(g, dg):
    """Gamma[k][i][j] from the metric and its first derivatives."""
    ginv, _ = _inv3(g)
    gamma = []
    for k in range(3):
        rows = []
        for i in range(3):
            row = []
            for j in range(3):
                acc = 0.0
                for l in range(3):
                    acc = acc + ginv[k][l] * (dg[i][l][j] + dg[j][l][i] - dg[l][i][j])
                row.append(0.5 * acc)
            rows.append(row)
        gamma.append(rows)
    return gamma, ginv


def _assemble_curvature(g, dg, d2g):
    """Christoffels, Riemann, Ricci and scalar curvature from metric jets.

    Layouts: dg[k][i][j] = d_k g_ij, d2g[k][l][i][j] = d_k d_l g_ij,
    riemann[d][a][b][c] = R^d_{abc} in the fixed sign convention.
    """
    gamma, ginv = _christoffel(g, dg)

    dginv = []
    for b in range(3):
        mat = []
        for k in range(3):
            row = []
            for l in range(3):
                acc = 0.0
                for s in range(3):
                    for t in range(3):
                        acc = acc - ginv[k][s] * dg[b][s][t] * ginv[t][l]
                row.append(acc)
            mat.append(row)
        dginv.append(mat)

    # dgamma[b][k][i][j] = d_b Gamma^k_{ij}
    dgamma = []
    for b in range(3):
        cube = []
        for k in range(3):
            rows = []
            for i in range(3):
                row = []
                for j in range(3):
                    acc = 0.0
                    for l in range(3):
                        sym = dg[i][l][j] + dg[j][l][i] - dg[l][i][j]
                        dsym = d2g[b][i][l][j] + d2g[b][j][l][i] - d2g[b][l][i][j]
                        acc = acc + dginv[b][k][l] * sym + ginv[k][l] * dsym
                    row.append(0.5 * acc)
                rows.append(row)
            cube.append(rows)
        dgamma.append(cube)

    riem = []
    for d in range(3):
        cube = []
        for a in range(3):
            rows = []
            for b in range(3):
                row = []
                for c in range(3):
                    acc = dgamma[b][d][a][c] - dgamma[c][d][a][b]
                    for k in range(3):
                        acc = acc + gamma[k][a][c] * gamma[d][b][k] - gamma[k][a][b] * gamma[d][c][k]
                    row.append(acc)
                rows.append(row)
            cube.append(rows)
        riem.append(cube)

    ric = []
    for a in range(3):
        row = []
        for c in range(3):
            acc = 0.0
            for d in range(3):
                acc = acc + riem[d][a][d][c]
            row.append(acc)
        ric.append(row)

    scal = 0.0
    for a in range(3):
        for c in range(3):
            scal = scal + ginv[a][c] * ric[a][c]

    return gamma, riem, ric, scal


def _components_taylor2(metric: MetricField, coords):
    """Metric matrix with first and second derivatives via depth-2 jets."""
    Xs = jets.seed(coords, 2)
    comps = metric.components(Xs[0], Xs[1], Xs[2])
    g = [[0.0] * 3 for _ in range(3)]
    dg = [[[0.0] * 3 for _ in range(3)] for _ in range(3)]
    d2g = [[[[0.0] * 3 for _ in range(3)] for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            val, grad, hess = jets.taylor2(comps[i][j])
            g[i][j] = val
            for k in range(3):
                dg[k][i][j] = grad[k]
                for l in range(3):
                    d2g[k][l][i][j] = hess[k][l]
    return g, dg, d2g


# fourth-order central stencils at offsets (-2, -1, 1, 2) * h
_FD_OFF = (-2.0, -1.0, 1.0, 2.0)
_FD_D1 = (1.0, -8.0, 8.0, -1.0)        # / 12h
_FD_D2 = (-1.0, 16.0, 16.0, -1.0)      # with -30 f0, / 12h^2


def _components_fd(metric: MetricField, coords, h: float):
    """Same data as the dual path, via central differences of the components."""

    def gmat(x):
        return np.array(metric.components(x[0], x[1], x[2]), dtype=float)

    x0 = np.array(coords, dtype=float)
    g0 = gmat(x0)
    axis = [[gmat(x0 + o * h * np.eye(3)[k]) for o in _FD_OFF] for k in range(3)]

    dg = [sum(c * gk for c, gk in zip(_FD_D1, axis[k])) / (12.0 * h)
          for k in range(3)]
    d2g = [[None] * 3 for _ in range(3)]
    for k in range(3):
        d2g[k][k] = (sum(c * gk for c, gk in zip(_FD_D2, axis[k]))
                     - 30.0 * g0) / (12.0 * h * h)
    for k in range(3):
        for l in range(k + 1, 3):
            ek, el = np.eye(3)[k], np.eye(3)[l]
            cross = sum(ci * cj * gmat(x0 + oi * h * ek + oj * h * el)
                        for ci, oi in zip(_FD_D1, _FD_OFF)
                        for cj, oj in zip(_FD_D1, _FD_OFF)) / (144.0 * h * h)
            d2g[k][l] = cross
            d2g[l][k] = cross

    g_l = g0.tolist()
    dg_l = [dg[k].tolist() for k in range(3)]
    d2g_l = [[d2g[k][l].tolist() for l in range(3)] for k in range(3)]
    return g_l, dg_l, d2g_l


@dataclass(frozen=True)
class CurvatureBundle:
    """Curvature data of a metric at one point."""

    point: Point3
    backend: str
    metric_matrix: np.ndarray
    gamma: np.ndarray      # gamma[k, i, j] = Gamma^k_{ij}
    riemann: np.ndarray    # riemann[d, a, b, c] = R^d_{abc}
    ricci: np.ndarray
    scalar: float


def curvature_at(metric: MetricField, point, backend: str = "dual",
                 fd_step: float | None = None, check_domain: bool = True) -> CurvatureBundle:
    """Curvature of a metric field at a chart point.

    ``backend="dual"`` differentiates the components exactly with nested jets;
    ``backend="fd"`` uses fourth-order central differences with step
    ``fd_step`` (default 1e-3 * max(1, r)) and exists as an independent
    cross-check of the dual path. ``check_domain=False`` skips the membership
    test; ODE drivers need that while an integrator stage probes past a
    boundary it is about to stop at.
    """
    p = Point3.of(point)
    if check_domain and not metric.contains(p):
        raise DomainError(f"{metric.label}: point {p.coords()} outside chart domain")
    coords = p.coords()
    if backend == "dual":
        g, dg, d2g = _components_taylor2(metric, coords)
    elif backend == "fd":
        h = fd_step if fd_step is not None else 1e-3 * max(1.0, p.r)
        g, dg, d2g = _components_fd(metric, coords, h)
    else:
        raise ValueError(f"unknown backend {backend!r}")

    g_np = np.array(g, dtype=float)
    _check_positive(g_np, metric.label, p)
    gamma, riem, ric, scal = _assemble_curvature(g, dg, d2g)
    return CurvatureBundle(
        point=p,
        backend=backend,
        metric_matrix=g_np,
        gamma=np.array(gamma, dtype=float),
        riemann=np.array(riem, dtype=float),
        ricci=np.array(ric, dtype=float),
        scalar=float(scal),
    )


def christoffel_at(metric: MetricField, point, check_domain: bool = True) -> np.ndarray:
    """Christoffel symbols Gamma^k_{ij} at a point (depth-1 jets only)."""
    p = Point3.of(point)
    if check_domain and not metric.contains(p):
        raise DomainError(f"{metric.label}: point {p.coords()} outside chart domain")
    Xs = jets.seed(p.coords(), 1)
    comps = metric.components(Xs[0], Xs[1], Xs[2])
    g = [[0.0] * 3 for _ in range(3)]
    dg = [[[0.0] * 3 for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            val, grad = jets.taylor1(comps[i][j])
            g[i][j] = val
            for k in range(3):
                dg[k][i][j] = grad[k]
    _check_positive(np.array(g, dtype=float), metric.label, p)
    gamma, _ = _christoffel(g, dg)
    return np.array(gamma, dtype=float)


def ricci_with_derivative(metric: MetricField, point):
    """Ricci tensor, its coordinate derivative and the Christoffels at a point.

    Returns ``(ric, dric, gamma)`` with ``dric[c, a, b] = d_c Ric_ab``. The
    whole curvature assembly runs in depth-1 jet arithmetic on top of the
    depth-2 metric jets, so the derivative is exact.
    """
    p = Point3.of(point)
    if not metric.contains(p):
        raise DomainError(f"{metric.label}: point {p.coords()} outside chart domain")
    base = jets.seed(p.coords(), 1)
    Xs = jets.seed(base, 2)
    comps = metric.components(Xs[0], Xs[1], Xs[2])
    g = [[0.0] * 3 for _ in range(3)]
    dg = [[[0.0] * 3 for _ in range(3)] for _ in range(3)]
    d2g = [[[[0.0] * 3 for _ in range(3)] for _ in range(3)] for _ in range(3)]
    for i in range(3):
        for j in range(3):
            val, grad, hess = jets.taylor2(comps[i][j])
            g[i][j] = val
            for k in range(3):
                dg[k][i][j] = grad[k]
                for l in range(3):
                    d2g[k][l][i][j] = hess[k][l]
    _check_positive(np.array([[jets.peel_value(g[i][j]) for j in range(3)] for i in range(3)],
                             dtype=float), metric.label, p)
    gamma_j, _riem, ric_j, _scal = _assemble_curvature(g, dg, d2g)

    ric = np.zeros((3, 3))
    dric = np.zeros((3, 3, 3))
    gamma = np.zeros((3, 3, 3))
    for a in range(3):
        for b in range(3):
            e = ric_j[a][b]
            ric[a, b] = jets.peel_value(e)
            for c in range(3):
                dric[c, a, b] = jets.peel_grad(e, c)
    for k in range(3):
        for i in range(3):
            for j in range(3):
                gamma[k, i, j] = jets.peel_value(gamma_j[k][i][j])
    return ric, dric, gamma


def reconstruct_riemann_from_ricci(ricci, scalar: float, g) -> np.ndarray:
    """Rebuild the full curvature tensor from Ricci data, valid in dimension 3.

    Implements R^d_{abc} = delta^d_b R_ac - delta^d_c R_ab + g_ac R^d_b
    - g_ab R^d_c + (R/2)(delta^d_c g_ab - delta^d_b g_ac).
    """
    ric = np.array(ricci, dtype=float)
    gm = np.array(g, dtype=float)
    if gm.shape != (3, 3) or ric.shape != (3, 3):
        raise ValueError("expected 3x3 matrices")
    _check_positive(gm, "reconstruct", Point3(0.0, 0.0, 0.0))
    ginv = np.linalg.inv(gm)
    ric_mixed = ginv @ ric  # R^d_b
    R = float(scalar)
    delta = np.eye(3)
    riem = np.zeros((3, 3, 3, 3))
    for d in range(3):
        for a in range(3):
            for b in range(3):
                for c in range(3):
                    riem[d, a, b, c] = (
                        delta[d, b] * ric[a, c] - delta[d, c] * ric[a, b]
                        + gm[a, c] * ric_mixed[d, b] - gm[a, b] * ric_mixed[d, c]
                        + 0.5 * R * (delta[d, c] * gm[a, b] - delta[d, b] * gm[a, c])
                    )
    return riem


def sample_shell(rng: np.random.Generator, n: int, r_min: float, r_max: float) -> list:
    """Sample points uniformly in direction with radii uniform in [r_min, r_max]."""
    pts = []
    for _ in range(n):
        v = rng.normal(size=3)
        v /= np.linalg.norm(v)
        r = rng.uniform(r_min, r_max)
        pts.append(Point3(float(v[0] * r), float(v[1] * r), float(v[2] * r)))
    return pts
