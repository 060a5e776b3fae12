"""Quadrature over coordinate spheres and radial shells.

The sphere rule is a product of Gauss-Legendre nodes in the polar cosine and a
uniform azimuthal grid; it is exact for the angular polynomials that appear in
the asymptotic expansions handled elsewhere and spectrally accurate for smooth
integrands. Flux and volume integrals take the metric into account through the
induced area element and the outward unit normal.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import QuadratureBudgetError, SingularMetricError
from .geometry import MetricField, Point3


@dataclass(frozen=True)
class SphereRule:
    directions: np.ndarray    # (N, 3) unit vectors
    weights: np.ndarray       # (N,) summing to 4*pi
    tangent_u: np.ndarray     # (N, 3) d(direction)/du, u = cos(theta)
    tangent_phi: np.ndarray   # (N, 3) d(direction)/dphi

    @property
    def count(self) -> int:
        return self.directions.shape[0]


def aitken_limit(seq) -> float:
    """Aitken delta-squared estimate of the limit of a convergent sequence.

    Uses the last three entries; falls back to the final entry when the
    acceleration denominator degenerates (already-converged data).
    """
    if len(seq) < 3:
        return float(seq[-1])
    v0, v1, v2 = float(seq[-3]), float(seq[-2]), float(seq[-1])
    denom = (v2 - v1) - (v1 - v0)
    if abs(denom) < 1e-13 * (1.0 + abs(v2)):
        return v2
    return v2 - (v2 - v1) ** 2 / denom


def sphere_rule(n_polar: int = 32, n_azimuth: int = 64) -> SphereRule:
    """Product quadrature rule on the unit sphere."""
    if n_polar < 2 or n_azimuth < 4:
        raise ValueError("rule too small: need n_polar >= 2 and n_azimuth >= 4")
    u, wu = np.polynomial.legendre.leggauss(n_polar)
    phi = 2.0 * np.pi * np.arange(n_azimuth) / n_azimuth
    wphi = 2.0 * np.pi / n_azimuth

    U, PHI = np.meshgrid(u, phi, indexing="ij")
    WU, _ = np.meshgrid(wu, phi, indexing="ij")
    s = np.sqrt(1.0 - U ** 2)
    cp, sp = np.cos(PHI), np.sin(PHI)

    dirs = np.stack([s * cp, s * sp, U], axis=-1).reshape(-1, 3)
    w = (WU * wphi).reshape(-1)
    tu = np.stack([-U / s * cp, -U / s * sp, np.ones_like(U)], axis=-1).reshape(-1, 3)
    tp = np.stack([-s * sp, s * cp, np.zeros_like(U)], axis=-1).reshape(-1, 3)
    return SphereRule(directions=dirs, weights=w, tangent_u=tu, tangent_phi=tp)


def sphere_points(rule: SphereRule, radius: float) -> np.ndarray:
    return radius * rule.directions


def sphere_average(fn, radius: float, rule: SphereRule) -> float:
    """Average of fn over the coordinate sphere with the round measure."""
    total = 0.0
    for d, w in zip(rule.directions, rule.weights):
        total += w * fn(Point3(radius * d[0], radius * d[1], radius * d[2]))
    return total / (4.0 * np.pi)


def flux_integral(metric: MetricField, vector_fn, radius: float, rule: SphereRule) -> float:
    """Outward flux of a contravariant vector field through a coordinate sphere.

    Integrates g(V, nu) over the sphere of the given coordinate radius, with nu
    the outward unit normal and the area element both taken in the metric.
    """
    total = 0.0
    for d, w, tu, tp in zip(rule.directions, rule.weights, rule.tangent_u, rule.tangent_phi):
        p = Point3(radius * d[0], radius * d[1], radius * d[2])
        g = metric.matrix(p)
        Tu = radius * tu
        Tp = radius * tp
        h00 = Tu @ g @ Tu
        h01 = Tu @ g @ Tp
        h11 = Tp @ g @ Tp
        det_h = h00 * h11 - h01 * h01
        if det_h <= 0:
            raise SingularMetricError(f"degenerate induced area element at {p.coords()}")
        n = np.cross(Tp, Tu)  # outward co-normal up to scale
        ginv = np.linalg.inv(g)
        nn = n @ ginv @ n
        V = np.asarray(vector_fn(p), dtype=float)
        total += w * (V @ n) / math.sqrt(nn) * math.sqrt(det_h)
    return total


def radial_panels(r_inner: float, r_outer: float, n_panels: int, nodes_per_panel: int,
                  log_spacing: bool = True, breakpoints=()) -> tuple:
    """Gauss-Legendre nodes and weights on [r_inner, r_outer], panel by panel.

    Panel edges are geometric by default; explicit breakpoints are inserted so
    kinks of the integrand can sit on panel boundaries.
    """
    if not (0.0 < r_inner < r_outer):
        raise ValueError("need 0 < r_inner < r_outer")
    cuts = sorted({float(b) for b in breakpoints if r_inner < float(b) < r_outer})
    edges_all = [r_inner] + cuts + [r_outer]
    # distribute panels over the segments proportionally to log length
    seg_logs = [math.log(edges_all[i + 1] / edges_all[i]) for i in range(len(edges_all) - 1)]
    total_log = sum(seg_logs)
    counts = [max(1, round(n_panels * sl / total_log)) for sl in seg_logs]

    xi, wxi = np.polynomial.legendre.leggauss(nodes_per_panel)
    rs, ws = [], []
    for (a, b), cnt in zip(zip(edges_all[:-1], edges_all[1:]), counts):
        if log_spacing:
            e = np.exp(np.linspace(math.log(a), math.log(b), cnt + 1))
        else:
            e = np.linspace(a, b, cnt + 1)
        for lo, hi in zip(e[:-1], e[1:]):
            mid, half = 0.5 * (lo + hi), 0.5 * (hi - lo)
            rs.append(mid + half * xi)
            ws.append(half * wxi)
    return np.concatenate(rs), np.concatenate(ws)


def volume_integral(metric: MetricField, scalar_fn, r_inner: float, r_outer: float,
                    rule: SphereRule, n_panels: int = 16, nodes_per_panel: int = 8,
                    breakpoints=(), max_nodes: int | None = None) -> float:
    """Integral of a scalar over a coordinate shell with the metric volume element."""
    rs, ws = radial_panels(r_inner, r_outer, n_panels, nodes_per_panel, breakpoints=breakpoints)
    n_total = len(rs) * rule.count
    if max_nodes is not None and n_total > max_nodes:
        raise QuadratureBudgetError(
            f"volume integral needs {n_total} nodes, budget is {max_nodes}")
    total = 0.0
    for r, wr in zip(rs, ws):
        shell = 0.0
        for d, w in zip(rule.directions, rule.weights):
            p = Point3(r * d[0], r * d[1], r * d[2])
            g = metric.matrix(p)
            det_g = np.linalg.det(g)
            if det_g <= 0:
                raise SingularMetricError(f"non-positive volume element at {p.coords()}")
            shell += w * scalar_fn(p) * math.sqrt(det_g)
        total += wr * shell * r * r
    return total
