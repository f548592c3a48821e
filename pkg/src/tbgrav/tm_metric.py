"""Fiber metric, canonical fiber ball, tangent-bundle integration, divergence.

The Lorentzian metric is completed to a Riemannian fiber metric by reflecting
along a unit timelike direction u:

    v_ij = 2 u_i u_j - g_ij,    u_i = g_ij u^j / sqrt(g(u,u)),

which is positive definite with det v = -det g.  The canonical fiber ball
{y : v_ij y^i y^j <= c} with c = sqrt(2)/pi has unit Euclidean 4-volume in
v-orthonormal coordinates, so integrating a base function over box x ball
reproduces its base integral.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .bundle_geom import BundleGeometry, BundlePoint, FiberField, Y_SLOT0
from .errors import SingularEvaluationError, UsageError
from .jets import Jet
from .spacetime import SpacetimeModel, metric_jet
from .tensors import jet_values

BALL_BOUND = math.sqrt(2.0) / math.pi  # unit-volume normalization


@dataclass
class FiberMetric:
    v: np.ndarray
    u: np.ndarray
    point: np.ndarray
    cholesky: np.ndarray  # lower-triangular L with v = L L^T


@dataclass
class FiberBall:
    center: np.ndarray
    bound: float
    metric: FiberMetric

    @property
    def radius(self) -> float:
        """Euclidean radius in v-orthonormal coordinates."""
        return math.sqrt(self.bound)

    def contains(self, y) -> bool:
        y = np.asarray(y, dtype=float)
        return float(y @ self.metric.v @ y) <= self.bound + 1e-15


def fiber_metric(model: SpacetimeModel, x, u=None) -> FiberMetric:
    """Positive-definite completion of g at x along the timelike direction u
    (default: the normalized coordinate time axis)."""
    x = np.asarray(x, dtype=float)
    g = metric_jet(model, x, order=0).values()
    if u is None:
        if g[0, 0] <= 0.0:
            raise SingularEvaluationError(
                f"default fiber-metric direction needs g_00 > 0, got {g[0, 0]}", value=g[0, 0]
            )
        u = np.array([1.0, 0.0, 0.0, 0.0])
    u = np.asarray(u, dtype=float)
    norm2 = float(u @ g @ u)
    if norm2 <= 0.0:
        raise SingularEvaluationError(f"fiber-metric direction is not timelike: g(u,u) = {norm2}", value=norm2)
    u_low = (g @ u) / math.sqrt(norm2)
    v = 2.0 * np.outer(u_low, u_low) - g
    try:
        chol = np.linalg.cholesky(v)
    except np.linalg.LinAlgError:
        raise SingularEvaluationError("fiber metric is not positive definite") from None
    return FiberMetric(v=v, u=u, point=x, cholesky=chol)


def fiber_ball(model: SpacetimeModel, x, bound: float = BALL_BOUND, u=None) -> FiberBall:
    """Canonical fiber integration domain at x (unit volume by default)."""
    return FiberBall(center=np.asarray(x, dtype=float), bound=float(bound), metric=fiber_metric(model, x, u=u))


# -- quadrature -------------------------------------------------------------------


def _ball_nodes(radius: float, counts: tuple[int, int, int, int]):
    """Product quadrature over the Euclidean 4-ball in spherical coordinates
    (rho, theta1, theta2, phi), rules matched to each measure so that constants
    integrate exactly at any node count:

      rho:    Gauss-Legendre on [0, R] against rho^3 drho;
      theta1: Gauss-Chebyshev (2nd kind) for the sin^2 weight;
      theta2: Gauss-Legendre in u = cos(theta2) (sin weight absorbed);
      phi:    uniform (trapezoid) rule on the periodic interval.
    """
    n_r, n_t1, n_t2, n_p = counts
    r_x, r_w = np.polynomial.legendre.leggauss(n_r)
    rho = 0.5 * radius * (r_x + 1.0)
    rho_w = 0.5 * radius * r_w * rho**3
    k = np.arange(1, n_t1 + 1)
    c1 = np.cos(k * math.pi / (n_t1 + 1))
    t1_w = math.pi / (n_t1 + 1) * np.sin(k * math.pi / (n_t1 + 1)) ** 2
    s1 = np.sqrt(1.0 - c1**2)
    c2, t2_w = np.polynomial.legendre.leggauss(n_t2)
    s2 = np.sqrt(1.0 - c2**2)
    phi = 2.0 * math.pi * (np.arange(n_p) + 0.5) / n_p
    phi_w = np.full(n_p, 2.0 * math.pi / n_p)

    rho_g, c1_g, c2_g, phi_g = np.meshgrid(rho, c1, c2, phi, indexing="ij")
    s1_g = np.sqrt(1.0 - c1_g**2)
    s2_g = np.sqrt(1.0 - c2_g**2)
    z = np.stack(
        [
            rho_g * c1_g,
            rho_g * s1_g * c2_g,
            rho_g * s1_g * s2_g * np.cos(phi_g),
            rho_g * s1_g * s2_g * np.sin(phi_g),
        ],
        axis=-1,
    ).reshape(-1, 4)
    w = (
        rho_w[:, None, None, None]
        * t1_w[None, :, None, None]
        * t2_w[None, None, :, None]
        * phi_w[None, None, None, :]
    ).reshape(-1)
    return z, w


def fiber_integral(
    model: SpacetimeModel,
    x,
    f,
    nodes: tuple[int, int, int, int] = (16, 16, 16, 32),
    ball: FiberBall | None = None,
    return_report: bool = False,
):
    """Integral of f(y) over the canonical fiber ball with the fiber volume
    density (constants integrate to themselves).

    ``f`` maps a fiber 4-vector to a float.  Quadrature nodes that land on the
    null cone of g are shifted radially by 1e-9 and counted in the report.
    """
    x = np.asarray(x, dtype=float)
    if ball is None:
        ball = fiber_ball(model, x)
    g = metric_jet(model, x, order=0).values()
    z, w = _ball_nodes(ball.radius, nodes)
    # v(y,y) = z.z under y = L^{-T} z; d^4y sqrt(det v) = d^4z
    linv_t = np.linalg.inv(ball.metric.cholesky).T
    ys = z @ linv_t.T
    norms = np.einsum("ni,ij,nj->n", ys, g, ys)
    scale = np.max(np.abs(norms)) + 1e-30
    on_cone = np.abs(norms) <= 1e-12 * scale
    n_shifted = int(np.count_nonzero(on_cone))
    if n_shifted:
        ys[on_cone] *= 1.0 + 1e-9
    total = float(np.sum(w * np.fromiter((f(y) for y in ys), dtype=float, count=len(ys))))
    if return_report:
        return total, {"nodes": len(ys), "null_cone_shifted": n_shifted}
    return total


def tm_integral(
    model: SpacetimeModel,
    box,
    f,
    base_nodes: int = 4,
    fiber_nodes: tuple[int, int, int, int] = (6, 6, 6, 12),
) -> float:
    """Integral of f(x, y) over box x fiber ball with density sqrt(-g v).

    ``box`` is a sequence of four (lo, hi) coordinate intervals inside the
    chart.  For y-independent f this equals the base integral of f sqrt(-g).
    """
    box = [(float(lo), float(hi)) for lo, hi in box]
    if len(box) != 4:
        raise UsageError("box must give four coordinate intervals")
    bx, bw = np.polynomial.legendre.leggauss(base_nodes)
    axes, weights = [], []
    for lo, hi in box:
        axes.append(0.5 * (hi - lo) * (bx + 1.0) + lo)
        weights.append(0.5 * (hi - lo) * bw)
    total = 0.0
    for i0, x0 in enumerate(axes[0]):
        for i1, x1 in enumerate(axes[1]):
            for i2, x2 in enumerate(axes[2]):
                for i3, x3 in enumerate(axes[3]):
                    x = np.array([x0, x1, x2, x3])
                    wx = weights[0][i0] * weights[1][i1] * weights[2][i2] * weights[3][i3]
                    g = metric_jet(model, x, order=0).values()
                    det = np.linalg.det(g)
                    fib = fiber_integral(model, x, lambda y: f(x, y), nodes=fiber_nodes)
                    total += wx * math.sqrt(-det) * fib
    return total


def base_integral(model: SpacetimeModel, box, f, base_nodes: int = 4) -> float:
    """Reference rule: integral of f(x) sqrt(-g) over the box (same base rule
    as tm_integral)."""
    box = [(float(lo), float(hi)) for lo, hi in box]
    bx, bw = np.polynomial.legendre.leggauss(base_nodes)
    axes, weights = [], []
    for lo, hi in box:
        axes.append(0.5 * (hi - lo) * (bx + 1.0) + lo)
        weights.append(0.5 * (hi - lo) * bw)
    total = 0.0
    for i0, x0 in enumerate(axes[0]):
        for i1, x1 in enumerate(axes[1]):
            for i2, x2 in enumerate(axes[2]):
                for i3, x3 in enumerate(axes[3]):
                    x = np.array([x0, x1, x2, x3])
                    wx = weights[0][i0] * weights[1][i1] * weights[2][i2] * weights[3][i3]
                    det = np.linalg.det(metric_jet(model, x, order=0).values())
                    total += wx * math.sqrt(-det) * f(x)
    return total


# -- horizontal divergence -----------------------------------------------------------


def horizontal_divergence(model: SpacetimeModel, p, x_field: FiberField, order: int = 2,
                          alpha: float | None = None) -> float:
    """div(X) = delta_i X^i + gamma^j_ji X^i for a horizontal field X^i(x,y)."""
    p = p if isinstance(p, BundlePoint) else BundlePoint(*p)
    geo = BundleGeometry(model, p, order=order, alpha=alpha)
    comps = x_field(model, p, order)
    if comps.shape != (4,):
        raise UsageError("horizontal field must evaluate to 4 components")
    total = 0.0
    for i in range(4):
        xi = comps[i]
        if not isinstance(xi, Jet):
            raise UsageError("horizontal field must evaluate to jets")
        total += geo.delta(xi, i).value
        for j in range(4):
            total += geo.gamma[j, j, i].value * xi.value
    return total


def lift_base_field(component_fn) -> FiberField:
    """Horizontal lift of a base vector field Y^i(x): evaluates Y on the joint
    jet space (no fiber dependence)."""

    def evaluate(model: SpacetimeModel, p: BundlePoint, order: int):
        env = model.coord_env(p.x, order, nvars=8, slots=(0, 1, 2, 3))
        return np.asarray(component_fn(env), dtype=object)

    return FiberField(evaluate)


def base_divergence_values(model: SpacetimeModel, x, component_fn) -> float:
    """Classical divergence (1/sqrt(-g)) d_i(sqrt(-g) Y^i) via base jets."""
    from .base_geom import det_jet_matrix

    env = model.coord_env(x, order=1, nvars=4)
    comps = component_fn(env)
    g = metric_jet(model, x, order=1).components
    s = (-det_jet_matrix(g)).sqrt()
    total = 0.0
    for i in range(4):
        total += (s * comps[i]).partial(i).value
    return total / s.value
