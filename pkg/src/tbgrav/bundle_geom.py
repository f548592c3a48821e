"""Tangent-bundle geometry of the charged-particle connection family.

For a coupling alpha, the spray perturbation is

    B^i   = -(alpha/2) |y| F^i_j y^j,            |y| = sqrt(g_ij y^i y^j)
    N^i_j = gamma^i_jk y^k + B^i_.j              (nonlinear connection)
    delta_i = d/dx^i - N^j_i d/dy^j              (adapted horizontal basis)

and the curvature ladder is built from the tidal tensor

    R^i_jk = delta_k N^i_j - delta_j N^i_k,      E^i_j = R^i_jk y^k,
    R_j^i_kl = (1/2) (E^i_k)_.jl,                R_jl = -(1/2) (E^i_i)_.jl.

Everything is evaluated on joint 8-variable jets (x in slots 0-3, y in slots
4-7).  Fiber derivatives of B use the explicit closed forms; the pure jet
route is kept alongside as a cross-check (``fiber_derivs_B``).

Frozen convention for the scalar-curvature split (see the decisions note and
the flat constant-field derivation in the tests): the divergence term uses the
alpha=0 connection throughout,

    div_term = delta0_i X^i + gamma^j_ji X^i,    X^i = g^{jk} B^i_jk,
    delta0_i = d/dx^i - gamma^j_ik y^k d/dy^j,

which makes  R = r + div_term + quad_term  hold pointwise, with
quad_term = -(1/2) g^{jk} (B^i_h B^h_i)_.jk = (3 alpha^2/2) F_ij F^ij.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from . import base_geom
from .errors import SingularEvaluationError, UsageError
from .jets import Jet, seed_variable
from .spacetime import SpacetimeModel, metric_jet, potential_jet
from .tensors import jet_values

X_SLOTS = (0, 1, 2, 3)
Y_SLOT0 = 4


@dataclass
class BundlePoint:
    x: np.ndarray
    y: np.ndarray

    def __init__(self, x, y):
        self.x = np.asarray(x, dtype=float)
        self.y = np.asarray(y, dtype=float)
        if self.x.shape != (4,) or self.y.shape != (4,):
            raise UsageError("bundle point needs 4 base and 4 fiber components")


class FiberField:
    """Evaluation procedure (model, point, order) -> jets in the joint 8-variable
    space; optionally declares a homogeneity degree in y (checked by tests)."""

    def __init__(self, func, homogeneity: int | None = None):
        self.func = func
        self.homogeneity = homogeneity

    def __call__(self, model: SpacetimeModel, p: BundlePoint, order: int):
        out = self.func(model, p, order)
        if isinstance(out, Jet):
            arr = np.empty((), dtype=object)
            arr[()] = out
            return arr
        return np.asarray(out, dtype=object)


class BundleGeometry:
    """Lazy cache of all jet-valued objects at one bundle point.

    ``order`` is the total derivative budget of the carrier jets; each object
    below consumes shift levels as annotated.  Order 4 supports every op
    including the fiber Hessians of the tidal-tensor trace.
    """

    def __init__(self, model: SpacetimeModel, p: BundlePoint, order: int = 2, alpha: float | None = None):
        self.model = model
        self.p = p if isinstance(p, BundlePoint) else BundlePoint(*p)
        self.order = order
        self.alpha = model.alpha if alpha is None else float(alpha)

    # -- base fields on the joint space (full carrier order) ------------------

    @cached_property
    def g(self) -> np.ndarray:
        return metric_jet(self.model, self.p.x, order=self.order, nvars=8, slots=X_SLOTS).components

    @cached_property
    def ginv(self) -> np.ndarray:
        return base_geom.invert_jet_matrix(self.g)

    @cached_property
    def a_pot(self) -> np.ndarray:
        return potential_jet(self.model, self.p.x, order=self.order, nvars=8, slots=X_SLOTS, check=False).components

    @cached_property
    def yj(self) -> np.ndarray:
        out = np.empty(4, dtype=object)
        for i in range(4):
            out[i] = seed_variable(Y_SLOT0 + i, self.p.y[i], self.order, 8)
        return out

    # -- one shift consumed ----------------------------------------------------

    @cached_property
    def gamma(self) -> np.ndarray:
        return base_geom.christoffel_jets(self.g, self.ginv)

    @cached_property
    def faraday(self) -> tuple[np.ndarray, np.ndarray]:
        return base_geom.faraday_jets(self.a_pot, self.ginv)

    # -- fiber algebra (no shifts) ----------------------------------------------

    @cached_property
    def norm2(self) -> Jet:
        acc = None
        for i in range(4):
            for j in range(4):
                term = self.g[i, j] * self.yj[i] * self.yj[j]
                acc = term if acc is None else acc + term
        return acc

    @cached_property
    def norm(self) -> Jet:
        n2 = self.norm2
        if n2.value <= 0.0:
            raise SingularEvaluationError(
                f"fiber vector is not timelike: g(y,y) = {n2.value}", value=n2.value
            )
        return n2.sqrt()

    @cached_property
    def l_up(self) -> np.ndarray:
        inv = 1.0 / self.norm
        return np.array([self.yj[i] * inv for i in range(4)], dtype=object)

    @cached_property
    def l_low(self) -> np.ndarray:
        out = np.empty(4, dtype=object)
        for i in range(4):
            acc = None
            for j in range(4):
                term = self.g[i, j] * self.l_up[j]
                acc = term if acc is None else acc + term
            out[i] = acc
        return out

    @cached_property
    def l_hess(self) -> np.ndarray:
        """Fiber Hessian of |y|: l_{j.k} = (g_jk - l_j l_k)/|y|."""
        inv = 1.0 / self.norm
        out = np.empty((4, 4), dtype=object)
        for j in range(4):
            for k in range(j, 4):
                out[j, k] = out[k, j] = (self.g[j, k] - self.l_low[j] * self.l_low[k]) * inv
        return out

    @cached_property
    def f_vec(self) -> np.ndarray:
        """F^i = F^i_j y^j."""
        _, f_mix = self.faraday
        out = np.empty(4, dtype=object)
        for i in range(4):
            acc = None
            for j in range(4):
                term = f_mix[i, j] * self.yj[j]
                acc = term if acc is None else acc + term
            out[i] = acc
        return out

    # -- spray family -----------------------------------------------------------

    @cached_property
    def b_up(self) -> np.ndarray:
        """Spray perturbation B^i = -(alpha/2)|y| F^i."""
        coef = -0.5 * self.alpha
        return np.array([self.norm * self.f_vec[i] * coef for i in range(4)], dtype=object)

    @cached_property
    def spray(self) -> np.ndarray:
        """G^i = (1/2) gamma^i_jk y^j y^k + B^i."""
        out = np.empty(4, dtype=object)
        for i in range(4):
            acc = None
            for j in range(4):
                for k in range(4):
                    term = self.gamma[i, j, k] * self.yj[j] * self.yj[k]
                    acc = term if acc is None else acc + term
            out[i] = acc * 0.5 + self.b_up[i]
        return out

    @cached_property
    def b_j(self) -> np.ndarray:
        """Closed form B^i_.j = -(alpha/2)(F^i l_j + |y| F^i_j)."""
        _, f_mix = self.faraday
        coef = -0.5 * self.alpha
        out = np.empty((4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                out[i, j] = (self.f_vec[i] * self.l_low[j] + self.norm * f_mix[i, j]) * coef
        return out

    @cached_property
    def b_jk(self) -> np.ndarray:
        """Closed form B^i_.jk = -(alpha/2)(l_{j.k} F^i + l_j F^i_k + l_k F^i_j)."""
        _, f_mix = self.faraday
        coef = -0.5 * self.alpha
        out = np.empty((4, 4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                for k in range(j, 4):
                    term = (
                        self.l_hess[j, k] * self.f_vec[i]
                        + self.l_low[j] * f_mix[i, k]
                        + self.l_low[k] * f_mix[i, j]
                    ) * coef
                    out[i, j, k] = out[i, k, j] = term
        return out

    @cached_property
    def n_conn(self) -> np.ndarray:
        """N^i_j = gamma^i_jk y^k + B^i_.j."""
        out = np.empty((4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                acc = self.b_j[i, j]
                for k in range(4):
                    acc = acc + self.gamma[i, j, k] * self.yj[k]
                out[i, j] = acc
        return out

    @cached_property
    def n_conn0(self) -> np.ndarray:
        """alpha=0 connection gamma^i_jk y^k (used by the frozen divergence term)."""
        out = np.empty((4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                acc = None
                for k in range(4):
                    term = self.gamma[i, j, k] * self.yj[k]
                    acc = term if acc is None else acc + term
                out[i, j] = acc
        return out

    @cached_property
    def berwald(self) -> np.ndarray:
        """G^i_jk = gamma^i_jk + B^i_.jk (fiber Hessian of the spray)."""
        out = np.empty((4, 4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                for k in range(j, 4):
                    out[i, j, k] = out[i, k, j] = self.gamma[i, j, k] + self.b_jk[i, j, k]
        return out

    # -- adapted derivatives and curvature (more shifts consumed) -----------------

    def delta(self, f: Jet, i: int, connection: np.ndarray | None = None) -> Jet:
        """delta_i f = f_{,i} - N^j_i f_{.j} (with the alpha connection by default)."""
        n = self.n_conn if connection is None else connection
        acc = f.partial(i)
        for j in range(4):
            acc = acc - n[j, i] * f.partial(Y_SLOT0 + j)
        return acc

    @cached_property
    def n_curvature(self) -> np.ndarray:
        """R^i_jk = delta_k N^i_j - delta_j N^i_k, antisymmetric in (j,k).

        These components double as the (generally nonvanishing) torsion of the
        Berwald-type connection; no separate storage is needed."""
        out = np.empty((4, 4, 4), dtype=object)
        zero = self.n_conn[0, 0] * 0.0
        zero = zero.truncate(max(zero.order - 1, 0))
        for i in range(4):
            for j in range(4):
                out[i, j, j] = zero
            for j in range(4):
                for k in range(j + 1, 4):
                    term = self.delta(self.n_conn[i, j], k) - self.delta(self.n_conn[i, k], j)
                    out[i, j, k] = term
                    out[i, k, j] = -term
        return out

    @cached_property
    def tidal(self) -> np.ndarray:
        """E^i_j = R^i_jk y^k."""
        out = np.empty((4, 4), dtype=object)
        for i in range(4):
            for j in range(4):
                acc = None
                for k in range(4):
                    term = self.n_curvature[i, j, k] * self.yj[k]
                    acc = term if acc is None else acc + term
                out[i, j] = acc
        return out

    @cached_property
    def d_riemann(self) -> np.ndarray:
        """R_j^i_kl = (1/2)(E^i_k)_.jl as float values, indexed [j, i, k, l]."""
        out = np.empty((4, 4, 4, 4))
        for i in range(4):
            for k in range(4):
                e_jets = [self.tidal[i, k].partial(Y_SLOT0 + j) for j in range(4)]
                for j in range(4):
                    for l in range(4):
                        out[j, i, k, l] = 0.5 * e_jets[j].partial(Y_SLOT0 + l).value
        return out

    @cached_property
    def d_ricci(self) -> np.ndarray:
        """R_jl = -(1/2)(E^i_i)_.jl as float values (a fiber Hessian, symmetric)."""
        trace = None
        for i in range(4):
            trace = self.tidal[i, i] if trace is None else trace + self.tidal[i, i]
        out = np.empty((4, 4))
        for j in range(4):
            dj = trace.partial(Y_SLOT0 + j)
            for l in range(j, 4):
                out[j, l] = out[l, j] = -0.5 * dj.partial(Y_SLOT0 + l).value
        return out

    @cached_property
    def d_ricci_scalar(self) -> float:
        ginv = jet_values(self.ginv)
        return float(np.einsum("jl,jl->", ginv, self.d_ricci))

    # -- scalar-curvature split ----------------------------------------------------

    @cached_property
    def base_ricci_scalar(self) -> float:
        ric = base_geom.ricci_jets(base_geom.riemann_jets(self.gamma))
        ginv = jet_values(self.ginv)
        return float(sum(ginv[j, l] * ric[j, l].value for j in range(4) for l in range(4)))

    @cached_property
    def f_squared(self) -> float:
        """F_ij F^ij at the base point."""
        f_low, f_mix = self.faraday
        ginv = jet_values(self.ginv)
        fl = jet_values(f_low)
        return float(np.einsum("ia,jb,ij,ab->", ginv, ginv, fl, fl))

    @cached_property
    def div_term(self) -> float:
        """delta0-divergence of X^i = g^{jk} B^i_.jk (frozen convention)."""
        x_vec = np.empty(4, dtype=object)
        for i in range(4):
            acc = None
            for j in range(4):
                for k in range(4):
                    term = self.ginv[j, k] * self.b_jk[i, j, k]
                    acc = term if acc is None else acc + term
            x_vec[i] = acc
        total = 0.0
        for i in range(4):
            di = self.delta(x_vec[i], i, connection=self.n_conn0)
            total += di.value
            for j in range(4):
                total += self.gamma[j, j, i].value * x_vec[i].value
        return total

    @cached_property
    def quad_term(self) -> float:
        """-(1/2) g^{jk} (B^i_h B^h_i)_.jk."""
        s = None
        for i in range(4):
            for h in range(4):
                term = self.b_j[i, h] * self.b_j[h, i]
                s = term if s is None else s + term
        ginv = jet_values(self.ginv)
        total = 0.0
        for j in range(4):
            dj = s.partial(Y_SLOT0 + j)
            for k in range(4):
                total += -0.5 * ginv[j, k] * dj.partial(Y_SLOT0 + k).value
        return total

    @cached_property
    def b_scalar(self) -> Jet:
        """(3/2) B^l B_l / |y|^2 + (1/2) B^i_h B^h_i as a jet."""
        b_low = np.empty(4, dtype=object)
        for i in range(4):
            acc = None
            for j in range(4):
                term = self.g[i, j] * self.b_up[j]
                acc = term if acc is None else acc + term
            b_low[i] = acc
        bb = None
        for l in range(4):
            term = self.b_up[l] * b_low[l]
            bb = term if bb is None else bb + term
        s = None
        for i in range(4):
            for h in range(4):
                term = self.b_j[i, h] * self.b_j[h, i]
                s = term if s is None else s + term
        return bb / self.norm2 * 1.5 + s * 0.5


# -- public operations ------------------------------------------------------------


def geometry(model: SpacetimeModel, p, order: int = 2, alpha: float | None = None) -> BundleGeometry:
    return BundleGeometry(model, p, order=order, alpha=alpha)


def supporting_element(model: SpacetimeModel, p, order: int = 1):
    """(|y|, l^i, l_i) with g(l,l) = 1; requires timelike y."""
    geo = BundleGeometry(model, p, order=order)
    return geo.norm.value, jet_values(geo.l_up), jet_values(geo.l_low)


def spray_B(model: SpacetimeModel, p, alpha: float | None = None) -> np.ndarray:
    return jet_values(BundleGeometry(model, p, order=1, alpha=alpha).b_up)


def spray(model: SpacetimeModel, p, alpha: float | None = None) -> np.ndarray:
    return jet_values(BundleGeometry(model, p, order=1, alpha=alpha).spray)


def nonlinear_connection(model: SpacetimeModel, p, alpha: float | None = None) -> np.ndarray:
    return jet_values(BundleGeometry(model, p, order=1, alpha=alpha).n_conn)


def fiber_derivs_B(model: SpacetimeModel, p, alpha: float | None = None, route: str = "closed"):
    """(B^i_.j, B^i_.jk, B^i_.jkl) values, via closed forms or pure fiber jets."""
    if route not in ("closed", "jets"):
        raise UsageError(f"route must be 'closed' or 'jets', got {route!r}")
    geo = BundleGeometry(model, p, order=4, alpha=alpha)
    b1 = np.empty((4, 4))
    b2 = np.empty((4, 4, 4))
    b3 = np.empty((4, 4, 4, 4))
    if route == "closed":
        b1[:] = jet_values(geo.b_j)
        for i in range(4):
            for j in range(4):
                for k in range(4):
                    b2[i, j, k] = geo.b_jk[i, j, k].value
                    for l in range(4):
                        b3[i, j, k, l] = geo.b_jk[i, j, k].partial(Y_SLOT0 + l).value
        return b1, b2, b3
    for i in range(4):
        firsts = [geo.b_up[i].partial(Y_SLOT0 + j) for j in range(4)]
        for j in range(4):
            b1[i, j] = firsts[j].value
            seconds = [firsts[j].partial(Y_SLOT0 + k) for k in range(4)]
            for k in range(4):
                b2[i, j, k] = seconds[k].value
                for l in range(4):
                    b3[i, j, k, l] = seconds[k].partial(Y_SLOT0 + l).value
    return b1, b2, b3


def berwald_coeffs(model: SpacetimeModel, p, alpha: float | None = None) -> np.ndarray:
    """G^i_jk values (fiber Hessian of the spray), symmetric in (j,k)."""
    geo = BundleGeometry(model, p, order=1, alpha=alpha)
    out = np.empty((4, 4, 4))
    for i in range(4):
        for j in range(4):
            for k in range(4):
                out[i, j, k] = geo.berwald[i, j, k].value
    return out


def adapted_derivative(model: SpacetimeModel, p, field: FiberField, order: int = 2,
                       alpha: float | None = None) -> np.ndarray:
    """delta_i applied componentwise to a fiber field; returns jets one order down."""
    geo = BundleGeometry(model, p, order=order, alpha=alpha)
    values = field(model, geo.p, order)
    out = np.empty((4, *values.shape), dtype=object)
    for idx in np.ndindex(values.shape):
        f = values[idx]
        if not isinstance(f, Jet):
            raise UsageError("fiber field must evaluate to jets")
        for i in range(4):
            out[(i, *idx)] = geo.delta(f, i)
    return out


def n_curvature(model: SpacetimeModel, p, alpha: float | None = None) -> np.ndarray:
    """R^i_jk values, antisymmetric in (j,k)."""
    geo = BundleGeometry(model, p, order=2, alpha=alpha)
    return jet_values(geo.n_curvature)


def tidal_tensor(model: SpacetimeModel, p, alpha: float | None = None) -> np.ndarray:
    """E^i_j values."""
    geo = BundleGeometry(model, p, order=2, alpha=alpha)
    return jet_values(geo.tidal)


def d_curvature(model: SpacetimeModel, p, alpha: float | None = None):
    """(R_j^i_kl, R_jl, R) of the Berwald-type connection at the bundle point."""
    geo = BundleGeometry(model, p, order=4, alpha=alpha)
    return geo.d_riemann, geo.d_ricci, geo.d_ricci_scalar


def ricci_decomposition(model: SpacetimeModel, p, alpha: float | None = None) -> dict:
    """Split of the bundle Ricci scalar into base curvature, a divergence term,
    and the quadratic field-strength term; residual should vanish pointwise."""
    geo = BundleGeometry(model, p, order=4, alpha=alpha)
    r_bundle = geo.d_ricci_scalar
    r_base = geo.base_ricci_scalar
    div_term = geo.div_term
    quad_term = geo.quad_term
    return {
        "R": r_bundle,
        "r": r_base,
        "div_term": div_term,
        "quad_term": quad_term,
        "residual": r_bundle - r_base - div_term - quad_term,
        "f_squared": geo.f_squared,
        "alpha": geo.alpha,
    }


def b_scalar_and_hessian(model: SpacetimeModel, p, alpha: float | None = None):
    """(scalar, fiber Hessian) of the quadratic spray invariant."""
    geo = BundleGeometry(model, p, order=3, alpha=alpha)
    b = geo.b_scalar
    hess = np.empty((4, 4))
    for i in range(4):
        di = b.partial(Y_SLOT0 + i)
        for j in range(i, 4):
            hess[i, j] = hess[j, i] = di.partial(Y_SLOT0 + j).value
    return b.value, hess


def generalized_einstein(model: SpacetimeModel, p, alpha: float | None = None) -> dict:
    """Generalized Einstein tensor.

    'variational' is the metric variation of the equivalent base Lagrangian
    (the classical Einstein tensor minus the alpha-scaled electromagnetic
    stress-energy); 'assembled' is the literal bundle-side combination
    sym(R_jl) - (1/2) Rtilde g_jl + Hess(B-scalar).  Their difference is
    reported, not asserted.
    """
    p = p if isinstance(p, BundlePoint) else BundlePoint(*p)
    geo = BundleGeometry(model, p, order=4, alpha=alpha)
    a = geo.alpha

    g = metric_jet(model, p.x, order=2)
    ginv = base_geom.invert_jet_matrix(g.components)
    gt = base_geom.einstein_jets(g.components, ginv, 0)
    apot = potential_jet(model, p.x, order=2, check=False)
    f_low, f_mix = base_geom.faraday_jets(apot.components, ginv)
    t_em = base_geom.em_stress_energy_jets(g.components, ginv, f_low, f_mix)
    coupling = 8.0 * math.pi * (1.5 * a**2)
    variational = np.empty((4, 4))
    for i in range(4):
        for j in range(4):
            variational[i, j] = gt[i, j].value - coupling * t_em[i, j].value

    r_tilde = geo.base_ricci_scalar + 1.5 * a**2 * geo.f_squared
    _, b_hess = _b_hessian(geo)
    gvals = jet_values(geo.g)
    ric = geo.d_ricci
    assembled = 0.5 * (ric + ric.T) - 0.5 * r_tilde * gvals + b_hess

    return {
        "variational": variational,
        "assembled": assembled,
        "difference": float(np.max(np.abs(variational - assembled))),
        "max_abs_variational": float(np.max(np.abs(variational))),
        "alpha": a,
        "r_tilde": r_tilde,
    }


def _b_hessian(geo: BundleGeometry):
    b = geo.b_scalar
    hess = np.empty((4, 4))
    for i in range(4):
        di = b.partial(Y_SLOT0 + i)
        for j in range(i, 4):
            hess[i, j] = hess[j, i] = di.partial(Y_SLOT0 + j).value
    return b.value, hess


def connection_and_tidal_values(model: SpacetimeModel, x, y, alpha: float | None = None):
    """(N^i_j, E^i_j) as float arrays via explicit chain rules.

    Float twin of the jet route (cross-checked in the test suite); used in the
    deviation-equation hot path where jet evaluation would dominate.
    """
    alpha = model.alpha if alpha is None else float(alpha)
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gj = metric_jet(model, x, order=2, check=False).components
    aj = potential_jet(model, x, order=2, check=False).components

    g = np.empty((4, 4))
    dg = np.empty((4, 4, 4))  # dg[m,i,j] = d_m g_ij
    ddg = np.empty((4, 4, 4, 4))  # ddg[m,k,i,j] = d_m d_k g_ij
    for i in range(4):
        for j in range(i, 4):
            jet = gj[i, j]
            g[i, j] = g[j, i] = jet.value
            grad = jet.gradient()
            hess = jet.hessian()
            dg[:, i, j] = dg[:, j, i] = grad
            ddg[:, :, i, j] = ddg[:, :, j, i] = hess
    da = np.empty((4, 4))  # da[i,j] = d_i A_j
    dda = np.empty((4, 4, 4))  # dda[m,i,j] = d_m d_i A_j
    for j in range(4):
        da[:, j] = aj[j].gradient()
        dda[:, :, j] = aj[j].hessian()

    ginv = np.linalg.inv(g)
    dginv = -np.einsum("ia,mab,bh->mih", ginv, dg, ginv)
    s = np.einsum("khj->hjk", dg) + np.einsum("jhk->hjk", dg) - dg
    gamma = 0.5 * np.einsum("ih,hjk->ijk", ginv, s)
    ds = (
        np.einsum("mkhj->mhjk", ddg)
        + np.einsum("mjhk->mhjk", ddg)
        - np.einsum("mhjk->mhjk", ddg)
    )
    dgamma = 0.5 * (np.einsum("mih,hjk->mijk", dginv, s) + np.einsum("ih,mhjk->mijk", ginv, ds))

    f_low = da - da.T
    df_low = dda - dda.transpose(0, 2, 1)
    f_mix = ginv @ f_low
    df_mix = np.einsum("mih,hj->mij", dginv, f_low) + np.einsum("ih,mhj->mij", ginv, df_low)

    n2 = float(y @ g @ y)
    if n2 <= 0:
        raise SingularEvaluationError(f"fiber vector is not timelike: g(y,y) = {n2}", value=n2)
    norm = math.sqrt(n2)
    dnorm = np.einsum("mij,i,j->m", dg, y, y) / (2.0 * norm)
    l_low = (g @ y) / norm
    dl_low = np.einsum("mja,a->mj", dg, y) / norm - np.outer(dnorm, l_low) / norm
    phi = f_mix @ y
    dphi = np.einsum("mia,a->mi", df_mix, y)

    b_j = -0.5 * alpha * (np.outer(phi, l_low) + norm * f_mix)
    db_j = -0.5 * alpha * (
        np.einsum("mi,j->mij", dphi, l_low)
        + np.einsum("i,mj->mij", phi, dl_low)
        + np.einsum("m,ij->mij", dnorm, f_mix)
        + norm * df_mix
    )
    n_conn = np.einsum("ijk,k->ij", gamma, y) + b_j
    dn = np.einsum("mijk,k->mij", dgamma, y) + db_j

    l_hess = (g - np.outer(l_low, l_low)) / norm
    b_jk = -0.5 * alpha * (
        np.einsum("jk,i->ijk", l_hess, phi)
        + np.einsum("j,ik->ijk", l_low, f_mix)
        + np.einsum("k,ij->ijk", l_low, f_mix)
    )
    n_fiber = gamma + b_jk  # dN^i_j/dy^l at slot [i,j,l]
    delta_n = dn.transpose(1, 2, 0) - np.einsum("lk,ijl->ijk", n_conn, n_fiber)  # delta_k N^i_j
    r3 = delta_n - delta_n.transpose(0, 2, 1)  # R^i_jk
    e = np.einsum("ijk,k->ij", r3, y)
    return n_conn, e


def homogeneity_ratio(model: SpacetimeModel, p, values_fn, degree: int, lam: float = 2.0,
                      alpha: float | None = None) -> float:
    """Max relative Euler-scaling defect of values_fn under y -> lam*y."""
    p = p if isinstance(p, BundlePoint) else BundlePoint(*p)
    base = np.asarray(values_fn(model, p, alpha), dtype=float)
    scaled = np.asarray(values_fn(model, BundlePoint(p.x, lam * p.y), alpha), dtype=float)
    expect = lam**degree * base
    scale = np.max(np.abs(expect)) + 1.0
    return float(np.max(np.abs(scaled - expect)) / scale)
