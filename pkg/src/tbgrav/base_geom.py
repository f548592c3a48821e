"""Classical geometry on the base manifold: Levi-Civita connection, curvature,
Faraday tensor, Maxwell residuals, electromagnetic stress-energy, and the
classical Einstein-Maxwell combination.

Conventions (frozen by the Schwarzschild/Reissner-Nordstrom anchor tests):

    gamma^i_jk = (1/2) g^{ih} (d_k g_hj + d_j g_hk - d_h g_jk)
    r^i_jkl    = d_k gamma^i_jl - d_l gamma^i_jk
                 + gamma^i_mk gamma^m_jl - gamma^i_ml gamma^m_jk
    r_jl       = r^i_jil           (contraction over the first derivative slot)
    F_ij       = d_i A_j - d_j A_i
    T^f_ij     = EM_STRESS_SIGN * (1/4pi) (-F_il F_j^l + (1/4) g_ij F^lm F_lm)

With these choices the weak-field Ricci scalar is positive for a negative
potential well and Reissner-Nordstrom satisfies G_ij = (8 pi k / c^4) T^f_ij.
"""

from __future__ import annotations

import math

import numpy as np

from .errors import SingularEvaluationError, UsageError
from .jets import Jet
from .spacetime import SpacetimeModel, metric_jet, potential_jet
from .tensors import TensorValue, jet_values

# Sign switch for the electromagnetic stress-energy tensor; see module docstring.
EM_STRESS_SIGN = +1.0


# -- jet-matrix utilities -------------------------------------------------------


def invert_jet_matrix(g: np.ndarray) -> np.ndarray:
    """Inverse of a 4x4 jet matrix via the truncated Neumann series around the
    inverse of its value part."""
    order = g[0, 0].order
    g0 = jet_values(g)
    try:
        g0inv = np.linalg.inv(g0)
    except np.linalg.LinAlgError:
        raise SingularEvaluationError("metric value matrix is singular") from None
    # X = -g0inv . (g - g0); value part of X is zero
    x = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            acc = None
            for m in range(4):
                term = (g[m, j] - g0[m, j]) * (-g0inv[i, m])
                acc = term if acc is None else acc + term
            x[i, j] = acc
    # S = I + X + X^2 + ... + X^order, then ginv = S . g0inv
    s = np.empty((4, 4), dtype=object)
    power = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            s[i, j] = x[i, j] + (1.0 if i == j else 0.0)
            power[i, j] = x[i, j]
    for _ in range(order - 1):
        power = _matmul(power, x)
        for i in range(4):
            for j in range(4):
                s[i, j] = s[i, j] + power[i, j]
    out = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            acc = None
            for m in range(4):
                term = s[i, m] * g0inv[m, j]
                acc = term if acc is None else acc + term
            out[i, j] = acc
    return out


def _matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    out = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            acc = None
            for m in range(4):
                term = a[i, m] * b[m, j]
                acc = term if acc is None else acc + term
            out[i, j] = acc
    return out


def det_jet_matrix(g: np.ndarray) -> Jet:
    """Determinant of a 4x4 jet matrix by cofactor expansion along row 0."""

    def det3(m, rows, cols):
        (r0, r1, r2), (c0, c1, c2) = rows, cols
        return (
            m[r0, c0] * (m[r1, c1] * m[r2, c2] - m[r1, c2] * m[r2, c1])
            - m[r0, c1] * (m[r1, c0] * m[r2, c2] - m[r1, c2] * m[r2, c0])
            + m[r0, c2] * (m[r1, c0] * m[r2, c1] - m[r1, c1] * m[r2, c0])
        )

    rows = (1, 2, 3)
    total = None
    for j in range(4):
        cols = tuple(c for c in range(4) if c != j)
        term = g[0, j] * det3(g, rows, cols)
        if j % 2:
            term = -term
        total = term if total is None else total + term
    return total


def sqrt_minus_det(g: np.ndarray) -> Jet:
    return (-det_jet_matrix(g)).sqrt()


# -- connection and curvature kernels --------------------------------------------


def christoffel_jets(g: np.ndarray, ginv: np.ndarray | None = None) -> np.ndarray:
    """gamma^i_jk from a jet-valued metric; symmetric entries share storage."""
    if ginv is None:
        ginv = invert_jet_matrix(g)
    dg = np.empty((4, 4, 4), dtype=object)  # dg[k,i,j] = d_k g_ij
    for i in range(4):
        for j in range(i, 4):
            for k in range(4):
                dg[k, i, j] = dg[k, j, i] = g[i, j].partial(k)
    gamma = np.empty((4, 4, 4), dtype=object)
    for j in range(4):
        for k in range(j, 4):
            for i in range(4):
                acc = None
                for h in range(4):
                    term = ginv[i, h] * (dg[k, h, j] + dg[j, h, k] - dg[h, j, k])
                    acc = term if acc is None else acc + term
                gamma[i, j, k] = gamma[i, k, j] = acc * 0.5
    return gamma


def riemann_jets(gamma: np.ndarray) -> np.ndarray:
    """r^i_jkl, antisymmetric in (k,l)."""
    dgam = np.empty((4, 4, 4, 4), dtype=object)  # dgam[k,i,j,l] = d_k gamma^i_jl
    for i in range(4):
        for j in range(4):
            for l in range(j, 4):
                for k in range(4):
                    dgam[k, i, j, l] = dgam[k, i, l, j] = gamma[i, j, l].partial(k)
    riem = np.empty((4, 4, 4, 4), dtype=object)
    zero = gamma[0, 0, 0] * 0.0
    for i in range(4):
        for j in range(4):
            for k in range(4):
                riem[i, j, k, k] = zero
            for k in range(4):
                for l in range(k + 1, 4):
                    acc = dgam[k, i, j, l] - dgam[l, i, j, k]
                    for m in range(4):
                        acc = acc + gamma[i, m, k] * gamma[m, j, l]
                        acc = acc - gamma[i, m, l] * gamma[m, j, k]
                    riem[i, j, k, l] = acc
                    riem[i, j, l, k] = -acc
    return riem


def ricci_jets(riem: np.ndarray) -> np.ndarray:
    ric = np.empty((4, 4), dtype=object)
    for j in range(4):
        for l in range(4):
            acc = None
            for i in range(4):
                term = riem[i, j, i, l]
                acc = term if acc is None else acc + term
            ric[j, l] = acc
    return ric


def faraday_jets(a: np.ndarray, ginv: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """(F_ij, F^i_j) from potential jets."""
    f_low = np.empty((4, 4), dtype=object)
    zero = a[0] * 0.0
    for i in range(4):
        f_low[i, i] = zero
        for j in range(i + 1, 4):
            fij = a[j].partial(i) - a[i].partial(j)
            f_low[i, j] = fij
            f_low[j, i] = -fij
    f_mix = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            acc = None
            for h in range(4):
                term = ginv[i, h] * f_low[h, j]
                acc = term if acc is None else acc + term
            f_mix[i, j] = acc
    return f_low, f_mix


# -- public operations -----------------------------------------------------------


def christoffel(model: SpacetimeModel, x, order: int = 1) -> TensorValue:
    """Levi-Civita coefficients as jets carrying ``order`` derivative levels."""
    g = metric_jet(model, x, order=order + 1)
    gamma = christoffel_jets(g.components)
    return TensorValue(gamma, "ull", point=np.asarray(x, dtype=float), symmetry=(1, 2))


def riemann(model: SpacetimeModel, x, order: int = 0) -> TensorValue:
    g = metric_jet(model, x, order=order + 2)
    riem = riemann_jets(christoffel_jets(g.components))
    return TensorValue(riem, "ulll", point=np.asarray(x, dtype=float))


def ricci(model: SpacetimeModel, x, order: int = 0) -> TensorValue:
    g = metric_jet(model, x, order=order + 2)
    ric = ricci_jets(riemann_jets(christoffel_jets(g.components)))
    return TensorValue(ric, "ll", point=np.asarray(x, dtype=float))


def ricci_scalar(model: SpacetimeModel, x) -> float:
    g = metric_jet(model, x, order=2)
    ginv = invert_jet_matrix(g.components)
    ric = ricci_jets(riemann_jets(christoffel_jets(g.components, ginv)))
    total = 0.0
    for j in range(4):
        for l in range(4):
            total += ginv[j, l].value * ric[j, l].value
    return total


def faraday(model: SpacetimeModel, x, order: int = 1) -> tuple[TensorValue, TensorValue]:
    """Field tensor (F_ij, F^i_j) at x."""
    x = np.asarray(x, dtype=float)
    g = metric_jet(model, x, order=order + 1)
    a = potential_jet(model, x, order=order + 1, check=False)
    ginv = invert_jet_matrix(g.components)
    f_low, f_mix = faraday_jets(a.components, ginv)
    return TensorValue(f_low, "ll", point=x), TensorValue(f_mix, "ul", point=x)


def maxwell_residuals(model: SpacetimeModel, x) -> tuple[np.ndarray, np.ndarray]:
    """(H_ijk, J^i): the cyclic identity residual and the source current.

    H uses explicit covariant derivatives (the Christoffel terms must cancel);
    J^i = -(c/4pi) (1/sqrt(-g)) d_j(sqrt(-g) F^ij) uses the densitized form.
    """
    x = np.asarray(x, dtype=float)
    g = metric_jet(model, x, order=3)
    a = potential_jet(model, x, order=3, check=False)
    ginv = invert_jet_matrix(g.components)
    gamma = christoffel_jets(g.components, ginv)
    f_low, f_mix = faraday_jets(a.components, ginv)

    def cov_dF(i, j, k):
        acc = f_low[j, k].partial(i)
        for m in range(4):
            acc = acc - gamma[m, i, j] * f_low[m, k]
            acc = acc - gamma[m, i, k] * f_low[j, m]
        return acc

    h = np.zeros((4, 4, 4))
    for i in range(4):
        for j in range(4):
            for k in range(4):
                h[i, j, k] = (cov_dF(i, j, k) + cov_dF(k, i, j) + cov_dF(j, k, i)).value

    s = sqrt_minus_det(g.components)
    f_up = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            acc = None
            for b in range(4):
                term = f_mix[i, b] * ginv[j, b]
                acc = term if acc is None else acc + term
            f_up[i, j] = acc
    j_vec = np.zeros(4)
    coeff = -model.c / (4.0 * math.pi)
    for i in range(4):
        acc = 0.0
        for j in range(4):
            acc += (s * f_up[i, j]).partial(j).value
        j_vec[i] = coeff * acc / s.value
    return h, j_vec


def em_stress_energy_jets(g, ginv, f_low, f_mix) -> np.ndarray:
    # F^{lm} F_lm with F^{lm} = F^l_a g^{am}
    f2 = None
    for l in range(4):
        for m in range(4):
            fup = None
            for a_ in range(4):
                t = f_mix[l, a_] * ginv[a_, m]
                fup = t if fup is None else fup + t
            term = fup * f_low[l, m]
            f2 = term if f2 is None else f2 + term
    t = np.empty((4, 4), dtype=object)
    coeff = EM_STRESS_SIGN / (4.0 * math.pi)
    for i in range(4):
        for j in range(i, 4):
            acc = None
            for l in range(4):
                term = f_low[i, l] * f_mix[l, j]  # -F_il F_j^l = +F_il F^l_j
                acc = term if acc is None else acc + term
            acc = acc + g[i, j] * f2 * 0.25
            t[i, j] = t[j, i] = acc * coeff
    return t


def em_stress_energy(model: SpacetimeModel, x, order: int = 0) -> TensorValue:
    """Electromagnetic stress-energy T^f_ij (symmetric, trace-free)."""
    x = np.asarray(x, dtype=float)
    g = metric_jet(model, x, order=order + 1)
    a = potential_jet(model, x, order=order + 1, check=False)
    ginv = invert_jet_matrix(g.components)
    f_low, f_mix = faraday_jets(a.components, ginv)
    t = em_stress_energy_jets(g.components, ginv, f_low, f_mix)
    return TensorValue(t, "ll", point=x, symmetry=(0, 1))


def einstein_jets(g, ginv, order_used: int) -> np.ndarray:
    gamma = christoffel_jets(g, ginv)
    ric = ricci_jets(riemann_jets(gamma))
    scalar = None
    for j in range(4):
        for l in range(4):
            term = ginv[j, l] * ric[j, l]
            scalar = term if scalar is None else scalar + term
    gt = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(i, 4):
            gt[i, j] = gt[j, i] = ric[i, j] - g[i, j] * scalar * 0.5
    return gt


def classical_einstein_maxwell(model: SpacetimeModel, x, order: int = 0) -> TensorValue:
    """CEM_ij = G_ij - (8 pi k / c^4) T^f_ij; zero on electrovacuum solutions."""
    x = np.asarray(x, dtype=float)
    g = metric_jet(model, x, order=order + 2)
    a = potential_jet(model, x, order=order + 2, check=False)
    ginv = invert_jet_matrix(g.components)
    gt = einstein_jets(g.components, ginv, order)
    f_low, f_mix = faraday_jets(a.components, ginv)
    t = em_stress_energy_jets(g.components, ginv, f_low, f_mix)
    kappa = 8.0 * math.pi * model.k / model.c**4
    cem = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(i, 4):
            cem[i, j] = cem[j, i] = gt[i, j] - t[i, j] * kappa
    return TensorValue(cem, "ll", point=x, symmetry=(0, 1))


def covariant_divergence(model: SpacetimeModel, x, field, order: int = 3) -> np.ndarray:
    """div_j S^{ij} for a re-evaluable symmetric field handle.

    ``field(model, x, order)`` must return a 4x4 object array of jets for
    S^{ij}, carrying at least one stored derivative level.
    """
    x = np.asarray(x, dtype=float)
    s = field(model, x, order)
    if not (isinstance(s, np.ndarray) and s.shape == (4, 4) and s.dtype == object):
        raise UsageError("field handle must return a 4x4 object array of jets")
    if s[0, 0].order < 1:
        raise UsageError("field handle jets carry no derivative level")
    g = metric_jet(model, x, order=max(2, s[0, 0].order))
    gamma = christoffel_jets(g.components)
    out = np.zeros(4)
    for i in range(4):
        acc = 0.0
        for j in range(4):
            acc += s[i, j].partial(j).value
            for m in range(4):
                acc += gamma[i, m, j].value * s[m, j].value
                acc += gamma[j, m, j].value * s[i, m].value
        out[i] = acc
    return out


def raise_both_indices(s_low: np.ndarray, ginv: np.ndarray) -> np.ndarray:
    """S^{ij} = g^{ia} g^{jb} S_ab for 4x4 object arrays."""
    out = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            acc = None
            for a in range(4):
                for b in range(4):
                    term = ginv[i, a] * ginv[j, b] * s_low[a, b]
                    acc = term if acc is None else acc + term
            out[i, j] = acc
    return out


# Re-evaluable S^{ij} handles for covariant_divergence -----------------------------


def inverse_metric_field(model: SpacetimeModel, x, order: int) -> np.ndarray:
    return invert_jet_matrix(metric_jet(model, x, order=order).components)


def em_stress_upper_field(model: SpacetimeModel, x, order: int) -> np.ndarray:
    g = metric_jet(model, x, order=order)
    a = potential_jet(model, x, order=order, check=False)
    ginv = invert_jet_matrix(g.components)
    f_low, f_mix = faraday_jets(a.components, ginv)
    t = em_stress_energy_jets(g.components, ginv, f_low, f_mix)
    return raise_both_indices(t, ginv)


def einstein_upper_field(model: SpacetimeModel, x, order: int) -> np.ndarray:
    g = metric_jet(model, x, order=order)
    ginv = invert_jet_matrix(g.components)
    return raise_both_indices(einstein_jets(g.components, ginv, order), ginv)


def cem_upper_field(model: SpacetimeModel, x, order: int) -> np.ndarray:
    """Upper-index classical Einstein-Maxwell combination as a field handle."""
    g = metric_jet(model, x, order=order)
    a = potential_jet(model, x, order=order, check=False)
    ginv = invert_jet_matrix(g.components)
    gt = einstein_jets(g.components, ginv, order)
    f_low, f_mix = faraday_jets(a.components, ginv)
    t = em_stress_energy_jets(g.components, ginv, f_low, f_mix)
    kappa = 8.0 * math.pi * model.k / model.c**4
    cem = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(4):
            cem[i, j] = gt[i, j] - t[i, j] * kappa
    return raise_both_indices(cem, ginv)


# -- fast float-level helpers (hot paths in dynamics) ------------------------------


def metric_and_inverse_values(model: SpacetimeModel, x, check: bool = False):
    g = metric_jet(model, x, order=0, check=check).values()
    return g, np.linalg.inv(g)


def christoffel_values(model: SpacetimeModel, x, check: bool = False) -> np.ndarray:
    """gamma^i_jk as a float array (einsum on first metric derivatives)."""
    gj = metric_jet(model, x, order=1, check=check).components
    g = jet_values(gj)
    dg = np.empty((4, 4, 4))  # dg[k,i,j]
    for i in range(4):
        for j in range(i, 4):
            grad = gj[i, j].gradient()
            dg[:, i, j] = dg[:, j, i] = grad
    ginv = np.linalg.inv(g)
    s = np.einsum("khj->hjk", dg) + np.einsum("jhk->hjk", dg) - np.einsum("hjk->hjk", dg)
    return 0.5 * np.einsum("ih,hjk->ijk", ginv, s)


def faraday_values(model: SpacetimeModel, x, check: bool = False):
    """(F_ij, F^i_j) as float arrays."""
    aj = potential_jet(model, x, order=1, check=check).components
    g = metric_jet(model, x, order=0, check=check).values()
    da = np.empty((4, 4))  # da[i,j] = d_i A_j
    for j in range(4):
        da[:, j] = aj[j].gradient()
    f_low = da - da.T
    f_mix = np.linalg.inv(g) @ f_low
    return f_low, f_mix


def classical_lorentz_rhs(model: SpacetimeModel, x, y, charge_ratio: float) -> np.ndarray:
    """a^i = -gamma^i_jk y^j y^k + (q/(m c^2)) F^i_j y^j  (unit-speed gauge)."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    gamma = christoffel_values(model, x)
    _, f_mix = faraday_values(model, x)
    return -np.einsum("ijk,j,k->i", gamma, y, y) + charge_ratio * f_mix @ y
