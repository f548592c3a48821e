"""Spacetime models: built-in catalog, JSON ingestion, jet-valued evaluation.

A model owns the covariant metric g_ij(x), the covariant potential A_i(x),
the coupling parameter alpha, and the constants c and k.  Signature is fixed
to (+,-,-,-) so that g(y,y) > 0 selects timelike fiber vectors.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import ChartError, ConfigError, ModelError, SingularEvaluationError
from .exprlang import Expr, evaluate, free_symbols, parse, print_expr
from .jets import Jet, seed_variable
from .tensors import TensorValue

CATALOG_NAMES = ("minkowski", "uniform_field", "schwarzschild", "reissner_nordstrom", "weak_field")


def alpha_star(c: float, k: float) -> float:
    """Coupling for which the bundle scalar curvature reproduces the
    Einstein-Maxwell Lagrangian: 3*alpha^2/2 = k/c^4."""
    return math.sqrt(2.0 * k / 3.0) / c**2


@dataclass
class SpacetimeModel:
    name: str
    coords: tuple[str, str, str, str]
    params: dict[str, float]
    g_exprs: list[list[Expr]]  # symmetric, entries shared across the diagonal
    a_exprs: list[Expr]
    alpha: float
    c: float = 1.0
    k: float = 1.0
    chart_guard: Expr | None = None
    alpha_is_star: bool = False

    def param_env(self, order: int, nvars: int) -> dict[str, Jet]:
        env = {name: Jet.constant(v, order, nvars) for name, v in self.params.items()}
        env["pi"] = Jet.constant(math.pi, order, nvars)
        return env

    def coord_env(self, x, order: int, nvars: int = 4, slots=(0, 1, 2, 3)) -> dict[str, Jet]:
        """Environment with coordinates seeded in the given variable slots."""
        env = self.param_env(order, nvars)
        for slot, name, xi in zip(slots, self.coords, np.asarray(x, dtype=float)):
            env[name] = seed_variable(slot, float(xi), order, nvars)
        return env

    def check_chart(self, x) -> None:
        if self.chart_guard is None:
            return
        env = self.coord_env(x, order=0)
        guard = evaluate(self.chart_guard, env).value
        if not guard > 0.0:
            raise ChartError(
                f"point {np.asarray(x).tolist()} outside chart of {self.name!r} "
                f"(guard value {guard})"
            )


# -- catalog ------------------------------------------------------------------

_REQUIRED_PARAMS = {
    "minkowski": (),
    "uniform_field": ("E0",),
    "schwarzschild": ("M",),
    "reissner_nordstrom": ("M", "Q"),
    "weak_field": ("M",),
}


def catalog(name: str, params: dict[str, float] | None = None) -> SpacetimeModel:
    """Built-in spacetimes with signature (+,-,-,-)."""
    params = dict(params or {})
    if name not in CATALOG_NAMES:
        raise ConfigError(f"unknown catalog model {name!r}; choose from {CATALOG_NAMES}")
    required = _REQUIRED_PARAMS[name]
    missing = [p for p in required if p not in params]
    if missing:
        raise ConfigError(f"model {name!r} requires parameters {missing}")
    extra = [p for p in params if p not in required]
    if extra:
        raise ConfigError(f"model {name!r} does not accept parameters {extra}")

    if name in ("schwarzschild", "reissner_nordstrom", "weak_field"):
        if params["M"] <= 0:
            raise ConfigError(f"mass must be positive, got M={params['M']}")
    if name == "reissner_nordstrom" and params["Q"] ** 2 > params["M"] ** 2:
        raise ConfigError("reissner_nordstrom requires Q^2 <= M^2 (no naked singularity)")

    flat = [["1", "0", "0", "0"], ["0", "-1", "0", "0"], ["0", "0", "-1", "0"], ["0", "0", "0", "-1"]]
    zero_pot = ["0", "0", "0", "0"]

    if name == "minkowski":
        spec = ("t", "x", "y", "z"), flat, zero_pot, None
    elif name == "uniform_field":
        spec = ("t", "x", "y", "z"), flat, ["-E0*x", "0", "0", "0"], None
    elif name == "schwarzschild":
        f = "1 - 2*M/r"
        g = [
            [f, "0", "0", "0"],
            ["0", f"-1/({f})", "0", "0"],
            ["0", "0", "-r^2", "0"],
            ["0", "0", "0", "-r^2*sin(theta)^2"],
        ]
        spec = ("t", "r", "theta", "phi"), g, zero_pot, _outside_horizon_guard("2*M")
    elif name == "reissner_nordstrom":
        f = "1 - 2*M/r + Q^2/r^2"
        g = [
            [f, "0", "0", "0"],
            ["0", f"-1/({f})", "0", "0"],
            ["0", "0", "-r^2", "0"],
            ["0", "0", "0", "-r^2*sin(theta)^2"],
        ]
        pot = ["Q/r", "0", "0", "0"]
        spec = ("t", "r", "theta", "phi"), g, pot, _outside_horizon_guard("(M + sqrt(M^2 - Q^2))")
    else:  # weak_field
        rho = "sqrt(x^2 + y^2 + z^2)"
        g = [
            [f"1 - 2*M/{rho}", "0", "0", "0"],
            ["0", f"-(1 + 2*M/{rho})", "0", "0"],
            ["0", "0", f"-(1 + 2*M/{rho})", "0"],
            ["0", "0", "0", f"-(1 + 2*M/{rho})"],
        ]
        spec = ("t", "x", "y", "z"), g, zero_pot, f"{rho} - 2*M"

    coords, g_src, a_src, guard_src = spec
    g_exprs = _parse_symmetric([[parse(s) for s in row] for row in g_src])
    a_exprs = [parse(s) for s in a_src]
    guard = parse(guard_src) if guard_src else None
    c = k = 1.0
    return SpacetimeModel(
        name=name,
        coords=coords,
        params=params,
        g_exprs=g_exprs,
        a_exprs=a_exprs,
        alpha=alpha_star(c, k),
        c=c,
        k=k,
        chart_guard=guard,
        alpha_is_star=True,
    )


def _outside_horizon_guard(r_plus: str) -> str:
    """Positive exactly when r > r_plus AND sin(theta) > 0.

    u + s - sqrt(u^2 + s^2) > 0 iff both u and s are positive, which avoids
    the both-negative hole a plain product guard would have.
    """
    u = f"(r - {r_plus})"
    return f"{u} + sin(theta) - sqrt({u}^2 + sin(theta)^2)"


def _parse_symmetric(g: list[list[Expr]]) -> list[list[Expr]]:
    """Share the upper-triangle expression objects across the diagonal."""
    for i in range(4):
        for j in range(i):
            g[i][j] = g[j][i]
    return g


# -- document ingestion --------------------------------------------------------

_ALLOWED_KEYS = {"name", "coords", "params", "metric", "potential", "alpha", "c", "k", "chart_guard"}


def load_model(document: str) -> SpacetimeModel:
    """Build a model from its JSON document (see README for the schema)."""
    try:
        doc = json.loads(document)
    except json.JSONDecodeError as err:
        raise ModelError(f"model document is not valid JSON: {err}") from None
    if not isinstance(doc, dict):
        raise ModelError("model document must be a JSON object")
    unknown = set(doc) - _ALLOWED_KEYS
    if unknown:
        raise ModelError(f"unknown model keys {sorted(unknown)}")
    for key in ("name", "coords", "metric"):
        if key not in doc:
            raise ModelError(f"model document missing required key {key!r}")

    name = doc["name"]
    coords = doc["coords"]
    if not (isinstance(coords, list) and len(coords) == 4 and all(isinstance(s, str) for s in coords)):
        raise ModelError("coords must be a list of 4 coordinate names")
    if len(set(coords)) != 4:
        raise ModelError("coordinate names must be distinct")
    params = doc.get("params", {})
    if not isinstance(params, dict) or not all(
        isinstance(k, str) and isinstance(v, (int, float)) for k, v in params.items()
    ):
        raise ModelError("params must map names to numbers")
    params = {k: float(v) for k, v in params.items()}

    metric_src = doc["metric"]
    if not (isinstance(metric_src, list) and len(metric_src) == 4 and all(
        isinstance(row, list) and len(row) == 4 for row in metric_src
    )):
        raise ModelError("metric must be a 4x4 array of expression strings")

    pot_src = doc.get("potential", ["0"] * 4)
    if pot_src in ([], None):
        pot_src = ["0"] * 4
    if not (isinstance(pot_src, list) and len(pot_src) == 4):
        raise ModelError("potential must be a list of 4 expression strings")

    g_exprs = [[None] * 4 for _ in range(4)]
    for i in range(4):
        for j in range(i, 4):
            g_exprs[i][j] = parse(_entry(metric_src[i][j]))
    probe_rng = np.random.default_rng(20230917)
    for i in range(4):
        for j in range(i):
            src = metric_src[i][j]
            if src in (None, ""):
                g_exprs[i][j] = g_exprs[j][i]
                continue
            lower = parse(_entry(src))
            if lower == g_exprs[j][i] or _numerically_equal(
                lower, g_exprs[j][i], coords, params, probe_rng
            ):
                g_exprs[i][j] = g_exprs[j][i]
            else:
                raise ModelError(f"metric entries ({i},{j}) and ({j},{i}) are not symmetric")

    a_exprs = [parse(_entry(src)) for src in pot_src]
    guard_src = doc.get("chart_guard")
    guard = parse(guard_src) if guard_src else None

    allowed = set(coords) | set(params) | {"pi"}
    for label, exprs in (("metric", [e for row in g_exprs for e in row]), ("potential", a_exprs)):
        for e in exprs:
            unbound = free_symbols(e) - allowed
            if unbound:
                raise ModelError(f"{label} expression uses unbound symbols {sorted(unbound)}")
    if guard is not None and free_symbols(guard) - allowed:
        raise ModelError("chart_guard uses unbound symbols")

    c = float(doc.get("c", 1.0))
    k = float(doc.get("k", 1.0))
    alpha_field = doc.get("alpha", "star")
    if alpha_field == "star":
        alpha, is_star = alpha_star(c, k), True
    elif isinstance(alpha_field, (int, float)):
        alpha, is_star = float(alpha_field), False
    else:
        raise ModelError('alpha must be a number or "star"')

    return SpacetimeModel(
        name=str(name),
        coords=tuple(coords),
        params=params,
        g_exprs=g_exprs,
        a_exprs=a_exprs,
        alpha=alpha,
        c=c,
        k=k,
        chart_guard=guard,
        alpha_is_star=is_star,
    )


def _entry(src) -> str:
    if isinstance(src, (int, float)):
        return repr(src)
    if not isinstance(src, str):
        raise ModelError(f"expression entries must be strings, got {type(src).__name__}")
    return src


def _numerically_equal(a: Expr, b: Expr, coords, params, rng) -> bool:
    for _ in range(5):
        env_vals = {name: rng.uniform(0.5, 2.0) for name in coords}
        env = {k: Jet.constant(v, 0, 4) for k, v in {**params, **env_vals}.items()}
        env["pi"] = Jet.constant(math.pi, 0, 4)
        try:
            va, vb = evaluate(a, env).value, evaluate(b, env).value
        except SingularEvaluationError:
            continue
        if abs(va - vb) > 1e-12 * (1 + abs(va) + abs(vb)):
            return False
    return True


def print_model(model: SpacetimeModel) -> str:
    """Canonical JSON document reproducing the model's evaluations."""
    doc = {
        "name": model.name,
        "coords": list(model.coords),
        "params": dict(model.params),
        "metric": [[print_expr(model.g_exprs[i][j]) for j in range(4)] for i in range(4)],
        "potential": [print_expr(e) for e in model.a_exprs],
        "alpha": "star" if model.alpha_is_star else model.alpha,
        "c": model.c,
        "k": model.k,
    }
    if model.chart_guard is not None:
        doc["chart_guard"] = print_expr(model.chart_guard)
    return json.dumps(doc, indent=2, sort_keys=True)


# -- jet-valued evaluation ------------------------------------------------------


def metric_jet(
    model: SpacetimeModel,
    x,
    order: int,
    nvars: int = 4,
    slots=(0, 1, 2, 3),
    check: bool = True,
) -> TensorValue:
    """Symmetric 4x4 jets of g_ij at x, seeded in base coordinates only."""
    x = np.asarray(x, dtype=float)
    if check:
        model.check_chart(x)
    env = model.coord_env(x, order, nvars, slots)
    comps = np.empty((4, 4), dtype=object)
    for i in range(4):
        for j in range(i, 4):
            comps[i, j] = comps[j, i] = evaluate(model.g_exprs[i][j], env)
    if check:
        det = np.linalg.det(np.array([[comps[i, j].value for j in range(4)] for i in range(4)]))
        if not det < 0.0:
            raise SingularEvaluationError(
                f"metric determinant {det} is not negative at {x.tolist()}", value=det
            )
    return TensorValue(comps, "ll", point=x)


def potential_jet(
    model: SpacetimeModel,
    x,
    order: int,
    nvars: int = 4,
    slots=(0, 1, 2, 3),
    check: bool = True,
) -> TensorValue:
    """Covariant potential components A_i as jets at x."""
    x = np.asarray(x, dtype=float)
    if check:
        model.check_chart(x)
    env = model.coord_env(x, order, nvars, slots)
    comps = np.empty(4, dtype=object)
    for i in range(4):
        comps[i] = evaluate(model.a_exprs[i], env)
    return TensorValue(comps, "l", point=x)


def metric_values(model: SpacetimeModel, x, check: bool = True) -> np.ndarray:
    """Plain float matrix g_ij(x)."""
    return metric_jet(model, x, order=0, check=check).values()


def signature_signs(model: SpacetimeModel, x) -> tuple[int, int]:
    """(number of positive, number of negative) metric eigenvalues at x."""
    eig = np.linalg.eigvalsh(metric_values(model, x))
    return int(np.sum(eig > 0)), int(np.sum(eig < 0))
