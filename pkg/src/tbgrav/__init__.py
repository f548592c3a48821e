"""Numerical tangent-bundle geometry engine for the unified description of
gravity and electromagnetism: Randers-type sprays, nonlinear connections,
tidal tensors, bundle curvature, fiber volume structure, charged-particle
worldlines, and a residual-check suite anchored on exact solutions."""

from .base_geom import (
    christoffel,
    classical_einstein_maxwell,
    classical_lorentz_rhs,
    covariant_divergence,
    em_stress_energy,
    faraday,
    maxwell_residuals,
    ricci,
    ricci_scalar,
    riemann,
)
from .bundle_geom import (
    BundleGeometry,
    BundlePoint,
    FiberField,
    adapted_derivative,
    b_scalar_and_hessian,
    berwald_coeffs,
    d_curvature,
    fiber_derivs_B,
    generalized_einstein,
    n_curvature,
    nonlinear_connection,
    ricci_decomposition,
    spray,
    spray_B,
    supporting_element,
    tidal_tensor,
)
from .dynamics import (
    DeviationState,
    Trajectory,
    WorldlineState,
    compare_classical,
    integrate_deviation,
    integrate_worldline,
    neighbor_oracle,
    norm_drift,
    randers_lagrangian,
    trajectory_csv,
    worldline_rhs,
)
from .errors import (
    ChartError,
    ConfigError,
    EngineError,
    EvaluationError,
    IntegrationError,
    ModelError,
    ParseError,
    SingularEvaluationError,
    UsageError,
)
from .exprlang import evaluate, free_symbols, parse, print_expr
from .jets import Jet, extract_derivative, jet_arith, jet_elementary, seed_variable
from .spacetime import (
    SpacetimeModel,
    alpha_star,
    catalog,
    load_model,
    metric_jet,
    potential_jet,
    print_model,
)
from .tensors import TensorValue
from .tm_metric import (
    FiberBall,
    FiberMetric,
    fiber_ball,
    fiber_integral,
    fiber_metric,
    horizontal_divergence,
    tm_integral,
)
from .verify import ResidualReport, conservation_residual, reports_to_csv, reports_to_json, run_suite

__version__ = "0.1.0"
