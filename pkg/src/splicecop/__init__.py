"""Supremum copulas with a prescribed curvilinear section."""
from .checks import (
    GridSurface,
    VerdictReport,
    Witness,
    check_quasi_copula,
    check_two_increasing,
    coincidence_criterion,
    copulahood_criterion,
    derivative_criterion,
    fill_grid,
    k_copula_condition,
    m_behavior_scan,
    phi_simple_check,
)
from .config import builtin_section, load_section, section_from_dict
from .constructions import EvalContext, SurfaceKind, context, surface
from .errors import (
    AdmissibilityError,
    BracketingError,
    ConfigError,
    ConvergenceError,
    DomainError,
    SolverError,
    SpliceCopError,
)
from .model import (
    CurveMap,
    SectionPair,
    interval_family_section,
    random_section,
    validate_curve,
    validate_section,
)
from .piecewise import Piece, PiecewiseFunction, evaluate
from .variation import VariationQuery, alternating_variation, total_variation

__version__ = "0.1.0"

__all__ = [
    "AdmissibilityError", "BracketingError", "ConfigError", "ConvergenceError",
    "CurveMap", "DomainError", "EvalContext", "GridSurface", "Piece", "PiecewiseFunction",
    "SectionPair", "SolverError", "SpliceCopError", "SurfaceKind", "VariationQuery",
    "VerdictReport", "Witness", "alternating_variation", "builtin_section",
    "check_quasi_copula", "check_two_increasing", "coincidence_criterion", "context",
    "copulahood_criterion", "derivative_criterion", "evaluate", "fill_grid",
    "interval_family_section", "k_copula_condition", "load_section", "m_behavior_scan",
    "phi_simple_check", "random_section", "section_from_dict", "surface",
    "total_variation", "validate_curve", "validate_section",
]
