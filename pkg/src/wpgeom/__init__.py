"""Weil-Petersson potentials, curvature and volume integrals from nilpotent-orbit data."""
from .degeneration import degeneration_order, gtilde_series, homogeneous_positivity_check, leading_term
from .errors import WPGError
from .model import (
    VHSModel, evaluate_omega, pairing, potential, potential_series, truncate, truncation_error_probe,
    untwist_check, validate,
)
from .modelfile import dump_model, load_model
from .monodromy import jordan_chevalley, unipotent_reduction
from .poincare import PoincareChart, annulus_chart, hessian_bound_probe, modular_chart, rho_eps
from .quadrature import eps_limit, integrate_form, log_integrability_probe, stokes_volume_1d
from .rational import rationalize
from .series import LogSeries
from .wpmetric import curvature_direct, hodge_flag, ricci, strominger_curvature, wp_metric

__version__ = "0.1.0"

__all__ = [
    "LogSeries", "PoincareChart", "VHSModel", "WPGError", "annulus_chart", "curvature_direct",
    "degeneration_order", "dump_model", "eps_limit", "evaluate_omega", "gtilde_series", "hessian_bound_probe",
    "hodge_flag", "homogeneous_positivity_check", "integrate_form", "jordan_chevalley", "leading_term",
    "load_model", "log_integrability_probe", "modular_chart", "pairing", "potential", "potential_series",
    "rationalize", "rho_eps", "ricci", "stokes_volume_1d", "strominger_curvature", "truncate",
    "truncation_error_probe", "unipotent_reduction", "untwist_check", "validate", "wp_metric",
]
