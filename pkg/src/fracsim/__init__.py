"""Simulation toolkit for fractional-order linear control systems.

Step responses of open- and closed-loop fractional differential equations
by an explicit Grunwald-Letnikov recurrence, Mittag-Leffler analytical
oracles, integer-order surrogate fitting, PD regulator design and
closed-loop quality metrics.
"""

from ._kernels import backend_name
from .analytic import SeriesBudget, SeriesDivergence, step_closed_fpd, step_closed_ipd, step_open
from .control import (
    DesignTargets,
    Metrics,
    PdController,
    close_loop,
    design_pd,
    response_metrics,
    stability_probe,
)
from .fitting import FitResult, FitSpec, fit_integer_second_order, nelder_mead, simulate_candidate
from .fode import (
    Fode,
    FracTerm,
    Grid,
    TimeSeries,
    plant,
    solve_step,
    unit_step,
    y1_legacy,
)
from .glops import GlCoeffs, MemoryPolicy, frac_diff, gl_coeffs, memory_length
from .specfun import MlQuery, MlResult, gamma, mittag_leffler

__version__ = "0.1.0"

__all__ = [
    "backend_name",
    "SeriesBudget", "SeriesDivergence", "step_open", "step_closed_ipd", "step_closed_fpd",
    "PdController", "DesignTargets", "Metrics", "design_pd", "close_loop",
    "response_metrics", "stability_probe",
    "FitSpec", "FitResult", "simulate_candidate", "nelder_mead", "fit_integer_second_order",
    "FracTerm", "Fode", "Grid", "TimeSeries", "plant", "unit_step", "solve_step", "y1_legacy",
    "GlCoeffs", "MemoryPolicy", "gl_coeffs", "memory_length", "frac_diff",
    "MlQuery", "MlResult", "gamma", "mittag_leffler",
]
