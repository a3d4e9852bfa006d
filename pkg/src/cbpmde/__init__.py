"""
Minimum disparity estimation of the offspring law of a controlled branching process.

Modules
-------
dist       offspring pmfs, the Poisson family, control laws, contamination
cbp        family trees and their simulation
npmle      nonparametric offspring estimate from a family tree
disparity  LD, HD and NED disparities and their gradients
mde        minimum disparity estimator
robust     influence, bias and breakdown of the disparity functionals
mc         Monte Carlo experiments over contaminated models
cli        command-line front end
"""

__version__ = "0.1.0"

from .cbp import FamilyTree, TreeTotals, generations_for_rate, simulate, totals
from .disparity import DISPARITIES, HD, LD, NED, DisparitySpec, disparity_gradient, \
    disparity_value, get_disparity, pearson_residual
from .dist import ContaminationSpec, ControlSpec, Pmf, PoissonFamily, contaminate, \
    tau_m_contaminated
from .errors import (CBPError, DegenerateRatioError, DomainError, EmptySampleError,
                     GradientUndefinedError, InvalidContaminationError, NoFiniteValueError,
                     NoProgenitorsError, SubcriticalScheduleError, TreeFormatError,
                     UndefinedScoreError)
from .mde import MdeResult, mde_from_tree, minimize
from .npmle import npmle, npmle_exact

__all__ = [
    "__version__", "FamilyTree", "TreeTotals", "generations_for_rate", "simulate", "totals",
    "DISPARITIES", "LD", "HD", "NED", "DisparitySpec", "disparity_gradient",
    "disparity_value", "get_disparity", "pearson_residual", "ContaminationSpec",
    "ControlSpec", "Pmf", "PoissonFamily", "contaminate", "tau_m_contaminated",
    "MdeResult", "mde_from_tree", "minimize", "npmle", "npmle_exact",
    "CBPError", "DegenerateRatioError", "DomainError", "EmptySampleError",
    "GradientUndefinedError", "InvalidContaminationError", "NoFiniteValueError",
    "NoProgenitorsError", "SubcriticalScheduleError", "TreeFormatError", "UndefinedScoreError",
]
