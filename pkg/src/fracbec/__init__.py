"""Two-component condensates with the half-Laplacian: ground state, thresholds,
constrained minimization, the Gamma quotient, existence classification and sweeps."""

from .classify import Classification, classify, decide
from .constrained import MinimizeResult, SystemParams, energy, minimize, sandwich_check
from .errors import FracBECError
from .gamma import GammaEstimate, find_gamma_crossing, gamma_estimate, lipschitz_check
from .ground_state import GroundState, gn_quotient, load_or_solve, solve_Q
from .options import SolverOptions
from .potentials import PotentialSpec, parse_potential
from .spectral import Field, Grid1D
from .thresholds import Thresholds, compute_thresholds, gamma_bounds, kappa, kappa_inf

__version__ = "0.1.0"

__all__ = [
    "Classification", "Field", "FracBECError", "GammaEstimate", "Grid1D", "GroundState",
    "MinimizeResult", "PotentialSpec", "SolverOptions", "SystemParams", "Thresholds",
    "classify", "compute_thresholds", "decide", "energy", "find_gamma_crossing",
    "gamma_bounds", "gamma_estimate", "gn_quotient", "kappa", "kappa_inf", "lipschitz_check",
    "load_or_solve", "minimize", "parse_potential", "sandwich_check", "solve_Q",
]
