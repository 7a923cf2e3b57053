"""Lienard-family polynomial systems: rotation parameters, limit cycles and bifurcations."""

__version__ = "0.1.0"

from .errors import (
    BudgetExhausted,
    ConfigError,
    InputError,
    LienardError,
    NotBracketed,
    StepSizeUnderflow,
)
from .polysys import (
    ParameterAssignment,
    ParamPolynomial,
    PlanarSystem,
    build_canonical,
    build_cubic,
    build_lienard,
    build_rychkov,
    classify_infinity,
    find_equilibria,
)
from .integrate import IntegratorConfig, integrate, make_section, next_crossing
from .rotation import canonicalize, rotation_determinant, semidefinite_verdict
from .cycles import LimitCycle, find_cycles, fine_focus_order, return_map
from .bifurcate import continue_cycle, find_fold, hopf_scan, staircase_construct, staircase_place
from .cubic import analyze_distribution, sweep_distributions
from .config import load_description, parse_description, print_description
from .portrait import PortraitSpec, render_portrait
