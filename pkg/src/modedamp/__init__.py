"""2D incompressible Euler / Navier-Stokes on the torus with damping
removed from (or restricted to) a configurable set of Fourier modes:
spectral operators, exact mode-set combinatorics, Galerkin triad
dynamics, and a budget-verified damped solver.
"""

from .field import SpectralVelocity, SpectralVorticity, random_vorticity
from .lattice import Lattice
from .modesets import (
    DegeneracyReport,
    ModeSet,
    PairClass,
    classify_set,
    coupling_constant_estimate,
    find_star_witness,
    kappa_max,
    kappa_min,
    linf_growth_constant,
    pair_class,
)
from .operators import (
    DampingMask,
    biot_savart,
    curl,
    damped_laplacian,
    decompose,
    dissipation_rate,
    energy,
    energy_dissipation_rate,
    enstrophy,
    laplacian,
    nonlinear_term,
    undamped_laplacian,
)
from .solver import (
    BudgetLedger,
    SolverConfig,
    decay_experiment,
    run,
    stability_experiment,
    steady_fixture,
)
from .triads import OdeState, TriadTable, build_triads, rhs, step_rk4, support_tracker

__version__ = "0.1.0"

__all__ = [
    "BudgetLedger",
    "DampingMask",
    "DegeneracyReport",
    "Lattice",
    "ModeSet",
    "OdeState",
    "PairClass",
    "SolverConfig",
    "SpectralVelocity",
    "SpectralVorticity",
    "TriadTable",
    "biot_savart",
    "build_triads",
    "classify_set",
    "coupling_constant_estimate",
    "curl",
    "damped_laplacian",
    "decay_experiment",
    "decompose",
    "dissipation_rate",
    "energy",
    "energy_dissipation_rate",
    "enstrophy",
    "find_star_witness",
    "kappa_max",
    "kappa_min",
    "laplacian",
    "linf_growth_constant",
    "nonlinear_term",
    "pair_class",
    "random_vorticity",
    "rhs",
    "run",
    "stability_experiment",
    "steady_fixture",
    "step_rk4",
    "support_tracker",
    "undamped_laplacian",
]
