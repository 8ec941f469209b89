"""Resonant quasi-periodic equilibria of Frenkel-Kontorova chains.

Typical use::

    from resonant_fk import example_model, expand, residual
    sol = expand(example_model(), 3)
    residual(sol, 1e-3)
"""
from .auxiliary import PhaseSeries, depinning_range, lambda_zeros, phase_series
from .cohomology import (apply_first_difference, apply_second_difference, solve_first_difference,
                         solve_second_difference)
from .dynamics import (OrbitState, PhononSection, SkewMap, hull_phases, iterate, lyapunov_spectrum,
                       orbit_from_hull, phonon_gap, structure_checks)
from .errors import FKError
from .fourier import GridSampling, TrigSeries, evaluate, multiply, partial_average, pullback_by_unimodular
from .lindstedt import (EpsilonJet, LindstedtSolution, apply_symmetry, expand, normalize_phase, residual,
                        residual_of)
from .model import FKModel, example_model, example_potential
from .resonance import (IntrinsicData, MediumFrequency, Resonance, find_resonance, intrinsic_data,
                        subexponential_profile, unimodular_completion)
from .verify import cross_validate, grid_newton_solve, newton_family

__version__ = "0.1.0"

__all__ = [
    "EpsilonJet", "FKError", "FKModel", "GridSampling", "IntrinsicData", "LindstedtSolution",
    "MediumFrequency", "OrbitState", "PhaseSeries", "PhononSection", "Resonance", "SkewMap", "TrigSeries",
    "apply_first_difference", "apply_second_difference", "apply_symmetry", "cross_validate",
    "depinning_range", "evaluate", "example_model", "example_potential", "expand", "find_resonance",
    "grid_newton_solve", "hull_phases", "intrinsic_data", "iterate", "lambda_zeros", "lyapunov_spectrum",
    "multiply", "newton_family", "normalize_phase", "orbit_from_hull", "partial_average", "phase_series",
    "phonon_gap", "pullback_by_unimodular", "residual", "residual_of", "solve_first_difference",
    "solve_second_difference", "structure_checks", "subexponential_profile", "unimodular_completion",
]
