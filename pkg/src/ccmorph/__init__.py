"""Coupling-constant metamorphosis of Hamiltonian systems, with numerical checks."""

from .core import Dual, PhasePoint, Rng, ScalarField, grad_phase, jet, sample_phase_points
from .errors import (
    CcmorphError,
    ConfigurationError,
    DegenerateMetamorphosisError,
    DomainError,
    MultipleRootsError,
    NoSolutionError,
    ReparameterizationError,
    StepSizeError,
    WindowError,
)
from .metamorph import (
    DerivedSystem,
    MetamorphosisRule,
    Observable,
    ParamSystem,
    Substitution,
    constant_shift_form,
    gradient_ratio_check,
    lift_observable,
    omega_field,
    solve_tilde,
)
from .dynamics import (
    Trajectory,
    TimeMap,
    coincidence,
    conservation_drift,
    integrate,
    match_trajectories,
    time_map,
)

from .algebra import (
    CLOSURE_FACTOR,
    LadderFrame,
    StructureConstants,
    algebra_residual,
    bracket_homomorphism_residual,
    gell_mann_su3,
    poisson_bracket,
    su3_integrals,
)
from . import catalog

__version__ = "0.1.0"

__all__ = [
    "CLOSURE_FACTOR",
    "CcmorphError",
    "ConfigurationError",
    "DegenerateMetamorphosisError",
    "DerivedSystem",
    "DomainError",
    "Dual",
    "LadderFrame",
    "MetamorphosisRule",
    "MultipleRootsError",
    "NoSolutionError",
    "Observable",
    "ParamSystem",
    "PhasePoint",
    "ReparameterizationError",
    "Rng",
    "ScalarField",
    "StepSizeError",
    "StructureConstants",
    "Substitution",
    "TimeMap",
    "Trajectory",
    "WindowError",
    "algebra_residual",
    "bracket_homomorphism_residual",
    "catalog",
    "coincidence",
    "conservation_drift",
    "constant_shift_form",
    "gell_mann_su3",
    "grad_phase",
    "gradient_ratio_check",
    "integrate",
    "jet",
    "lift_observable",
    "match_trajectories",
    "omega_field",
    "poisson_bracket",
    "sample_phase_points",
    "solve_tilde",
    "su3_integrals",
    "time_map",
]
