"""Ground states of a Kirchhoff-type Gross-Pitaevskii functional in 2D."""

from ._core import (
    ConfigError,
    ConvergenceError,
    DomainError,
    GroundState,
    Grid,
    InfimumNotAttained,
    MinimizeResult,
    ModelParams,
    Profile,
    beta_limit,
    energy,
    fit_power_limit,
    gaussian,
    gn_defect,
    h1_distance,
    kinetic,
    mass,
    minimize,
    quartic,
    run,
    singular_moment,
    sweep,
    theorem2_limit,
    theorem3_limit,
    townes,
    upper_bound,
)

__version__ = "0.1.0"
