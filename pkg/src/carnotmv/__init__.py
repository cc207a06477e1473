"""carnotmv: generalized L^p medians and mean-value asymptotics on
Carnot-group pseudoballs, with seeded Monte-Carlo oracles for every
closed form and a median-iteration Dirichlet solver."""

__version__ = "0.1.0"

from .ballquad import (
    Estimate,
    QuadratureSpec,
    SampleCloud,
    dirichlet_oracle,
    gamma0_numeric,
    integrate,
    sample_ball,
    sample_unit_ball,
)
from .asymptotics import (
    QuadraticModel,
    SweepReport,
    check_amvp,
    eval_quadratic,
    expansion_sweep,
    normalized_p_laplacian,
    quadratic_from_function,
)
from .errors import (
    CarnotError,
    DegenerateGradientError,
    DimensionMismatchError,
    DomainError,
    FeasibilityError,
    UnderResolvedBallError,
    UnsupportedModelError,
)
from .groups import (
    Euclidean,
    GroupModel,
    GroupPoint,
    Heisenberg,
    Step2,
    Stratification,
    dilate,
    distance,
    horizontal_frame,
    inverse,
    multiply,
    parse_group_spec,
    pseudonorm,
)
from .median import MedianConfig, characterization_residual, mu_p_ball, mu_p_samples
from .solver import (
    GridDomain,
    SolveReport,
    SolverConfig,
    StencilTable,
    build_stencils,
    builtin_boundary,
    relax_once,
    solve,
)
from .special import (
    ConstantReport,
    beta,
    c_constant,
    c_heisenberg1,
    c_step2,
    dirichlet_integral,
    expansion_coefficient,
    log_gamma,
    moment_I_closed,
    theta_prime_sequence,
    theta_sequence,
    theta_sequence_by_recursion,
)
