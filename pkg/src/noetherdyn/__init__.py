"""noetherdyn: a numerical laboratory for the symmetry content of learning rules.

Measures kinetic asymmetry and charge dynamics along optimizer
trajectories and verifies, at desk scale, that the implicit adaptive
learning rate induced by scale symmetry matches the explicit adaptive
factor of the recursive gradient-norm rule.
"""

from .closedform import (
    GradNormHistory,
    bn_rmsprop_map,
    g_schedule,
    r2_schedule,
    solve_bernoulli_check,
    steady_angular_speed,
    steady_radius,
)
from .continuous import (
    RmspropModel,
    SecondOrderSystem,
    Trajectory,
    eom_bregman,
    eom_bregman_euclidean,
    eom_modified,
    eom_noether_radial,
    eom_radial_angular,
    eom_rmsprop,
    integrate_rk4,
    integrate_rmsprop,
    radial_angular_state,
    rk4_solve,
    to_cartesian,
)
from .discrete import (
    OptimizerState,
    centered_velocities,
    step_gd_momentum_wd,
    step_mirror,
    step_nesterov,
    step_rmsprop,
)
from .errors import ContractError, DomainError, IntegrationError, SingularLossError
from .geometry import (
    BregmanSchedule,
    Euclidean,
    Metric,
    NegativeEntropy,
    QuadraticForm,
    bregman_divergence,
    kinetic_energy,
    lagrangian,
    natural_schedule,
    nesterov_schedule,
    sgdm_schedule,
)
from .losses import (
    Loss,
    NormalizedComposite,
    Quadratic,
    RadialWell,
    RayleighQuotient,
    SoftmaxCrossEntropy,
    TwoLayerChain,
    check_symmetry,
)
from .symmetry import (
    NoetherObservables,
    Rescale,
    Rotation,
    Scale,
    SymmetryTransform,
    Translation,
    delta_h,
    kinetic_asymmetry,
    kinetic_asymmetry_euclidean,
    noether_charge,
    noether_residual,
    table2_report,
)

__version__ = "0.1.0"
