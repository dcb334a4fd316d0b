"""Photon subtraction and addition as quantum operations on truncated Fock spaces.

The library models the exact (unbounded) transformations ``rho -> a rho a^dag``
and ``rho -> a^dag rho a`` alongside their physically realizable damped
counterparts, and verifies how well and under which moment constraints the
damped conditional outputs reproduce the exact ones. See the README for the
claim catalog driven by the ``photonops`` command line tool.
"""

from .analytic import (
    BoundResult,
    SeriesValue,
    addition_bound,
    gamma_for_addition,
    gamma_for_subtraction,
    polylog,
    prop1_distance,
    prop1_thresholds,
    prop1_truncation_bound,
    subtraction_bound,
    variance_accuracy,
    zeta,
)
from .channels import (
    P_MIN,
    ConditionalOutput,
    KrausOperation,
    addition_composition_constant,
    apply,
    approx_add,
    approx_add_k,
    approx_subtract,
    approx_subtract_k,
    completeness_defect,
    compose,
    conditional,
    ideal_add,
    ideal_subtract,
    subtraction_composition_constant,
)
from .errors import (
    DimensionExhaustedError,
    EmptyConstraintError,
    PhotonOpsError,
    RegimeViolationError,
    TailMassWarning,
    TailToleranceError,
    TraceIncreasingWarning,
    TruncationOverflowError,
    ValidationError,
    VanishingProbabilityError,
    WitnessNotFoundError,
)
from .families import (
    ConstraintSet,
    EnergyAndSecondMomentConstraint,
    EnergyConstraint,
    Prop1Witness,
    SecondMomentConstraint,
    WitnessScan,
    ZetaState,
    find_prop1_witness,
    find_propN_witness,
    prop2_state,
    prop4_state,
    sample_constrained,
    zeta_state,
)
from .fock import (
    Band,
    CheckResult,
    DensityOperator,
    EnergyMoments,
    FockOperator,
    PureState,
    TruncatedFockSpace,
    ValidationReport,
    annihilation,
    creation,
    damping,
    density_from_pure,
    energy_moments,
    fock_state,
    mixture,
    number_operator,
    superposition,
    validate,
)
from .metrics import (
    BipartitePureState,
    DistanceReport,
    apply_first,
    contractivity_gap,
    partial_trace_second,
    pure_diff,
    purify,
    trace_distance,
    trace_norm,
    trace_norm_diff,
)

__version__ = "0.1.0"
