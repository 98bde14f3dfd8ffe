"""Trajectory-tube variation of set-valued fields, induced time measures,
and delayed-control sensitivity.

The pieces compose bottom-up: geometry (compact set values and Hausdorff
distance), trajectory (arcs with moduli of continuity), fields (set-valued
and vector fields of time and state), variation (tube-constrained cumulative
variation), measure (discrete cell-increment measures and their refinement
limit), sensitivity (delay derivatives of a terminal cost through the
adjoint), plus a problem catalog, a verification sweep and a scenario CLI.
"""

from .errors import ConsistencyError, ConvergenceError, DomainError
from .geometry import Box, PointCloud, SetValue, Singleton, directed_distance, hausdorff_distance, singleton
from .trajectory import Partition, Trajectory, constant_trajectory, ramp_trajectory
from .fields import BatchEval, Field, Multifunction
from .variation import (
    EngineConfig,
    EtaResult,
    VariationContext,
    VariationProfile,
    check_endpoint_identities,
    check_increment_bound,
    check_monotone_nesting,
    discontinuity_scan,
    endpoint_regularize,
    eta,
    eta_delta,
    eta_delta_eps,
    eta_profile,
    eta_simple,
    one_sided_limit,
    partition_sum,
)
from .measure import (
    DiscreteMeasure,
    IntervalBoundChecker,
    MeasureLimit,
    TestFunction,
    default_test_functions,
    discrete_measure,
    integrate,
    interval_bound_check,
    partial_variation_measure,
)
from .sensitivity import (
    ControlSignal,
    ControlSystem,
    SensitivityReport,
    delayed_control,
    endpoint_atom,
    fd_oracle,
    filippov_check,
    output_J,
    sensitivity_derivative,
    simulate_costate,
    simulate_state,
    smooth_gradient,
)
from .verification import CheckResult, brute_force_total_variation, run_all

__version__ = "0.1.0"

__all__ = [
    "Box",
    "BatchEval",
    "CheckResult",
    "ConsistencyError",
    "ControlSignal",
    "ControlSystem",
    "ConvergenceError",
    "DiscreteMeasure",
    "DomainError",
    "EngineConfig",
    "EtaResult",
    "Field",
    "IntervalBoundChecker",
    "MeasureLimit",
    "Multifunction",
    "Partition",
    "PointCloud",
    "SensitivityReport",
    "SetValue",
    "Singleton",
    "TestFunction",
    "Trajectory",
    "VariationContext",
    "VariationProfile",
    "brute_force_total_variation",
    "check_endpoint_identities",
    "check_increment_bound",
    "check_monotone_nesting",
    "constant_trajectory",
    "default_test_functions",
    "delayed_control",
    "directed_distance",
    "discontinuity_scan",
    "discrete_measure",
    "endpoint_atom",
    "endpoint_regularize",
    "eta",
    "eta_delta",
    "eta_delta_eps",
    "eta_profile",
    "eta_simple",
    "fd_oracle",
    "filippov_check",
    "hausdorff_distance",
    "integrate",
    "interval_bound_check",
    "one_sided_limit",
    "output_J",
    "partial_variation_measure",
    "partition_sum",
    "ramp_trajectory",
    "run_all",
    "sensitivity_derivative",
    "simulate_costate",
    "simulate_state",
    "singleton",
    "smooth_gradient",
]
