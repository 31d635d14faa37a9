"""Optimal stopping with costly inspection: policies, prophets and worst-case families."""

__version__ = "0.1.0"

from .distributions import (
    DiscreteDistribution,
    ReservationValue,
    expected_shortfall,
    make_distribution,
    point_mass,
    reservation_value,
    sample,
    sample_array,
)
from .engine import (
    DPPolicy,
    DPResult,
    Estimate,
    Trace,
    dp_optimal_value,
    exact_eval,
    exact_oracle_value,
    make_oracle,
    make_policy,
    monte_carlo,
    ratio_of_means,
    ratio_report,
    run_trace,
    simulate_paired,
    ski_rental_harness,
)
from .errors import (
    ComputationError,
    IllegalAction,
    InstanceFormatError,
    LengthMismatch,
    NegativeProbability,
    NegativeValue,
    NotDecreasing,
    NotPerfectSquare,
    ProbabilitySumMismatch,
    ProphetBoxError,
    RandomizedPolicyUnsupported,
    StateSpaceTooLarge,
    UnsupportedInstance,
    UsageError,
    VariantMismatch,
)
from .io import emit_instance, load_instance, parse_instance, save_instance
from .model import (
    Box,
    ClosedFormReport,
    Instance,
    Objective,
    VariantSpec,
    all_variants,
    closed_form_example32,
    closed_form_example41,
    closed_form_prophet_half,
    closed_form_tightness,
    gen_example_max_cost,
    gen_example_min_orderselect,
    gen_no_cost_instance,
    gen_prophet_half,
    gen_tightness_instance,
    geom_tail,
    geom_weighted_sum,
    random_instance,
)
from .oracles import (
    WeakProphetPolicy,
    db_ski_offline_opt,
    expected_prophet,
    prophet_payoff,
    ski_prophet,
)
from .policies import (
    BreakEvenPolicy,
    Open,
    OpenAllPolicy,
    SkiRentalPolicy,
    StopSelect,
    ThresholdPolicy,
    WeitzmanPolicy,
    db_ski_rental_costs,
    db_ski_rental_expected_cost,
)
