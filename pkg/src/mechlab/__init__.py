"""Variable-population mechanism laboratory.

Single-item allocation rules over bid profiles whose population can
change between scenarios, with payments derived from the allocation
curve, axiom checkers that return replayable witnesses, adversarial
deviation search, and numerical traces of the argument that the
second-price auction is the only rule passing every check at once.
"""

__version__ = "0.1.0"

from .attack import (
    Deviation,
    ScanResult,
    best_misreport,
    best_sybil_response,
    exploit_scan,
    misreport_utility,
    multi_sybil_response,
    replay_deviation,
    sybil_utility,
    truthful_side_utility,
)
from .axioms import (
    ALL_AXIOMS,
    NAMED_AXIOMS,
    AxiomReport,
    IndependenceMatrix,
    Permutation,
    Witness,
    check_incentive_compatibility,
    check_individual_rationality,
    check_monotonicity,
    check_non_wastefulness,
    check_sybil_proofness,
    check_symmetry,
    check_zero_bid_payment,
    independence_matrix,
    replay_witness,
    run_all_checks,
)
from .core import (
    DEFAULT_TOLERANCES,
    Allocation,
    BidProfile,
    DuplicateAgentError,
    MechanismLabError,
    Outcome,
    PaymentVector,
    ProfileError,
    ToleranceConfig,
    ValidationResult,
    replicate_profile,
    utility,
    validate_allocation,
)
from .mechanisms import (
    BUILTIN_NAMES,
    Mechanism,
    ProportionalParams,
    ReserveParams,
    allocation_integral,
    asymmetric_tiebreak_spa,
    builtin_suite,
    make_mechanism,
    myerson_payment,
    proportional_rule,
    register_mechanism,
    registered_names,
    reserve_price_spa,
    second_price_auction,
    share_curve,
    truthful_utility,
    uniform_lottery,
)
from .quadrature import (
    DEFAULT_QUADRATURE,
    MonotonicityViolation,
    QuadratureBudgetError,
    QuadratureConfig,
    QuadratureResult,
    bracket_monotone_integral,
)
from .report import ReportDocument, matrix_text_table, write_csv
from .search import ProfileSampler, SearchGrid
from .theorem import (
    ALL_TRACES,
    AveragingResult,
    IdentityPreconditionError,
    LemmaTrace,
    PreconditionError,
    TraceSample,
    induction_step_trace,
    induction_step_witness,
    payoff_floor_gap,
    payoff_floor_trace,
    replication_chain_check,
    replication_limit_trace,
    rival_monotonicity_trace,
    uniform_average_identity,
    uniform_average_trace,
)

__all__ = [
    "__version__",
    # core
    "MechanismLabError", "DuplicateAgentError", "ProfileError",
    "ToleranceConfig", "DEFAULT_TOLERANCES", "BidProfile", "Allocation",
    "PaymentVector", "Outcome", "ValidationResult", "utility",
    "validate_allocation", "replicate_profile",
    # quadrature
    "QuadratureConfig", "DEFAULT_QUADRATURE", "QuadratureResult",
    "MonotonicityViolation", "QuadratureBudgetError", "bracket_monotone_integral",
    # mechanisms
    "Mechanism", "ProportionalParams", "ReserveParams", "share_curve",
    "allocation_integral", "myerson_payment", "truthful_utility",
    "second_price_auction", "uniform_lottery", "proportional_rule",
    "reserve_price_spa", "asymmetric_tiebreak_spa", "BUILTIN_NAMES",
    "register_mechanism", "registered_names", "make_mechanism", "builtin_suite",
    # search
    "SearchGrid", "ProfileSampler",
    # axioms
    "ALL_AXIOMS", "NAMED_AXIOMS", "Permutation", "Witness", "AxiomReport",
    "check_non_wastefulness", "check_symmetry", "check_monotonicity",
    "check_zero_bid_payment", "check_incentive_compatibility",
    "check_sybil_proofness", "check_individual_rationality", "run_all_checks",
    "IndependenceMatrix", "independence_matrix", "replay_witness",
    # attack
    "Deviation", "ScanResult", "truthful_side_utility", "misreport_utility",
    "sybil_utility", "best_misreport", "best_sybil_response",
    "multi_sybil_response", "exploit_scan", "replay_deviation",
    # theorem
    "ALL_TRACES", "TraceSample", "LemmaTrace", "PreconditionError",
    "IdentityPreconditionError", "AveragingResult", "replication_limit_trace",
    "replication_chain_check", "payoff_floor_gap", "payoff_floor_trace",
    "rival_monotonicity_trace", "uniform_average_identity",
    "uniform_average_trace", "induction_step_witness", "induction_step_trace",
    # report
    "ReportDocument", "write_csv", "matrix_text_table",
]
