"""Transfer functions, local-polytope membership and boosted Bell-experiment chains."""

__version__ = "0.1.0"

from .behavior import (
    Behavior,
    TFDistribution,
    behavior_from_distribution,
    check_no_signalling,
    weak_signalling_probability,
)
from .localpoly import (
    BellInequality,
    LPVerdict,
    SymmetricSingletScenario,
    bell_expression,
    derive_symmetric_probabilities,
    expectation_from_behavior,
    local_membership,
)
from .quantum import singlet_behavior
from .scenario import ChainedScenario, anticorrelation_escape_check, detect_backward_causality
from .spacetime import (
    Event,
    IntervalClass,
    boost,
    classify_interval,
    generate_configuration,
    minimal_pigeonhole_n,
    pigeonhole_infeasible,
)
from .tfcore import (
    ExperimentShape,
    TransferFunction,
    classify_signalling,
    count_local_deterministic,
    enumerate_transfer_functions,
    is_product_form,
)
