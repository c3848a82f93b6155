"""flowgames: simulator and analysis toolkit for budget-bounded follow-graph
formation games with social filtering.

Users pick whom to follow under an attention budget; subjects flow from their
producers along paths of interested (or, in expertise mode, strictly better
informed) relays. The package covers dissemination, selfish dynamics with
lexicographic potentials, equilibrium and price-of-anarchy analysis, metric
structure checks with a budgeted full-coverage construction, and deterministic
scenario generators behind a command-line front end.
"""

from .analysis import (
    EquilibriumReport,
    StructureCheckReport,
    UtilityBound,
    equilibrium_structure_check,
    find_transitivity_arc,
    global_welfare,
    homogeneous_benchmark,
    homogeneous_upper_bound,
    is_equilibrium,
    poa_ratio,
    strongly_connected_components,
)
from .dynamics import (
    DynamicsTrace,
    ExhaustiveCapError,
    Move,
    Verdict,
    detect_cycle,
    improving_move,
    potential_homogeneous,
    potential_metric,
    run_dynamics,
)
from .kernels import BACKEND as KERNEL_BACKEND
from .metric import (
    ConstructionError,
    MetricError,
    MetricInterest,
    MetricSpace,
    MetricViolation,
    StructureReport,
    build_optimal_configuration,
    check_metric,
    covering_radius_check,
    doubling_constant,
    greedy_cover,
    regularity_check,
    sparsity,
    structure_report,
)
from .model import (
    Configuration,
    FlowGame,
    User,
    ValidationError,
    instance_hash,
    interest_set,
    load_configuration,
    load_instance,
    serialize_configuration,
    serialize_instance,
)
from .propagation import (
    Dissemination,
    active_dissemination,
    disseminate,
    disseminate_expertise,
    user_utility,
    utility,
    utility_nearest,
)

__version__ = "0.1.0"
