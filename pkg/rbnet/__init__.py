from rbnet.configuration import (
    Configuration,
    distance,
    juxtapose,
    node_distance,
    power,
    strict_distance,
)
from rbnet.execution import (
    Communication,
    Execution,
    ExecutionBuilder,
    Reconfiguration,
    replay,
    shuffle,
    trim_to_communications,
)
from rbnet.policy import (
    BoundingFunction,
    ConstraintPolicy,
    FConstrained,
    KBalanced,
    KConstrained,
    KLocallyConstrained,
    StronglyKConstrained,
    Unconstrained,
    parse_policy,
)
from rbnet.protocol import BroadcastProtocol, Transition, format_protocol, parse_protocol
from rbnet.saturation import (
    decide_coverability_unconstrained,
    decide_synchronization_unconstrained,
)
from rbnet.search import SearchBudget, SearchResult, search_synchronizing_execution
from rbnet.topology import check_topology
from rbnet.trace import dump_trace, load_trace
from rbnet.validate import potential_sequence, validate_execution

__all__ = [
    "BoundingFunction",
    "BroadcastProtocol",
    "Communication",
    "Configuration",
    "ConstraintPolicy",
    "Execution",
    "ExecutionBuilder",
    "FConstrained",
    "KBalanced",
    "KConstrained",
    "KLocallyConstrained",
    "Reconfiguration",
    "SearchBudget",
    "SearchResult",
    "StronglyKConstrained",
    "Transition",
    "Unconstrained",
    "check_topology",
    "decide_coverability_unconstrained",
    "decide_synchronization_unconstrained",
    "distance",
    "dump_trace",
    "format_protocol",
    "juxtapose",
    "load_trace",
    "node_distance",
    "parse_policy",
    "parse_protocol",
    "potential_sequence",
    "power",
    "replay",
    "search_synchronizing_execution",
    "shuffle",
    "strict_distance",
    "trim_to_communications",
    "validate_execution",
]
