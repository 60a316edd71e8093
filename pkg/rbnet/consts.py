import os

DEBUG = os.getenv("DEBUG", False)

# search budgets
DEFAULT_BUDGET_STATES = int(os.getenv("RBNET_BUDGET_STATES") or 5_000_000)
DEFAULT_BUDGET_DEPTH = int(os.getenv("RBNET_BUDGET_DEPTH") or 200)
DEFAULT_THREADS = int(os.getenv("RBNET_THREADS") or 1)

# exhaustive reconfiguration enumeration is only attempted up to this many nodes
UNCONSTRAINED_ENUMERATION_LIMIT = 6

# canonical form falls back to a plain encoding past this refinement class size
CANONICAL_CLASS_LIMIT = 8
CANONICAL_PERMUTATION_LIMIT = 40_320

DEFAULT_TOKEN_CAP = 6

SINK_STATE = "sink"

# control places of compiled nets
PSTART = "pstart"
PSIMUL = "psimul"
PCHECK = "pcheck"
PEND = "pend"

EXIT_HOLDS = 0
EXIT_FAILS = 1
EXIT_USAGE = 2
EXIT_BUDGET = 3

NET_FORMATS = ("pnml", "net")
