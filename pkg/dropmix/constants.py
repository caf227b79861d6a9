# Droplet node kinds of a mixing graph
SOURCE, MIXER, SINK = "source", "mixer", "sink"
NODE_KINDS = (SOURCE, MIXER, SINK)

# Mixability verdict reasons
ALL_EQUAL = "AllEqual"
CONDITION_MC = "ConditionMC"
SMALL_N_RULE = "SmallNRule"
NON_DYADIC_MEAN = "NonDyadicMean"
MC_VIOLATION = "MCViolation"
N3_VIOLATION = "N3Violation"
N2_TRIVIAL = "N2Trivial"

# Invariant kinds maintained while mixing the normalized configuration
INV_I, INV_I_PRIME_5, INV_I_PRIME_6, POWER_OF_TWO = (
    "InvI",
    "InvIPrime5",
    "InvIPrime6",
    "PowerOfTwo",
)

# Pair tags returned by the pair finder
SAFE, NEAR_FINAL = "Safe", "NearFinal"

# Oracle statuses
REACHABLE = "Reachable"
UNREACHABLE_WITHIN_BOUND = "UnreachableWithinBound"
UNREACHABLE_PROVEN = "UnreachableProven"
BUDGET_EXCEEDED = "BudgetExceeded"

# Synthesis paths
PATH_WIRES = "wires"
PATH_DIRECT = "direct"
PATH_POWER_OF_TWO = "power-of-two"
PATH_LAMBDA = "lambda-mix"
PATH_POLY = "polynomial"
PATH_GREEDY = "greedy"

GAMMA = 2
POLY_THRESHOLD = 22
DEFAULT_MAX_STATES = 10**7
DEFAULT_EXTRA_BITS = 1
DEFAULT_STRATEGY = "Poly"

# CLI exit codes
EXIT_OK, EXIT_NEGATIVE, EXIT_USAGE, EXIT_INCONCLUSIVE, EXIT_INTERNAL = range(5)
