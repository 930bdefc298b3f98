EXIT_OK = 0
EXIT_USAGE = 1  # usage, config, domain and size errors
EXIT_ACCEPTANCE = 2
EXIT_INTERNAL = 3

# digits printed for exact expectations
ORACLE_DIGITS = 9
BOUND_DIGITS = 15

ORACLE_KINDS = ("imputed", "ppi", "expected-k", "population")
# kinds whose exact value must equal 1
VALIDITY_ORACLES = ("imputed", "ppi", "population")

# default null tables for the oracle command, in regime parameters
ORACLE_DEFAULT_NULLS = {
    "label_shift": (0.5, 0.35, 0.65),
    "concept_shift": (0.5, 0.4, 0.7),
}
