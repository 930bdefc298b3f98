IMPUTED = "imputed"
LR_Y = "lr_y"
LR_X = "lr_x"
LR_Y_GIVEN_X = "lr_y_given_x"
PPI = "ppi"
PPI_ONE_SIDED = "ppi_one_sided"
# the PPI bet with epsilon held at 0: labeled data only
PPI_LABELED_ONLY = "ppi_labeled_only"
CONV_BASELINES = "conv_baselines"
CONV_ALL = "conv_all"

ALL_PROCESSES = (
    IMPUTED, LR_Y, LR_X, LR_Y_GIVEN_X, PPI, PPI_ONE_SIDED, PPI_LABELED_ONLY, CONV_BASELINES, CONV_ALL,
)
COMBINED_PROCESSES = (CONV_BASELINES, CONV_ALL)

# likelihood-ratio baselines that test a law the regime holds fixed
# are left out of that regime
REGIME_LR_PROCESSES = {
    "label_shift": (LR_Y, LR_X),
    "concept_shift": (LR_Y, LR_Y_GIVEN_X),
}

NULL_MODE_EXACT = "exact"
NULL_MODE_ESTIMATED = "estimated"
NULL_MODES = (NULL_MODE_EXACT, NULL_MODE_ESTIMATED)

NULL_HYPOTHESES = ("simple", "composite")

CONV_PPI_TWO_SIDED = "two_sided"
CONV_PPI_ONE_SIDED = "one_sided"
CONV_PPI_VARIANTS = (CONV_PPI_TWO_SIDED, CONV_PPI_ONE_SIDED)

# experiment defaults: 15 labeled points per step, desk-scale run length
DEFAULT_n = 15
DEFAULT_N = 30
DEFAULT_STEPS = 300
DEFAULT_TRIALS = 200
DEFAULT_ALPHA = 0.05
DEFAULT_NULL_SAMPLES = 200
DEFAULT_DELTA = 0.05

# random stream roles inside one (trial, step)
ROLE_LABELED = 0
ROLE_UNLABELED = 1
ROLE_IMPUTED = 2
ROLE_PPI = 3
ROLE_PPI_ONE_SIDED = 4
ROLE_NULL_ESTIMATE = 5
ROLE_PPI_LABELED_ONLY = 6

# Monte-Carlo cross-check of the exact oracle
ORACLE_MC_CHUNK = 50_000
