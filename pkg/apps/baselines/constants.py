import math

# Krichevsky-Trofimov pseudo-count
KT_PSEUDOCOUNT = 0.5

# Online Newton step for the PPI betting fraction
ONS_A0 = 1.0
ONS_SCALE = 2.0 / (2.0 - math.log(3.0))
LAMBDA_MAX = 0.5
LAMBDA_MIN_TWO_SIDED = -0.5
LAMBDA_MIN_ONE_SIDED = 0.0

# ONS gradient: "centered" uses (w - theta0), "literal" uses w
ONS_GRADIENTS = ("centered", "literal")

# epsilon needs this many past pairs; smaller histories bet with epsilon = 0
PPI_MIN_HISTORY = 2
PPI_VARIANCE_FLOOR = 1e-12

# Enumeration limit for the exact PPI oracle (unlabeled slice length)
PPI_ENUMERATION_SLICE = 8
