import math

# Tolerance for a probability table to be accepted by the TV distance
TV_SUM_TOLERANCE = 1e-9

# Weissman constants: alphabet sizes of (X, Y) and of X
LOG2_CELLS_XY = 4 * math.log(2.0)
LOG2_CELLS_X = 2 * math.log(2.0)

# Add-one smoothing of empirical null tables
NULL_SMOOTHING = 1.0

# Largest n + N for the exact product-law distance
STEP_TV_ENUMERATION_LIMIT = 10
