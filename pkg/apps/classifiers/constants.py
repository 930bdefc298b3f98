# Canonical Bayes threshold
DEFAULT_TAU = 0.5

# Laplace add-one smoothing when pooled counts become probabilities
LAPLACE_PSEUDOCOUNT = 1.0
