# Exponentiated-gradient learning rate
EG_ETA = 0.1

# log(0) guard for wealth accounting
WEALTH_FLOOR = 1e-300

SIMPLEX_TOLERANCE = 1e-12
