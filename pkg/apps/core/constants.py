# Tolerance for a probability table to sum to one
PROBABILITY_SUM_TOLERANCE = 1e-12

# Cell order of a joint table: (x, y)
CELL_ORDER = ((1, 1), (1, 0), (0, 1), (0, 0))

# Stream derivation words, mixed into the 64-bit child stream id
STREAM_WORDS = 2
