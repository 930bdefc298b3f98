# Score function K(y) = sum_i exp(gamma * y_i)
GAMMA_INIT = 1.0
GAMMA_MIN = 0.01
GAMMA_MAX = 10.0

# AdaGrad on the per-step log e-value
ADAGRAD_LR = 0.1
ADAGRAD_EPS = 1e-12

# Null datasets per step
FAST_M = 32

# Exhaustive enumeration limits
ENUMERATION_DATA_BITS = 12  # 2n + N
ENUMERATION_TOTAL_BITS = 16  # plus N randomization bits for the Bayes rule
ENUMERATION_JOINT_OUTCOMES = 1_000_000
