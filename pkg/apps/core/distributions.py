"""
Joint laws of a binary covariate X and a binary label Y.

A ``JointBernoulli`` is the full 2x2 table. It is built either from the
label-shift decomposition P(Y) P(X|Y) or from the concept-shift
decomposition P(X) P(Y|X), and can be decomposed back along either one.
"""
import math
from dataclasses import dataclass

import numpy as np

from core.constants import PROBABILITY_SUM_TOLERANCE
from core.exceptions import DomainError, UndefinedCorrelationError
from core.shift_regime import ShiftRegime


def _check_probability(name, value):
    if not (0.0 <= value <= 1.0) or math.isnan(value):
        raise DomainError(f"{name} must lie in [0, 1], got {value!r}.")
    return float(value)


@dataclass(frozen=True)
class JointBernoulli:
    p11: float
    p10: float
    p01: float
    p00: float

    def __post_init__(self):
        for name in ("p11", "p10", "p01", "p00"):
            object.__setattr__(self, name, _check_probability(name, getattr(self, name)))
        total = self.p11 + self.p10 + self.p01 + self.p00
        if abs(total - 1.0) > PROBABILITY_SUM_TOLERANCE:
            raise DomainError(f"Joint table sums to {total!r}, not 1.")

    # marginals
    @property
    def theta_y(self):
        return self.p11 + self.p01

    @property
    def theta_x(self):
        return self.p11 + self.p10

    def p_x1_given_y(self, y):
        if y:
            mass = self.theta_y
            return self.p11 / mass if mass > 0 else 0.0
        mass = 1.0 - self.theta_y
        return self.p10 / mass if mass > 0 else 0.0

    def p_y1_given_x(self, x):
        if x:
            mass = self.theta_x
            return self.p11 / mass if mass > 0 else 0.0
        mass = 1.0 - self.theta_x
        return self.p01 / mass if mass > 0 else 0.0

    def probability(self, x, y):
        if x:
            return self.p11 if y else self.p10
        return self.p01 if y else self.p00

    def cells(self):
        """Cell probabilities in (1,1), (1,0), (0,1), (0,0) order."""
        return np.array([self.p11, self.p10, self.p01, self.p00])

    def decompose(self, regime):
        """
        Parameters of this table along ``regime``:
            label shift   -> (theta_y, P(X=1|Y=0), P(X=1|Y=1))
            concept shift -> (theta_x, P(Y=1|X=0), P(Y=1|X=1))
        """
        if ShiftRegime.parse(regime) is ShiftRegime.LABEL_SHIFT:
            return self.theta_y, self.p_x1_given_y(0), self.p_x1_given_y(1)
        return self.theta_x, self.p_y1_given_x(0), self.p_y1_given_x(1)

    def shares_fixed_factor(self, other, regime, tol=1e-9):
        """
        True when ``other`` keeps the factor that ``regime`` holds fixed:
        P(X|Y) for label shift, P(X) for concept shift.
        """
        if ShiftRegime.parse(regime) is ShiftRegime.LABEL_SHIFT:
            return (abs(self.p_x1_given_y(0) - other.p_x1_given_y(0)) <= tol
                    and abs(self.p_x1_given_y(1) - other.p_x1_given_y(1)) <= tol)
        return abs(self.theta_x - other.theta_x) <= tol

    def to_dict(self, regime=None):
        if regime is None:
            return {"p11": self.p11, "p10": self.p10, "p01": self.p01, "p00": self.p00}
        regime = ShiftRegime.parse(regime)
        names = REGIME_PARAMETERS[regime]
        return dict(zip(names, self.decompose(regime)))


REGIME_PARAMETERS = {
    ShiftRegime.LABEL_SHIFT: ("theta_y", "p_x1_given_y0", "p_x1_given_y1"),
    ShiftRegime.CONCEPT_SHIFT: ("theta_x", "theta_y_given_x0", "theta_y_given_x1"),
}


def joint_from_label_shift(theta_y, p_x1_given_y0, p_x1_given_y1):
    """P_XY = P(Y) P(X|Y)."""
    theta_y = _check_probability("theta_y", theta_y)
    q0 = _check_probability("p_x1_given_y0", p_x1_given_y0)
    q1 = _check_probability("p_x1_given_y1", p_x1_given_y1)
    p11 = theta_y * q1
    p01 = theta_y - p11
    p10 = (1.0 - theta_y) * q0
    p00 = (1.0 - theta_y) - p10
    return JointBernoulli(p11=p11, p10=p10, p01=p01, p00=p00)


def joint_from_concept_shift(theta_x, theta_y_given_x0, theta_y_given_x1):
    """P_XY = P(X) P(Y|X)."""
    theta_x = _check_probability("theta_x", theta_x)
    r0 = _check_probability("theta_y_given_x0", theta_y_given_x0)
    r1 = _check_probability("theta_y_given_x1", theta_y_given_x1)
    p11 = theta_x * r1
    p10 = theta_x - p11
    p01 = (1.0 - theta_x) * r0
    p00 = (1.0 - theta_x) - p01
    return JointBernoulli(p11=p11, p10=p10, p01=p01, p00=p00)


def joint_from_regime(regime, params):
    """Build a table from a regime and its three parameters (mapping or sequence)."""
    regime = ShiftRegime.parse(regime)
    if isinstance(params, dict):
        params = [params[name] for name in REGIME_PARAMETERS[regime]]
    if regime is ShiftRegime.LABEL_SHIFT:
        return joint_from_label_shift(*params)
    return joint_from_concept_shift(*params)


def phi_correlation(dist):
    """Pearson correlation of the two bits (the phi coefficient)."""
    tx, ty = dist.theta_x, dist.theta_y
    scale = tx * (1.0 - tx) * ty * (1.0 - ty)
    if scale <= 0.0:
        raise UndefinedCorrelationError("phi correlation needs non-degenerate marginals of X and Y.")
    return (dist.p11 * dist.p00 - dist.p10 * dist.p01) / math.sqrt(scale)
