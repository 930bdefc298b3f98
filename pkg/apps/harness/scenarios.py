"""
Built-in experiment catalog.

Label shift: theta_Y moves from 0.5 to 0.52 with P(X|Y) fixed, at low
(0.35, 0.65) and high (0.2, 0.9) correlation and N in {30, 135}.
Concept shift: P(Y|X) moves by +0.02 on both conditionals with theta_X = 0.5
fixed, at low (0.4, 0.7) and high (0.2, 0.85) correlation, N = 135. The
non-monotone variants move the conditionals in opposite directions.
"""
from core.distributions import joint_from_concept_shift, joint_from_label_shift
from core.shift_regime import ShiftRegime
from harness.config import ExperimentConfig
from harness.constants import CONV_PPI_ONE_SIDED

LABEL_SHIFT_CORRELATIONS = {
    "low_corr": (0.35, 0.65),
    "high_corr": (0.2, 0.9),
}
CONCEPT_SHIFT_CORRELATIONS = {
    "low_corr": (0.4, 0.7),
    "high_corr": (0.2, 0.85),
}
LABEL_SHIFT_THETA = (0.5, 0.52)
CONCEPT_SHIFT_THETA_X = 0.5
CONCEPT_SHIFT_STEP = 0.02


def _label_shift(corr, N, **kwargs):
    q0, q1 = LABEL_SHIFT_CORRELATIONS[corr]
    theta_null, theta_alt = LABEL_SHIFT_THETA
    return ExperimentConfig(
        regime=ShiftRegime.LABEL_SHIFT,
        null_dist=joint_from_label_shift(theta_null, q0, q1),
        alt_dist=joint_from_label_shift(theta_alt, q0, q1),
        N=N,
        **kwargs,
    )


def _concept_shift(corr, signs=(1, 1), **kwargs):
    r0, r1 = CONCEPT_SHIFT_CORRELATIONS[corr]
    step = CONCEPT_SHIFT_STEP
    return ExperimentConfig(
        regime=ShiftRegime.CONCEPT_SHIFT,
        null_dist=joint_from_concept_shift(CONCEPT_SHIFT_THETA_X, r0, r1),
        alt_dist=joint_from_concept_shift(CONCEPT_SHIFT_THETA_X, r0 + signs[0] * step, r1 + signs[1] * step),
        N=135,
        **kwargs,
    )


def paper_scenarios():
    """Name -> ExperimentConfig for every built-in scenario."""
    catalog = {}
    for corr in LABEL_SHIFT_CORRELATIONS:
        for N in (30, 135):
            name = f"label_shift_{corr}_N{N}"
            catalog[name] = _label_shift(corr, N, name=name,
                                         description=f"theta_Y 0.5 -> 0.52, {corr.replace('_', ' ')}, N={N}")
            name = f"label_shift_{corr}_N{N}_one_sided_ppi"
            catalog[name] = _label_shift(corr, N, name=name, conv_ppi_variant=CONV_PPI_ONE_SIDED,
                                         description="as above, baselines combined with one-sided PPI")
    for corr in CONCEPT_SHIFT_CORRELATIONS:
        name = f"concept_shift_{corr}"
        catalog[name] = _concept_shift(corr, name=name,
                                       description=f"P(Y|X) +0.02 on both conditionals, {corr.replace('_', ' ')}")
        name = f"concept_shift_{corr}_non_monotone"
        catalog[name] = _concept_shift(corr, signs=(1, -1), name=name,
                                       description=f"P(Y|X=0) +0.02, P(Y|X=1) -0.02, {corr.replace('_', ' ')}")
    return catalog


def get_scenario(name):
    return paper_scenarios().get(name)
