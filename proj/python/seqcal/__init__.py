"""Calibration measures for sequential binary prediction.

Exact and relaxed distances from a prediction sequence to perfect
calibration (ECE, smooth calibration error, calibration distance, lower
calibration distance), the constructive rounding pipeline that turns a
near-optimal transport plan into a calibrated prediction sequence, and
simulators for forecaster-vs-adversary games and the controlled random
walk.

All randomness is seeded: identical (seed, trial) arguments reproduce
identical results.
"""

from ._seqcal import (
    __version__,
    binomial_anticoncentration_check,
    caldist_exact,
    caldist_upper,
    compute_metric,
    derive_seed,
    ece,
    lower_caldist,
    play_walk,
    run_game,
    run_property_suite,
    smce,
)

__all__ = [
    "__version__",
    "binomial_anticoncentration_check",
    "caldist_exact",
    "caldist_upper",
    "compute_metric",
    "derive_seed",
    "ece",
    "lower_caldist",
    "play_walk",
    "run_game",
    "run_property_suite",
    "smce",
]
