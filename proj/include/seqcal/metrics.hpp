#pragma once

#include "seqcal/core.hpp"
#include "seqcal/lp.hpp"

namespace seqcal {

/// Expected calibration error: sum over distinct prediction values of the
/// absolute per-value bias, sum_alpha |Delta_alpha|.
double ece(const Transcript& t);

struct SmceResult {
    double value = 0.0;
    LipschitzWitness witness;
    LpDiagnostics diag;
};

/// Smooth calibration error: the largest correlation sum_t f(p_t)(x_t - p_t)
/// over 1-Lipschitz test functions f bounded in [-1, 1]. Solved exactly as a
/// linear program over the values of f at the distinct predictions (adjacent
/// Lipschitz constraints suffice on a sorted grid); the optimizer is returned
/// as a piecewise-linear witness whose evaluation reproduces the value.
SmceResult smce(const Transcript& t);

struct TwoPointResult {
    double value = 0.0;
    LipschitzWitness witness;
};

/// Closed-form optimal test function for a two-value bias profile
/// (alpha, delta_a) and (beta, delta_b): equal signs take a constant sign
/// function with value |delta_a| + |delta_b|; opposite signs take the tent
/// anchored at the larger bias with value
/// |delta_a + delta_b| + |alpha - beta| * min(|delta_a|, |delta_b|).
TwoPointResult two_point_witness(double alpha, double beta, double delta_a, double delta_b);

struct CaldistResult {
    double value = 0.0;
    CalibratedPredictions certificate;
};

/// Exact distance to calibration: minimum of sum_t |p_t - q_t| over all
/// perfectly calibrated q. Every such minimizer groups the steps into blocks
/// sharing their outcome mean, so the oracle enumerates all set partitions of
/// the steps (restricted-growth-string order, first minimizer wins ties) and
/// prices each by its block means. Cost grows with the Bell numbers, hence
/// the hard cap on T (default 12). When the transcript carries decimal
/// literals the comparison runs in exact integer arithmetic.
CaldistResult caldist_exact(const Transcript& t, int cap = 12);

/// Groups steps by exact prediction value and replaces each group's
/// prediction by its outcome frequency. The result is perfectly calibrated
/// and moves each prediction by exactly the group's mean absolute bias, so
/// the total movement equals ece(t).
CalibratedPredictions bucket_mean_predictions(const Transcript& t);

}  // namespace seqcal
