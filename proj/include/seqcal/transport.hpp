#pragma once

#include "seqcal/core.hpp"
#include "seqcal/lp.hpp"

namespace seqcal {

struct LowerCaldistResult {
    double value = 0.0;
    TransportPlan plan;
    LpDiagnostics diag;
};

/// Smallest expected movement sum_t E_{q ~ D_t} |p_t - q| over calibrated
/// randomized reassignments D whose destinations are restricted to the grid
/// {0, 1/K, ..., 1}. Restricting to the grid overshoots the unrestricted
/// optimum by at most 2T/K.
///
/// Solved as a linear program over per-(prediction value, outcome) class
/// masses. Destinations enter the working set lazily: a solved working set
/// is optimal for the whole grid once every excluded grid point admits a
/// feasible dual multiplier, which is a closed-form interval test per point.
/// K <= 0 selects the default max(1000, 10 T).
LowerCaldistResult lower_caldist_grid(const Transcript& t, long K = 0);

/// Reorders each outcome class's mass monotonically: steps sorted by
/// prediction receive the class's pooled destination mass in ascending
/// destination order. Per-class per-destination totals are preserved (so
/// calibration is), and the movement cost never increases.
TransportPlan monotone_rearrange(const Transcript& t, const TransportPlan& plan);

struct RoundResult {
    CalibratedPredictions q;
    double cost = 0.0;  ///< sum_t |p_t - q_t|
};

/// Rounds a calibrated plan to a deterministic calibrated sequence: after
/// monotone rearrangement, steps whose row is degenerate keep their single
/// destination's pooled outcome frequency, and the (at most 2|S|) mixed steps
/// take their own outcome. Total movement exceeds the plan cost by less than
/// 4|S|.
RoundResult round_plan(const Transcript& t, const TransportPlan& plan);

/// Coarsens a calibrated plan onto at most m destinations: [0,1] splits into
/// m equal intervals and each interval's mass moves to its own outcome-mass
/// average (which stays inside the interval). Adds at most T/m to the cost
/// and preserves calibration exactly.
TransportPlan consolidate_general(const Transcript& t, const TransportPlan& plan, long m);

/// Per-interval mass bookkeeping used by the sparse consolidation: the
/// interval [lo, hi) between adjacent source values, the mass it receives
/// from either side split by outcome, and the signed calibration surplus of
/// each side's mass measured at the interval endpoint it entered from.
struct IntervalTally {
    double lo = 0.0, hi = 0.0;
    double unit_l0 = 0.0, unit_l1 = 0.0;  ///< mass from sources <= lo, by outcome
    double unit_r0 = 0.0, unit_r1 = 0.0;  ///< mass from sources >= hi, by outcome
    double delta_l = 0.0;                 ///< unit_l1 - (unit_l0 + unit_l1) * lo
    double delta_r = 0.0;                 ///< unit_r1 - (unit_r0 + unit_r1) * hi
};

/// Tallies a plan over the intervals between adjacent values of
/// {sources} + {0, 1}.
std::vector<IntervalTally> interval_tallies(const Transcript& t, const TransportPlan& plan);

/// Rebuilds a calibrated plan so its destination count depends only on the
/// number m of distinct predictions (at most 2m + 3), at a bounded price:
/// the result costs at most 20 times the input plan. Interval by interval,
/// coexisting outcome mass settles at the endpoints in calibrated proportion
/// and the leftover surplus moves to 0, to 1, or to a merge point chosen by
/// the sign pattern of the two endpoint surpluses.
TransportPlan consolidate_sparse(const Transcript& t, const TransportPlan& plan);

enum class ConsolidateMode { General, Sparse };

struct UpperBoundResult {
    double value = 0.0;
    CalibratedPredictions q;
    LpDiagnostics diag;
};

/// Full constructive pipeline: grid transport plan -> consolidation ->
/// rounding. General mode consolidates onto ceil(sqrt(T)) intervals and
/// guarantees value <= grid optimum + 6 sqrt(T) + 8; sparse mode keeps the
/// destination count tied to the number m of distinct predictions and
/// guarantees value <= 20 * grid optimum + 8m + 20.
UpperBoundResult caldist_upper_bound(const Transcript& t,
                                     ConsolidateMode mode = ConsolidateMode::General, long K = 0);

/// Pointwise check of the two endpoint-surplus inequalities that price the
/// merge strategies, for 0 <= alpha <= beta <= 1 and p in [0, 1]:
///
///   p|p-alpha| + (1-p)|p-beta|
///       <= 2 [ |p(1-alpha) - (1-p)beta| + (beta-alpha) min{p(1-alpha), (1-p)beta} ]
///
///   min{(1-p)|p-alpha| + p|p-beta|, (1-p)alpha + p(1-beta)}
///       <= 10 [ |(1-p)alpha - p(1-beta)| + (beta-alpha) min{(1-p)alpha, p(1-beta)} ]
///
/// Returns true when both right-minus-left slacks are >= -1e-12; the slacks
/// are written to the optional out parameters.
bool technical_inequalities_check(double alpha, double beta, double p,
                                  double* slack1 = nullptr, double* slack2 = nullptr);

}  // namespace seqcal
