#pragma once

#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace seqcal {

/// A finished prediction sequence: binary outcomes x_t and the probability
/// forecasts p_t that were issued for them, t = 1..T.
///
/// Invariants (enforced by validate(), called from the constructors):
///   - x and p have equal, nonzero length,
///   - every outcome is 0 or 1,
///   - every prediction lies in [0, 1].
///
/// p_text optionally carries the decimal literals the predictions were parsed
/// from (empty when the transcript was built programmatically). When present
/// it enables exact-rational arithmetic in the partition oracle and exact
/// decimal round-trips through the text format.
struct Transcript {
    std::vector<std::uint8_t> x;
    std::vector<double> p;
    std::vector<std::string> p_text;

    Transcript() = default;
    Transcript(std::vector<std::uint8_t> outcomes, std::vector<double> predictions);
    Transcript(std::vector<std::uint8_t> outcomes, std::vector<double> predictions,
               std::vector<std::string> literals);

    std::size_t size() const { return x.size(); }
    void validate() const;
};

/// Aggregate bias per distinct prediction value: for each value alpha that
/// appears in p, delta[i] = sum over steps predicting alpha of (x_t - alpha).
/// Values are grouped by exact floating-point equality and sorted ascending.
struct BiasProfile {
    std::vector<double> alpha;
    std::vector<double> delta;
    std::vector<std::int64_t> count;

    std::size_t size() const { return alpha.size(); }
};

/// A randomized reassignment of every step to destination values: row t is a
/// probability vector over the shared destination list.
///
/// Invariants: destinations strictly increasing within [0, 1]; each row sums
/// to 1 with nonnegative entries; rows.size() equals the transcript length.
struct TransportPlan {
    std::vector<double> destinations;
    std::vector<std::vector<double>> rows;

    std::size_t steps() const { return rows.size(); }
    std::size_t support() const { return destinations.size(); }
    void validate(std::size_t expected_steps, double tol = 1e-9) const;
};

/// A deterministic replacement sequence q together with an optional grouping
/// certificate: block[t] identifies the block whose outcome mean equals q[t].
/// An empty block vector means "group by equal q value".
struct CalibratedPredictions {
    std::vector<double> q;
    std::vector<std::int32_t> block;
};

/// Piecewise-linear test function on [0, 1]: 1-Lipschitz with values in
/// [-1, 1]. Knots are sorted; evaluation clamps outside the knot range
/// (constant extension keeps both properties).
struct LipschitzWitness {
    std::vector<double> knot_x;
    std::vector<double> knot_f;

    double operator()(double v) const;
    /// Largest violation of the Lipschitz/bound constraints (<= 0 means valid).
    double constraint_violation() const;
};

// ---------------------------------------------------------------------------
// Elementary operations on transcripts and plans
// ---------------------------------------------------------------------------

/// Group steps by exact prediction value and accumulate per-value bias.
BiasProfile bias_profile(const Transcript& t);

/// Prefix sums S_t = sum_{i<=t} (x_i - p_i), one entry per step.
std::vector<double> running_bias(const Transcript& t);

/// Largest per-group bias magnitude when steps are grouped by exact q value:
/// max over distinct values v of |sum_{t: q_t = v} (x_t - q_t)|.
double calibration_residual(const std::vector<std::uint8_t>& x, const std::vector<double>& q);

/// True when every group bias is within tol of zero.
bool calibration_check(const std::vector<std::uint8_t>& x, const std::vector<double>& q,
                       double tol = 1e-9);

/// Largest per-destination bias magnitude of a transport plan:
/// max over destinations s of |sum_t (x_t - s) * rows[t][s]|.
double plan_calibration_residual(const Transcript& t, const TransportPlan& plan);

bool plan_calibration_check(const Transcript& t, const TransportPlan& plan, double tol = 1e-9);

/// Expected movement cost sum_t sum_s rows[t][s] * |p_t - s|.
double plan_cost(const Transcript& t, const TransportPlan& plan);

/// L1 distance between two prediction vectors of equal length.
double l1_distance(const std::vector<double>& a, const std::vector<double>& b);

// ---------------------------------------------------------------------------
// Text serialization
//
// Transcript files hold one step per line: "<outcome> <prediction>".
// Plan files start with a "destinations:" header followed by one step per
// line: "<outcome> <prediction> <mass per destination...>".
// '#' starts a comment; blank lines are skipped. Values are written with
// shortest round-trip formatting, and predictions parsed from a file keep
// their original literals so writing them back is byte-exact.
// ---------------------------------------------------------------------------

void write_transcript(std::ostream& os, const Transcript& t);
Transcript read_transcript(std::istream& is);
void write_transcript_file(const std::string& path, const Transcript& t);
Transcript read_transcript_file(const std::string& path);

void write_plan(std::ostream& os, const Transcript& t, const TransportPlan& plan);
/// Reads a combined transcript+plan file; fills both output arguments.
void read_plan(std::istream& is, Transcript& t, TransportPlan& plan);

/// Shortest decimal string that parses back to exactly the same double.
std::string format_double(double v);

}  // namespace seqcal
