#pragma once

#include <cstdint>
#include <iosfwd>
#include <map>
#include <string>
#include <vector>

#include "seqcal/core.hpp"
#include "seqcal/rng.hpp"

namespace seqcal {

// ---------------------------------------------------------------------------
// Random instances (shared by the property suites and the test binaries)
// ---------------------------------------------------------------------------

/// Random transcript of length T: fair outcome bits; predictions drawn
/// uniformly, from a small shared value pool (so exact repeats exercise the
/// grouping paths), or pinned to the endpoints {0, 1} for the matching bit.
Transcript random_transcript(long T, Rng& rng);

struct PlanInstance {
    Transcript t;
    TransportPlan plan;
};

/// Random calibrated transport plan together with its transcript. Built from
/// blocks with rational destinations a/b (b <= max_denom, so each block's
/// outcome mean hits its destination exactly), then stirred with
/// calibration-preserving pairwise mass swaps so genuinely mixed rows occur.
/// Destination count <= max_support; length <= max_T.
PlanInstance random_calibrated_plan(long max_T, int max_support, Rng& rng, int max_denom = 8);

// ---------------------------------------------------------------------------
// Metric registry
// ---------------------------------------------------------------------------

/// Computes a named metric on a transcript. Accepted names:
///   "ece", "smce", "caldist-exact", "lower-caldist[:<K>]",
///   "caldist-upper:general", "caldist-upper:sparse".
/// grid_K (0 = default) feeds the transport metrics when the name carries no
/// explicit K; oracle_cap guards the partition oracle.
double compute_metric(const std::string& name, const Transcript& t, long grid_K = 0,
                      int oracle_cap = 12);

/// True when the name would be accepted by compute_metric.
bool metric_name_valid(const std::string& name);

// ---------------------------------------------------------------------------
// Experiments
// ---------------------------------------------------------------------------

struct ExperimentSpec {
    std::string name = "experiment";
    std::vector<long> horizons;          ///< the T sweep
    long trials = 1;
    std::uint64_t seed = 0;
    std::string forecaster = "constant:0.5";
    std::string adversary = "bernoulli:0.5";
    std::vector<std::string> metrics;
    long grid_K = 0;                     ///< 0 = per-metric default
    int oracle_cap = 12;
    std::string out_path;                ///< empty = no file written
    std::string format = "csv";          ///< "csv" | "json"

    /// Throws invalid_argument describing the first violated constraint
    /// (empty sweep, unknown metric, exact oracle beyond its cap, ...).
    void validate() const;
};

/// Parses the flat key = value configuration grammar:
///   - one `key = value` pair per line, split at the first '=';
///   - '#' starts a comment (anywhere in the line); blank lines are skipped;
///   - keys and values are whitespace-trimmed; list values are comma-separated;
///   - keys: name, T, trials, seed, forecaster, adversary, metrics, grid-K,
///     oracle-cap, out, format. Unknown keys are errors.
ExperimentSpec parse_spec(std::istream& is);
ExperimentSpec parse_spec_file(const std::string& path);

struct ReportRow {
    std::string experiment;
    long T = 0;
    std::string metric;
    long trials = 0;
    double mean = 0.0;
    double stderr_value = 0.0;  ///< standard error of the mean (0 when trials == 1)
};

struct SlopeFit {
    double slope = 0.0;
    double intercept = 0.0;  ///< log y = intercept + slope * log x
    double residual = 0.0;   ///< root-mean-square residual in log space
    int points = 0;
};

/// Least-squares line through (log x_i, log y_i). Requires >= 3 distinct
/// positive x values and positive y values.
SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y);

struct ScalingReport {
    std::vector<ReportRow> rows;            ///< horizon-major, metric-minor
    std::map<std::string, SlopeFit> slopes; ///< per metric, when >= 3 distinct horizons fit
};

/// Runs the sweep: for every horizon, `trials` games of forecaster vs
/// adversary on per-trial derived seeds, every requested metric on every
/// transcript. Trials run in parallel (capped by the CALIB_THREADS
/// environment variable) but are aggregated in ascending trial order, so the
/// report — and any file written for it — is byte-identical across runs and
/// thread counts.
ScalingReport run_experiment(const ExperimentSpec& spec);

void write_csv(std::ostream& os, const ScalingReport& report);
void write_json(std::ostream& os, const ExperimentSpec& spec, const ScalingReport& report);

/// Writes the report to spec.out_path in spec.format (no-op when the path is
/// empty). Throws on an unwritable path.
void write_report_file(const ExperimentSpec& spec, const ScalingReport& report);

// ---------------------------------------------------------------------------
// Statistical and property checks
// ---------------------------------------------------------------------------

struct BinomialCheck {
    double frequency = 0.0;
    bool pass = false;
};

/// Monte Carlo estimate of P(|X - n/2| >= sqrt(n)/10) for X ~ Binomial(n, 1/2);
/// pass = frequency >= threshold. The event keeps constant probability
/// ~0.84 as n grows (the central limit theorem sends the threshold to 0.2
/// standard deviations), which is the anti-concentration fact the lower-bound
/// construction leans on.
BinomialCheck binomial_anticoncentration_check(long n, long samples, Rng& rng,
                                               double threshold = 0.74);

struct SuiteResult {
    std::string suite;
    long cases = 0;
    long failures = 0;
    std::vector<std::string> counterexamples;  ///< first few failures, verbatim

    bool pass() const { return failures == 0 && cases > 0; }
};

/// Runs one named randomized invariant suite:
///   "sandwich"      — two-sided ordering of the four measures on random
///                     instances (T <= 10, K = 1000), 500 cases;
///   "lipschitz"     — measure continuity under prediction perturbation,
///                     500 cases;
///   "rounding"      — plan-to-deterministic rounding bound, 200 plans;
///   "consolidation" — destination-count/cost bounds of both consolidations,
///                     200 instances;
///   "inequalities"  — the two pointwise surplus inequalities, 10^6 triples.
/// budget_scale scales the case count (minimum 1); unknown names throw.
SuiteResult run_property_suite(const std::string& name, std::uint64_t seed,
                               double budget_scale = 1.0);

/// The suite names accepted by run_property_suite, in documentation order.
const std::vector<std::string>& property_suite_names();

}  // namespace seqcal
