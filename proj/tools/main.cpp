// seqcal — calibration measures for sequential binary prediction.
//
// Subcommands:
//   simulate  play one forecaster-vs-adversary game, print the transcript
//             (and requested metrics as trailing comment lines)
//   sweep     Monte Carlo sweep over horizons; aggregated CSV/JSON report
//   verify    randomized invariant suites + binomial anti-concentration check
//   metrics   compute metrics on a transcript file
//
// The CALIB_THREADS environment variable caps trial-level parallelism.

#include <cstdio>
#include <iostream>
#include <string>
#include <vector>

#include "CLI11.hpp"
#include "seqcal/harness.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/simulate.hpp"
#include "seqcal/transport.hpp"

namespace {

void print_metric_lines(const seqcal::Transcript& tr, const std::vector<std::string>& names,
                        long grid_K, int oracle_cap, const char* prefix) {
    for (const auto& name : names) {
        const double v = seqcal::compute_metric(name, tr, grid_K, oracle_cap);
        std::printf("%s%s = %.12g\n", prefix, name.c_str(), v);
    }
}

int run_simulate(long T, std::uint64_t seed, std::uint64_t trial, const std::string& forecaster,
                 const std::string& adversary, const std::vector<std::string>& metric_names,
                 long grid_K, int oracle_cap, const std::string& out_path) {
    seqcal::GameConfig cfg;
    cfg.T = T;
    cfg.forecaster = forecaster;
    cfg.adversary = adversary;
    cfg.seed = seed;
    cfg.trial = trial;
    const seqcal::Transcript tr = seqcal::run_game(cfg);
    if (out_path.empty()) {
        seqcal::write_transcript(std::cout, tr);
    } else {
        seqcal::write_transcript_file(out_path, tr);
        std::fprintf(stderr, "transcript written to %s\n", out_path.c_str());
    }
    // Metric lines start with '#', so the full stdout still parses as a
    // transcript file.
    print_metric_lines(tr, metric_names, grid_K, oracle_cap, "# ");
    return 0;
}

int run_sweep(const seqcal::ExperimentSpec& spec) {
    const seqcal::ScalingReport report = seqcal::run_experiment(spec);
    if (spec.format == "json") {
        seqcal::write_json(std::cout, spec, report);
    } else {
        seqcal::write_csv(std::cout, report);
        for (const auto& [metric, fit] : report.slopes) {
            std::fprintf(stderr, "# slope %s = %.6g (intercept %.6g, rms residual %.3g, %d points)\n",
                         metric.c_str(), fit.slope, fit.intercept, fit.residual, fit.points);
        }
    }
    if (!spec.out_path.empty()) {
        std::fprintf(stderr, "report written to %s\n", spec.out_path.c_str());
    }
    return 0;
}

int run_verify(const std::vector<std::string>& suites, std::uint64_t seed, double scale,
               bool skip_binomial, long bin_n, long bin_samples, double bin_threshold) {
    bool all_ok = true;
    for (const auto& name : suites) {
        const seqcal::SuiteResult r = seqcal::run_property_suite(name, seed, scale);
        std::printf("[%s] %s: %ld cases, %ld failures\n", r.pass() ? "PASS" : "FAIL",
                    r.suite.c_str(), r.cases, r.failures);
        for (const auto& ce : r.counterexamples) std::printf("    %s\n", ce.c_str());
        all_ok = all_ok && r.pass();
    }
    if (!skip_binomial) {
        seqcal::Rng rng(seqcal::derive_seed(seed, 0, 201));
        const seqcal::BinomialCheck bc =
            seqcal::binomial_anticoncentration_check(bin_n, bin_samples, rng, bin_threshold);
        std::printf("[%s] binomial-anticoncentration: n=%ld samples=%ld frequency=%.6g (need >= %g)\n",
                    bc.pass ? "PASS" : "FAIL", bin_n, bin_samples, bc.frequency, bin_threshold);
        all_ok = all_ok && bc.pass;
    }
    return all_ok ? 0 : 1;
}

int run_metrics(const std::string& in_path, const std::vector<std::string>& metric_names,
                long grid_K, int oracle_cap) {
    const seqcal::Transcript tr = seqcal::read_transcript_file(in_path);
    print_metric_lines(tr, metric_names, grid_K, oracle_cap, "");
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"calibration measures, the calibrated-rounding pipeline, and forecasting-game experiments"};
    app.require_subcommand(1);
    app.set_version_flag("--version", "seqcal 0.1.0");

    // --- simulate ---
    auto* sim = app.add_subcommand("simulate", "play one game and print its transcript");
    long sim_T = 0;
    std::uint64_t sim_seed = 0, sim_trial = 0;
    std::string sim_forecaster = "constant:0.5", sim_adversary = "bernoulli:0.5", sim_out;
    std::vector<std::string> sim_metrics;
    long sim_grid_K = 0;
    int sim_oracle_cap = 12;
    sim->add_option("--T", sim_T, "game horizon")->required()->check(CLI::PositiveNumber);
    sim->add_option("--seed", sim_seed, "master seed (default 0)");
    sim->add_option("--trial", sim_trial, "trial index for stream derivation (default 0)");
    sim->add_option("--forecaster", sim_forecaster,
                    "forecaster spec: constant[:v] | fixed-bias[:eps] | adaptive-bias");
    sim->add_option("--adversary", sim_adversary,
                    "adversary spec: bernoulli[:q] | fixed:<bits> | early-stop[:c[:w]]");
    sim->add_option("--metrics", sim_metrics,
                    "metrics to append as comments: ece, smce, caldist-exact, lower-caldist[:K], "
                    "caldist-upper:general|sparse")
        ->delimiter(',');
    sim->add_option("--grid-K", sim_grid_K, "grid resolution for transport metrics (0 = default)");
    sim->add_option("--oracle-cap", sim_oracle_cap, "horizon cap for the exact partition oracle");
    sim->add_option("--out", sim_out, "write the transcript to this file instead of stdout");

    // --- sweep ---
    auto* sweep = app.add_subcommand("sweep", "Monte Carlo sweep over horizons with aggregation");
    std::string sweep_config, sweep_name, sweep_forecaster, sweep_adversary, sweep_out, sweep_format;
    std::vector<long> sweep_T;
    std::vector<std::string> sweep_metrics;
    long sweep_trials = 0, sweep_grid_K = 0;
    std::uint64_t sweep_seed = 0;
    int sweep_oracle_cap = 0;
    sweep->add_option("--config", sweep_config,
                      "flat key = value config file; flags override its entries");
    sweep->add_option("--name", sweep_name, "experiment name for the report rows");
    auto* opt_T = sweep->add_option("--T", sweep_T, "horizons, comma separated")->delimiter(',');
    auto* opt_trials = sweep->add_option("--trials", sweep_trials, "trials per horizon");
    auto* opt_seed = sweep->add_option("--seed", sweep_seed, "master seed");
    auto* opt_fc = sweep->add_option("--forecaster", sweep_forecaster, "forecaster spec");
    auto* opt_adv = sweep->add_option("--adversary", sweep_adversary, "adversary spec");
    auto* opt_metrics =
        sweep->add_option("--metrics", sweep_metrics, "metric names, comma separated")->delimiter(',');
    auto* opt_grid = sweep->add_option("--grid-K", sweep_grid_K, "grid resolution (0 = default)");
    auto* opt_cap = sweep->add_option("--oracle-cap", sweep_oracle_cap, "exact oracle horizon cap");
    auto* opt_out = sweep->add_option("--out", sweep_out, "also write the report to this file");
    auto* opt_format = sweep->add_option("--format", sweep_format, "csv | json")
                           ->check(CLI::IsMember({"csv", "json"}));

    // --- verify ---
    auto* verify = app.add_subcommand("verify", "run randomized invariant suites");
    std::vector<std::string> verify_suites = seqcal::property_suite_names();
    std::uint64_t verify_seed = 0;
    double verify_scale = 1.0, verify_threshold = 0.74;
    long verify_bin_n = 4096, verify_bin_samples = 100000;
    bool verify_skip_binomial = false;
    verify->add_option("--suites", verify_suites,
                       "suites to run (default: sandwich,lipschitz,rounding,consolidation,inequalities)")
        ->delimiter(',');
    verify->add_option("--seed", verify_seed, "master seed (default 0)");
    verify->add_option("--scale", verify_scale, "budget scale factor (1 = full budgets)")
        ->check(CLI::PositiveNumber);
    verify->add_option("--binomial-n", verify_bin_n, "n for the anti-concentration check");
    verify->add_option("--binomial-samples", verify_bin_samples, "Monte Carlo sample count");
    verify->add_option("--binomial-threshold", verify_threshold, "required frequency");
    verify->add_flag("--skip-binomial", verify_skip_binomial, "skip the anti-concentration check");

    // --- metrics ---
    auto* met = app.add_subcommand("metrics", "compute metrics on a transcript file");
    std::string met_in;
    std::vector<std::string> met_metrics = {"ece", "smce"};
    long met_grid_K = 0;
    int met_oracle_cap = 12;
    met->add_option("file", met_in, "transcript file (one '<outcome> <prediction>' per line)")
        ->required();
    met->add_option("--metrics", met_metrics, "metric names (default ece,smce)")->delimiter(',');
    met->add_option("--grid-K", met_grid_K, "grid resolution for transport metrics (0 = default)");
    met->add_option("--oracle-cap", met_oracle_cap, "horizon cap for the exact partition oracle");

    CLI11_PARSE(app, argc, argv);

    try {
        if (sim->parsed()) {
            return run_simulate(sim_T, sim_seed, sim_trial, sim_forecaster, sim_adversary,
                                sim_metrics, sim_grid_K, sim_oracle_cap, sim_out);
        }
        if (sweep->parsed()) {
            seqcal::ExperimentSpec spec;
            if (!sweep_config.empty()) spec = seqcal::parse_spec_file(sweep_config);
            if (!sweep_name.empty()) spec.name = sweep_name;
            if (opt_T->count() > 0) spec.horizons = sweep_T;
            if (opt_trials->count() > 0) spec.trials = sweep_trials;
            if (opt_seed->count() > 0) spec.seed = sweep_seed;
            if (opt_fc->count() > 0) spec.forecaster = sweep_forecaster;
            if (opt_adv->count() > 0) spec.adversary = sweep_adversary;
            if (opt_metrics->count() > 0) spec.metrics = sweep_metrics;
            if (opt_grid->count() > 0) spec.grid_K = sweep_grid_K;
            if (opt_cap->count() > 0) spec.oracle_cap = sweep_oracle_cap;
            if (opt_out->count() > 0) spec.out_path = sweep_out;
            if (opt_format->count() > 0) spec.format = sweep_format;
            return run_sweep(spec);
        }
        if (verify->parsed()) {
            return run_verify(verify_suites, verify_seed, verify_scale, verify_skip_binomial,
                              verify_bin_n, verify_bin_samples, verify_threshold);
        }
        if (met->parsed()) {
            return run_metrics(met_in, met_metrics, met_grid_K, met_oracle_cap);
        }
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}
