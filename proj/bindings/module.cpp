// Python bindings for the main operations: metrics, the transport pipeline,
// game simulation, the walk game, and the property suites.

#include <pybind11/pybind11.h>
#include <pybind11/stl.h>

#include <cstdint>
#include <vector>

#include "seqcal/harness.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/simulate.hpp"
#include "seqcal/transport.hpp"
#include "seqcal/walk.hpp"

namespace py = pybind11;

namespace {

seqcal::Transcript make_transcript(const std::vector<int>& x, const std::vector<double>& p) {
    std::vector<std::uint8_t> bits;
    bits.reserve(x.size());
    for (const int b : x) bits.push_back(static_cast<std::uint8_t>(b));
    return seqcal::Transcript(std::move(bits), p);
}

std::vector<int> bits_out(const std::vector<std::uint8_t>& x) {
    return std::vector<int>(x.begin(), x.end());
}

}  // namespace

PYBIND11_MODULE(_seqcal, m) {
    m.doc() = "Calibration measures for sequential binary prediction";
    m.attr("__version__") = "0.1.0";

    m.def(
        "ece",
        [](const std::vector<int>& x, const std::vector<double>& p) {
            return seqcal::ece(make_transcript(x, p));
        },
        py::arg("x"), py::arg("p"),
        "Expected calibration error: sum of absolute per-value biases.");

    m.def(
        "smce",
        [](const std::vector<int>& x, const std::vector<double>& p) {
            const auto r = seqcal::smce(make_transcript(x, p));
            return py::make_tuple(r.value, r.witness.knot_x, r.witness.knot_f);
        },
        py::arg("x"), py::arg("p"),
        "Smooth calibration error; returns (value, witness_knot_x, witness_knot_f).");

    m.def(
        "caldist_exact",
        [](const std::vector<int>& x, const std::vector<double>& p, int cap) {
            const auto r = seqcal::caldist_exact(make_transcript(x, p), cap);
            return py::make_tuple(r.value, r.certificate.q);
        },
        py::arg("x"), py::arg("p"), py::arg("cap") = 12,
        "Exact calibration distance by partition enumeration; returns (value, q).");

    m.def(
        "lower_caldist",
        [](const std::vector<int>& x, const std::vector<double>& p, long K) {
            const auto r = seqcal::lower_caldist_grid(make_transcript(x, p), K);
            return py::make_tuple(r.value, r.plan.destinations, r.plan.rows);
        },
        py::arg("x"), py::arg("p"), py::arg("K") = 0,
        "Lower calibration distance on the K-grid; returns (value, destinations, rows).");

    m.def(
        "caldist_upper",
        [](const std::vector<int>& x, const std::vector<double>& p, const std::string& mode,
           long K) {
            const auto md = mode == "sparse" ? seqcal::ConsolidateMode::Sparse
                                             : seqcal::ConsolidateMode::General;
            if (mode != "sparse" && mode != "general") {
                throw std::invalid_argument("mode must be 'general' or 'sparse'");
            }
            const auto r = seqcal::caldist_upper_bound(make_transcript(x, p), md, K);
            return py::make_tuple(r.value, r.q.q);
        },
        py::arg("x"), py::arg("p"), py::arg("mode") = "general", py::arg("K") = 0,
        "Constructive calibrated certificate via the transport pipeline; returns (value, q).");

    m.def(
        "compute_metric",
        [](const std::string& name, const std::vector<int>& x, const std::vector<double>& p,
           long grid_K, int oracle_cap) {
            return seqcal::compute_metric(name, make_transcript(x, p), grid_K, oracle_cap);
        },
        py::arg("name"), py::arg("x"), py::arg("p"), py::arg("grid_K") = 0,
        py::arg("oracle_cap") = 12, "Compute a metric by registry name.");

    m.def(
        "run_game",
        [](long T, const std::string& forecaster, const std::string& adversary, std::uint64_t seed,
           std::uint64_t trial) {
            seqcal::GameConfig cfg;
            cfg.T = T;
            cfg.forecaster = forecaster;
            cfg.adversary = adversary;
            cfg.seed = seed;
            cfg.trial = trial;
            const auto tr = seqcal::run_game(cfg);
            return py::make_tuple(bits_out(tr.x), tr.p);
        },
        py::arg("T"), py::arg("forecaster") = "constant:0.5",
        py::arg("adversary") = "bernoulli:0.5", py::arg("seed") = 0, py::arg("trial") = 0,
        "Play one forecaster-vs-adversary game; returns (outcomes, predictions).");

    m.def(
        "play_walk",
        [](long T, const std::string& strategy, std::uint64_t seed, std::uint64_t trial) {
            const auto s = seqcal::parse_walk_strategy(strategy);
            const auto r = seqcal::play_walk(T, *s, seed, trial);
            return py::make_tuple(r.total_cost, r.final_abs, r.control_cost, r.positions);
        },
        py::arg("T"), py::arg("strategy") = "zero", py::arg("seed") = 0, py::arg("trial") = 0,
        "Play the controlled random walk; returns (total_cost, |X_T|, control_cost, positions).");

    m.def(
        "run_property_suite",
        [](const std::string& name, std::uint64_t seed, double scale) {
            const auto r = seqcal::run_property_suite(name, seed, scale);
            return py::make_tuple(r.pass(), r.cases, r.failures, r.counterexamples);
        },
        py::arg("name"), py::arg("seed") = 0, py::arg("scale") = 1.0,
        "Run a randomized invariant suite; returns (pass, cases, failures, counterexamples).");

    m.def(
        "binomial_anticoncentration_check",
        [](long n, long samples, std::uint64_t seed, double threshold) {
            seqcal::Rng rng(seed);
            const auto r = seqcal::binomial_anticoncentration_check(n, samples, rng, threshold);
            return py::make_tuple(r.frequency, r.pass);
        },
        py::arg("n"), py::arg("samples"), py::arg("seed") = 0, py::arg("threshold") = 0.74,
        "Monte Carlo P(|Bin(n,1/2) - n/2| >= sqrt(n)/10); returns (frequency, pass).");

    m.def("derive_seed", &seqcal::derive_seed, py::arg("master"), py::arg("trial"),
          py::arg("stream"), "Deterministic per-trial, per-stream seed derivation.");
}
