#include "seqcal/harness.hpp"

#include <algorithm>
#include <atomic>
#include <bit>
#include <cmath>
#include <cstdio>
#include <cstdlib>
#include <fstream>
#include <mutex>
#include <set>
#include <sstream>
#include <stdexcept>
#include <thread>

#include "json.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/simulate.hpp"
#include "seqcal/transport.hpp"

namespace seqcal {

namespace {

std::string sig12(double v) {
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.12g", v);
    return buf;
}

std::string describe_transcript(const Transcript& t) {
    std::ostringstream os;
    os << "T=" << t.size() << " x=";
    for (auto b : t.x) os << static_cast<int>(b);
    os << " p=[";
    for (std::size_t i = 0; i < t.p.size(); ++i) {
        if (i) os << ",";
        os << format_double(t.p[i]);
    }
    os << "]";
    return os.str();
}

std::string trim(const std::string& s) {
    const auto first = s.find_first_not_of(" \t\r\n");
    if (first == std::string::npos) return {};
    const auto last = s.find_last_not_of(" \t\r\n");
    return s.substr(first, last - first + 1);
}

std::vector<std::string> split_list(const std::string& s) {
    std::vector<std::string> items;
    std::string cur;
    std::istringstream is(s);
    while (std::getline(is, cur, ',')) {
        cur = trim(cur);
        if (cur.empty()) throw std::invalid_argument("empty item in list value '" + s + "'");
        items.push_back(cur);
    }
    return items;
}

long parse_long(const std::string& s, const char* what) {
    try {
        std::size_t pos = 0;
        const long v = std::stol(s, &pos);
        if (pos != s.size()) throw std::invalid_argument("trailing");
        return v;
    } catch (const std::exception&) {
        throw std::invalid_argument(std::string("invalid integer for ") + what + ": '" + s + "'");
    }
}

}  // namespace

// ---------------------------------------------------------------------------
// Random instances
// ---------------------------------------------------------------------------

Transcript random_transcript(long T, Rng& rng) {
    if (T < 1) throw std::invalid_argument("random_transcript: T must be >= 1");
    const long pool_size = rng.uniform_int(1, std::max<long>(2, (T + 1) / 2));
    std::vector<double> pool(static_cast<std::size_t>(pool_size));
    for (auto& v : pool) v = rng.uniform();
    std::vector<std::uint8_t> x(static_cast<std::size_t>(T));
    std::vector<double> p(static_cast<std::size_t>(T));
    for (long t = 0; t < T; ++t) {
        x[static_cast<std::size_t>(t)] = static_cast<std::uint8_t>(rng.coin());
        const double u = rng.uniform();
        double pt;
        if (u < 0.55) {
            pt = pool[static_cast<std::size_t>(rng.uniform_int(0, pool_size - 1))];
        } else if (u < 0.88) {
            pt = rng.uniform();
        } else if (u < 0.92) {
            pt = static_cast<double>(x[static_cast<std::size_t>(t)]);  // matching endpoint
        } else if (u < 0.95) {
            pt = 1.0 - static_cast<double>(x[static_cast<std::size_t>(t)]);  // opposite endpoint
        } else {
            pt = static_cast<double>(rng.uniform_int(0, 4)) / 4.0;  // small exact rational
        }
        p[static_cast<std::size_t>(t)] = pt;
    }
    return Transcript(std::move(x), std::move(p));
}

PlanInstance random_calibrated_plan(long max_T, int max_support, Rng& rng, int max_denom) {
    if (max_T < 1) throw std::invalid_argument("random_calibrated_plan: max_T must be >= 1");
    if (max_support < 1) throw std::invalid_argument("random_calibrated_plan: max_support must be >= 1");
    if (max_denom < 1) throw std::invalid_argument("random_calibrated_plan: max_denom must be >= 1");

    // Blocks of b steps with a ones average exactly to a/b, so a plan sending
    // every block member to a/b is calibrated by construction.
    std::map<double, std::pair<long, long>> dest_mass;  // destination -> (zeros, ones)
    long T = 0;
    const long want = rng.uniform_int(1, max_support);
    for (long k = 0; k < want; ++k) {
        const long b = rng.uniform_int(1, max_denom);
        if (T + b > max_T) break;
        const long a = rng.uniform_int(0, b);
        long reps = rng.uniform_int(1, std::max<long>(1, (max_T - T) / (2 * b)));
        reps = std::min(reps, (max_T - T) / b);
        if (reps < 1) continue;
        auto& m = dest_mass[static_cast<double>(a) / static_cast<double>(b)];
        m.first += reps * (b - a);
        m.second += reps * a;
        T += reps * b;
    }
    if (dest_mass.empty()) {
        const int bit = rng.coin();
        dest_mass[static_cast<double>(bit)] = {bit ? 0L : 1L, bit ? 1L : 0L};
        T = 1;
    }

    TransportPlan plan;
    for (const auto& [s, m] : dest_mass) plan.destinations.push_back(s);

    struct StepSeed {
        std::uint8_t bit;
        std::size_t col;
    };
    std::vector<StepSeed> seeds;
    {
        std::size_t col = 0;
        for (const auto& [s, m] : dest_mass) {
            for (long i = 0; i < m.first; ++i) seeds.push_back({0, col});
            for (long i = 0; i < m.second; ++i) seeds.push_back({1, col});
            ++col;
        }
    }
    for (std::size_t i = seeds.size(); i > 1; --i) {
        std::swap(seeds[i - 1], seeds[static_cast<std::size_t>(
                                    rng.uniform_int(0, static_cast<long>(i) - 1))]);
    }

    std::vector<std::uint8_t> x;
    std::vector<double> p;
    for (const auto& sd : seeds) {
        x.push_back(sd.bit);
        p.push_back(rng.uniform());
        std::vector<double> row(plan.destinations.size(), 0.0);
        row[sd.col] = 1.0;
        plan.rows.push_back(std::move(row));
    }

    // Stir with calibration-preserving swaps: two steps with the same outcome
    // exchange mass between two destinations, which cancels exactly in every
    // destination's calibration constraint.
    const long n = static_cast<long>(seeds.size());
    const long swaps = 3 * n;
    for (long it = 0; it < swaps && plan.destinations.size() > 1; ++it) {
        const auto t1 = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
        const auto t2 = static_cast<std::size_t>(rng.uniform_int(0, n - 1));
        if (t1 == t2 || x[t1] != x[t2]) continue;
        auto& r1 = plan.rows[t1];
        auto& r2 = plan.rows[t2];
        std::vector<std::size_t> s1, s2;
        for (std::size_t j = 0; j < r1.size(); ++j) {
            if (r1[j] > 0) s1.push_back(j);
            if (r2[j] > 0) s2.push_back(j);
        }
        const std::size_t j1 = s1[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<long>(s1.size()) - 1))];
        const std::size_t j2 = s2[static_cast<std::size_t>(
            rng.uniform_int(0, static_cast<long>(s2.size()) - 1))];
        if (j1 == j2) continue;
        const double eps = std::min(r1[j1], r2[j2]) * rng.uniform();
        r1[j1] -= eps;
        r1[j2] += eps;
        r2[j2] -= eps;
        r2[j1] += eps;
    }

    Transcript tr(std::move(x), std::move(p));
    plan.validate(tr.size());
    return {std::move(tr), std::move(plan)};
}

// ---------------------------------------------------------------------------
// Metric registry
// ---------------------------------------------------------------------------

namespace {

struct MetricName {
    std::string base;
    std::string arg;
};

MetricName split_metric(const std::string& name) {
    const auto colon = name.find(':');
    if (colon == std::string::npos) return {name, ""};
    return {name.substr(0, colon), name.substr(colon + 1)};
}

}  // namespace

bool metric_name_valid(const std::string& name) {
    const MetricName m = split_metric(name);
    if (m.base == "ece" || m.base == "smce" || m.base == "caldist-exact") return m.arg.empty();
    if (m.base == "lower-caldist") {
        if (m.arg.empty()) return true;
        try {
            return parse_long(m.arg, "K") >= 2;
        } catch (const std::exception&) {
            return false;
        }
    }
    if (m.base == "caldist-upper") return m.arg == "general" || m.arg == "sparse";
    return false;
}

double compute_metric(const std::string& name, const Transcript& t, long grid_K, int oracle_cap) {
    const MetricName m = split_metric(name);
    if (m.base == "ece" && m.arg.empty()) return ece(t);
    if (m.base == "smce" && m.arg.empty()) return smce(t).value;
    if (m.base == "caldist-exact" && m.arg.empty()) return caldist_exact(t, oracle_cap).value;
    if (m.base == "lower-caldist") {
        const long K = m.arg.empty() ? grid_K : parse_long(m.arg, "K");
        return lower_caldist_grid(t, K).value;
    }
    if (m.base == "caldist-upper") {
        if (m.arg == "general") return caldist_upper_bound(t, ConsolidateMode::General, grid_K).value;
        if (m.arg == "sparse") return caldist_upper_bound(t, ConsolidateMode::Sparse, grid_K).value;
    }
    throw std::invalid_argument("unknown metric '" + name + "'");
}

// ---------------------------------------------------------------------------
// Experiment spec
// ---------------------------------------------------------------------------

void ExperimentSpec::validate() const {
    if (name.empty()) throw std::invalid_argument("experiment name must not be empty");
    if (name.find(',') != std::string::npos || name.find('\n') != std::string::npos) {
        throw std::invalid_argument("experiment name must not contain ',' or newlines");
    }
    if (horizons.empty()) throw std::invalid_argument("no horizons given (key T)");
    for (const long T : horizons) {
        if (T < 1) throw std::invalid_argument("every horizon must be >= 1");
    }
    if (trials < 1) throw std::invalid_argument("trials must be >= 1");
    if (metrics.empty()) throw std::invalid_argument("no metrics given");
    for (const auto& m : metrics) {
        if (!metric_name_valid(m)) throw std::invalid_argument("unknown metric '" + m + "'");
    }
    if (grid_K != 0 && grid_K < 2) throw std::invalid_argument("grid-K must be >= 2 (or 0 for default)");
    if (oracle_cap < 1) throw std::invalid_argument("oracle-cap must be >= 1");
    const long max_T = *std::max_element(horizons.begin(), horizons.end());
    for (const auto& m : metrics) {
        if (split_metric(m).base == "caldist-exact" && max_T > oracle_cap) {
            throw std::invalid_argument(
                "metric caldist-exact needs max(T) <= oracle cap (" + std::to_string(oracle_cap) +
                "), got T = " + std::to_string(max_T));
        }
    }
    if (format != "csv" && format != "json") {
        throw std::invalid_argument("format must be csv or json, got '" + format + "'");
    }
    // Resolve both strategy names now so a bad spec fails before any work.
    parse_forecaster(forecaster, horizons.front());
    parse_adversary(adversary);
}

namespace {

void apply_config_key(ExperimentSpec& spec, const std::string& key, const std::string& value) {
    if (key == "name") {
        spec.name = value;
    } else if (key == "T") {
        spec.horizons.clear();
        for (const auto& item : split_list(value)) spec.horizons.push_back(parse_long(item, "T"));
    } else if (key == "trials") {
        spec.trials = parse_long(value, "trials");
    } else if (key == "seed") {
        try {
            std::size_t pos = 0;
            spec.seed = std::stoull(value, &pos);
            if (pos != value.size()) throw std::invalid_argument("trailing");
        } catch (const std::exception&) {
            throw std::invalid_argument("invalid integer for seed: '" + value + "'");
        }
    } else if (key == "forecaster") {
        spec.forecaster = value;
    } else if (key == "adversary") {
        spec.adversary = value;
    } else if (key == "metrics") {
        spec.metrics = split_list(value);
    } else if (key == "grid-K") {
        spec.grid_K = parse_long(value, "grid-K");
    } else if (key == "oracle-cap") {
        spec.oracle_cap = static_cast<int>(parse_long(value, "oracle-cap"));
    } else if (key == "out") {
        spec.out_path = value;
    } else if (key == "format") {
        spec.format = value;
    } else {
        throw std::invalid_argument("unknown key '" + key + "'");
    }
}

}  // namespace

ExperimentSpec parse_spec(std::istream& is) {
    ExperimentSpec spec;
    std::string line;
    long line_no = 0;
    while (std::getline(is, line)) {
        ++line_no;
        const auto hash = line.find('#');
        if (hash != std::string::npos) line.erase(hash);
        const std::string text = trim(line);
        if (text.empty()) continue;
        const auto eq = text.find('=');
        if (eq == std::string::npos) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": expected 'key = value', got '" + text + "'");
        }
        const std::string key = trim(text.substr(0, eq));
        const std::string value = trim(text.substr(eq + 1));
        if (key.empty() || value.empty()) {
            throw std::invalid_argument("config line " + std::to_string(line_no) +
                                        ": empty key or value");
        }
        try {
            apply_config_key(spec, key, value);
        } catch (const std::invalid_argument& e) {
            throw std::invalid_argument("config line " + std::to_string(line_no) + ": " +
                                        e.what());
        }
    }
    return spec;
}

ExperimentSpec parse_spec_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open config file '" + path + "'");
    return parse_spec(is);
}

// ---------------------------------------------------------------------------
// Slope fits
// ---------------------------------------------------------------------------

SlopeFit fit_loglog(const std::vector<double>& x, const std::vector<double>& y) {
    if (x.size() != y.size()) throw std::invalid_argument("fit_loglog: length mismatch");
    const std::set<double> distinct(x.begin(), x.end());
    if (distinct.size() < 3) throw std::invalid_argument("fit_loglog: need >= 3 distinct x values");
    const std::size_t n = x.size();
    std::vector<double> lx(n), ly(n);
    for (std::size_t i = 0; i < n; ++i) {
        if (!(x[i] > 0) || !(y[i] > 0)) {
            throw std::invalid_argument("fit_loglog: x and y must be positive");
        }
        lx[i] = std::log(x[i]);
        ly[i] = std::log(y[i]);
    }
    double mx = 0, my = 0;
    for (std::size_t i = 0; i < n; ++i) {
        mx += lx[i];
        my += ly[i];
    }
    mx /= static_cast<double>(n);
    my /= static_cast<double>(n);
    double sxx = 0, sxy = 0;
    for (std::size_t i = 0; i < n; ++i) {
        sxx += (lx[i] - mx) * (lx[i] - mx);
        sxy += (lx[i] - mx) * (ly[i] - my);
    }
    SlopeFit fit;
    fit.slope = sxy / sxx;
    fit.intercept = my - fit.slope * mx;
    double rss = 0;
    for (std::size_t i = 0; i < n; ++i) {
        const double r = ly[i] - (fit.intercept + fit.slope * lx[i]);
        rss += r * r;
    }
    fit.residual = std::sqrt(rss / static_cast<double>(n));
    fit.points = static_cast<int>(n);
    return fit;
}

// ---------------------------------------------------------------------------
// Experiment runner
// ---------------------------------------------------------------------------

namespace {

long thread_budget(long trials) {
    long n = 0;
    if (const char* env = std::getenv("CALIB_THREADS"); env != nullptr && *env != '\0') {
        n = std::strtol(env, nullptr, 10);
    }
    if (n <= 0) n = static_cast<long>(std::max(1u, std::thread::hardware_concurrency()));
    return std::max(1L, std::min(n, trials));
}

}  // namespace

ScalingReport run_experiment(const ExperimentSpec& spec) {
    spec.validate();
    ScalingReport report;
    const std::size_t n_metrics = spec.metrics.size();

    for (std::size_t hi = 0; hi < spec.horizons.size(); ++hi) {
        const long T = spec.horizons[hi];
        std::vector<std::vector<double>> per_trial(
            static_cast<std::size_t>(spec.trials), std::vector<double>(n_metrics, 0.0));

        std::atomic<long> next{0};
        std::mutex err_mutex;
        std::exception_ptr first_error;
        auto worker = [&]() {
            for (;;) {
                const long k = next.fetch_add(1);
                if (k >= spec.trials) return;
                try {
                    GameConfig cfg;
                    cfg.T = T;
                    cfg.forecaster = spec.forecaster;
                    cfg.adversary = spec.adversary;
                    cfg.seed = spec.seed;
                    cfg.trial = static_cast<std::uint64_t>(hi) *
                                    static_cast<std::uint64_t>(spec.trials) +
                                static_cast<std::uint64_t>(k);
                    const Transcript tr = run_game(cfg);
                    for (std::size_t mi = 0; mi < n_metrics; ++mi) {
                        per_trial[static_cast<std::size_t>(k)][mi] =
                            compute_metric(spec.metrics[mi], tr, spec.grid_K, spec.oracle_cap);
                    }
                } catch (...) {
                    const std::lock_guard<std::mutex> lock(err_mutex);
                    if (!first_error) first_error = std::current_exception();
                    return;
                }
            }
        };
        const long n_threads = thread_budget(spec.trials);
        if (n_threads == 1) {
            worker();
        } else {
            std::vector<std::thread> pool;
            pool.reserve(static_cast<std::size_t>(n_threads));
            for (long i = 0; i < n_threads; ++i) pool.emplace_back(worker);
            for (auto& th : pool) th.join();
        }
        if (first_error) std::rethrow_exception(first_error);

        // Aggregation is a fold over ascending trial index, independent of
        // how trials were scheduled onto threads.
        for (std::size_t mi = 0; mi < n_metrics; ++mi) {
            double sum = 0.0;
            for (long k = 0; k < spec.trials; ++k) sum += per_trial[static_cast<std::size_t>(k)][mi];
            const double mean = sum / static_cast<double>(spec.trials);
            double se = 0.0;
            if (spec.trials > 1) {
                double ss = 0.0;
                for (long k = 0; k < spec.trials; ++k) {
                    const double d = per_trial[static_cast<std::size_t>(k)][mi] - mean;
                    ss += d * d;
                }
                se = std::sqrt(ss / (static_cast<double>(spec.trials) *
                                     static_cast<double>(spec.trials - 1)));
            }
            ReportRow row;
            row.experiment = spec.name;
            row.T = T;
            row.metric = spec.metrics[mi];
            row.trials = spec.trials;
            row.mean = mean;
            row.stderr_value = se;
            report.rows.push_back(std::move(row));
        }
    }

    const std::set<long> distinct(spec.horizons.begin(), spec.horizons.end());
    if (distinct.size() >= 3) {
        for (std::size_t mi = 0; mi < n_metrics; ++mi) {
            std::vector<double> xs, ys;
            bool usable = true;
            for (const auto& row : report.rows) {
                if (row.metric != spec.metrics[mi]) continue;
                if (!(row.mean > 0)) {
                    usable = false;
                    break;
                }
                xs.push_back(static_cast<double>(row.T));
                ys.push_back(row.mean);
            }
            if (usable && xs.size() >= 3) {
                report.slopes[spec.metrics[mi]] = fit_loglog(xs, ys);
            }
        }
    }

    write_report_file(spec, report);
    return report;
}

// ---------------------------------------------------------------------------
// Report serialization
// ---------------------------------------------------------------------------

void write_csv(std::ostream& os, const ScalingReport& report) {
    os << "experiment,T,metric,trials,mean,stderr\n";
    for (const auto& row : report.rows) {
        os << row.experiment << ',' << row.T << ',' << row.metric << ',' << row.trials << ','
           << sig12(row.mean) << ',' << sig12(row.stderr_value) << '\n';
    }
}

void write_json(std::ostream& os, const ExperimentSpec& spec, const ScalingReport& report) {
    nlohmann::ordered_json j;
    j["experiment"] = spec.name;
    j["spec"] = {{"T", spec.horizons},         {"trials", spec.trials},
                 {"seed", spec.seed},          {"forecaster", spec.forecaster},
                 {"adversary", spec.adversary}, {"metrics", spec.metrics},
                 {"grid_K", spec.grid_K},      {"oracle_cap", spec.oracle_cap}};
    j["rows"] = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        j["rows"].push_back({{"T", row.T},
                             {"metric", row.metric},
                             {"trials", row.trials},
                             {"mean", row.mean},
                             {"stderr", row.stderr_value}});
    }
    j["slopes"] = nlohmann::ordered_json::object();
    for (const auto& [metric, fit] : report.slopes) {
        j["slopes"][metric] = {{"slope", fit.slope},
                               {"intercept", fit.intercept},
                               {"residual", fit.residual},
                               {"points", fit.points}};
    }
    os << j.dump(2) << '\n';
}

void write_report_file(const ExperimentSpec& spec, const ScalingReport& report) {
    if (spec.out_path.empty()) return;
    std::ofstream os(spec.out_path, std::ios::binary);
    if (!os) throw std::runtime_error("cannot write output file '" + spec.out_path + "'");
    if (spec.format == "json") {
        write_json(os, spec, report);
    } else {
        write_csv(os, report);
    }
    if (!os) throw std::runtime_error("write failed for output file '" + spec.out_path + "'");
}

// ---------------------------------------------------------------------------
// Statistical checks
// ---------------------------------------------------------------------------

BinomialCheck binomial_anticoncentration_check(long n, long samples, Rng& rng, double threshold) {
    if (n < 1) throw std::invalid_argument("binomial check: n must be >= 1");
    if (samples < 1) throw std::invalid_argument("binomial check: samples must be >= 1");
    const double cut = std::sqrt(static_cast<double>(n)) / 10.0;
    const long words = n / 64;
    const int rest = static_cast<int>(n % 64);
    long hits = 0;
    for (long s = 0; s < samples; ++s) {
        long ones = 0;
        for (long w = 0; w < words; ++w) ones += std::popcount(rng.next_u64());
        if (rest > 0) ones += std::popcount(rng.next_u64() >> (64 - rest));
        if (std::abs(static_cast<double>(ones) - static_cast<double>(n) / 2.0) >= cut) ++hits;
    }
    BinomialCheck out;
    out.frequency = static_cast<double>(hits) / static_cast<double>(samples);
    out.pass = out.frequency >= threshold;
    return out;
}

// ---------------------------------------------------------------------------
// Property suites
// ---------------------------------------------------------------------------

namespace {

class SuiteRecorder {
public:
    explicit SuiteRecorder(std::string name) { result_.suite = std::move(name); }

    void record(bool ok, const std::string& detail) {
        ++result_.cases;
        if (ok) return;
        ++result_.failures;
        if (result_.counterexamples.size() < 5) result_.counterexamples.push_back(detail);
    }

    SuiteResult take() { return std::move(result_); }

private:
    SuiteResult result_;
};

long scaled(long budget, double scale) {
    const double v = static_cast<double>(budget) * scale;
    return std::max(1L, static_cast<long>(std::llround(v)));
}

SuiteResult suite_sandwich(long cases, std::uint64_t seed) {
    SuiteRecorder rec("sandwich");
    Rng rng(derive_seed(seed, 0, 101));
    const long K = 1000;
    for (long i = 0; i < cases; ++i) {
        const long T = rng.uniform_int(1, 10);
        const Transcript tr = random_transcript(T, rng);
        const double s = smce(tr).value;
        const double cd = caldist_exact(tr, 12).value;
        const double lcd = lower_caldist_grid(tr, K).value;
        const double e = ece(tr);
        const double slack = 2.0 * static_cast<double>(T) / static_cast<double>(K);
        std::ostringstream why;
        bool ok = true;
        if (!(lcd >= s / 2.0 - 1e-9)) {
            ok = false;
            why << "lower bound broken: lcd=" << sig12(lcd) << " < smce/2=" << sig12(s / 2.0);
        }
        if (!(lcd <= std::min(2.0 * s, cd) + slack + 1e-9)) {
            ok = false;
            why << " upper bound broken: lcd=" << sig12(lcd) << " > min(2*smce, caldist)+2T/K="
                << sig12(std::min(2.0 * s, cd) + slack);
        }
        if (!(cd <= e + 1e-12)) {
            ok = false;
            why << " order broken: caldist=" << sig12(cd) << " > ece=" << sig12(e);
        }
        rec.record(ok, "case " + std::to_string(i) + ": " + describe_transcript(tr) + " " + why.str());
    }
    return rec.take();
}

SuiteResult suite_lipschitz(long cases, std::uint64_t seed) {
    SuiteRecorder rec("lipschitz");
    Rng rng(derive_seed(seed, 0, 102));
    const long K = 1000;
    for (long i = 0; i < cases; ++i) {
        const long T = rng.uniform_int(1, 10);
        const Transcript tr = random_transcript(T, rng);
        std::vector<double> p2 = tr.p;
        for (auto& v : p2) {
            if (rng.uniform() < 0.7) {
                v = std::min(1.0, std::max(0.0, v + rng.uniform(-0.3, 0.3)));
            }
        }
        const Transcript tr2(tr.x, p2);
        const double d = l1_distance(tr.p, p2);
        const double cd_gap = std::abs(caldist_exact(tr, 12).value - caldist_exact(tr2, 12).value);
        const double sm_gap = std::abs(smce(tr).value - smce(tr2).value);
        const double lcd_gap =
            std::abs(lower_caldist_grid(tr, K).value - lower_caldist_grid(tr2, K).value);
        std::ostringstream why;
        bool ok = true;
        if (!(cd_gap <= d + 1e-9)) {
            ok = false;
            why << "caldist moved " << sig12(cd_gap) << " > ||p-p'||=" << sig12(d);
        }
        if (!(sm_gap <= 2.0 * d + 1e-9)) {
            ok = false;
            why << " smce moved " << sig12(sm_gap) << " > 2||p-p'||=" << sig12(2.0 * d);
        }
        if (!(lcd_gap <= d + 4.0 * static_cast<double>(T) / static_cast<double>(K) + 1e-9)) {
            ok = false;
            why << " lower-caldist moved " << sig12(lcd_gap) << " > ||p-p'||+4T/K="
                << sig12(d + 4.0 * static_cast<double>(T) / static_cast<double>(K));
        }
        rec.record(ok, "case " + std::to_string(i) + ": " + describe_transcript(tr) + " vs p'=[" +
                           [&] {
                               std::string s2;
                               for (std::size_t k2 = 0; k2 < p2.size(); ++k2) {
                                   if (k2) s2 += ",";
                                   s2 += format_double(p2[k2]);
                               }
                               return s2;
                           }() +
                           "] " + why.str());
    }
    return rec.take();
}

SuiteResult suite_rounding(long cases, std::uint64_t seed) {
    SuiteRecorder rec("rounding");
    Rng rng(derive_seed(seed, 0, 103));
    for (long i = 0; i < cases; ++i) {
        const PlanInstance inst = random_calibrated_plan(50, 10, rng);
        const double in_cost = plan_cost(inst.t, inst.plan);
        std::ostringstream why;
        bool ok = true;

        const TransportPlan mono = monotone_rearrange(inst.t, inst.plan);
        const double mono_cost = plan_cost(inst.t, mono);
        if (!(mono_cost <= in_cost + 1e-12)) {
            ok = false;
            why << "rearrangement raised the cost: " << sig12(mono_cost) << " > " << sig12(in_cost);
        }
        const TransportPlan mono2 = monotone_rearrange(inst.t, mono);
        double drift = 0.0;
        if (mono2.destinations == mono.destinations && mono2.rows.size() == mono.rows.size()) {
            for (std::size_t r = 0; r < mono.rows.size(); ++r) {
                for (std::size_t c = 0; c < mono.destinations.size(); ++c) {
                    drift = std::max(drift, std::abs(mono.rows[r][c] - mono2.rows[r][c]));
                }
            }
        } else {
            drift = 1.0;
        }
        if (!(drift <= 1e-12)) {
            ok = false;
            why << " rearrangement not idempotent (row drift " << sig12(drift) << ")";
        }

        const RoundResult rr = round_plan(inst.t, inst.plan);
        const double moved = l1_distance(inst.t.p, rr.q.q);
        const double budget =
            in_cost + 4.0 * static_cast<double>(inst.plan.support()) + 1e-9;
        if (!calibration_check(inst.t.x, rr.q.q, 1e-9)) {
            ok = false;
            why << " rounded output not calibrated (residual "
                << sig12(calibration_residual(inst.t.x, rr.q.q)) << ")";
        }
        if (!(moved <= budget)) {
            ok = false;
            why << " rounding bound broken: ||p-q||=" << sig12(moved) << " > cost+4|S|="
                << sig12(budget);
        }
        if (!(std::abs(rr.cost - moved) <= 1e-9)) {
            ok = false;
            why << " reported cost " << sig12(rr.cost) << " != recomputed " << sig12(moved);
        }
        rec.record(ok, "case " + std::to_string(i) + ": " + describe_transcript(inst.t) + " |S|=" +
                           std::to_string(inst.plan.support()) + " " + why.str());
    }
    return rec.take();
}

SuiteResult suite_consolidation(long cases, std::uint64_t seed) {
    SuiteRecorder rec("consolidation");
    Rng rng(derive_seed(seed, 0, 104));
    const long K = 1000;
    for (long i = 0; i < cases; ++i) {
        const long T = rng.uniform_int(1, 50);
        const Transcript tr = random_transcript(T, rng);
        const LowerCaldistResult lcd = lower_caldist_grid(tr, K);
        const double base_cost = plan_cost(tr, lcd.plan);
        std::ostringstream why;
        bool ok = true;

        const long m = static_cast<long>(std::ceil(std::sqrt(static_cast<double>(T))));
        const TransportPlan cg = consolidate_general(tr, lcd.plan, m);
        if (!(static_cast<long>(cg.support()) <= m)) {
            ok = false;
            why << "general consolidation kept " << cg.support() << " > m=" << m << " destinations";
        }
        if (!plan_calibration_check(tr, cg, 1e-9)) {
            ok = false;
            why << " general output not calibrated (residual "
                << sig12(plan_calibration_residual(tr, cg)) << ")";
        }
        const double cg_cost = plan_cost(tr, cg);
        if (!(cg_cost <= base_cost + static_cast<double>(T) / static_cast<double>(m) + 1e-9)) {
            ok = false;
            why << " general cost " << sig12(cg_cost) << " > input+T/m="
                << sig12(base_cost + static_cast<double>(T) / static_cast<double>(m));
        }

        const TransportPlan cs = consolidate_sparse(tr, lcd.plan);
        std::set<double> distinct_p(tr.p.begin(), tr.p.end());
        const long sparse_budget = 2 * static_cast<long>(distinct_p.size()) + 3;
        if (!(static_cast<long>(cs.support()) <= sparse_budget)) {
            ok = false;
            why << " sparse consolidation kept " << cs.support() << " > 2m+3=" << sparse_budget
                << " destinations";
        }
        if (!plan_calibration_check(tr, cs, 1e-9)) {
            ok = false;
            why << " sparse output not calibrated (residual "
                << sig12(plan_calibration_residual(tr, cs)) << ")";
        }
        const double cs_cost = plan_cost(tr, cs);
        const double cs_budget =
            20.0 * (lcd.value + 2.0 * static_cast<double>(T) / static_cast<double>(K)) + 1e-6;
        if (!(cs_cost <= cs_budget)) {
            ok = false;
            why << " sparse cost " << sig12(cs_cost) << " > 20*(lcd+2T/K)=" << sig12(cs_budget);
        }
        rec.record(ok, "case " + std::to_string(i) + ": " + describe_transcript(tr) + " " + why.str());
    }
    return rec.take();
}

SuiteResult suite_inequalities(long cases, std::uint64_t seed) {
    SuiteRecorder rec("inequalities");
    Rng rng(derive_seed(seed, 0, 105));
    for (long i = 0; i < cases; ++i) {
        double a = rng.uniform();
        double b = rng.uniform();
        double p = rng.uniform();
        const long snap = rng.uniform_int(0, 19);
        if (snap == 0) a = 0.0;
        if (snap == 1) b = 1.0;
        if (snap == 2) b = a;
        if (snap == 3) b = std::min(1.0, a + 1e-9);
        if (snap == 4) p = std::min(a, b);
        if (snap == 5) p = std::max(a, b);
        if (snap == 6) p = 0.0;
        if (snap == 7) p = 1.0;
        const double alpha = std::min(a, b);
        const double beta = std::max(a, b);
        double s1 = 0.0, s2 = 0.0;
        const bool ok = technical_inequalities_check(alpha, beta, p, &s1, &s2);
        rec.record(ok, "case " + std::to_string(i) + ": alpha=" + format_double(alpha) +
                           " beta=" + format_double(beta) + " p=" + format_double(p) +
                           " slack1=" + sig12(s1) + " slack2=" + sig12(s2));
    }
    return rec.take();
}

}  // namespace

const std::vector<std::string>& property_suite_names() {
    static const std::vector<std::string> names = {"sandwich", "lipschitz", "rounding",
                                                   "consolidation", "inequalities"};
    return names;
}

SuiteResult run_property_suite(const std::string& name, std::uint64_t seed, double budget_scale) {
    if (name == "sandwich") return suite_sandwich(scaled(500, budget_scale), seed);
    if (name == "lipschitz") return suite_lipschitz(scaled(500, budget_scale), seed);
    if (name == "rounding") return suite_rounding(scaled(200, budget_scale), seed);
    if (name == "consolidation") return suite_consolidation(scaled(200, budget_scale), seed);
    if (name == "inequalities") return suite_inequalities(scaled(1000000, budget_scale), seed);
    throw std::invalid_argument("unknown property suite '" + name + "'");
}

}  // namespace seqcal
