#include "seqcal/core.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <istream>
#include <map>
#include <ostream>
#include <sstream>
#include <stdexcept>

namespace seqcal {

Transcript::Transcript(std::vector<std::uint8_t> outcomes, std::vector<double> predictions)
    : x(std::move(outcomes)), p(std::move(predictions)) {
    validate();
}

Transcript::Transcript(std::vector<std::uint8_t> outcomes, std::vector<double> predictions,
                       std::vector<std::string> literals)
    : x(std::move(outcomes)), p(std::move(predictions)), p_text(std::move(literals)) {
    validate();
}

void Transcript::validate() const {
    if (x.empty()) throw std::invalid_argument("transcript: empty (need at least one step)");
    if (x.size() != p.size()) throw std::invalid_argument("transcript: outcome/prediction length mismatch");
    if (!p_text.empty() && p_text.size() != p.size())
        throw std::invalid_argument("transcript: literal/prediction length mismatch");
    for (std::size_t t = 0; t < x.size(); ++t) {
        if (x[t] > 1) throw std::invalid_argument("transcript: outcome not in {0,1}");
        if (!(p[t] >= 0.0 && p[t] <= 1.0))
            throw std::invalid_argument("transcript: prediction outside [0,1]");
    }
}

void TransportPlan::validate(std::size_t expected_steps, double tol) const {
    if (rows.size() != expected_steps)
        throw std::invalid_argument("plan: row count does not match transcript length");
    for (std::size_t j = 0; j < destinations.size(); ++j) {
        if (!(destinations[j] >= 0.0 && destinations[j] <= 1.0))
            throw std::invalid_argument("plan: destination outside [0,1]");
        if (j > 0 && !(destinations[j] > destinations[j - 1]))
            throw std::invalid_argument("plan: destinations not strictly increasing");
    }
    for (const auto& row : rows) {
        if (row.size() != destinations.size())
            throw std::invalid_argument("plan: row width does not match destination count");
        double sum = 0.0;
        for (double v : row) {
            if (v < -tol) throw std::invalid_argument("plan: negative mass");
            sum += v;
        }
        if (std::abs(sum - 1.0) > tol) throw std::invalid_argument("plan: row mass not 1");
    }
}

double LipschitzWitness::operator()(double v) const {
    if (knot_x.empty()) return 0.0;
    if (v <= knot_x.front()) return knot_f.front();
    if (v >= knot_x.back()) return knot_f.back();
    auto it = std::upper_bound(knot_x.begin(), knot_x.end(), v);
    std::size_t hi = static_cast<std::size_t>(it - knot_x.begin());
    std::size_t lo = hi - 1;
    const double span = knot_x[hi] - knot_x[lo];
    if (span <= 0.0) return knot_f[lo];
    const double w = (v - knot_x[lo]) / span;
    return knot_f[lo] * (1.0 - w) + knot_f[hi] * w;
}

double LipschitzWitness::constraint_violation() const {
    double worst = -1.0;
    for (std::size_t i = 0; i < knot_f.size(); ++i) {
        worst = std::max(worst, std::abs(knot_f[i]) - 1.0);
        if (i > 0) {
            const double dx = knot_x[i] - knot_x[i - 1];
            worst = std::max(worst, std::abs(knot_f[i] - knot_f[i - 1]) - dx);
        }
    }
    return worst;
}

BiasProfile bias_profile(const Transcript& t) {
    std::map<double, std::pair<double, std::int64_t>> acc;  // alpha -> (bias, count)
    for (std::size_t i = 0; i < t.size(); ++i) {
        auto& slot = acc[t.p[i]];
        slot.first += static_cast<double>(t.x[i]) - t.p[i];
        slot.second += 1;
    }
    BiasProfile out;
    out.alpha.reserve(acc.size());
    out.delta.reserve(acc.size());
    out.count.reserve(acc.size());
    for (const auto& [alpha, slot] : acc) {
        out.alpha.push_back(alpha);
        out.delta.push_back(slot.first);
        out.count.push_back(slot.second);
    }
    return out;
}

std::vector<double> running_bias(const Transcript& t) {
    std::vector<double> s(t.size());
    double acc = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) {
        acc += static_cast<double>(t.x[i]) - t.p[i];
        s[i] = acc;
    }
    return s;
}

double calibration_residual(const std::vector<std::uint8_t>& x, const std::vector<double>& q) {
    if (x.size() != q.size()) throw std::invalid_argument("calibration_residual: length mismatch");
    std::map<double, double> bias;
    for (std::size_t t = 0; t < x.size(); ++t) bias[q[t]] += static_cast<double>(x[t]) - q[t];
    double worst = 0.0;
    for (const auto& [value, b] : bias) worst = std::max(worst, std::abs(b));
    return worst;
}

bool calibration_check(const std::vector<std::uint8_t>& x, const std::vector<double>& q, double tol) {
    return calibration_residual(x, q) <= tol;
}

double plan_calibration_residual(const Transcript& t, const TransportPlan& plan) {
    plan.validate(t.size());
    double worst = 0.0;
    for (std::size_t j = 0; j < plan.destinations.size(); ++j) {
        double bias = 0.0;
        for (std::size_t i = 0; i < plan.rows.size(); ++i)
            bias += (static_cast<double>(t.x[i]) - plan.destinations[j]) * plan.rows[i][j];
        worst = std::max(worst, std::abs(bias));
    }
    return worst;
}

bool plan_calibration_check(const Transcript& t, const TransportPlan& plan, double tol) {
    return plan_calibration_residual(t, plan) <= tol;
}

double plan_cost(const Transcript& t, const TransportPlan& plan) {
    plan.validate(t.size());
    double cost = 0.0;
    for (std::size_t i = 0; i < plan.rows.size(); ++i)
        for (std::size_t j = 0; j < plan.destinations.size(); ++j)
            cost += plan.rows[i][j] * std::abs(t.p[i] - plan.destinations[j]);
    return cost;
}

double l1_distance(const std::vector<double>& a, const std::vector<double>& b) {
    if (a.size() != b.size()) throw std::invalid_argument("l1_distance: length mismatch");
    double d = 0.0;
    for (std::size_t i = 0; i < a.size(); ++i) d += std::abs(a[i] - b[i]);
    return d;
}

// --------------------------------------------------------------------------
// Serialization
// --------------------------------------------------------------------------

std::string format_double(double v) {
    char buf[64];
    auto res = std::to_chars(buf, buf + sizeof(buf), v);
    return std::string(buf, res.ptr);
}

namespace {

double parse_double_token(const std::string& tok, const char* what) {
    double v = 0.0;
    auto res = std::from_chars(tok.data(), tok.data() + tok.size(), v);
    if (res.ec != std::errc() || res.ptr != tok.data() + tok.size())
        throw std::runtime_error(std::string("parse error: bad ") + what + " '" + tok + "'");
    return v;
}

// Strips comments, returns false for blank lines.
bool clean_line(std::string& line) {
    auto hash = line.find('#');
    if (hash != std::string::npos) line.erase(hash);
    auto end = line.find_last_not_of(" \t\r\n");
    if (end == std::string::npos) return false;
    line.erase(end + 1);
    return true;
}

}  // namespace

void write_transcript(std::ostream& os, const Transcript& t) {
    const bool literal = !t.p_text.empty();
    for (std::size_t i = 0; i < t.size(); ++i)
        os << int(t.x[i]) << ' ' << (literal ? t.p_text[i] : format_double(t.p[i])) << '\n';
}

Transcript read_transcript(std::istream& is) {
    std::vector<std::uint8_t> x;
    std::vector<double> p;
    std::vector<std::string> text;
    std::string line;
    while (std::getline(is, line)) {
        if (!clean_line(line)) continue;
        std::istringstream ls(line);
        std::string xtok, ptok;
        if (!(ls >> xtok >> ptok)) throw std::runtime_error("parse error: expected '<outcome> <prediction>'");
        std::string extra;
        if (ls >> extra) throw std::runtime_error("parse error: trailing tokens on transcript line");
        if (xtok != "0" && xtok != "1") throw std::runtime_error("parse error: outcome must be 0 or 1");
        x.push_back(xtok == "1" ? 1 : 0);
        p.push_back(parse_double_token(ptok, "prediction"));
        text.push_back(ptok);
    }
    return Transcript(std::move(x), std::move(p), std::move(text));
}

void write_transcript_file(const std::string& path, const Transcript& t) {
    std::ofstream os(path);
    if (!os) throw std::runtime_error("cannot open for writing: " + path);
    write_transcript(os, t);
}

Transcript read_transcript_file(const std::string& path) {
    std::ifstream is(path);
    if (!is) throw std::runtime_error("cannot open for reading: " + path);
    return read_transcript(is);
}

void write_plan(std::ostream& os, const Transcript& t, const TransportPlan& plan) {
    plan.validate(t.size());
    os << "destinations:";
    for (double s : plan.destinations) os << ' ' << format_double(s);
    os << '\n';
    const bool literal = !t.p_text.empty();
    for (std::size_t i = 0; i < t.size(); ++i) {
        os << int(t.x[i]) << ' ' << (literal ? t.p_text[i] : format_double(t.p[i]));
        for (double v : plan.rows[i]) os << ' ' << format_double(v);
        os << '\n';
    }
}

void read_plan(std::istream& is, Transcript& t, TransportPlan& plan) {
    std::string line;
    bool have_header = false;
    std::vector<std::uint8_t> x;
    std::vector<double> p;
    std::vector<std::string> text;
    plan = TransportPlan{};
    while (std::getline(is, line)) {
        if (!clean_line(line)) continue;
        std::istringstream ls(line);
        if (!have_header) {
            std::string key;
            ls >> key;
            if (key != "destinations:")
                throw std::runtime_error("parse error: plan file must start with 'destinations:'");
            std::string tok;
            while (ls >> tok) plan.destinations.push_back(parse_double_token(tok, "destination"));
            have_header = true;
            continue;
        }
        std::string xtok, ptok;
        if (!(ls >> xtok >> ptok)) throw std::runtime_error("parse error: expected '<outcome> <prediction> <masses...>'");
        if (xtok != "0" && xtok != "1") throw std::runtime_error("parse error: outcome must be 0 or 1");
        x.push_back(xtok == "1" ? 1 : 0);
        p.push_back(parse_double_token(ptok, "prediction"));
        text.push_back(ptok);
        std::vector<double> row;
        std::string tok;
        while (ls >> tok) row.push_back(parse_double_token(tok, "mass"));
        if (row.size() != plan.destinations.size())
            throw std::runtime_error("parse error: plan row width does not match destination count");
        plan.rows.push_back(std::move(row));
    }
    if (!have_header) throw std::runtime_error("parse error: empty plan file");
    t = Transcript(std::move(x), std::move(p), std::move(text));
    plan.validate(t.size());
}

}  // namespace seqcal
