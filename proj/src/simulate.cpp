#include "seqcal/simulate.hpp"

#include <cmath>
#include <stdexcept>

namespace seqcal {

namespace {

class Bernoulli final : public Adversary {
public:
    explicit Bernoulli(double q) : q_(q) {}
    int next(const GameView&, Rng& rng) override { return rng.bernoulli(q_); }

private:
    double q_;
};

class FixedSequence final : public Adversary {
public:
    explicit FixedSequence(std::vector<std::uint8_t> bits) : bits_(std::move(bits)) {}
    int next(const GameView&, Rng&) override {
        const int bit = bits_[pos_];
        pos_ = (pos_ + 1) % bits_.size();
        return bit;
    }

private:
    std::vector<std::uint8_t> bits_;
    std::size_t pos_ = 0;
};

class EarlyStopping final : public Adversary {
public:
    EarlyStopping(double c, double adaptive_weight) : c_(c), weight_(adaptive_weight) {}

    int next(const GameView& view, Rng& rng) override {
        if (!decided_) {
            adaptive_ = rng.bernoulli(weight_) == 1;
            threshold_ = c_ * std::cbrt(static_cast<double>(view.horizon));
            decided_ = true;
        }
        if (!adaptive_) return rng.coin();
        for (; seen_ < view.x.size(); ++seen_)
            bias_ += static_cast<double>(view.x[seen_]) - view.p[seen_];
        if (!locked_ && std::abs(bias_) >= threshold_) {
            locked_ = true;
            lock_bit_ = bias_ > 0.0 ? 1 : 0;
        }
        return locked_ ? lock_bit_ : rng.coin();
    }

private:
    double c_;
    double weight_;
    double threshold_ = 0.0;
    bool decided_ = false;
    bool adaptive_ = false;
    bool locked_ = false;
    int lock_bit_ = 0;
    double bias_ = 0.0;
    std::size_t seen_ = 0;
};

}  // namespace

std::unique_ptr<Adversary> make_bernoulli(double q) {
    if (!(q >= 0.0 && q <= 1.0)) throw std::invalid_argument("bernoulli: q must lie in [0, 1]");
    return std::make_unique<Bernoulli>(q);
}

std::unique_ptr<Adversary> make_fixed_sequence(std::vector<std::uint8_t> bits) {
    if (bits.empty()) throw std::invalid_argument("fixed sequence: empty pattern");
    for (auto b : bits)
        if (b > 1) throw std::invalid_argument("fixed sequence: bits must be 0 or 1");
    return std::make_unique<FixedSequence>(std::move(bits));
}

std::unique_ptr<Adversary> make_early_stopping(double c, double adaptive_weight) {
    if (!(c > 0.0)) throw std::invalid_argument("early-stop: threshold scale must be positive");
    if (!(adaptive_weight >= 0.0 && adaptive_weight <= 1.0))
        throw std::invalid_argument("early-stop: adaptive weight must lie in [0, 1]");
    return std::make_unique<EarlyStopping>(c, adaptive_weight);
}

std::unique_ptr<Adversary> parse_adversary(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "bernoulli") return make_bernoulli(arg.empty() ? 0.5 : std::stod(arg));
    if (name == "fixed") {
        std::vector<std::uint8_t> bits;
        for (char ch : arg) {
            if (ch != '0' && ch != '1')
                throw std::invalid_argument("fixed sequence: bits must be 0 or 1");
            bits.push_back(ch == '1' ? 1 : 0);
        }
        return make_fixed_sequence(std::move(bits));
    }
    if (name == "early-stop") {
        const auto colon2 = arg.find(':');
        const double c = arg.empty() ? 0.5 : std::stod(arg.substr(0, colon2));
        const double w = colon2 == std::string::npos ? 0.5 : std::stod(arg.substr(colon2 + 1));
        return make_early_stopping(c, w);
    }
    throw std::invalid_argument("unknown adversary spec '" + spec + "'");
}

Transcript run_game(long T, Forecaster& forecaster, Adversary& adversary, Rng& frng, Rng& arng) {
    if (T < 1) throw std::invalid_argument("run_game: horizon must be at least 1");
    std::vector<std::uint8_t> x;
    std::vector<double> p;
    x.reserve(T);
    p.reserve(T);
    const GameView view{x, p, T};
    for (long t = 0; t < T; ++t) {
        // Both moves are computed from the same pre-step view; neither
        // vector grows until both are in hand.
        const double pt = forecaster.next(view, frng);
        const int xt = adversary.next(view, arng);
        if (!(pt >= 0.0 && pt <= 1.0))
            throw std::runtime_error("run_game: forecaster emitted a prediction outside [0, 1]");
        if (xt != 0 && xt != 1)
            throw std::runtime_error("run_game: adversary emitted an outcome outside {0, 1}");
        p.push_back(pt);
        x.push_back(static_cast<std::uint8_t>(xt));
    }
    return Transcript(std::move(x), std::move(p));
}

Transcript run_game(const GameConfig& cfg) {
    auto forecaster = parse_forecaster(cfg.forecaster, cfg.T);
    auto adversary = parse_adversary(cfg.adversary);
    Rng frng(derive_seed(cfg.seed, cfg.trial, 0));
    Rng arng(derive_seed(cfg.seed, cfg.trial, 1));
    return run_game(cfg.T, *forecaster, *adversary, frng, arng);
}

}  // namespace seqcal
