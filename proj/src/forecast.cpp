#include "seqcal/forecast.hpp"

#include <cmath>
#include <stdexcept>

namespace seqcal {

namespace {

double sign_of(double v) { return v > 0.0 ? 1.0 : (v < 0.0 ? -1.0 : 0.0); }

class FixedBias final : public Forecaster {
public:
    explicit FixedBias(double eps) : eps_(eps) {}

    double next(const GameView& view, Rng&) override {
        for (; seen_ < view.x.size(); ++seen_)
            bias_ += static_cast<double>(view.x[seen_]) - view.p[seen_];
        return 0.5 + eps_ * sign_of(bias_);
    }

private:
    double eps_;
    double bias_ = 0.0;
    std::size_t seen_ = 0;
};

class AdaptiveBias final : public Forecaster {
public:
    double next(const GameView& view, Rng&) override {
        const long done = static_cast<long>(view.x.size());
        for (; seen_ < done; ++seen_)
            round_bias_ += static_cast<double>(view.x[seen_]) - view.p[seen_];
        if (!started_) {
            start_round(done, view.horizon);
        } else {
            const long completed = done - round_start_;
            const bool in_second_phase = completed > half_;
            if (completed >= horizon_ ||
                (in_second_phase && round_bias_ >= -1.0 && round_bias_ <= 1.0))
                start_round(done, view.horizon);
        }
        const long i = done - round_start_;
        if (i < half_) return 0.5;
        if (i == half_) {
            // First half complete: round_bias_ currently holds exactly its
            // bias. Clamping keeps the prediction inside [0, 1] even for
            // extreme first halves.
            const double d = round_bias_;
            eps_ = sign_of(d) *
                   std::min(2.0 * std::abs(d) / static_cast<double>(horizon_) +
                                std::sqrt(std::log(static_cast<double>(horizon_)) /
                                          static_cast<double>(horizon_)),
                            0.5);
        }
        return 0.5 + eps_;
    }

private:
    void start_round(long t0, long total) {
        round_start_ = t0;
        horizon_ = total - t0;
        half_ = horizon_ / 2;
        round_bias_ = 0.0;
        eps_ = 0.0;
        started_ = true;
    }

    bool started_ = false;
    long round_start_ = 0;
    long horizon_ = 0;
    long half_ = 0;
    double round_bias_ = 0.0;
    double eps_ = 0.0;
    long seen_ = 0;
};

class ConstantForecaster final : public Forecaster {
public:
    explicit ConstantForecaster(double v) : v_(v) {}
    double next(const GameView&, Rng&) override { return v_; }

private:
    double v_;
};

}  // namespace

std::unique_ptr<Forecaster> make_fixed_bias(double eps) {
    if (!(eps > 0.0 && eps <= 0.5))
        throw std::invalid_argument("fixed-bias: eps must lie in (0, 1/2]");
    return std::make_unique<FixedBias>(eps);
}

std::unique_ptr<Forecaster> make_adaptive_bias() { return std::make_unique<AdaptiveBias>(); }

std::unique_ptr<Forecaster> make_constant_forecaster(double value) {
    if (!(value >= 0.0 && value <= 1.0))
        throw std::invalid_argument("constant forecaster: value must lie in [0, 1]");
    return std::make_unique<ConstantForecaster>(value);
}

std::unique_ptr<Forecaster> parse_forecaster(const std::string& spec, long horizon) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? "" : spec.substr(colon + 1);
    if (name == "constant") return make_constant_forecaster(arg.empty() ? 0.5 : std::stod(arg));
    if (name == "fixed-bias") {
        if (!arg.empty()) return make_fixed_bias(std::stod(arg));
        if (horizon < 1) throw std::invalid_argument("fixed-bias: default eps needs a horizon");
        return make_fixed_bias(std::pow(static_cast<double>(horizon), -1.0 / 3.0));
    }
    if (name == "adaptive-bias") return make_adaptive_bias();
    throw std::invalid_argument("unknown forecaster spec '" + spec + "'");
}

}  // namespace seqcal
