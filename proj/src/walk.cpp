#include "seqcal/walk.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace seqcal {

namespace {

double sign_of(double v) { return v > 0 ? 1.0 : (v < 0 ? -1.0 : 0.0); }

class ZeroStrategy final : public WalkStrategy {
public:
    double next(double, long, long, Rng&) override { return 0.0; }
};

class FixedDrift final : public WalkStrategy {
public:
    FixedDrift(double eps, bool auto_eps) : eps_(eps), auto_eps_(auto_eps) {}

    double next(double position, long, long horizon, Rng&) override {
        if (auto_eps_) {
            // Calibrate the restoring force to the horizon: eps = T^(-1/3)
            // balances the ~1/eps displacement term against the T eps^2
            // control term.
            eps_ = horizon > 0 ? std::min(0.5, std::pow(static_cast<double>(horizon), -1.0 / 3.0))
                               : 0.0;
            auto_eps_ = false;
        }
        return -eps_ * sign_of(position);
    }

private:
    double eps_;
    bool auto_eps_;
};

/// Alternates free phases with restoring pushes. Each epoch looks at the
/// remaining horizon L, idles for floor(L/2) steps, then pushes with
/// magnitude alpha_scale * sqrt(ln L') / sqrt(L') (L' = steps left at push
/// start, clamped to the 1/2 move budget) against the sign the walk had when
/// the push began, until the walk crosses that sign or comes within 1 of the
/// origin; then a fresh epoch starts on whatever horizon remains. Every
/// epoch consumes at least one step, so at most ~log2 T epochs occur.
class EpochDrift final : public WalkStrategy {
public:
    explicit EpochDrift(double alpha_scale) : scale_(alpha_scale) {}

    double next(double position, long t, long horizon, Rng&) override {
        for (;;) {
            if (!started_) {
                started_ = true;
                start_epoch(position, t, horizon);
            }
            if (!pushing_) {
                if (free_left_ > 0) {
                    --free_left_;
                    return 0.0;
                }
                begin_push(position, horizon - t);
            }
            if (push_steps_ > 0 && push_done(position)) {
                start_epoch(position, t, horizon);
                continue;
            }
            ++push_steps_;
            return push_drift_;
        }
    }

private:
    void start_epoch(double position, long t, long horizon) {
        const long remaining = horizon - t;
        free_left_ = remaining / 2;
        pushing_ = false;
        if (free_left_ == 0) begin_push(position, remaining);
    }

    void begin_push(double position, long remaining) {
        pushing_ = true;
        push_steps_ = 0;
        push_origin_ = position;
        const double len = static_cast<double>(std::max<long>(remaining, 1));
        const double mag = std::min(0.5, scale_ * std::sqrt(std::log(len)) / std::sqrt(len));
        push_drift_ = -sign_of(position) * mag;
    }

    bool push_done(double position) const {
        const bool crossed = (push_origin_ > 0 && position <= 0) ||
                             (push_origin_ < 0 && position >= 0);
        return crossed || std::abs(position) <= 1.0;
    }

    double scale_;
    bool started_ = false;
    bool pushing_ = false;
    long free_left_ = 0;
    long push_steps_ = 0;
    double push_origin_ = 0.0;
    double push_drift_ = 0.0;
};

}  // namespace

WalkResult play_walk(long T, WalkStrategy& strategy, Rng& strategy_rng,
                     const std::function<double(long)>& noise) {
    if (T < 1) throw std::invalid_argument("play_walk: horizon must be at least 1");
    WalkResult result;
    result.positions.reserve(static_cast<std::size_t>(T) + 1);
    result.drifts.reserve(static_cast<std::size_t>(T));
    result.noises.reserve(static_cast<std::size_t>(T));
    double x = 0.0;
    result.positions.push_back(x);
    for (long t = 0; t < T; ++t) {
        const double drift = strategy.next(x, t, T, strategy_rng);
        if (!(std::abs(drift) <= 0.5 + 1e-12)) {
            throw std::runtime_error("play_walk: strategy move exceeds the +-1/2 budget");
        }
        const double delta = noise(t);
        if (delta != 0.5 && delta != -0.5) {
            throw std::runtime_error("play_walk: noise must be exactly +-1/2");
        }
        x += drift + delta;
        result.drifts.push_back(drift);
        result.noises.push_back(delta);
        result.positions.push_back(x);
        result.control_cost += drift * drift;
    }
    result.final_abs = std::abs(x);
    result.total_cost = result.final_abs + result.control_cost;
    return result;
}

WalkResult play_walk(long T, WalkStrategy& strategy, std::uint64_t seed, std::uint64_t trial) {
    // Streams 2 and 3 keep walk randomness disjoint from the forecasting
    // game's streams 0 and 1 under the same master seed.
    Rng srng(derive_seed(seed, trial, 2));
    Rng nrng(derive_seed(seed, trial, 3));
    return play_walk(T, strategy, srng, [&nrng](long) { return nrng.coin() ? 0.5 : -0.5; });
}

std::unique_ptr<WalkStrategy> make_zero_strategy() { return std::make_unique<ZeroStrategy>(); }

std::unique_ptr<WalkStrategy> make_fixed_drift(double eps) {
    if (!(eps >= 0.0 && eps <= 0.5)) {
        throw std::invalid_argument("make_fixed_drift: eps must lie in [0, 1/2]");
    }
    return std::make_unique<FixedDrift>(eps, /*auto_eps=*/false);
}

std::unique_ptr<WalkStrategy> make_epoch_drift(double alpha_scale) {
    if (!(alpha_scale >= 0.0)) {
        throw std::invalid_argument("make_epoch_drift: alpha_scale must be nonnegative");
    }
    return std::make_unique<EpochDrift>(alpha_scale);
}

std::unique_ptr<WalkStrategy> parse_walk_strategy(const std::string& spec) {
    const auto colon = spec.find(':');
    const std::string name = spec.substr(0, colon);
    const std::string arg = colon == std::string::npos ? std::string() : spec.substr(colon + 1);
    if (name == "zero") {
        if (!arg.empty()) throw std::invalid_argument("walk strategy 'zero' takes no argument");
        return make_zero_strategy();
    }
    if (name == "fixed-drift") {
        if (arg.empty()) return std::make_unique<FixedDrift>(0.0, /*auto_eps=*/true);
        return make_fixed_drift(std::stod(arg));
    }
    if (name == "epoch-drift") {
        return make_epoch_drift(arg.empty() ? 1.0 : std::stod(arg));
    }
    throw std::invalid_argument("unknown walk strategy: " + spec);
}

}  // namespace seqcal
