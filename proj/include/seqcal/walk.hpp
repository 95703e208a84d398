#pragma once

#include <functional>
#include <memory>
#include <string>
#include <vector>

#include "seqcal/rng.hpp"

namespace seqcal {

/// Control strategy for the drift game: at each step the player sees the
/// current position (and the clock) and commits a drift in [-1/2, 1/2];
/// afterwards an independent fair +-1/2 noise step is added.
class WalkStrategy {
public:
    virtual ~WalkStrategy() = default;
    virtual double next(double position, long t, long horizon, Rng& rng) = 0;
};

struct WalkResult {
    std::vector<double> positions;  ///< X_0 = 0 through X_T
    std::vector<double> drifts;     ///< the player's moves
    std::vector<double> noises;     ///< the +-1/2 perturbations
    double final_abs = 0.0;         ///< |X_T|
    double control_cost = 0.0;      ///< sum of squared drifts
    double total_cost = 0.0;        ///< |X_T| + control cost
};

/// Plays the walk X_t = X_{t-1} + drift_t + noise_t for T >= 1 steps. The
/// noise callback must return exactly +1/2 or -1/2 for step index t (0-based);
/// a drift outside [-1/2, 1/2] is a hard error.
WalkResult play_walk(long T, WalkStrategy& strategy, Rng& strategy_rng,
                     const std::function<double(long)>& noise);

/// Convenience wrapper drawing fair +-1/2 noise from a stream derived from
/// (seed, trial); the strategy gets an independent derived stream.
WalkResult play_walk(long T, WalkStrategy& strategy, std::uint64_t seed, std::uint64_t trial = 0);

/// Never moves; the walk is pure noise and |X_T| concentrates around
/// sqrt(T / (2 pi)) * sqrt(2) ~ 0.4 sqrt(T).
std::unique_ptr<WalkStrategy> make_zero_strategy();

/// Constant restoring drift eps against the sign of the position; total cost
/// ~ 1/eps + T eps^2, of order T^(1/3) at eps = T^(-1/3).
std::unique_ptr<WalkStrategy> make_fixed_drift(double eps);

/// Epoch strategy: on a remaining horizon L it lets the walk run free for
/// floor(L/2) steps, then pushes alpha_scale * sqrt(ln L) / sqrt(L) toward 0
/// (clamped to the move budget) until the position crosses 0 or reaches
/// magnitude <= 1, and recurses on the rest. Keeps the expected cost
/// polylogarithmic.
std::unique_ptr<WalkStrategy> make_epoch_drift(double alpha_scale);

/// Builds a strategy from a registry spec: "zero", "fixed-drift:<eps>",
/// "epoch-drift:<alpha_scale>".
std::unique_ptr<WalkStrategy> parse_walk_strategy(const std::string& spec);

}  // namespace seqcal
