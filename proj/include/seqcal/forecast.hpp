#pragma once

#include <memory>
#include <string>

#include "seqcal/core.hpp"
#include "seqcal/rng.hpp"

namespace seqcal {

/// What a player sees when asked for step t: the completed history (both
/// vectors have length t-1) and the total horizon. Neither player ever sees
/// the other's move for the current step.
struct GameView {
    const std::vector<std::uint8_t>& x;
    const std::vector<double>& p;
    long horizon;
};

/// Stateful single-game prediction strategy. next() is called once per step,
/// in order; implementations may keep internal state keyed to the history
/// they have seen.
class Forecaster {
public:
    virtual ~Forecaster() = default;
    virtual double next(const GameView& view, Rng& rng) = 0;
};

/// Predicts 1/2 + eps * sign(S) where S is the running bias of the completed
/// steps (sign(0) = 0, so the first prediction is 1/2). Against arbitrary
/// outcomes the running bias stays O(1/eps) with exponential tails, giving
/// smooth calibration error O(T^(1/3)) at eps = T^(-1/3).
std::unique_ptr<Forecaster> make_fixed_bias(double eps);

/// Restarting two-phase strategy: on each round over the remaining horizon
/// L, predict 1/2 for floor(L/2) steps, then correct by
///     eps = sign(D) * min{ 2|D|/L + sqrt(ln(L)/L), 1/2 }
/// where D is the first half's bias, until the round's own bias returns to
/// [-1, 1] (then a new round starts on the remainder). Rounds at least halve
/// the horizon, so the transcript uses O(log T) distinct values and its
/// smooth calibration error is polylogarithmic.
std::unique_ptr<Forecaster> make_adaptive_bias();

/// Always predicts the same value.
std::unique_ptr<Forecaster> make_constant_forecaster(double value);

/// Builds a forecaster from a registry spec: "constant:<v>",
/// "fixed-bias:<eps>" (eps empty means T^(-1/3), resolved at game start),
/// "adaptive-bias".
std::unique_ptr<Forecaster> parse_forecaster(const std::string& spec, long horizon);

}  // namespace seqcal
