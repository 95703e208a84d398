#pragma once

#include <memory>
#include <string>

#include "seqcal/forecast.hpp"

namespace seqcal {

/// Stateful single-game outcome strategy. Sees the same view as the
/// forecaster — in particular never the prediction for the step being
/// decided.
class Adversary {
public:
    virtual ~Adversary() = default;
    virtual int next(const GameView& view, Rng& rng) = 0;
};

/// Independent coin flips with success probability q.
std::unique_ptr<Adversary> make_bernoulli(double q);

/// Replays a fixed bit pattern, cycling when the horizon is longer.
std::unique_ptr<Adversary> make_fixed_sequence(std::vector<std::uint8_t> bits);

/// Mixture opponent targeting the T^(1/3) lower bound: with probability
/// adaptive_weight it plays fair coins until the running bias |S| first
/// reaches c * T^(1/3) and then locks onto the constant outcome pushing the
/// bias further (1 if S > 0 else 0); otherwise it plays fair coins all game.
std::unique_ptr<Adversary> make_early_stopping(double c, double adaptive_weight = 0.5);

/// Builds an adversary from a registry spec: "bernoulli:<q>",
/// "fixed:<bitstring>", "early-stop:<c>[:<adaptive_weight>]".
std::unique_ptr<Adversary> parse_adversary(const std::string& spec);

struct GameConfig {
    long T = 0;
    std::string forecaster;
    std::string adversary;
    std::uint64_t seed = 0;
    std::uint64_t trial = 0;
};

/// Plays one full game. Both players draw from independent streams derived
/// from (seed, trial), so games are reproducible and adding randomness to
/// one player never shifts the other.
Transcript run_game(const GameConfig& cfg);

/// Same loop against caller-owned players and streams (useful for probes).
Transcript run_game(long T, Forecaster& forecaster, Adversary& adversary, Rng& frng, Rng& arng);

}  // namespace seqcal
