#include <cmath>
#include <cstdlib>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "seqcal/rng.hpp"
#include "seqcal/simulate.hpp"

using namespace seqcal;

namespace {

/// Drives an adversary with a constant prediction stream and returns its
/// outcome sequence.
std::vector<std::uint8_t> drive(Adversary& a, long T, double pred, std::uint64_t seed) {
    std::vector<std::uint8_t> x;
    std::vector<double> p;
    Rng rng(seed);
    for (long t = 0; t < T; ++t) {
        GameView view{x, p, T};
        int bit = a.next(view, rng);
        REQUIRE((bit == 0 || bit == 1));
        x.push_back(std::uint8_t(bit));
        p.push_back(pred);
    }
    return x;
}

double balance_z(const std::vector<std::uint8_t>& x, double q) {
    double ones = 0.0;
    for (auto b : x) ones += b;
    double n = double(x.size());
    return (ones - n * q) / std::sqrt(n * q * (1.0 - q));
}

}  // namespace

TEST_CASE("bernoulli outcomes are fair within Monte Carlo tolerance") {
    auto a = make_bernoulli(0.5);
    std::vector<std::uint8_t> x = drive(*a, 100000, 0.5, 11);
    CHECK(std::abs(balance_z(x, 0.5)) < 4.89);  // two-sided p ~ 1e-6
}

TEST_CASE("bernoulli respects a skewed rate") {
    auto a = make_bernoulli(0.3);
    std::vector<std::uint8_t> x = drive(*a, 100000, 0.5, 12);
    CHECK(std::abs(balance_z(x, 0.3)) < 4.89);
}

TEST_CASE("bernoulli validates its rate") {
    CHECK_THROWS_AS(make_bernoulli(-0.1), std::invalid_argument);
    CHECK_THROWS_AS(make_bernoulli(1.1), std::invalid_argument);
}

TEST_CASE("fixed sequence replays and cycles its pattern") {
    auto a = make_fixed_sequence({1, 1, 0, 1});
    std::vector<std::uint8_t> x = drive(*a, 8, 0.5, 0);
    std::vector<std::uint8_t> expect = {1, 1, 0, 1, 1, 1, 0, 1};
    CHECK(x == expect);
    CHECK_THROWS_AS(make_fixed_sequence({}), std::invalid_argument);
    CHECK_THROWS_AS(make_fixed_sequence({2}), std::invalid_argument);
}

TEST_CASE("early-stopping adversary latches once the bias crosses the cutoff") {
    // Forced adaptive branch (weight 1). With constant 1/2 predictions the
    // trigger |S| >= 0.5 * T^(1/3) = 8 means the +-1/2 history walk left
    // [-8, 8]; from then on every outcome repeats the latched bit.
    auto a = make_early_stopping(0.5, 1.0);
    const long T = 4096;
    const double cutoff = 0.5 * std::cbrt(double(T));
    std::vector<std::uint8_t> x = drive(*a, T, 0.5, 31);

    double s = 0.0;
    long trigger = -1;
    for (long t = 0; t < T; ++t) {
        if (std::abs(s) >= cutoff) {
            trigger = t;
            break;
        }
        s += double(x[t]) - 0.5;
    }
    REQUIRE(trigger > 0);  // this seed crosses the cutoff well before 4096
    std::uint8_t latch = s > 0 ? 1 : 0;
    for (long t = trigger; t < T; ++t) CHECK(x[t] == latch);
}

TEST_CASE("a tiny threshold latches onto the very first outcome") {
    auto a = make_early_stopping(1.0 / 3600.0, 1.0);
    std::vector<std::uint8_t> x = drive(*a, 64, 0.5, 5);
    for (std::size_t t = 1; t < x.size(); ++t) CHECK(x[t] == x[0]);
}

TEST_CASE("zero adaptive weight keeps the coins fair all game") {
    auto a = make_early_stopping(0.5, 0.0);
    std::vector<std::uint8_t> x = drive(*a, 100000, 0.5, 17);
    CHECK(std::abs(balance_z(x, 0.5)) < 4.89);
}

TEST_CASE("early-stopping validates its parameters") {
    CHECK_THROWS_AS(make_early_stopping(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_early_stopping(0.5, 1.5), std::invalid_argument);
}

TEST_CASE("adversary registry resolves specs") {
    CHECK_NOTHROW(parse_adversary("bernoulli:0.4"));
    CHECK_NOTHROW(parse_adversary("fixed:1101"));
    CHECK_NOTHROW(parse_adversary("early-stop:0.5"));
    CHECK_NOTHROW(parse_adversary("early-stop:0.5:1.0"));
    CHECK_THROWS_AS(parse_adversary("fixed:12"), std::invalid_argument);
    CHECK_THROWS_AS(parse_adversary("nonsense"), std::invalid_argument);
}

TEST_CASE("seeded games replay byte for byte") {
    GameConfig cfg;
    cfg.T = 64;
    cfg.forecaster = "fixed-bias:0.2";
    cfg.adversary = "bernoulli:0.5";
    cfg.seed = 99;
    cfg.trial = 3;

    Transcript a = run_game(cfg);
    Transcript b = run_game(cfg);
    CHECK(a.x == b.x);
    CHECK(a.p == b.p);

    cfg.trial = 4;
    Transcript c = run_game(cfg);
    CHECK(a.x != c.x);  // independent trial stream
}

TEST_CASE("fixed adversary with constant forecaster gives the expected transcript") {
    GameConfig cfg;
    cfg.T = 4;
    cfg.forecaster = "constant:0.5";
    cfg.adversary = "fixed:1101";
    Transcript t = run_game(cfg);
    std::vector<std::uint8_t> expect = {1, 1, 0, 1};
    CHECK(t.x == expect);
    for (double v : t.p) CHECK(v == doctest::Approx(0.5));
}

TEST_CASE("players only ever see the completed history") {
    struct Probe final : Forecaster {
        long calls = 0;
        bool ok = true;
        double next(const GameView& view, Rng&) override {
            ok = ok && long(view.x.size()) == calls && long(view.p.size()) == calls;
            ++calls;
            return 0.5;
        }
    };
    struct ProbeAdv final : Adversary {
        long calls = 0;
        bool ok = true;
        int next(const GameView& view, Rng& rng) override {
            // The forecaster moves first each step, but its current move
            // must not be visible here.
            ok = ok && long(view.x.size()) == calls && long(view.p.size()) == calls;
            ++calls;
            return rng.coin();
        }
    };
    Probe f;
    ProbeAdv a;
    Rng frng(1), arng(2);
    Transcript t = run_game(32, f, a, frng, arng);
    CHECK(t.size() == 32);
    CHECK(f.calls == 32);
    CHECK(a.calls == 32);
    CHECK(f.ok);
    CHECK(a.ok);
}

TEST_CASE("run_game validates the horizon") {
    GameConfig cfg;
    cfg.T = 0;
    CHECK_THROWS_AS(run_game(cfg), std::invalid_argument);
}
