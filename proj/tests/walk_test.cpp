#include <cmath>
#include <functional>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "seqcal/rng.hpp"
#include "seqcal/walk.hpp"

using namespace seqcal;

namespace {

std::function<double(long)> alternating_noise() {
    return [](long t) { return t % 2 == 0 ? 0.5 : -0.5; };
}

std::function<double(long)> constant_noise(double v) {
    return [v](long) { return v; };
}

}  // namespace

TEST_CASE("zero strategy under alternating noise returns home for free") {
    auto s = make_zero_strategy();
    Rng rng(1);
    WalkResult r = play_walk(64, *s, rng, alternating_noise());
    REQUIRE(r.positions.size() == 65);
    CHECK(r.positions[0] == doctest::Approx(0.0));
    CHECK(r.positions[1] == doctest::Approx(0.5));
    CHECK(r.final_abs == doctest::Approx(0.0));
    CHECK(r.control_cost == doctest::Approx(0.0));
    CHECK(r.total_cost == doctest::Approx(0.0));
    REQUIRE(r.noises.size() == 64);
    CHECK(r.noises[0] == doctest::Approx(0.5));
    CHECK(r.noises[1] == doctest::Approx(-0.5));
}

TEST_CASE("a single-step walk costs the lone noise step") {
    auto s = make_zero_strategy();
    Rng rng(1);
    WalkResult r = play_walk(1, *s, rng, alternating_noise());
    CHECK(r.final_abs == doctest::Approx(0.5));
    CHECK(r.total_cost == doctest::Approx(0.5));
}

TEST_CASE("fixed drift pushes against the sign of the position") {
    auto s = make_fixed_drift(0.25);
    Rng rng(1);
    WalkResult r = play_walk(3, *s, rng, constant_noise(0.5));
    REQUIRE(r.drifts.size() == 3);
    CHECK(r.drifts[0] == doctest::Approx(0.0));    // sign(0) = 0
    CHECK(r.drifts[1] == doctest::Approx(-0.25));  // position 0.5
    CHECK(r.drifts[2] == doctest::Approx(-0.25));  // position 0.75
    CHECK(r.positions[3] == doctest::Approx(1.0));
    CHECK(r.control_cost == doctest::Approx(0.125));
    CHECK(r.total_cost == doctest::Approx(1.125));
}

TEST_CASE("fixed drift magnitude is capped at the move budget") {
    CHECK_NOTHROW(make_fixed_drift(0.0));
    CHECK_NOTHROW(make_fixed_drift(0.5));
    CHECK_THROWS_AS(make_fixed_drift(0.51), std::invalid_argument);
    CHECK_THROWS_AS(make_fixed_drift(-0.1), std::invalid_argument);
}

TEST_CASE("a strategy overdrawing the move budget is a hard error") {
    struct Cheater final : WalkStrategy {
        double next(double, long, long, Rng&) override { return 0.6; }
    };
    Cheater s;
    Rng rng(1);
    CHECK_THROWS_AS(play_walk(4, s, rng, alternating_noise()), std::runtime_error);
}

TEST_CASE("noise must be exactly plus or minus a half") {
    auto s = make_zero_strategy();
    Rng rng(1);
    CHECK_THROWS_AS(play_walk(4, *s, rng, constant_noise(0.4)), std::runtime_error);
    CHECK_THROWS_AS(play_walk(0, *s, rng, alternating_noise()), std::invalid_argument);
}

TEST_CASE("steps recompose exactly and costs add up") {
    auto s = make_fixed_drift(0.2);
    WalkResult r = play_walk(500, *s, 77, 3);
    REQUIRE(r.positions.size() == 501);
    REQUIRE(r.drifts.size() == 500);
    REQUIRE(r.noises.size() == 500);
    double cc = 0.0;
    for (long t = 0; t < 500; ++t) {
        CHECK(r.positions[t + 1] == doctest::Approx(r.positions[t] + r.drifts[t] + r.noises[t])
                                        .epsilon(1e-12));
        CHECK(std::abs(r.noises[t]) == doctest::Approx(0.5));
        CHECK(std::abs(r.drifts[t]) <= 0.5 + 1e-12);
        cc += r.drifts[t] * r.drifts[t];
    }
    CHECK(r.control_cost == doctest::Approx(cc).epsilon(1e-12));
    CHECK(r.final_abs == doctest::Approx(std::abs(r.positions.back())));
    CHECK(r.total_cost == doctest::Approx(r.final_abs + r.control_cost).epsilon(1e-12));
}

TEST_CASE("seeded walks replay and trials decouple") {
    auto s1 = make_epoch_drift(1.0);
    auto s2 = make_epoch_drift(1.0);
    WalkResult a = play_walk(256, *s1, 42, 7);
    WalkResult b = play_walk(256, *s2, 42, 7);
    CHECK(a.positions == b.positions);
    CHECK(a.drifts == b.drifts);

    auto s3 = make_epoch_drift(1.0);
    WalkResult c = play_walk(256, *s3, 42, 8);
    CHECK(a.noises != c.noises);
}

TEST_CASE("epoch drift stays bounded under alternating noise") {
    auto s = make_epoch_drift(1.0);
    Rng rng(1);
    WalkResult r = play_walk(64, *s, rng, alternating_noise());
    for (double v : r.positions) CHECK(std::abs(v) <= 1.5);
    CHECK(r.total_cost <= 5.0);
}

TEST_CASE("epoch drift with zero scale degenerates to the zero strategy") {
    auto epoch = make_epoch_drift(0.0);
    auto zero = make_zero_strategy();
    Rng r1(1), r2(1);
    WalkResult a = play_walk(128, *epoch, r1, alternating_noise());
    WalkResult b = play_walk(128, *zero, r2, alternating_noise());
    CHECK(a.positions == b.positions);
    CHECK(a.control_cost == doctest::Approx(0.0));
    CHECK_THROWS_AS(make_epoch_drift(-1.0), std::invalid_argument);
}

TEST_CASE("epoch drift keeps the mean cost polylogarithmic") {
    const long T = 1L << 14;
    const int trials = 100;
    double sum = 0.0;
    for (int k = 0; k < trials; ++k) {
        auto s = make_epoch_drift(1.0);
        sum += play_walk(T, *s, 2026, std::uint64_t(k)).total_cost;
    }
    double mean = sum / trials;
    double bound = 5.0 * std::pow(std::log(double(T)), 1.5);
    CHECK(mean <= bound);
}

TEST_CASE("pure noise drifts to the expected magnitude") {
    const long T = 2500;
    const int trials = 800;
    double sum = 0.0;
    for (int k = 0; k < trials; ++k) {
        auto s = make_zero_strategy();
        sum += play_walk(T, *s, 515, std::uint64_t(k)).final_abs;
    }
    double mean = sum / trials;  // E|X_T| ~ 0.399 sqrt(T) = 19.95
    CHECK(mean >= 17.5);
    CHECK(mean <= 22.5);
}

TEST_CASE("walk strategy registry resolves specs") {
    CHECK_NOTHROW(parse_walk_strategy("zero"));
    CHECK_NOTHROW(parse_walk_strategy("fixed-drift:0.2"));
    CHECK_NOTHROW(parse_walk_strategy("epoch-drift"));
    CHECK_NOTHROW(parse_walk_strategy("epoch-drift:2.0"));
    CHECK_THROWS_AS(parse_walk_strategy("fixed-drift:0.7"), std::invalid_argument);
    CHECK_THROWS_AS(parse_walk_strategy("nonsense"), std::invalid_argument);

    // Bare fixed-drift resolves eps = T^(-1/3) when the walk starts.
    auto s = parse_walk_strategy("fixed-drift");
    Rng rng(1);
    WalkResult r = play_walk(1000, *s, rng, constant_noise(0.5));
    CHECK(r.drifts[0] == doctest::Approx(0.0));
    CHECK(r.drifts[1] == doctest::Approx(-0.1));  // 1000^(-1/3)
}
