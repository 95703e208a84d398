#include <cmath>
#include <set>
#include <stdexcept>
#include <vector>

#include "doctest.h"
#include "seqcal/forecast.hpp"
#include "seqcal/rng.hpp"

using namespace seqcal;

namespace {

/// Feeds a fixed outcome pattern to a forecaster and records its predictions.
std::vector<double> drive(Forecaster& f, const std::vector<std::uint8_t>& bits, long horizon) {
    std::vector<std::uint8_t> x;
    std::vector<double> p;
    Rng rng(12345);
    for (std::uint8_t bit : bits) {
        GameView view{x, p, horizon};
        p.push_back(f.next(view, rng));
        x.push_back(bit);
    }
    return p;
}

}  // namespace

TEST_CASE("fixed-bias leans against the running bias") {
    auto f = make_fixed_bias(0.25);
    std::vector<double> p = drive(*f, {1, 1, 0}, 3);
    REQUIRE(p.size() == 3);
    CHECK(p[0] == doctest::Approx(0.5));   // S = 0
    CHECK(p[1] == doctest::Approx(0.75));  // S = +0.5
    CHECK(p[2] == doctest::Approx(0.75));  // S = +0.75
}

TEST_CASE("fixed-bias against all zeros locks low") {
    auto f = make_fixed_bias(0.25);
    std::vector<double> p = drive(*f, {0, 0, 0, 0}, 4);
    CHECK(p[0] == doctest::Approx(0.5));
    for (std::size_t i = 1; i < p.size(); ++i) CHECK(p[i] == doctest::Approx(0.25));
}

TEST_CASE("fixed-bias only ever plays three values") {
    auto f = make_fixed_bias(0.1);
    Rng coin(999);
    std::vector<std::uint8_t> bits;
    for (int i = 0; i < 200; ++i) bits.push_back(std::uint8_t(coin.coin()));
    std::vector<double> p = drive(*f, bits, 200);
    std::set<double> values(p.begin(), p.end());
    CHECK(values.size() <= 3);
    for (double v : values)
        CHECK((v == doctest::Approx(0.4) || v == doctest::Approx(0.5) || v == doctest::Approx(0.6)));
}

TEST_CASE("fixed-bias rejects out-of-range magnitudes") {
    CHECK_THROWS_AS(make_fixed_bias(0.0), std::invalid_argument);
    CHECK_THROWS_AS(make_fixed_bias(0.6), std::invalid_argument);
    CHECK_THROWS_AS(make_fixed_bias(-0.1), std::invalid_argument);
    CHECK_NOTHROW(make_fixed_bias(0.5));
}

TEST_CASE("adaptive-bias runs half fair then corrects hard") {
    // Horizon 4 against three ones: half phase predicts 1/2 twice and sees
    // bias +1, so the correction eps = min(2*1/4 + sqrt(ln 4 / 4), 1/2)
    // saturates at 1/2 and one corrected step at 1.0 settles the round; the
    // final round of length 1 starts fresh at 1/2.
    auto f = make_adaptive_bias();
    std::vector<double> p = drive(*f, {1, 1, 1, 0}, 4);
    REQUIRE(p.size() == 4);
    CHECK(p[0] == doctest::Approx(0.5));
    CHECK(p[1] == doctest::Approx(0.5));
    CHECK(p[2] == doctest::Approx(1.0));
    CHECK(p[3] == doctest::Approx(0.5));
}

TEST_CASE("adaptive-bias on a single step predicts a half") {
    auto f = make_adaptive_bias();
    std::vector<double> p = drive(*f, {1}, 1);
    CHECK(p[0] == doctest::Approx(0.5));
}

TEST_CASE("adaptive-bias stays within bounds and few distinct values") {
    for (std::uint64_t seed : {1ULL, 2ULL, 3ULL}) {
        for (long T : {64L, 257L, 1024L}) {
            auto f = make_adaptive_bias();
            Rng coin(seed);
            std::vector<std::uint8_t> bits;
            for (long i = 0; i < T; ++i) bits.push_back(std::uint8_t(coin.coin()));
            std::vector<double> p = drive(*f, bits, T);
            std::set<double> values(p.begin(), p.end());
            long budget = 2 * long(std::ceil(std::log2(double(T)))) + 1;
            CHECK(long(values.size()) <= budget);
            for (double v : p) {
                CHECK(v >= 0.0);
                CHECK(v <= 1.0);
            }
        }
    }
}

TEST_CASE("constant forecaster ignores the history") {
    auto f = make_constant_forecaster(0.37);
    std::vector<double> p = drive(*f, {1, 0, 1}, 3);
    for (double v : p) CHECK(v == doctest::Approx(0.37));
    CHECK_THROWS_AS(make_constant_forecaster(1.2), std::invalid_argument);
}

TEST_CASE("forecaster registry resolves names, arguments, defaults") {
    auto fb = parse_forecaster("fixed-bias:0.25", 0);
    std::vector<double> p = drive(*fb, {1, 1, 0}, 3);
    CHECK(p[1] == doctest::Approx(0.75));

    // Bare fixed-bias resolves eps = T^(-1/3) from the horizon.
    auto fb_auto = parse_forecaster("fixed-bias", 8);
    std::vector<double> q = drive(*fb_auto, {1, 1}, 8);
    CHECK(q[1] == doctest::Approx(0.5 + std::pow(8.0, -1.0 / 3.0)));

    auto c = parse_forecaster("constant:0.9", 1);
    CHECK(drive(*c, {0}, 1)[0] == doctest::Approx(0.9));

    CHECK_NOTHROW(parse_forecaster("adaptive-bias", 4));
    CHECK_THROWS_AS(parse_forecaster("fixed-bias", 0), std::invalid_argument);
    CHECK_THROWS_AS(parse_forecaster("nonsense", 4), std::invalid_argument);
}

TEST_CASE("forecasters are deterministic replays of the history") {
    for (const char* spec : {"fixed-bias:0.2", "adaptive-bias", "constant:0.5"}) {
        auto f1 = parse_forecaster(spec, 64);
        auto f2 = parse_forecaster(spec, 64);
        Rng coin(4242);
        std::vector<std::uint8_t> bits;
        for (int i = 0; i < 64; ++i) bits.push_back(std::uint8_t(coin.coin()));
        std::vector<double> a = drive(*f1, bits, 64);
        std::vector<double> b = drive(*f2, bits, 64);
        for (std::size_t i = 0; i < a.size(); ++i) CHECK(a[i] == b[i]);
    }
}
