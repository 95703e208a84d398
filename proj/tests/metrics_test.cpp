#include <algorithm>
#include <cmath>
#include <map>
#include <stdexcept>
#include <string>
#include <vector>

#include "doctest.h"
#include "seqcal/harness.hpp"
#include "seqcal/metrics.hpp"
#include "seqcal/rng.hpp"

using namespace seqcal;

namespace {

Transcript make(std::vector<int> x, std::vector<double> p) {
    std::vector<std::uint8_t> bits(x.begin(), x.end());
    return Transcript(std::move(bits), std::move(p));
}

double witness_correlation(const Transcript& t, const LipschitzWitness& f) {
    double s = 0.0;
    for (std::size_t i = 0; i < t.size(); ++i) s += f(t.p[i]) * (t.x[i] - t.p[i]);
    return s;
}

}  // namespace

// ---------------------------------------------------------------------------
// ece
// ---------------------------------------------------------------------------

TEST_CASE("ece of a perfectly calibrated transcript is zero") {
    CHECK(ece(make({1, 0}, {0.5, 0.5})) == doctest::Approx(0.0));
}

TEST_CASE("ece sums absolute bias over distinct values") {
    CHECK(ece(make({1, 0}, {0.3, 0.6})) == doctest::Approx(1.3));
    CHECK(ece(make({1}, {0.4})) == doctest::Approx(0.6));
}

TEST_CASE("ece blows up on all-distinct near-half predictions") {
    Transcript t = make({0, 1, 0, 1}, {0.501, 0.502, 0.503, 0.504});
    CHECK(ece(t) == doctest::Approx(1.998).epsilon(1e-12));
}

TEST_CASE("ece of the two-sided witness instance") {
    Transcript t = make({0, 1, 0, 1}, {0.48, 0.48, 0.52, 0.52});
    CHECK(ece(t) == doctest::Approx(0.08).epsilon(1e-12));
}

// ---------------------------------------------------------------------------
// smce
// ---------------------------------------------------------------------------

TEST_CASE("smce of a single biased step takes the constant witness") {
    SmceResult r = smce(make({1}, {0.3}));
    CHECK(r.value == doctest::Approx(0.7).epsilon(1e-12));
    CHECK(r.witness(0.3) == doctest::Approx(1.0));
}

TEST_CASE("smce vanishes on a calibrated transcript") {
    SmceResult r = smce(make({1, 0}, {0.5, 0.5}));
    CHECK(r.value == doctest::Approx(0.0).epsilon(1e-12));
}

TEST_CASE("smce on opposite biases pays the Lipschitz coupling") {
    // Biases +0.7 at 0.3 and -0.6 at 0.6: the optimal test function pins
    // f(0.3) = 1 and can only drop to 0.7 at 0.6, giving 0.7 - 0.42 = 0.28.
    SmceResult r = smce(make({1, 0}, {0.3, 0.6}));
    CHECK(r.value == doctest::Approx(0.28).epsilon(1e-12));
    CHECK(r.witness(0.3) == doctest::Approx(1.0));
    CHECK(r.witness(0.6) == doctest::Approx(0.7));
    CHECK(r.diag.duality_gap <= 1e-9);
}

TEST_CASE("smce witness is feasible and reproduces the value") {
    Rng rng(2024);
    for (int rep = 0; rep < 50; ++rep) {
        Transcript t = random_transcript(long(rng.uniform_int(1, 10)), rng);
        SmceResult r = smce(t);
        CHECK(r.witness.constraint_violation() <= 1e-9);
        CHECK(witness_correlation(t, r.witness) == doctest::Approx(r.value).epsilon(1e-9));
    }
}

TEST_CASE("smce dominates the absolute total bias and never exceeds ece") {
    Rng rng(77);
    for (int rep = 0; rep < 50; ++rep) {
        Transcript t = random_transcript(long(rng.uniform_int(1, 10)), rng);
        double total = 0.0;
        for (std::size_t i = 0; i < t.size(); ++i) total += t.x[i] - t.p[i];
        SmceResult r = smce(t);
        CHECK(r.value >= std::abs(total) - 1e-9);
        CHECK(r.value <= ece(t) + 1e-9);
    }
}

TEST_CASE("smce of the two-sided witness instance is quadratically small") {
    Transcript t = make({0, 1, 0, 1}, {0.48, 0.48, 0.52, 0.52});
    CHECK(smce(t).value == doctest::Approx(0.0016).epsilon(1e-9));
}

// ---------------------------------------------------------------------------
// two-point witness
// ---------------------------------------------------------------------------

TEST_CASE("two-point witness with equal signs is the constant function") {
    TwoPointResult r = two_point_witness(0.2, 0.8, 1.0, 2.0);
    CHECK(r.value == doctest::Approx(3.0));
    CHECK(r.witness(0.2) == doctest::Approx(1.0));
    CHECK(r.witness(0.8) == doctest::Approx(1.0));
}

TEST_CASE("two-point witness with opposite signs anchors the larger bias") {
    TwoPointResult r = two_point_witness(0.3, 0.6, 0.7, -0.6);
    CHECK(r.value == doctest::Approx(0.28).epsilon(1e-12));
    CHECK(r.witness(0.3) == doctest::Approx(1.0));
    CHECK(r.witness(0.6) == doctest::Approx(0.7));
}

TEST_CASE("two-point witness of cancelling biases at one value is zero") {
    CHECK(two_point_witness(0.5, 0.5, 1.0, -1.0).value == doctest::Approx(0.0));
}

TEST_CASE("two-point witness rejects values outside the unit interval") {
    CHECK_THROWS_AS(two_point_witness(-0.1, 0.5, 1.0, 1.0), std::invalid_argument);
    CHECK_THROWS_AS(two_point_witness(0.1, 1.5, 1.0, 1.0), std::invalid_argument);
}

TEST_CASE("two-point closed form matches the LP on two-value transcripts") {
    Rng rng(31);
    for (int rep = 0; rep < 40; ++rep) {
        double alpha = rng.uniform();
        double beta = rng.uniform();
        if (alpha > beta) std::swap(alpha, beta);
        if (beta - alpha < 1e-6) beta = std::min(1.0, alpha + 0.25);
        // A few steps at each value with random outcomes.
        std::vector<std::uint8_t> x;
        std::vector<double> p;
        for (int i = 0; i < 4; ++i) {
            x.push_back(std::uint8_t(rng.coin()));
            p.push_back(alpha);
        }
        for (int i = 0; i < 3; ++i) {
            x.push_back(std::uint8_t(rng.coin()));
            p.push_back(beta);
        }
        Transcript t(x, p);
        BiasProfile b = bias_profile(t);
        REQUIRE(b.size() == 2);
        TwoPointResult closed = two_point_witness(b.alpha[0], b.alpha[1], b.delta[0], b.delta[1]);
        CHECK(closed.value == doctest::Approx(smce(t).value).epsilon(1e-9));
        CHECK(closed.witness.constraint_violation() <= 1e-9);
        CHECK(witness_correlation(t, closed.witness) ==
              doctest::Approx(closed.value).epsilon(1e-9));
    }
}

// ---------------------------------------------------------------------------
// caldist_exact
// ---------------------------------------------------------------------------

TEST_CASE("exact distance of already calibrated predictions is zero") {
    CaldistResult r = caldist_exact(make({1, 0}, {1.0, 0.0}));
    CHECK(r.value == doctest::Approx(0.0));
    CHECK(calibration_check(std::vector<std::uint8_t>{1, 0}, r.certificate.q));
}

TEST_CASE("exact distance of the two-sided witness instance is 4 eps") {
    Transcript t = make({0, 1, 0, 1}, {0.48, 0.48, 0.52, 0.52});
    CaldistResult r = caldist_exact(t);
    CHECK(r.value == doctest::Approx(0.08).epsilon(1e-12));

    // Same instance through the exact-rational path (decimal literals).
    Transcript lit({0, 1, 0, 1}, {0.48, 0.48, 0.52, 0.52},
                   {"0.48", "0.48", "0.52", "0.52"});
    CHECK(caldist_exact(lit).value == doctest::Approx(0.08).epsilon(1e-12));
}

TEST_CASE("exact distance tie resolves to the first enumerated partition") {
    // Merging both steps at 1/2 and splitting them apart both cost 0.5;
    // the single-block grouping is enumerated first and must win.
    CaldistResult r = caldist_exact(make({1, 0}, {0.9, 0.4}));
    CHECK(r.value == doctest::Approx(0.5).epsilon(1e-12));
    REQUIRE(r.certificate.q.size() == 2);
    CHECK(r.certificate.q[0] == doctest::Approx(0.5));
    CHECK(r.certificate.q[1] == doctest::Approx(0.5));
    REQUIRE(r.certificate.block.size() == 2);
    CHECK(r.certificate.block[0] == r.certificate.block[1]);
}

TEST_CASE("enumeration cap is enforced by name") {
    Transcript t = make(std::vector<int>(13, 1), std::vector<double>(13, 0.5));
    try {
        caldist_exact(t);
        FAIL("expected invalid_argument");
    } catch (const std::invalid_argument& e) {
        CHECK(std::string(e.what()).find("cap") != std::string::npos);
    }
    CHECK_THROWS_AS(caldist_exact(make({1}, {0.5}), 0), std::invalid_argument);
}

TEST_CASE("exact certificate is calibrated, priced correctly, block-consistent") {
    Rng rng(411);
    for (int rep = 0; rep < 30; ++rep) {
        Transcript t = random_transcript(long(rng.uniform_int(1, 8)), rng);
        CaldistResult r = caldist_exact(t);
        CHECK(calibration_check(t.x, r.certificate.q, 1e-9));
        CHECK(l1_distance(t.p, r.certificate.q) == doctest::Approx(r.value).epsilon(1e-12));
        CHECK(r.value <= ece(t) + 1e-12);

        // Every block's q value equals its outcome mean.
        std::map<int, std::pair<double, long>> blocks;  // id -> (ones, size)
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto&[ones, size] = blocks[r.certificate.block[i]];
            ones += t.x[i];
            size += 1;
        }
        for (std::size_t i = 0; i < t.size(); ++i) {
            auto& [ones, size] = blocks[r.certificate.block[i]];
            CHECK(r.certificate.q[i] == doctest::Approx(ones / double(size)).epsilon(1e-12));
        }
    }
}

// ---------------------------------------------------------------------------
// bucket means
// ---------------------------------------------------------------------------

TEST_CASE("bucket means replace each value group by its outcome frequency") {
    CalibratedPredictions r = bucket_mean_predictions(make({1, 0}, {0.9, 0.4}));
    REQUIRE(r.q.size() == 2);
    CHECK(r.q[0] == doctest::Approx(1.0));
    CHECK(r.q[1] == doctest::Approx(0.0));

    CalibratedPredictions s = bucket_mean_predictions(make({1, 1, 0}, {0.7, 0.7, 0.7}));
    for (double v : s.q) CHECK(v == doctest::Approx(2.0 / 3.0));
}

TEST_CASE("bucket means are calibrated and move exactly ece") {
    Rng rng(555);
    for (int rep = 0; rep < 40; ++rep) {
        Transcript t = random_transcript(long(rng.uniform_int(1, 12)), rng);
        CalibratedPredictions r = bucket_mean_predictions(t);
        CHECK(calibration_check(t.x, r.q, 1e-9));
        CHECK(l1_distance(t.p, r.q) == doctest::Approx(ece(t)).epsilon(1e-9));
    }
}
