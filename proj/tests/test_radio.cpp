#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <limits>
#include <random>

#include "pfdoa/radio.hpp"

using namespace pfdoa;

TEST_CASE("predict_rssi reference values") {
    const PathLossModel m2(-40, 2, 0);
    CHECK(predict_rssi(m2, 1.0) == -40.0);
    CHECK(predict_rssi(m2, 10.0) == doctest::Approx(-60.0).epsilon(1e-15));
    // -40 - 30*log10(2.5), evaluated offline at 50 digits
    const PathLossModel m3(-40, 3, 0);
    CHECK(predict_rssi(m3, 2.5) == doctest::Approx(-51.93820026016113).epsilon(1e-14));
}

TEST_CASE("predict_rssi clamps tiny distances") {
    const PathLossModel m(-40, 2, 0);
    CHECK(predict_rssi(m, 0.0) == predict_rssi(m, 0.01));
    CHECK(predict_rssi(m, 1e-6) == predict_rssi(m, 0.01));
    CHECK(predict_rssi(m, -3.0) == predict_rssi(m, 0.01));
    CHECK(predict_rssi(m, 0.01) == doctest::Approx(0.0));
}

TEST_CASE("predict_rssi rejects non-finite distance") {
    const PathLossModel m;
    CHECK_THROWS_AS(predict_rssi(m, std::numeric_limits<double>::infinity()), Error);
    CHECK_THROWS_AS(predict_rssi(m, std::nan("")), Error);
}

TEST_CASE("model validation") {
    CHECK_THROWS_AS(PathLossModel(-40, 0, 1), Error);
    CHECK_THROWS_AS(PathLossModel(-40, -2, 1), Error);
    CHECK_THROWS_AS(PathLossModel(-40, 2, -0.1), Error);
    CHECK_THROWS_AS(PathLossModel(std::nan(""), 2, 0), Error);
    CHECK_NOTHROW(PathLossModel(-40, 6, 4));
    CHECK(PathLossModel(-40, 3, 1).with_noise(2.5).noise_std_dbm() == 2.5);
}

TEST_CASE("invert_rssi_to_distance") {
    const PathLossModel m(-40, 2, 0);
    CHECK(invert_rssi_to_distance(m, -60) == doctest::Approx(10.0).epsilon(1e-14));
    CHECK(invert_rssi_to_distance(m, -40) == 1.0);
    for (double d : {0.5, 3.0, 17.0}) CHECK(invert_rssi_to_distance(m, predict_rssi(m, d)) == doctest::Approx(d));
    CHECK(invert_rssi_to_distance(m, 100.0) > 0.0);
    CHECK(invert_rssi_to_distance(m, -300.0) > 0.0);
}

TEST_CASE("round trip over a distance sweep") {
    for (double n : {2.0, 3.0, 4.5, 6.0}) {
        const PathLossModel m(-45, n, 0);
        for (double d = 0.01; d < 200.0; d *= 1.37)
            CHECK(std::abs(invert_rssi_to_distance(m, predict_rssi(m, d)) - d) <= 1e-9 * d);
    }
}

TEST_CASE("predict_rssi strictly decreasing") {
    const PathLossModel m(-40, 2.7, 0);
    double prev = predict_rssi(m, 0.01);
    for (double d = 0.011; d < 100.0; d *= 1.05) {
        const double cur = predict_rssi(m, d);
        CHECK(cur < prev);
        prev = cur;
    }
}

TEST_CASE("zero-noise sampling is exact") {
    const PathLossModel m(-40, 2, 0);
    std::mt19937_64 rng(7);
    CHECK(sample_rssi(m, 10.0, rng) == -60.0);
    for (double d : {0.3, 1.7, 4.2}) CHECK(sample_rssi(m, d, rng) == predict_rssi(m, d));
}

TEST_CASE("sample moments") {
    const PathLossModel m(-40, 3, 2.0);
    std::mt19937_64 rng(12345);
    constexpr int kDraws = 100000;
    const double truth = predict_rssi(m, 2.5);
    double sum = 0, sq = 0;
    for (int i = 0; i < kDraws; ++i) {
        const double v = sample_rssi(m, 2.5, rng);
        sum += v;
        sq += v * v;
    }
    const double mean = sum / kDraws;
    const double std = std::sqrt((sq - kDraws * mean * mean) / (kDraws - 1));
    CHECK(std::abs(mean - truth) <= 3 * 2.0 / std::sqrt(double(kDraws)));
    CHECK(std == doctest::Approx(2.0).epsilon(0.025));
}
