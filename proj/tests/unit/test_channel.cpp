#include "decoyqkd/channel.hpp"

#include "decoyqkd/rng.hpp"
#include "support/checks.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace decoyqkd::channel;
using test_support::rel_diff;

namespace {

DetectorParams det(double dark, double misalign) {
    DetectorParams d;
    d.dark_count_rate = dark;
    d.misalignment_error = misalign;
    return d;
}

} // namespace

TEST_CASE("transmittance halves every half distance") {
    ChannelModel ch;
    ch.base_transmittance = 0.1;
    ch.half_distance_km = 15.0;

    ch.distance_km = 0.0;
    CHECK(transmittance(ch) == 0.1);
    ch.distance_km = 15.0;
    CHECK(rel_diff(transmittance(ch), 0.05) <= 1e-15);
    ch.distance_km = 45.0;
    CHECK(transmittance(ch) == 0.0125); // 0.1 / 8, exact in binary

    ch.distance_km = -1.0;
    CHECK_THROWS_AS(transmittance(ch), std::domain_error);
}

TEST_CASE("channel and detector validation") {
    ChannelModel ch;
    CHECK_NOTHROW(ch.validate());
    ch.base_transmittance = 0.0;
    CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
    ch.base_transmittance = 1.5;
    CHECK_THROWS_AS(ch.validate(), std::invalid_argument);
    ch = ChannelModel{};
    ch.half_distance_km = 0.0;
    CHECK_THROWS_AS(ch.validate(), std::invalid_argument);

    DetectorParams d;
    CHECK_NOTHROW(d.validate());
    d.dark_count_rate = 0.02; // an avalanche of darks is a config bug
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = DetectorParams{};
    d.misalignment_error = 0.5;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
    d = DetectorParams{};
    d.error_correction_inefficiency = 0.99;
    CHECK_THROWS_AS(d.validate(), std::invalid_argument);
}

TEST_CASE("expected yield") {
    const auto d = det(1e-5, 0.01);
    CHECK(expected_yield(0.0, 0.3, d) == 1e-5);
    CHECK(rel_diff(expected_yield(0.5, 0.1, d), 0.048780575499285994) <= 1e-12);
    // Monotone in intensity.
    double prev = 0.0;
    for (int k = 1; k <= 20; ++k) {
        const double y = expected_yield(0.05 * k, 0.1, d);
        CHECK(y > prev);
        prev = y;
    }
    CHECK_THROWS_AS(expected_yield(-0.1, 0.1, d), std::domain_error);
    CHECK_THROWS_AS(expected_yield(0.1, 1.1, d), std::domain_error);
    CHECK_THROWS_AS(expected_yield(0.1, -0.1, d), std::domain_error);
}

TEST_CASE("expected qber") {
    const auto d = det(1e-5, 0.01);
    // Pure dark counts are random.
    CHECK(expected_qber(0.0, 0.3, d) == 0.5);
    CHECK(rel_diff(expected_qber(0.5, 0.1, d), 0.010100449819417805) <= 1e-12);
    // Perfect optics, no background: no errors at all.
    CHECK(expected_qber(0.5, 0.1, det(0.0, 0.0)) == 0.0);
    // Zero yield leaves the QBER undefined.
    CHECK_THROWS_AS(expected_qber(0.0, 0.3, det(0.0, 0.01)), std::domain_error);
}

TEST_CASE("qber stays within (0, 1/2] when background is present") {
    const auto d = det(1.7e-6, 0.033);
    for (int k = 0; k <= 40; ++k) {
        const double intensity = 0.05 * k;
        const double e = expected_qber(intensity, 0.01, d);
        CHECK(e > 0.0);
        CHECK(e <= 0.5);
    }
}

TEST_CASE("yield is invariant under intensity-transmittance rescaling") {
    const auto d = det(1.7e-6, 0.033);
    for (std::uint64_t i = 0; i < 200; ++i) {
        decoyqkd::rng::Stream stream(7, i);
        const double intensity = 0.05 + stream.next_unit();
        const double eta = 0.001 + 0.4 * stream.next_unit();
        const double lambda = 1.0 + stream.next_unit(); // [1, 2)
        const double direct = expected_yield(intensity, eta, d);
        const double rescaled =
            expected_yield(intensity * lambda, eta / lambda, d);
        CHECK(rel_diff(direct, rescaled) <= 1e-12);
    }
}
