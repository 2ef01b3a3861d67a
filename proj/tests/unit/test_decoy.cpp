#include "decoyqkd/decoy.hpp"

#include "decoyqkd/photonics.hpp"
#include "support/checks.hpp"
#include "support/random_tuples.hpp"

#include <doctest.h>

#include <cmath>
#include <stdexcept>

using namespace decoyqkd::decoy;
using test_support::honest_rate;
using test_support::honest_y1;
using test_support::random_rate_tuples;
using test_support::rel_diff;

namespace {

// The worked reference case: mu = 0.3, mu' = 0.6, s0 = 1e-5, rates from
// an honest channel with eta = 0.1.
constexpr double kMu = 0.3;
constexpr double kMuPrime = 0.6;
constexpr double kS0 = 1e-5;
constexpr double kSMu = 0.0295644664514918;
constexpr double kSMuPrime = 0.0582454664157513;
constexpr double kS1Closed = 0.08911877054945241;
constexpr double kY1True = 0.100009; // 1 - (1-s0)(1-eta)

ObservedRates example_rates() {
    ObservedRates r;
    r.s_mu = kSMu;
    r.s_mu_prime = kSMuPrime;
    r.e_mu = 0.02;
    r.e_mu_prime = 0.02;
    r.s_vac = kS0;
    r.n_mu = 1e9;
    r.n_mu_prime = 1e9;
    r.n_vac = 1e8;
    return r;
}

} // namespace

TEST_CASE("observed rates validation") {
    ObservedRates r = example_rates();
    CHECK_NOTHROW(r.validate());
    r.s_mu = 1.2;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = example_rates();
    r.e_mu_prime = -0.1;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
    r = example_rates();
    r.n_vac = -1.0;
    CHECK_THROWS_AS(r.validate(), std::invalid_argument);
}

TEST_CASE("rate ordering oddities warn but do not abort") {
    ObservedRates r = example_rates();
    CHECK(r.sanity_warnings().empty());
    std::swap(r.s_mu, r.s_mu_prime); // signal counting below decoy
    CHECK_NOTHROW(r.validate());
    CHECK(r.sanity_warnings().size() == 1);
}

TEST_CASE("vacuum yield") {
    ObservedRates r = example_rates();
    CHECK(vacuum_yield(r) == kS0);
    r.n_vac = 0.0;
    CHECK_THROWS_AS(vacuum_yield(r), MissingVacuumDataError);
}

TEST_CASE("single-photon bound on the reference case") {
    const double s1 = solve_s1_lower(kMu, kMuPrime, kSMu, kSMuPrime, kS0);
    CHECK(rel_diff(s1, kS1Closed) <= 1e-12);
    // Sound: never above the true single-photon yield.
    CHECK(s1 <= kY1True);
    // Grid oracle lands on the next knot above the bound.
    const double oracle =
        brute_force_s1_oracle(kMu, kMuPrime, kSMu, kSMuPrime, kS0, 1e-5);
    CHECK(rel_diff(oracle, 0.08912) <= 1e-12);
    CHECK(std::abs(s1 - oracle) <= 1e-5);
}

TEST_CASE("bound requires ordered intensities") {
    CHECK_THROWS_AS(solve_s1_lower(0.6, 0.3, kSMu, kSMuPrime, kS0),
                    std::domain_error);
    CHECK_THROWS_AS(solve_s1_lower(0.3, 0.3, kSMu, kSMuPrime, kS0),
                    std::domain_error);
    CHECK_THROWS_AS(solve_s1_lower(0.0, 0.3, kSMu, kSMuPrime, kS0),
                    std::domain_error);
    CHECK_THROWS_AS(
        brute_force_s1_oracle(0.6, 0.3, kSMu, kSMuPrime, kS0, 1e-4),
        std::domain_error);
}

TEST_CASE("zero-transmittance rates cancel to a zero bound") {
    for (double s0 : {1.7e-6, 0.01, 0.8}) {
        const double s_mu = std::exp(-kMu) * s0;
        const double s_mu_prime = std::exp(-kMuPrime) * s0;
        const double s1 = solve_s1_lower(kMu, kMuPrime, s_mu, s_mu_prime, s0);
        CHECK(std::abs(s1) <= 1e-12);
        const double oracle =
            brute_force_s1_oracle(kMu, kMuPrime, s_mu, s_mu_prime, s0, 1e-4);
        CHECK(oracle == 0.0);
    }
}

TEST_CASE("contradictory rates are reported as infeasible") {
    // Signal intensity counting far too rarely: forces s1 above 1.
    CHECK_THROWS_AS(solve_s1_lower(0.3, 0.6, 0.5, 0.2, 0.0), InfeasibleError);
    try {
        solve_s1_lower(0.3, 0.6, 0.5, 0.2, 0.0);
    } catch (const InfeasibleError& e) {
        CHECK(e.violation() > 0.0);
    }
    // Vacuum clicking more often than the decoy data can absorb.
    CHECK_THROWS_AS(solve_s1_lower(0.3, 0.6, 0.1, 0.5, 0.9), InfeasibleError);
    CHECK_THROWS_AS(brute_force_s1_oracle(0.3, 0.6, 0.5, 0.2, 0.0, 1e-4),
                    InfeasibleError);
}

TEST_CASE("oracle grid step is validated") {
    CHECK_THROWS_AS(
        brute_force_s1_oracle(kMu, kMuPrime, kSMu, kSMuPrime, kS0, 0.0),
        std::domain_error);
    CHECK_THROWS_AS(
        brute_force_s1_oracle(kMu, kMuPrime, kSMu, kSMuPrime, kS0, 0.01),
        std::domain_error);
    CHECK_THROWS_AS(
        brute_force_s1_oracle(kMu, kMuPrime, kSMu, kSMuPrime, kS0, -1e-4),
        std::domain_error);
}

TEST_CASE("oracle refinement approaches the closed form from above") {
    double prev_gap = 1.0;
    for (double step : {1e-3, 1e-4, 1e-5}) {
        const double oracle =
            brute_force_s1_oracle(kMu, kMuPrime, kSMu, kSMuPrime, kS0, step);
        const double gap = oracle - kS1Closed;
        CHECK(gap >= -1e-9);   // oracle sits at or above the bound
        CHECK(gap <= step);    // within one knot of it
        CHECK(gap <= prev_gap + 1e-15);
        prev_gap = gap;
    }
}

TEST_CASE("bound is monotone in the signal counting rate") {
    double prev = 1.0;
    for (int k = 0; k <= 20; ++k) {
        const double s_mu_prime = kSMuPrime * (1.0 + 0.002 * k);
        const double s1 = solve_s1_lower(kMu, kMuPrime, kSMu, s_mu_prime, kS0);
        CHECK(s1 <= prev);
        prev = s1;
    }
}

TEST_CASE("closed form agrees with the oracle across 200 honest channels") {
    for (const auto& t : random_rate_tuples()) {
        const double s0 = t.dark;
        const double s_mu = honest_rate(t.mu, t.eta, t.dark);
        const double s_mu_prime = honest_rate(t.mu_prime, t.eta, t.dark);
        const double s1 =
            solve_s1_lower(t.mu, t.mu_prime, s_mu, s_mu_prime, s0);
        // Soundness: never above the channel's true single-photon yield.
        CHECK(s1 <= honest_y1(t.eta, t.dark));
        const double oracle = brute_force_s1_oracle(t.mu, t.mu_prime, s_mu,
                                                    s_mu_prime, s0, 1e-5);
        CHECK(std::abs(s1 - oracle) <= 1e-5);
        // Back substitution closes the mu equality.
        const double s_c = implied_multi_photon_yield(t.mu, s_mu, s0, s1);
        CHECK(equality_residual(t.mu, s_mu, s0, s1, s_c) <= 1e-10);
    }
}

TEST_CASE("single-photon error bound") {
    // Reference case at eta = 0.1 with 2% observed error.
    const double s1 = solve_s1_lower(kMu, kMuPrime, kSMu, kSMuPrime, kS0);
    const double e1 = estimate_e1_upper(kMu, kSMu, 0.02, kS0, s1);
    CHECK(e1 > 0.0);
    CHECK(e1 <= 0.5);

    // All observed errors explainable by dark counts alone: e1 -> 0.
    const double dark_only_e = 0.5 * std::exp(-kMu) * kS0 / kSMu;
    CHECK(estimate_e1_upper(kMu, kSMu, dark_only_e, kS0, s1) <= 1e-15);
    // Fewer errors than the vacuum term alone: clamps at 0.
    CHECK(estimate_e1_upper(kMu, kSMu, dark_only_e * 0.5, kS0, s1) == 0.0);
    // Saturated errors clamp at 1/2.
    CHECK(estimate_e1_upper(kMu, kSMu, 0.5, kS0, 1e-6) == 0.5);

    CHECK_THROWS_AS(estimate_e1_upper(kMu, kSMu, 0.02, kS0, 0.0),
                    NoSinglePhotonBoundError);
    CHECK_THROWS_AS(estimate_e1_upper(0.0, kSMu, 0.02, kS0, s1),
                    std::domain_error);
}

TEST_CASE("finite-size adjustment") {
    const ObservedRates r = example_rates();

    SUBCASE("zero sigmas is the identity") {
        const ObservedRates same = apply_finite_size(r, 0.0);
        CHECK(same.s_mu == r.s_mu);
        CHECK(same.s_mu_prime == r.s_mu_prime);
    }

    SUBCASE("worst case lowers the yield bound") {
        const ObservedRates shifted = apply_finite_size(r, 5.0);
        CHECK(shifted.s_mu < r.s_mu);
        CHECK(shifted.s_mu_prime > r.s_mu_prime);
        const double s1 = solve_s1_lower(kMu, kMuPrime, r.s_mu, r.s_mu_prime, kS0);
        const double s1_shifted = solve_s1_lower(kMu, kMuPrime, shifted.s_mu,
                                                 shifted.s_mu_prime, kS0);
        CHECK(s1_shifted < s1);
        // Error rates and counts pass through untouched.
        CHECK(shifted.e_mu == r.e_mu);
        CHECK(shifted.n_mu == r.n_mu);
    }

    SUBCASE("vanishing adjustment in the infinite-data limit") {
        ObservedRates huge = r;
        huge.n_mu = 1e18;
        huge.n_mu_prime = 1e18;
        const ObservedRates shifted = apply_finite_size(huge, 5.0);
        CHECK(rel_diff(shifted.s_mu, r.s_mu) <= 1e-6);
        CHECK(rel_diff(shifted.s_mu_prime, r.s_mu_prime) <= 1e-6);
    }

    SUBCASE("input validation") {
        CHECK_THROWS_AS(apply_finite_size(r, -1.0), std::domain_error);
        ObservedRates no_counts = r;
        no_counts.n_mu = 0.0;
        CHECK_THROWS_AS(apply_finite_size(no_counts, 5.0), std::domain_error);
        ObservedRates sparse = r;
        sparse.n_mu = 100.0; // expected counts ~ 3: way too few
        CHECK_THROWS_AS(apply_finite_size(sparse, 5.0),
                        InsufficientStatisticsError);
    }
}

TEST_CASE("bound_yields composes the pipeline") {
    const ObservedRates r = example_rates();
    const YieldBounds b = bound_yields(kMu, kMuPrime, r);
    CHECK(b.s0 == kS0);
    CHECK(rel_diff(b.s1_lower, kS1Closed) <= 1e-12);
    CHECK(b.e1_upper > 0.0);
    CHECK(equality_residual(kMu, r.s_mu, b.s0, b.s1_lower, b.s_c_implied) <=
          1e-10);

    // Two-intensity mode drops the vacuum line.
    const YieldBounds b2 = bound_yields(kMu, kMuPrime, r, true);
    CHECK(b2.s0 == 0.0);
    CHECK(b2.s1_lower > 0.0);

    // Without vacuum data the three-intensity pipeline cannot run.
    ObservedRates no_vac = r;
    no_vac.n_vac = 0.0;
    CHECK_THROWS_AS(bound_yields(kMu, kMuPrime, no_vac), MissingVacuumDataError);
    CHECK_NOTHROW(bound_yields(kMu, kMuPrime, no_vac, true));
}

TEST_CASE("degenerate bound reports e1 = 1/2") {
    // Zero-transmittance rates: s1 clamps to ~0, error bound unusable.
    const double s0 = 1.7e-6;
    ObservedRates r;
    r.s_mu = std::exp(-kMu) * s0;
    r.s_mu_prime = std::exp(-kMuPrime) * s0;
    r.e_mu = 0.5;
    r.e_mu_prime = 0.5;
    r.s_vac = s0;
    r.n_vac = 1e8;
    const YieldBounds b = bound_yields(kMu, kMuPrime, r);
    CHECK(b.s1_lower <= 1e-12);
    if (b.s1_lower == 0.0) {
        CHECK(b.e1_upper == 0.5);
    }
}

TEST_CASE("multi-photon mass consistency with the photonics module") {
    // The joint constraints weight the multi-photon term by c = P(n >= 2).
    const double c = decoyqkd::photonics::multi_photon_mass(kMu);
    const double s1 = solve_s1_lower(kMu, kMuPrime, kSMu, kSMuPrime, kS0);
    const double s_c = implied_multi_photon_yield(kMu, kSMu, kS0, s1);
    const double lhs = std::exp(-kMu) * kS0 + kMu * std::exp(-kMu) * s1 + c * s_c;
    CHECK(rel_diff(lhs, kSMu) <= 1e-12);
}
