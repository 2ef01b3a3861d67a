#include "decoyqkd/decoy.hpp"

#include "decoyqkd/photonics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdint>
#include <limits>

namespace decoyqkd::decoy {

namespace {

// Relative slack for feasibility comparisons; covers rounding in the
// constraint evaluation, not statistical noise.
constexpr double kFeasTol = 1e-12;

void check_rate(double value, const char* name) {
    if (!(value >= 0.0) || value > 1.0) {
        throw std::invalid_argument(std::string("ObservedRates: ") + name +
                                    " must be in [0, 1]");
    }
}

void check_count(double value, const char* name) {
    if (!(value >= 0.0)) {
        throw std::invalid_argument(std::string("ObservedRates: ") + name +
                                    " must be >= 0");
    }
}

void check_intensity_order(double mu, double mu_prime, const char* fn) {
    if (!(mu > 0.0) || !(mu_prime > mu)) {
        throw std::domain_error(std::string(fn) +
                                ": intensities must satisfy 0 < mu < mu_prime");
    }
}

} // namespace

void ObservedRates::validate() const {
    check_rate(s_mu, "s_mu");
    check_rate(s_mu_prime, "s_mu_prime");
    check_rate(e_mu, "e_mu");
    check_rate(e_mu_prime, "e_mu_prime");
    check_rate(s_vac, "s_vac");
    check_count(n_mu, "n_mu");
    check_count(n_mu_prime, "n_mu_prime");
    check_count(n_vac, "n_vac");
}

std::vector<std::string> ObservedRates::sanity_warnings() const {
    std::vector<std::string> warnings;
    if (s_mu_prime < s_mu) {
        warnings.push_back(
            "counting rate at the signal intensity is below the decoy "
            "intensity rate; expected only under channel tampering or noise");
    }
    if (s_vac > s_mu) {
        warnings.push_back(
            "vacuum counting rate exceeds the decoy intensity rate");
    }
    return warnings;
}

double vacuum_yield(const ObservedRates& rates) {
    if (!(rates.n_vac > 0.0)) {
        throw MissingVacuumDataError(
            "vacuum_yield: no vacuum pulses recorded; run in two-intensity "
            "mode or supply n_vac > 0");
    }
    return rates.s_vac;
}

double solve_s1_lower(double mu, double mu_prime, double s_mu,
                      double s_mu_prime, double s0) {
    check_intensity_order(mu, mu_prime, "solve_s1_lower");

    const double num = mu_prime * mu_prime * std::exp(mu) * s_mu -
                       mu * mu * std::exp(mu_prime) * s_mu_prime -
                       (mu_prime * mu_prime - mu * mu) * s0;
    const double den = mu * mu_prime * (mu_prime - mu);
    double s1 = num / den;

    const double scale = std::max({1.0, s_mu, s_mu_prime});
    if (s1 > 1.0 + kFeasTol * scale) {
        throw InfeasibleError(
            "solve_s1_lower: observed rates force s1 above 1; no valid "
            "yield assignment exists",
            s1 - 1.0);
    }
    s1 = std::clamp(s1, 0.0, 1.0);

    // The mu equality must leave a nonnegative multi-photon share at the
    // chosen s1 (s1 was only pushed *up* by clamping at 0, which shrinks
    // that share, so this catches genuinely contradictory data).
    const double w = std::exp(-mu);
    const double multi = s_mu - w * s0 - mu * w * s1;
    if (multi < -kFeasTol * scale) {
        throw InfeasibleError(
            "solve_s1_lower: mu equality leaves a negative multi-photon "
            "contribution; observed rates are inconsistent",
            -multi);
    }
    return s1;
}

double brute_force_s1_oracle(double mu, double mu_prime, double s_mu,
                             double s_mu_prime, double s0, double grid_step) {
    check_intensity_order(mu, mu_prime, "brute_force_s1_oracle");
    if (!(grid_step > 0.0) || grid_step > 1e-3) {
        throw std::domain_error(
            "brute_force_s1_oracle: grid_step must be in (0, 1e-3]");
    }

    const double w_mu = std::exp(-mu);
    const double w_mu_prime = std::exp(-mu_prime);
    const double ratio = mu_prime / mu;
    const double multi_coeff = ratio * ratio * std::exp(mu - mu_prime);
    const double tol = kFeasTol * std::max({1.0, s_mu, s_mu_prime});

    const auto steps = static_cast<std::uint64_t>(std::llround(1.0 / grid_step));
    double best_violation = std::numeric_limits<double>::infinity();
    for (std::uint64_t k = 0; k <= steps; ++k) {
        const double s1 =
            std::min(1.0, static_cast<double>(k) * grid_step);
        const double multi = s_mu - w_mu * s0 - mu * w_mu * s1;
        const double lhs = w_mu_prime * s0 + mu_prime * w_mu_prime * s1 +
                           multi_coeff * std::max(multi, 0.0);
        const double violation =
            std::max(0.0, -multi) + std::max(0.0, lhs - s_mu_prime);
        if (multi >= -tol && lhs <= s_mu_prime + tol) {
            return s1;
        }
        best_violation = std::min(best_violation, violation);
    }
    throw InfeasibleError(
        "brute_force_s1_oracle: no grid point satisfies the constraints",
        best_violation);
}

double implied_multi_photon_yield(double mu, double s_mu, double s0, double s1) {
    if (!(mu > 0.0)) {
        throw std::domain_error("implied_multi_photon_yield: mu must be > 0");
    }
    const double w = std::exp(-mu);
    const double c = photonics::multi_photon_mass(mu);
    return std::max(0.0, (s_mu - w * s0 - mu * w * s1) / c);
}

double equality_residual(double mu, double s_mu, double s0, double s1,
                         double s_c) {
    const double w = std::exp(-mu);
    const double c = photonics::multi_photon_mass(mu);
    return std::abs(w * s0 + mu * w * s1 + c * s_c - s_mu);
}

double estimate_e1_upper(double mu, double s_mu, double e_mu, double s0,
                         double s1_lower) {
    if (!(mu > 0.0)) {
        throw std::domain_error("estimate_e1_upper: mu must be > 0");
    }
    if (!(s1_lower > 0.0)) {
        throw NoSinglePhotonBoundError(
            "estimate_e1_upper: s1 lower bound is 0, single-photon error "
            "rate is unconstrained");
    }
    const double num = e_mu * s_mu - 0.5 * std::exp(-mu) * s0;
    if (num <= 0.0) {
        return 0.0;
    }
    return std::min(0.5, num / (mu * std::exp(-mu) * s1_lower));
}

ObservedRates apply_finite_size(const ObservedRates& rates, double n_sigma) {
    if (!(n_sigma >= 0.0)) {
        throw std::domain_error("apply_finite_size: n_sigma must be >= 0");
    }
    if (n_sigma == 0.0) {
        return rates;
    }
    if (!(rates.n_mu > 0.0) || !(rates.n_mu_prime > 0.0)) {
        throw std::domain_error(
            "apply_finite_size: pulse counts n_mu and n_mu_prime required");
    }
    if (rates.n_mu * rates.s_mu < 10.0 ||
        rates.n_mu_prime * rates.s_mu_prime < 10.0) {
        throw InsufficientStatisticsError(
            "apply_finite_size: expected counts below 10; gather more "
            "pulses before a gaussian deviation bound means anything");
    }
    // Worst case for the s1 bound: the decoy rate low, the signal rate
    // high (s1_lower increases with S_mu and decreases with S_mu_prime).
    ObservedRates shifted = rates;
    shifted.s_mu = std::clamp(
        rates.s_mu - n_sigma * std::sqrt(rates.s_mu / rates.n_mu), 0.0, 1.0);
    shifted.s_mu_prime = std::clamp(
        rates.s_mu_prime +
            n_sigma * std::sqrt(rates.s_mu_prime / rates.n_mu_prime),
        0.0, 1.0);
    return shifted;
}

YieldBounds bound_yields(double mu, double mu_prime, const ObservedRates& rates,
                         bool two_intensity) {
    check_intensity_order(mu, mu_prime, "bound_yields");
    rates.validate();

    YieldBounds bounds;
    // Two-intensity mode has no vacuum measurement; s0 = 0 is the
    // pessimistic choice for the resulting key rate.
    bounds.s0 = two_intensity ? 0.0 : vacuum_yield(rates);
    bounds.s1_lower =
        solve_s1_lower(mu, mu_prime, rates.s_mu, rates.s_mu_prime, bounds.s0);
    bounds.s_c_implied =
        implied_multi_photon_yield(mu, rates.s_mu, bounds.s0, bounds.s1_lower);
    bounds.e1_upper =
        bounds.s1_lower > 0.0
            ? estimate_e1_upper(mu, rates.s_mu, rates.e_mu, bounds.s0,
                                bounds.s1_lower)
            : 0.5;
    return bounds;
}

} // namespace decoyqkd::decoy
