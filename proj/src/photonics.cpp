#include "decoyqkd/photonics.hpp"

#include <array>
#include <cmath>
#include <stdexcept>

namespace decoyqkd::photonics {

namespace {

// log(n!) via a precomputed table for the orders we actually use.
// std::lgamma is only called beyond the table and is avoided in hot
// paths because glibc's lgamma writes to a global sign flag.
constexpr int kLogFactorialTableSize = 257;

const std::array<double, kLogFactorialTableSize>& log_factorial_table() {
    static const auto table = [] {
        std::array<double, kLogFactorialTableSize> t{};
        t[0] = 0.0;
        for (int n = 1; n < kLogFactorialTableSize; ++n) {
            t[n] = t[n - 1] + std::log(static_cast<double>(n));
        }
        return t;
    }();
    return table;
}

double log_factorial(int n) {
    if (n < kLogFactorialTableSize) {
        return log_factorial_table()[static_cast<std::size_t>(n)];
    }
    return std::lgamma(static_cast<double>(n) + 1.0);
}

} // namespace

double poisson_pmf(double mean, int n) {
    if (!(mean >= 0.0)) {
        throw std::domain_error("poisson_pmf: mean photon number must be >= 0");
    }
    if (n < 0) {
        throw std::domain_error("poisson_pmf: photon number must be >= 0");
    }
    if (mean == 0.0) {
        return n == 0 ? 1.0 : 0.0;
    }
    if (n == 0) {
        return std::exp(-mean);
    }
    return std::exp(-mean + n * std::log(mean) - log_factorial(n));
}

double multi_photon_mass(double mean) {
    if (!(mean >= 0.0)) {
        throw std::domain_error("multi_photon_mass: mean photon number must be >= 0");
    }
    const double vac = std::exp(-mean);
    return 1.0 - vac - mean * vac;
}

PhotonNumberDistribution::PhotonNumberDistribution(double mean_photon_number,
                                                   int truncation_order)
    : mean_(mean_photon_number) {
    if (!(mean_photon_number >= 0.0)) {
        throw std::domain_error(
            "PhotonNumberDistribution: mean photon number must be >= 0");
    }
    if (truncation_order < 2) {
        throw std::domain_error(
            "PhotonNumberDistribution: truncation order must be >= 2");
    }
    probs_.resize(static_cast<std::size_t>(truncation_order) + 1);
    double sum = 0.0;
    for (int n = 0; n <= truncation_order; ++n) {
        probs_[static_cast<std::size_t>(n)] = poisson_pmf(mean_, n);
        sum += probs_[static_cast<std::size_t>(n)];
    }
    tail_ = sum < 1.0 ? 1.0 - sum : 0.0;
}

double PhotonNumberDistribution::probability(int n) const {
    if (n < 0) {
        throw std::domain_error(
            "PhotonNumberDistribution: photon number must be >= 0");
    }
    if (n < static_cast<int>(probs_.size())) {
        return probs_[static_cast<std::size_t>(n)];
    }
    return poisson_pmf(mean_, n);
}

} // namespace decoyqkd::photonics
