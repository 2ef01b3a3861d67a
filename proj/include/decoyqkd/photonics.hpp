#pragma once

#include <vector>

namespace decoyqkd::photonics {

// P(n) = e^(-mean) * mean^n / n! for a phase-randomized weak coherent
// pulse of the given mean photon number. Evaluated in log space so large
// n and small means stay finite. Throws std::domain_error for mean < 0
// or n < 0.
double poisson_pmf(double mean, int n);

// Probability that a pulse carries two or more photons:
// 1 - e^(-mean) - mean*e^(-mean). Throws std::domain_error for mean < 0.
double multi_photon_mass(double mean);

// Photon-number distribution truncated at a finite order, with the
// leftover probability tracked explicitly so totals still sum to one.
class PhotonNumberDistribution {
public:
    // truncation_order must be >= 2 (the multi-photon structure is the
    // whole point); throws std::domain_error otherwise or for mean < 0.
    explicit PhotonNumberDistribution(double mean_photon_number,
                                      int truncation_order = 40);

    double mean_photon_number() const noexcept { return mean_; }
    int truncation_order() const noexcept {
        return static_cast<int>(probs_.size()) - 1;
    }

    // probs()[n] = P(n) for n = 0..truncation_order.
    const std::vector<double>& probs() const noexcept { return probs_; }

    // P(n) for any n >= 0: table lookup below the truncation, direct
    // evaluation above it.
    double probability(int n) const;

    // 1 - sum of the tabulated probabilities (clamped at 0).
    double tail_mass() const noexcept { return tail_; }

private:
    double mean_;
    std::vector<double> probs_;
    double tail_;
};

} // namespace decoyqkd::photonics
