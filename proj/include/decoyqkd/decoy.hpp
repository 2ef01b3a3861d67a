#pragma once

#include <stdexcept>
#include <string>
#include <vector>

namespace decoyqkd::decoy {

// Per-pulse counting statistics observed for the three emitted
// intensities: vacuum, decoy (mu) and signal (mu_prime). Error rates are
// the fraction of counted pulses that arrived wrong.
struct ObservedRates {
    double s_mu = 0.0;       // counting rate at intensity mu
    double s_mu_prime = 0.0; // counting rate at intensity mu_prime
    double e_mu = 0.0;       // error rate among mu counts
    double e_mu_prime = 0.0; // error rate among mu_prime counts
    double s_vac = 0.0;      // counting rate with the source blocked
    double n_mu = 0.0;       // pulses sent at mu
    double n_mu_prime = 0.0; // pulses sent at mu_prime
    double n_vac = 0.0;      // vacuum pulses sent

    // Throws std::invalid_argument when a rate leaves [0, 1] or a pulse
    // count is negative.
    void validate() const;

    // Non-fatal oddities, e.g. the signal intensity counting less often
    // than the weaker decoy (possible under an adversarial channel, so
    // it must not abort the analysis).
    std::vector<std::string> sanity_warnings() const;
};

// Outputs of the yield analysis.
struct YieldBounds {
    double s0 = 0.0;           // vacuum yield fed into the solve
    double s1_lower = 0.0;     // single-photon yield lower bound
    double s_c_implied = 0.0;  // multi-photon yield implied by the mu equality
    double e1_upper = 0.5;     // single-photon error rate upper bound
};

// The observed rates admit no nonnegative yield assignment.
class InfeasibleError : public std::runtime_error {
public:
    InfeasibleError(const std::string& what, double violation)
        : std::runtime_error(what), violation_(violation) {}

    // How far outside the feasible region the data sits (same scale as
    // the violated quantity).
    double violation() const noexcept { return violation_; }

private:
    double violation_;
};

class MissingVacuumDataError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class NoSinglePhotonBoundError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

class InsufficientStatisticsError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

// Vacuum yield s0 from the blocked-source measurement. Throws
// MissingVacuumDataError when no vacuum pulses were sent.
double vacuum_yield(const ObservedRates& rates);

// Lower bound on the single-photon yield s1 from the two counting rates.
// The mu data pins the total via the equality
//   e^(-mu)*s0 + mu*e^(-mu)*s1 + C = S_mu,   C = multi-photon contribution,
// and the stronger intensity constrains the same C from above:
//   e^(-mu')*s0 + mu'*e^(-mu')*s1 + (mu'/mu)^2 * e^(mu-mu') * C <= S_mu'.
// Eliminating C and minimizing s1 subject to C >= 0, s1 in [0, 1] gives
//   s1 >= [mu'^2 e^mu S_mu - mu^2 e^mu' S_mu' - (mu'^2 - mu^2) s0]
//         / (mu mu' (mu' - mu)),
// clamped below at 0. Throws std::domain_error unless 0 < mu < mu_prime,
// and InfeasibleError when no s1 in [0, 1] satisfies both constraints.
double solve_s1_lower(double mu, double mu_prime, double s_mu,
                      double s_mu_prime, double s0);

// Independent check of solve_s1_lower: scan s1 over a uniform grid of
// step grid_step (must be in (0, 1e-3]), derive C from the mu equality
// and return the first feasible s1. Grid resolution bounds the gap to
// the closed form. Throws InfeasibleError when no grid point works.
double brute_force_s1_oracle(double mu, double mu_prime, double s_mu,
                             double s_mu_prime, double s0, double grid_step);

// The multi-photon contribution C/c implied by the mu equality at a given
// (s0, s1), where c = multi_photon_mass(mu); clamped below at 0.
double implied_multi_photon_yield(double mu, double s_mu, double s0, double s1);

// |e^(-mu)*s0 + mu*e^(-mu)*s1 + c*s_c - S_mu|, the back-substitution
// residual of the mu equality.
double equality_residual(double mu, double s_mu, double s0, double s1,
                         double s_c);

// Upper bound on the single-photon error rate: assign the dark-count
// errors to vacuum and everything else to single photons,
//   e1 <= (E_mu*S_mu - 0.5*e^(-mu)*s0) / (mu*e^(-mu)*s1_lower),
// clamped to [0, 0.5]. Throws NoSinglePhotonBoundError when s1_lower
// is 0 (nothing to attribute errors to).
double estimate_e1_upper(double mu, double s_mu, double e_mu, double s0,
                         double s1_lower);

// Replace the observed rates with n_sigma-standard-deviation worst-case
// values under binomial counting statistics: S_mu shifted down and
// S_mu_prime shifted up (the direction that minimizes s1_lower), both
// clamped to [0, 1]. n_sigma == 0 returns the input unchanged. Throws
// std::domain_error for negative n_sigma or missing pulse counts, and
// InsufficientStatisticsError when an expected count n*S falls below 10
// (the gaussian approximation is meaningless there).
ObservedRates apply_finite_size(const ObservedRates& rates, double n_sigma);

// Full pipeline: vacuum yield (or the pessimistic s0 = 0 in two-intensity
// mode), s1 lower bound, implied multi-photon yield, e1 upper bound.
// When s1_lower is 0 the error bound degenerates to 1/2.
YieldBounds bound_yields(double mu, double mu_prime, const ObservedRates& rates,
                         bool two_intensity = false);

} // namespace decoyqkd::decoy
