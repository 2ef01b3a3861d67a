#pragma once

#include "decoyqkd/channel.hpp"
#include "decoyqkd/decoy.hpp"

#include <optional>
#include <vector>

namespace decoyqkd::keyrate {

// Binary Shannon entropy H2(p) in bits; 0 at p = 0 and p = 1. Throws
// std::domain_error outside [0, 1].
double binary_entropy(double p);

// Secure key fraction per pulse in the standard composition of error
// correction and privacy amplification:
//   R = q * ( -Q*f*H2(E) + Q1*(1 - H2(e1)) )
// where Q, E are the signal gain and QBER, Q1 the single-photon gain
// lower bound, e1 the single-photon error upper bound, f >= 1 the error
// correction inefficiency and q the sifting factor. May be negative.
double gllp_rate(double gain, double qber, double single_photon_gain,
                 double single_photon_error, double f, double q = 0.5);

enum class ProtocolMode {
    ideal, // intensities are exactly the advertised values
    loose, // emitted intensities = advertised / lambda_factor
};

// What the parties assume about the source versus what it does.
struct ProtocolSpec {
    double assumed_mu = 0.3;        // advertised decoy intensity
    double assumed_mu_prime = 0.6;  // advertised signal intensity
    double lambda_factor = 1.0;     // assumed / actual intensity ratio, >= 1
    ProtocolMode mode = ProtocolMode::ideal;
    double sifting_factor = 0.5;    // q

    double actual_mu() const noexcept { return assumed_mu / lambda_factor; }
    double actual_mu_prime() const noexcept {
        return assumed_mu_prime / lambda_factor;
    }

    // Throws std::invalid_argument. Ideal mode requires lambda_factor == 1.
    void validate() const;

    friend bool operator==(const ProtocolSpec&, const ProtocolSpec&) = default;
};

struct KeyRateReport {
    double distance_km = 0.0;
    double q_mu = 0.0;        // counting rate at the decoy intensity
    double q_mu_prime = 0.0;  // counting rate at the signal intensity
    double e_mu = 0.0;
    double e_mu_prime = 0.0;
    double s1_lower = 0.0;
    double e1_upper = 0.5;
    double rate_per_pulse = 0.0;
};

// Extra distance a rate-versus-distance curve shifts left when the
// source under-delivers by the factor lambda: half_distance * log2(lambda).
// Throws std::domain_error for lambda < 1 or half_distance <= 0.
double distance_penalty(double lambda, double half_distance_km);

// Evaluates the protocol against the model channel at
// channel.distance_km. A loose source emitting at advertised/lambda is
// *identical* to the advertised source over a channel lengthened by
// distance_penalty(lambda), so both modes run through one code path with
// an effective distance; the equivalence is exact by construction. The
// analysis then uses the advertised intensities against the rates the
// weaker emissions actually produce.
KeyRateReport evaluate_protocol(const ProtocolSpec& spec,
                                const channel::ChannelModel& channel,
                                const channel::DetectorParams& detector);

// Largest distance (to within 0.001 km) at which the rate stays at or
// above rate_floor, found by doubling then bisection. std::nullopt when
// already below the floor at zero distance; capped at max_distance_km.
std::optional<double> find_secure_distance(const ProtocolSpec& spec,
                                           const channel::ChannelModel& channel,
                                           const channel::DetectorParams& detector,
                                           double rate_floor = 0.0,
                                           double max_distance_km = 1.0e4);

struct IntensityChoice {
    double mu = 0.0;
    double mu_prime = 0.0;
    double rate_per_pulse = 0.0;
};

// Exhaustive grid search for the (mu, mu_prime) pair maximizing the rate
// at the given distance; candidates with mu >= mu_prime are skipped and
// std::nullopt is returned when no pair yields a positive rate. Ties go
// to the first candidate in (sorted mu, sorted mu_prime) order, so the
// result does not depend on the caller's grid ordering.
std::optional<IntensityChoice> optimize_intensities(
    const ProtocolSpec& spec, const channel::ChannelModel& channel,
    const channel::DetectorParams& detector, std::vector<double> mu_grid,
    std::vector<double> mu_prime_grid);

} // namespace decoyqkd::keyrate
