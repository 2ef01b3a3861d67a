#include "decoyqkd/keyrate.hpp"

#include <algorithm>
#include <cmath>
#include <stdexcept>

namespace decoyqkd::keyrate {

double binary_entropy(double p) {
    if (!(p >= 0.0) || p > 1.0) {
        throw std::domain_error("binary_entropy: argument must be in [0, 1]");
    }
    if (p == 0.0 || p == 1.0) {
        return 0.0;
    }
    return -(p * std::log2(p) + (1.0 - p) * std::log2(1.0 - p));
}

double gllp_rate(double gain, double qber, double single_photon_gain,
                 double single_photon_error, double f, double q) {
    if (!(gain >= 0.0) || gain > 1.0) {
        throw std::domain_error("gllp_rate: gain must be in [0, 1]");
    }
    if (!(qber >= 0.0) || qber > 1.0) {
        throw std::domain_error("gllp_rate: qber must be in [0, 1]");
    }
    if (!(single_photon_gain >= 0.0) || single_photon_gain > 1.0) {
        throw std::domain_error(
            "gllp_rate: single photon gain must be in [0, 1]");
    }
    if (!(single_photon_error >= 0.0) || single_photon_error > 0.5) {
        throw std::domain_error(
            "gllp_rate: single photon error must be in [0, 0.5]");
    }
    if (!(f >= 1.0)) {
        throw std::domain_error(
            "gllp_rate: error correction inefficiency must be >= 1");
    }
    if (!(q > 0.0) || q > 1.0) {
        throw std::domain_error("gllp_rate: sifting factor must be in (0, 1]");
    }
    return q * (-gain * f * binary_entropy(qber) +
                single_photon_gain * (1.0 - binary_entropy(single_photon_error)));
}

void ProtocolSpec::validate() const {
    if (!(assumed_mu > 0.0) || !(assumed_mu_prime > assumed_mu)) {
        throw std::invalid_argument(
            "ProtocolSpec: intensities must satisfy 0 < mu < mu_prime");
    }
    if (!(lambda_factor >= 1.0)) {
        throw std::invalid_argument("ProtocolSpec: lambda_factor must be >= 1");
    }
    if (mode == ProtocolMode::ideal && lambda_factor != 1.0) {
        throw std::invalid_argument(
            "ProtocolSpec: ideal mode requires lambda_factor == 1");
    }
    if (!(sifting_factor > 0.0) || sifting_factor > 1.0) {
        throw std::invalid_argument(
            "ProtocolSpec: sifting_factor must be in (0, 1]");
    }
}

double distance_penalty(double lambda, double half_distance_km) {
    if (!(lambda >= 1.0)) {
        throw std::domain_error("distance_penalty: lambda must be >= 1");
    }
    if (!(half_distance_km > 0.0)) {
        throw std::domain_error("distance_penalty: half distance must be > 0");
    }
    return half_distance_km * std::log2(lambda);
}

KeyRateReport evaluate_protocol(const ProtocolSpec& spec,
                                const channel::ChannelModel& channel,
                                const channel::DetectorParams& detector) {
    spec.validate();
    channel.validate();
    detector.validate();

    // A source emitting at advertised/lambda over d km produces exactly
    // the rates an exact source would over d + penalty km, so both modes
    // share one evaluation path parameterized by an effective distance.
    channel::ChannelModel effective = channel;
    if (spec.mode == ProtocolMode::loose) {
        effective.distance_km +=
            distance_penalty(spec.lambda_factor, channel.half_distance_km);
    }
    const double eta = transmittance(effective);

    const double mu = spec.assumed_mu;
    const double mu_prime = spec.assumed_mu_prime;
    KeyRateReport report;
    report.distance_km = channel.distance_km;
    report.q_mu = channel::expected_yield(mu, eta, detector);
    report.q_mu_prime = channel::expected_yield(mu_prime, eta, detector);
    report.e_mu = channel::expected_qber(mu, eta, detector);
    report.e_mu_prime = channel::expected_qber(mu_prime, eta, detector);

    // Decoy analysis runs on the advertised intensities against the
    // rates the real (possibly weaker) emissions produced.
    const double s0 = detector.dark_count_rate;
    report.s1_lower =
        decoy::solve_s1_lower(mu, mu_prime, report.q_mu, report.q_mu_prime, s0);
    report.e1_upper =
        report.s1_lower > 0.0
            ? decoy::estimate_e1_upper(mu, report.q_mu, report.e_mu, s0,
                                       report.s1_lower)
            : 0.5;

    const double single_photon_gain =
        mu_prime * std::exp(-mu_prime) * report.s1_lower;
    report.rate_per_pulse = gllp_rate(
        report.q_mu_prime, report.e_mu_prime, single_photon_gain,
        report.e1_upper, detector.error_correction_inefficiency,
        spec.sifting_factor);
    return report;
}

std::optional<double> find_secure_distance(const ProtocolSpec& spec,
                                           const channel::ChannelModel& channel,
                                           const channel::DetectorParams& detector,
                                           double rate_floor,
                                           double max_distance_km) {
    if (!(max_distance_km > 0.0)) {
        throw std::domain_error(
            "find_secure_distance: max_distance_km must be > 0");
    }
    channel::ChannelModel probe = channel;
    const auto rate_at = [&](double d) {
        probe.distance_km = d;
        return evaluate_protocol(spec, probe, detector).rate_per_pulse;
    };

    if (rate_at(0.0) < rate_floor) {
        return std::nullopt;
    }
    // Double until the rate drops below the floor, then bisect.
    double lo = 0.0;
    double hi = channel.half_distance_km;
    while (rate_at(hi) >= rate_floor) {
        lo = hi;
        hi *= 2.0;
        if (hi >= max_distance_km) {
            if (rate_at(max_distance_km) >= rate_floor) {
                return max_distance_km;
            }
            hi = max_distance_km;
            break;
        }
    }
    while (hi - lo > 1.0e-3) {
        const double mid = 0.5 * (lo + hi);
        (rate_at(mid) >= rate_floor ? lo : hi) = mid;
    }
    return 0.5 * (lo + hi);
}

std::optional<IntensityChoice> optimize_intensities(
    const ProtocolSpec& spec, const channel::ChannelModel& channel,
    const channel::DetectorParams& detector, std::vector<double> mu_grid,
    std::vector<double> mu_prime_grid) {
    std::sort(mu_grid.begin(), mu_grid.end());
    std::sort(mu_prime_grid.begin(), mu_prime_grid.end());

    std::optional<IntensityChoice> best;
    for (double mu : mu_grid) {
        if (!(mu > 0.0)) {
            throw std::domain_error(
                "optimize_intensities: grid intensities must be > 0");
        }
        for (double mu_prime : mu_prime_grid) {
            if (!(mu_prime > 0.0)) {
                throw std::domain_error(
                    "optimize_intensities: grid intensities must be > 0");
            }
            if (mu_prime <= mu) {
                continue;
            }
            ProtocolSpec candidate = spec;
            candidate.assumed_mu = mu;
            candidate.assumed_mu_prime = mu_prime;
            const double rate =
                evaluate_protocol(candidate, channel, detector).rate_per_pulse;
            if (rate > 0.0 && (!best || rate > best->rate_per_pulse)) {
                best = IntensityChoice{mu, mu_prime, rate};
            }
        }
    }
    return best;
}

} // namespace decoyqkd::keyrate
