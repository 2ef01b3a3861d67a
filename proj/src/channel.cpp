#include "decoyqkd/channel.hpp"

#include <cmath>
#include <stdexcept>

namespace decoyqkd::channel {

void ChannelModel::validate() const {
    if (!(base_transmittance > 0.0) || base_transmittance > 1.0) {
        throw std::invalid_argument(
            "ChannelModel: base_transmittance must be in (0, 1]");
    }
    if (!(half_distance_km > 0.0)) {
        throw std::invalid_argument(
            "ChannelModel: half_distance_km must be > 0");
    }
    if (!(distance_km >= 0.0)) {
        throw std::invalid_argument("ChannelModel: distance_km must be >= 0");
    }
}

void DetectorParams::validate() const {
    if (!(dark_count_rate >= 0.0) || dark_count_rate >= 0.01) {
        throw std::invalid_argument(
            "DetectorParams: dark_count_rate must be in [0, 0.01)");
    }
    if (!(misalignment_error >= 0.0) || misalignment_error >= 0.5) {
        throw std::invalid_argument(
            "DetectorParams: misalignment_error must be in [0, 0.5)");
    }
    if (!(error_correction_inefficiency >= 1.0)) {
        throw std::invalid_argument(
            "DetectorParams: error_correction_inefficiency must be >= 1");
    }
}

double transmittance(const ChannelModel& ch) {
    if (!(ch.distance_km >= 0.0)) {
        throw std::domain_error("transmittance: distance must be >= 0");
    }
    if (!(ch.base_transmittance > 0.0) || ch.base_transmittance > 1.0 ||
        !(ch.half_distance_km > 0.0)) {
        throw std::domain_error("transmittance: invalid channel parameters");
    }
    return ch.base_transmittance * std::exp2(-ch.distance_km / ch.half_distance_km);
}

double expected_yield(double intensity, double eta, const DetectorParams& det) {
    if (!(intensity >= 0.0)) {
        throw std::domain_error("expected_yield: intensity must be >= 0");
    }
    if (!(eta >= 0.0) || eta > 1.0) {
        throw std::domain_error("expected_yield: eta must be in [0, 1]");
    }
    // 1 - e^(-x) as -expm1(-x): immune to cancellation when eta*intensity
    // is tiny (long fiber), which the key-rate tolerances rely on.
    return -std::expm1(-eta * intensity) + det.dark_count_rate;
}

double expected_qber(double intensity, double eta, const DetectorParams& det) {
    const double yield = expected_yield(intensity, eta, det);
    if (!(yield > 0.0)) {
        throw std::domain_error("expected_qber: QBER undefined at zero yield");
    }
    const double detected = -std::expm1(-eta * intensity);
    return (0.5 * det.dark_count_rate + det.misalignment_error * detected) / yield;
}

} // namespace decoyqkd::channel
