#pragma once

namespace decoyqkd::channel {

// Fiber + detector efficiency model: transmittance eta(d) halves every
// half_distance_km kilometres, starting from base_transmittance at d = 0.
struct ChannelModel {
    double base_transmittance = 0.045; // overall efficiency at zero distance
    double half_distance_km = 15.0;    // distance over which eta halves
    double distance_km = 0.0;

    // Throws std::invalid_argument on out-of-range parameters.
    void validate() const;

    friend bool operator==(const ChannelModel&, const ChannelModel&) = default;
};

// Receiver-side detection parameters.
struct DetectorParams {
    double dark_count_rate = 1.7e-6;             // background click prob. per pulse
    double misalignment_error = 0.033;           // optical error of detected signals
    double error_correction_inefficiency = 1.22; // f >= 1 in the EC leakage term

    void validate() const;

    friend bool operator==(const DetectorParams&, const DetectorParams&) = default;
};

// eta = base_transmittance * 2^(-distance/half_distance). Throws
// std::domain_error for negative distance.
double transmittance(const ChannelModel& ch);

// Per-pulse counting rate of a coherent pulse of the given intensity:
// 1 - e^(-eta*intensity) + dark_count_rate. Throws std::domain_error for
// negative intensity or eta outside [0, 1].
double expected_yield(double intensity, double eta, const DetectorParams& det);

// Error rate of those counts: dark counts are random (error 1/2), real
// detections err with the misalignment probability. Throws
// std::domain_error when the yield is zero (QBER undefined).
double expected_qber(double intensity, double eta, const DetectorParams& det);

} // namespace decoyqkd::channel
