#include "decoyqkd/source_sim.hpp"

#include "decoyqkd/parallel.hpp"
#include "decoyqkd/rng.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <numbers>
#include <ostream>
#include <stdexcept>

namespace decoyqkd::source_sim {

const char* branch_name(Branch b) noexcept {
    switch (b) {
    case Branch::vacuum: return "vacuum";
    case Branch::decoy: return "decoy";
    case Branch::signal: return "signal";
    }
    return "unknown";
}

const char* shape_name(FluctuationShape s) noexcept {
    switch (s) {
    case FluctuationShape::uniform: return "uniform";
    case FluctuationShape::truncated_gaussian: return "truncated_gaussian";
    case FluctuationShape::two_point: return "two_point";
    }
    return "unknown";
}

FluctuationShape shape_from_name(const std::string& name) {
    if (name == "uniform") return FluctuationShape::uniform;
    if (name == "truncated_gaussian") return FluctuationShape::truncated_gaussian;
    if (name == "two_point") return FluctuationShape::two_point;
    throw std::invalid_argument("unknown fluctuation shape: " + name);
}

double SourceConfig::attenuation(Branch b) const noexcept {
    switch (b) {
    case Branch::vacuum: return 0.0;
    case Branch::decoy: return mu / nominal_parent_intensity;
    case Branch::signal: return mu_prime / nominal_parent_intensity;
    }
    return 0.0;
}

double SourceConfig::intended_intensity(Branch b) const noexcept {
    switch (b) {
    case Branch::vacuum: return 0.0;
    case Branch::decoy: return mu;
    case Branch::signal: return mu_prime;
    }
    return 0.0;
}

double SourceConfig::assumed_intensity(Branch b) const noexcept {
    // Same "intended * factor" product shape as the per-pulse outputs,
    // so the ceiling holds in floating point, not just in exact
    // arithmetic: intended * r <= intended * (1 + delta) whenever
    // r <= 1 + delta.
    return intended_intensity(b) * (1.0 + fluctuation_bound);
}

void SourceConfig::validate() const {
    if (!(nominal_parent_intensity > 0.0)) {
        throw std::invalid_argument(
            "SourceConfig: nominal_parent_intensity must be > 0");
    }
    if (!(fluctuation_bound >= 0.0) || fluctuation_bound >= 1.0) {
        throw std::invalid_argument(
            "SourceConfig: fluctuation_bound must be in [0, 1)");
    }
    if (!(mu > 0.0) || !(mu_prime > mu)) {
        throw std::invalid_argument(
            "SourceConfig: intensities must satisfy 0 < mu < mu_prime");
    }
    if (mu + mu_prime > nominal_parent_intensity) {
        throw std::invalid_argument(
            "SourceConfig: nominal_parent_intensity must cover mu + mu_prime "
            "(beam-splitter attenuations would exceed 1)");
    }
    double total = 0.0;
    for (double p : branch_probabilities) {
        if (!(p >= 0.0)) {
            throw std::invalid_argument(
                "SourceConfig: branch probabilities must be >= 0");
        }
        total += p;
    }
    if (std::abs(total - 1.0) > 1e-12) {
        throw std::invalid_argument(
            "SourceConfig: branch probabilities must sum to 1");
    }
    if (pulse_count == 0) {
        throw std::invalid_argument("SourceConfig: pulse_count must be >= 1");
    }
}

namespace {

// Relative parent intensity r = Omega_t / Omega, sampled on
// [1 - delta, 1 + delta]. Working with the ratio keeps delta = 0 exact
// (r == 1) and makes the per-branch ceiling a single multiplication.
double sample_relative_intensity(const SourceConfig& cfg, rng::Stream& stream) {
    const double delta = cfg.fluctuation_bound;
    if (delta == 0.0) {
        return 1.0;
    }
    double r;
    switch (cfg.shape) {
    case FluctuationShape::uniform:
        r = (1.0 - delta) + stream.next_unit() * (2.0 * delta);
        break;
    case FluctuationShape::two_point:
        r = stream.next_unit() < 0.5 ? 1.0 - delta : 1.0 + delta;
        break;
    case FluctuationShape::truncated_gaussian: {
        // Box-Muller with rejection outside +-2 sigma (sigma = delta/2).
        r = 1.0;
        for (int attempt = 0; attempt < 1000; ++attempt) {
            const double u1 = 1.0 - stream.next_unit(); // (0, 1]
            const double u2 = stream.next_unit();
            const double z = std::sqrt(-2.0 * std::log(u1)) *
                             std::cos(2.0 * std::numbers::pi * u2);
            if (std::abs(z) <= 2.0) {
                r = 1.0 + (delta / 2.0) * z;
                break;
            }
        }
        break;
    }
    default:
        r = 1.0;
    }
    return std::clamp(r, 1.0 - delta, 1.0 + delta);
}

} // namespace

PulseRecord generate_pulse(const SourceConfig& cfg, std::uint64_t seed,
                           std::uint64_t index) {
    rng::Stream stream(seed, index);

    const double u = stream.next_unit();
    Branch branch;
    if (u < cfg.branch_probabilities[0]) {
        branch = Branch::vacuum;
    } else if (u < cfg.branch_probabilities[0] + cfg.branch_probabilities[1]) {
        branch = Branch::decoy;
    } else {
        branch = Branch::signal;
    }

    const double r = sample_relative_intensity(cfg, stream);
    PulseRecord pulse;
    pulse.index = index;
    pulse.branch = branch;
    pulse.parent_intensity = cfg.nominal_parent_intensity * r;
    pulse.output_intensity = cfg.intended_intensity(branch) * r;
    return pulse;
}

std::vector<PulseRecord> generate_pulse_train(const SourceConfig& cfg,
                                              std::uint64_t seed,
                                              unsigned threads) {
    cfg.validate();
    std::vector<PulseRecord> pulses(cfg.pulse_count);
    parallel_for(cfg.pulse_count, threads,
                 [&](std::uint64_t begin, std::uint64_t end) {
                     for (std::uint64_t t = begin; t < end; ++t) {
                         pulses[t] = generate_pulse(cfg, seed, t);
                     }
                 });
    return pulses;
}

VirtualDecomposition virtualize(const PulseRecord& pulse,
                                const SourceConfig& cfg) {
    VirtualDecomposition d;
    d.parent_max = cfg.omega_max();
    d.exact_stage_intensity = cfg.assumed_intensity(pulse.branch);
    d.extra_attenuation = pulse.parent_intensity / d.parent_max;
    return d;
}

BeamSplitterRealization realize_attenuator_bs(double parent_intensity,
                                              const SourceConfig& cfg) {
    if (!(parent_intensity >= 0.0)) {
        throw std::domain_error(
            "realize_attenuator_bs: parent intensity must be >= 0");
    }
    const double ratio = parent_intensity / cfg.nominal_parent_intensity;
    BeamSplitterRealization bs;
    bs.post_pre_attenuation = (cfg.mu + cfg.mu_prime) * ratio;
    bs.arm_mu = cfg.mu * ratio;
    bs.arm_mu_prime = cfg.mu_prime * ratio;
    return bs;
}

void write_pulse_csv(std::ostream& out, const std::vector<PulseRecord>& pulses) {
    out << "t,branch,omega_t,intensity\n";
    char buf[96];
    for (const auto& p : pulses) {
        std::snprintf(buf, sizeof(buf), "%llu,%s,%.12g,%.12g\n",
                      static_cast<unsigned long long>(p.index),
                      branch_name(p.branch), p.parent_intensity,
                      p.output_intensity);
        out << buf;
    }
}

} // namespace decoyqkd::source_sim
