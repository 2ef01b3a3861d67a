#pragma once

#include <array>
#include <cstdint>
#include <iosfwd>
#include <string>
#include <vector>

namespace decoyqkd::source_sim {

// Distribution of the per-pulse intensity fluctuation around the nominal
// parent intensity.
enum class FluctuationShape {
    uniform,            // flat on [1-delta, 1+delta]
    truncated_gaussian, // mean 1, sigma = delta/2, cut at +-delta
    two_point,          // 1-delta or 1+delta with equal probability
};

enum class Branch { vacuum, decoy, signal };

const char* branch_name(Branch b) noexcept;
FluctuationShape shape_from_name(const std::string& name);
const char* shape_name(FluctuationShape s) noexcept;

// A source whose parent pulse intensity is only known to lie within a
// relative band [1-delta, 1+delta] of the nominal value. Each branch
// applies a fixed attenuation chosen so that a *nominal* parent pulse
// exits at the intended intensity; real pulses inherit the fluctuation.
struct SourceConfig {
    double nominal_parent_intensity = 0.0; // before attenuation
    double fluctuation_bound = 0.0;        // delta in [0, 1)
    FluctuationShape shape = FluctuationShape::uniform;
    double mu = 0.0;                       // intended decoy intensity
    double mu_prime = 0.0;                 // intended signal intensity
    // Probabilities of routing a pulse to vacuum / decoy / signal.
    std::array<double, 3> branch_probabilities{0.1, 0.3, 0.6};
    std::uint64_t pulse_count = 0;

    double omega_max() const noexcept {
        return nominal_parent_intensity * (1.0 + fluctuation_bound);
    }
    double omega_min() const noexcept {
        return nominal_parent_intensity * (1.0 - fluctuation_bound);
    }
    // Ratio of the worst-case parent intensity to the nominal one; the
    // factor by which the advertised intensities over-state the output.
    double lambda_factor() const noexcept { return 1.0 + fluctuation_bound; }

    // Fixed attenuation of each branch: 0, mu/Omega, mu_prime/Omega.
    double attenuation(Branch b) const noexcept;
    // Intended intensity of each branch: 0, mu, mu_prime.
    double intended_intensity(Branch b) const noexcept;
    // Guaranteed per-branch output ceiling: intended * (1 + delta).
    // Every simulated pulse of that branch stays at or below this.
    double assumed_intensity(Branch b) const noexcept;
    double mu_tilde() const noexcept { return assumed_intensity(Branch::decoy); }
    double mu_prime_tilde() const noexcept {
        return assumed_intensity(Branch::signal);
    }

    // Throws std::invalid_argument; in particular the parent intensity
    // must cover mu + mu_prime so no attenuation exceeds 1.
    void validate() const;
};

// Conventional default for the parent intensity when a config leaves it
// unset: comfortably above the strongest branch.
inline double default_parent_intensity(double mu, double mu_prime) {
    return 10.0 * (mu + mu_prime);
}

struct PulseRecord {
    std::uint64_t index = 0;
    Branch branch = Branch::vacuum;
    double parent_intensity = 0.0; // Omega_t, before attenuation
    double output_intensity = 0.0; // after the branch attenuation
};

// Pulse `index` of the train for the given seed; a pure function of
// (config, seed, index).
PulseRecord generate_pulse(const SourceConfig& config, std::uint64_t seed,
                           std::uint64_t index);

// Full train. Identical output for any `threads` value (0 = hardware
// concurrency): each pulse owns an independent RNG stream and a
// preassigned slot.
std::vector<PulseRecord> generate_pulse_train(const SourceConfig& config,
                                              std::uint64_t seed,
                                              unsigned threads = 1);

// Rewrites a pulse as "a source that always emits at the worst-case
// parent intensity Omega_max, followed by one extra attenuation
// A' = Omega_t / Omega_max <= 1". The fixed stage then outputs the
// assumed intensity of the branch, and exact_stage_intensity * extra_attenuation
// reproduces the simulated output.
struct VirtualDecomposition {
    double parent_max = 0.0;            // Omega_max
    double exact_stage_intensity = 0.0; // branch output of the fixed stage
    double extra_attenuation = 0.0;     // A'(t) in [0, 1]
};

VirtualDecomposition virtualize(const PulseRecord& pulse,
                                const SourceConfig& config);

// Passive optics realizing both non-vacuum branches at once: a beam
// splitter sends the parent pulse into a mu-arm and a mu_prime-arm whose
// outputs match the direct per-branch attenuations, after a common
// pre-attenuation A0 = (mu + mu_prime) / Omega.
struct BeamSplitterRealization {
    double post_pre_attenuation = 0.0; // intensity after A0
    double arm_mu = 0.0;               // decoy arm output
    double arm_mu_prime = 0.0;         // signal arm output
};

BeamSplitterRealization realize_attenuator_bs(double parent_intensity,
                                              const SourceConfig& config);

// CSV dump, one row per pulse: t,branch,omega_t,intensity.
void write_pulse_csv(std::ostream& out, const std::vector<PulseRecord>& pulses);

} // namespace decoyqkd::source_sim
