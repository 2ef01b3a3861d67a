#pragma once

#include "decoyqkd/channel.hpp"
#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/source_sim.hpp"

#include <json.hpp>

#include <array>
#include <cstdint>
#include <optional>
#include <stdexcept>
#include <string>
#include <vector>

namespace decoyqkd::scenario {

// A scenario file failed to parse or validate; the message names the
// offending block/field.
class ConfigError : public std::runtime_error {
    using std::runtime_error::runtime_error;
};

inline constexpr const char* kSchemaId = "decoy-qkd-scenario/1";

struct DistanceGrid {
    double start_km = 0.0;
    double stop_km = 150.0;
    double step_km = 10.0;

    std::vector<double> points() const;
    void validate() const;

    friend bool operator==(const DistanceGrid&, const DistanceGrid&) = default;
};

// Source-simulation settings. Unset optionals resolve against the
// protocol block: intensities default to the *actual* emitted values
// (advertised / lambda) and the parent intensity to a conventional
// multiple of them.
struct SourceSettings {
    double fluctuation_bound = 0.05;
    source_sim::FluctuationShape shape = source_sim::FluctuationShape::uniform;
    std::optional<double> nominal_parent_intensity;
    std::optional<double> mu;
    std::optional<double> mu_prime;
    std::array<double, 3> branch_probabilities{0.1, 0.3, 0.6};
    std::uint64_t pulse_count = 1000000;
    std::uint64_t seed = 1;

    friend bool operator==(const SourceSettings&, const SourceSettings&) = default;
};

// Pulse counts and the deviation multiplier for finite-statistics
// analysis (estimate --finite-size).
struct FiniteSizeSettings {
    double n_mu = 1.0e9;
    double n_mu_prime = 1.0e9;
    double n_vac = 1.0e8;
    double n_sigma = 5.0;

    void validate() const;

    friend bool operator==(const FiniteSizeSettings&, const FiniteSizeSettings&) = default;
};

struct ScenarioConfig {
    keyrate::ProtocolSpec protocol;
    channel::ChannelModel channel;
    channel::DetectorParams detector;
    DistanceGrid grid;
    std::optional<SourceSettings> source = SourceSettings{};
    std::optional<FiniteSizeSettings> finite_size;

    friend bool operator==(const ScenarioConfig&, const ScenarioConfig&) = default;
};

// Built-in scenario used when no --config is given: the survey-grade
// channel/detector numbers with a 5% loose source.
ScenarioConfig default_scenario();

// Strict parse: unknown keys, wrong types, missing required fields and
// cross-field violations all raise ConfigError naming the field path.
ScenarioConfig parse_scenario(const nlohmann::json& j);

// Reads and parses a scenario file; IO failures also raise ConfigError.
ScenarioConfig load_scenario_file(const std::string& path);

// Inverse of parse_scenario; doubles survive the round trip exactly
// (shortest-round-trip formatting).
nlohmann::json to_json(const ScenarioConfig& config);

// Runs every block's own validation, mapping failures to ConfigError.
void validate_scenario(const ScenarioConfig& config);

// Materializes the source block against the protocol defaults. Throws
// ConfigError when the scenario has no source block.
source_sim::SourceConfig make_source_config(const ScenarioConfig& config);

} // namespace decoyqkd::scenario
