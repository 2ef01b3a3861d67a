#include "decoyqkd/scenario.hpp"

#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>

namespace decoyqkd::scenario {

using nlohmann::json;

std::vector<double> DistanceGrid::points() const {
    validate();
    std::vector<double> out;
    // Count-based stepping avoids accumulating rounding into the
    // endpoint test.
    const auto n = static_cast<std::uint64_t>(
        std::floor((stop_km - start_km) / step_km + 1e-9));
    out.reserve(n + 1);
    for (std::uint64_t k = 0; k <= n; ++k) {
        out.push_back(start_km + static_cast<double>(k) * step_km);
    }
    return out;
}

void DistanceGrid::validate() const {
    if (!(start_km >= 0.0)) {
        throw std::invalid_argument("DistanceGrid: start_km must be >= 0");
    }
    if (!(stop_km >= start_km)) {
        throw std::invalid_argument("DistanceGrid: stop_km must be >= start_km");
    }
    if (!(step_km > 0.0)) {
        throw std::invalid_argument("DistanceGrid: step_km must be > 0");
    }
}

void FiniteSizeSettings::validate() const {
    if (!(n_mu > 0.0) || !(n_mu_prime > 0.0) || !(n_vac >= 0.0)) {
        throw std::invalid_argument(
            "FiniteSizeSettings: pulse counts must be positive");
    }
    if (!(n_sigma >= 0.0)) {
        throw std::invalid_argument("FiniteSizeSettings: n_sigma must be >= 0");
    }
}

ScenarioConfig default_scenario() {
    ScenarioConfig cfg;
    cfg.protocol.assumed_mu = 0.3;
    cfg.protocol.assumed_mu_prime = 0.6;
    cfg.protocol.lambda_factor = 1.05;
    cfg.protocol.mode = keyrate::ProtocolMode::loose;
    cfg.protocol.sifting_factor = 0.5;
    cfg.channel.base_transmittance = 0.045;
    cfg.channel.half_distance_km = 15.0;
    cfg.detector.dark_count_rate = 1.7e-6;
    cfg.detector.misalignment_error = 0.033;
    cfg.detector.error_correction_inefficiency = 1.22;
    cfg.grid = DistanceGrid{0.0, 150.0, 10.0};
    cfg.source = SourceSettings{};
    cfg.finite_size.reset();
    return cfg;
}

namespace {

[[noreturn]] void fail(const std::string& path, const std::string& what) {
    throw ConfigError("config field '" + path + "': " + what);
}

const json& member(const json& j, const std::string& path, const char* key) {
    auto it = j.find(key);
    if (it == j.end()) {
        fail(path.empty() ? key : path + "." + key, "missing required field");
    }
    return *it;
}

double number_at(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number()) {
        fail(path + "." + key, "expected a number");
    }
    return v.get<double>();
}

std::uint64_t count_at(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_number_unsigned() && !v.is_number_integer()) {
        fail(path + "." + key, "expected a nonnegative integer");
    }
    if (v.is_number_integer() && v.get<std::int64_t>() < 0) {
        fail(path + "." + key, "expected a nonnegative integer");
    }
    return v.get<std::uint64_t>();
}

std::string string_at(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_string()) {
        fail(path + "." + key, "expected a string");
    }
    return v.get<std::string>();
}

const json& object_at(const json& j, const std::string& path, const char* key) {
    const json& v = member(j, path, key);
    if (!v.is_object()) {
        fail(path.empty() ? key : path + "." + key, "expected an object");
    }
    return v;
}

void reject_unknown_keys(const json& j, const std::string& path,
                         std::initializer_list<const char*> allowed) {
    const std::set<std::string> ok(allowed.begin(), allowed.end());
    for (const auto& [key, value] : j.items()) {
        if (!ok.contains(key)) {
            fail(path.empty() ? key : path + "." + key, "unknown field");
        }
    }
}

// Rethrows a block's own validation failure as a ConfigError that names
// the block.
template <typename Fn>
void validate_block(const char* block, Fn&& fn) {
    try {
        fn();
    } catch (const std::invalid_argument& e) {
        throw ConfigError(std::string("config block '") + block +
                          "': " + e.what());
    }
}

} // namespace

ScenarioConfig parse_scenario(const json& j) {
    if (!j.is_object()) {
        throw ConfigError("scenario config must be a JSON object");
    }
    reject_unknown_keys(j, "", {"schema", "protocol", "channel", "detector",
                                "grid", "source", "finite_size"});

    const std::string schema = string_at(j, "", "schema");
    if (schema != kSchemaId) {
        fail("schema", "unsupported schema '" + schema + "' (expected '" +
                           kSchemaId + "')");
    }

    ScenarioConfig cfg;

    const json& protocol = object_at(j, "", "protocol");
    reject_unknown_keys(protocol, "protocol",
                        {"assumed_mu", "assumed_mu_prime", "lambda", "mode",
                         "sifting_factor"});
    cfg.protocol.assumed_mu = number_at(protocol, "protocol", "assumed_mu");
    cfg.protocol.assumed_mu_prime =
        number_at(protocol, "protocol", "assumed_mu_prime");
    cfg.protocol.lambda_factor = number_at(protocol, "protocol", "lambda");
    const std::string mode = string_at(protocol, "protocol", "mode");
    if (mode == "ideal") {
        cfg.protocol.mode = keyrate::ProtocolMode::ideal;
    } else if (mode == "loose") {
        cfg.protocol.mode = keyrate::ProtocolMode::loose;
    } else {
        fail("protocol.mode", "must be 'ideal' or 'loose'");
    }
    cfg.protocol.sifting_factor =
        number_at(protocol, "protocol", "sifting_factor");

    const json& channel = object_at(j, "", "channel");
    reject_unknown_keys(channel, "channel",
                        {"base_transmittance", "half_distance_km"});
    cfg.channel.base_transmittance =
        number_at(channel, "channel", "base_transmittance");
    cfg.channel.half_distance_km =
        number_at(channel, "channel", "half_distance_km");

    const json& detector = object_at(j, "", "detector");
    reject_unknown_keys(detector, "detector",
                        {"dark_count_rate", "misalignment_error",
                         "error_correction_inefficiency"});
    cfg.detector.dark_count_rate =
        number_at(detector, "detector", "dark_count_rate");
    cfg.detector.misalignment_error =
        number_at(detector, "detector", "misalignment_error");
    cfg.detector.error_correction_inefficiency =
        number_at(detector, "detector", "error_correction_inefficiency");

    const json& grid = object_at(j, "", "grid");
    reject_unknown_keys(grid, "grid", {"start_km", "stop_km", "step_km"});
    cfg.grid.start_km = number_at(grid, "grid", "start_km");
    cfg.grid.stop_km = number_at(grid, "grid", "stop_km");
    cfg.grid.step_km = number_at(grid, "grid", "step_km");

    cfg.source.reset();
    if (j.contains("source")) {
        const json& source = object_at(j, "", "source");
        reject_unknown_keys(source, "source",
                            {"fluctuation_bound", "shape",
                             "nominal_parent_intensity", "mu", "mu_prime",
                             "branch_probabilities", "pulse_count", "seed"});
        SourceSettings s;
        s.fluctuation_bound =
            number_at(source, "source", "fluctuation_bound");
        const std::string shape = string_at(source, "source", "shape");
        try {
            s.shape = source_sim::shape_from_name(shape);
        } catch (const std::invalid_argument& e) {
            fail("source.shape", e.what());
        }
        if (source.contains("nominal_parent_intensity")) {
            s.nominal_parent_intensity =
                number_at(source, "source", "nominal_parent_intensity");
        }
        if (source.contains("mu")) {
            s.mu = number_at(source, "source", "mu");
        }
        if (source.contains("mu_prime")) {
            s.mu_prime = number_at(source, "source", "mu_prime");
        }
        const json& probs = member(source, "source", "branch_probabilities");
        if (!probs.is_array() || probs.size() != 3) {
            fail("source.branch_probabilities", "expected an array of 3 numbers");
        }
        for (std::size_t i = 0; i < 3; ++i) {
            if (!probs[i].is_number()) {
                fail("source.branch_probabilities", "expected an array of 3 numbers");
            }
            s.branch_probabilities[i] = probs[i].get<double>();
        }
        s.pulse_count = count_at(source, "source", "pulse_count");
        s.seed = count_at(source, "source", "seed");
        cfg.source = s;
    }

    cfg.finite_size.reset();
    if (j.contains("finite_size")) {
        const json& fs = object_at(j, "", "finite_size");
        reject_unknown_keys(fs, "finite_size",
                            {"n_mu", "n_mu_prime", "n_vac", "n_sigma"});
        FiniteSizeSettings f;
        f.n_mu = number_at(fs, "finite_size", "n_mu");
        f.n_mu_prime = number_at(fs, "finite_size", "n_mu_prime");
        f.n_vac = number_at(fs, "finite_size", "n_vac");
        f.n_sigma = number_at(fs, "finite_size", "n_sigma");
        cfg.finite_size = f;
    }

    validate_scenario(cfg);
    return cfg;
}

ScenarioConfig load_scenario_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw ConfigError("cannot open config file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw ConfigError("config file " + path + " is not valid JSON: " +
                          e.what());
    }
    return parse_scenario(j);
}

json to_json(const ScenarioConfig& cfg) {
    json j;
    j["schema"] = kSchemaId;
    j["protocol"] = {
        {"assumed_mu", cfg.protocol.assumed_mu},
        {"assumed_mu_prime", cfg.protocol.assumed_mu_prime},
        {"lambda", cfg.protocol.lambda_factor},
        {"mode",
         cfg.protocol.mode == keyrate::ProtocolMode::ideal ? "ideal" : "loose"},
        {"sifting_factor", cfg.protocol.sifting_factor},
    };
    j["channel"] = {
        {"base_transmittance", cfg.channel.base_transmittance},
        {"half_distance_km", cfg.channel.half_distance_km},
    };
    j["detector"] = {
        {"dark_count_rate", cfg.detector.dark_count_rate},
        {"misalignment_error", cfg.detector.misalignment_error},
        {"error_correction_inefficiency",
         cfg.detector.error_correction_inefficiency},
    };
    j["grid"] = {
        {"start_km", cfg.grid.start_km},
        {"stop_km", cfg.grid.stop_km},
        {"step_km", cfg.grid.step_km},
    };
    if (cfg.source) {
        json s = {
            {"fluctuation_bound", cfg.source->fluctuation_bound},
            {"shape", source_sim::shape_name(cfg.source->shape)},
            {"branch_probabilities", cfg.source->branch_probabilities},
            {"pulse_count", cfg.source->pulse_count},
            {"seed", cfg.source->seed},
        };
        if (cfg.source->nominal_parent_intensity) {
            s["nominal_parent_intensity"] = *cfg.source->nominal_parent_intensity;
        }
        if (cfg.source->mu) {
            s["mu"] = *cfg.source->mu;
        }
        if (cfg.source->mu_prime) {
            s["mu_prime"] = *cfg.source->mu_prime;
        }
        j["source"] = std::move(s);
    }
    if (cfg.finite_size) {
        j["finite_size"] = {
            {"n_mu", cfg.finite_size->n_mu},
            {"n_mu_prime", cfg.finite_size->n_mu_prime},
            {"n_vac", cfg.finite_size->n_vac},
            {"n_sigma", cfg.finite_size->n_sigma},
        };
    }
    return j;
}

void validate_scenario(const ScenarioConfig& cfg) {
    validate_block("protocol", [&] { cfg.protocol.validate(); });
    validate_block("channel", [&] { cfg.channel.validate(); });
    validate_block("detector", [&] { cfg.detector.validate(); });
    validate_block("grid", [&] { cfg.grid.validate(); });
    if (cfg.source) {
        validate_block("source", [&] { make_source_config(cfg).validate(); });
    }
    if (cfg.finite_size) {
        validate_block("finite_size", [&] { cfg.finite_size->validate(); });
    }
}

source_sim::SourceConfig make_source_config(const ScenarioConfig& cfg) {
    if (!cfg.source) {
        throw ConfigError("scenario has no 'source' block");
    }
    const SourceSettings& s = *cfg.source;
    source_sim::SourceConfig sc;
    sc.mu = s.mu.value_or(cfg.protocol.actual_mu());
    sc.mu_prime = s.mu_prime.value_or(cfg.protocol.actual_mu_prime());
    sc.nominal_parent_intensity = s.nominal_parent_intensity.value_or(
        source_sim::default_parent_intensity(sc.mu, sc.mu_prime));
    sc.fluctuation_bound = s.fluctuation_bound;
    sc.shape = s.shape;
    sc.branch_probabilities = s.branch_probabilities;
    sc.pulse_count = s.pulse_count;
    return sc;
}

} // namespace decoyqkd::scenario
