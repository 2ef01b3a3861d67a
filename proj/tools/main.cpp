#include "decoyqkd/report.hpp"
#include "decoyqkd/scenario.hpp"
#include "decoyqkd/source_sim.hpp"

#include <CLI11.hpp>
#include <json.hpp>

#include <cstdint>
#include <fstream>
#include <iostream>
#include <optional>
#include <string>

namespace {

using nlohmann::json;
namespace decoy = decoyqkd::decoy;
namespace report = decoyqkd::report;
namespace scenario = decoyqkd::scenario;
namespace source_sim = decoyqkd::source_sim;

void write_output(const std::string& path, const std::string& content) {
    if (path.empty()) {
        std::cout << content;
        return;
    }
    std::ofstream out(path);
    if (!out) {
        throw scenario::ConfigError("cannot open output file: " + path);
    }
    out << content;
}

scenario::ScenarioConfig load_config(const std::string& path) {
    if (path.empty()) {
        return scenario::default_scenario();
    }
    return scenario::load_scenario_file(path);
}

// All diagnostics go to stderr as one machine-readable JSON line.
int fail_with(const char* type, const std::string& message, int code,
              std::optional<double> violation = std::nullopt) {
    json err;
    err["error"]["type"] = type;
    err["error"]["message"] = message;
    if (violation) {
        err["error"]["violation"] = *violation;
    }
    std::cerr << err.dump() << "\n";
    return code;
}

} // namespace

int main(int argc, char** argv) {
    CLI::App app{
        "decoy-state QKD key-rate analysis for a loosely controlled source"};
    app.require_subcommand(1);

    std::string config_path;
    std::string out_path;
    std::string rates_path;
    unsigned threads = 0;
    double lambda = 1.0;
    double half_distance = 15.0;
    std::uint64_t seed = 0;
    bool two_intensity = false;
    bool finite_size = false;

    auto* curve =
        app.add_subcommand("keyrate-curve", "Rate-versus-distance table (CSV)");
    curve->add_option("--config", config_path,
                      "Scenario JSON (built-in defaults when omitted)");
    curve->add_option("--out", out_path, "Write to a file instead of stdout");
    curve->add_option(
        "--threads", threads,
        "Worker threads, 0 = all cores; output is identical for any value");

    auto* penalty = app.add_subcommand(
        "penalty", "Distance penalty of a loose source (JSON)");
    penalty
        ->add_option("--lambda", lambda,
                     "Factor by which the advertised intensities over-state "
                     "the real ones (>= 1)")
        ->required();
    penalty->add_option(
        "--half-distance", half_distance,
        "Channel halving length in km (replaced by the config's value when "
        "--config is given)");
    penalty->add_option(
        "--config", config_path,
        "Scenario JSON; adds a measured secure-distance shift to the report");
    penalty->add_option("--out", out_path, "Write to a file instead of stdout");

    auto* sim = app.add_subcommand(
        "simulate-source",
        "Simulate the fluctuating source; summary JSON on stdout");
    sim->add_option("--config", config_path,
                    "Scenario JSON (built-in defaults when omitted)");
    sim->add_option("--seed", seed, "Override the scenario's RNG seed");
    sim->add_option("--out", out_path,
                    "Also dump the pulse train CSV to this file");
    sim->add_option(
        "--threads", threads,
        "Worker threads, 0 = all cores; output is identical for any value");

    auto* est = app.add_subcommand(
        "estimate", "Yield and rate bounds from observed counting rates");
    est->add_option("rates", rates_path, "Observed-rates JSON file")
        ->required();
    est->add_option("--config", config_path,
                    "Scenario JSON supplying the advertised intensities");
    est->add_flag("--two-intensity", two_intensity,
                  "No vacuum measurement: use the pessimistic s0 = 0");
    est->add_flag("--finite-size", finite_size,
                  "Shift the rates to their n-sigma worst case first");
    est->add_option("--out", out_path, "Write to a file instead of stdout");

    try {
        app.parse(argc, argv);
    } catch (const CLI::CallForHelp& e) {
        return app.exit(e);
    } catch (const CLI::CallForAllHelp& e) {
        return app.exit(e);
    } catch (const CLI::ParseError& e) {
        return fail_with("usage_error", e.what(), 1);
    }

    try {
        if (curve->parsed()) {
            const auto cfg = load_config(config_path);
            write_output(out_path, report::keyrate_curve_csv(cfg, threads));
        } else if (penalty->parsed()) {
            std::optional<scenario::ScenarioConfig> cfg;
            double half = half_distance;
            if (!config_path.empty()) {
                cfg = scenario::load_scenario_file(config_path);
                half = cfg->channel.half_distance_km;
            }
            write_output(out_path,
                         report::penalty_report(lambda, half, cfg).dump(2) + "\n");
        } else if (sim->parsed()) {
            const auto cfg = load_config(config_path);
            std::optional<std::uint64_t> seed_override;
            if (sim->count("--seed") > 0) {
                seed_override = seed;
            }
            const auto run = report::run_source_sim(cfg, seed_override, threads);
            if (!out_path.empty()) {
                std::ofstream f(out_path);
                if (!f) {
                    throw scenario::ConfigError("cannot open output file: " +
                                                out_path);
                }
                source_sim::write_pulse_csv(f, run.pulses);
            }
            std::cout << run.summary.dump(2) << "\n";
        } else if (est->parsed()) {
            const auto cfg = load_config(config_path);
            const auto rates = report::load_rates_file(rates_path);
            write_output(
                out_path,
                report::estimate_report(rates, cfg, two_intensity, finite_size)
                        .dump(2) +
                    "\n");
        }
        return 0;
    } catch (const decoy::InfeasibleError& e) {
        return fail_with("infeasible", e.what(), 2, e.violation());
    } catch (const decoy::MissingVacuumDataError& e) {
        return fail_with("missing_vacuum_data", e.what(), 2);
    } catch (const decoy::NoSinglePhotonBoundError& e) {
        return fail_with("no_single_photon_bound", e.what(), 2);
    } catch (const decoy::InsufficientStatisticsError& e) {
        return fail_with("insufficient_statistics", e.what(), 2);
    } catch (const scenario::ConfigError& e) {
        return fail_with("config_error", e.what(), 1);
    } catch (const std::invalid_argument& e) {
        return fail_with("invalid_argument", e.what(), 1);
    } catch (const std::domain_error& e) {
        return fail_with("domain_error", e.what(), 1);
    } catch (const std::exception& e) {
        return fail_with("internal_error", e.what(), 3);
    }
}
