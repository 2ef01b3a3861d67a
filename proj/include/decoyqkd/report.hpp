#pragma once

#include "decoyqkd/decoy.hpp"
#include "decoyqkd/scenario.hpp"
#include "decoyqkd/source_sim.hpp"

#include <json.hpp>

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

namespace decoyqkd::report {

// Shortest decimal form with the given significant digits (%.g).
// Numeric outputs are emitted at 12 significant digits: far below every
// analysis tolerance, stable across platforms.
std::string format_sig(double value, int digits = 12);

// The double nearest to format_sig(value): used so JSON reports carry
// the same rounded values the text formats show.
double round_sig(double value, int digits = 12);

// Rate-versus-distance table over the scenario's grid. Column order:
// distance_km,R_ideal,R_loose,Q_mu,Q_mu_prime,E_mu,s1_lower,e1_upper
// R_ideal is the protocol with exact intensities; R_loose and the
// diagnostic columns use the configured protocol as-is. Rows evaluate in
// parallel into preassigned slots, so output bytes do not depend on the
// thread count.
std::string keyrate_curve_csv(const scenario::ScenarioConfig& config,
                              unsigned threads = 1);

// Analytic distance penalty of a lambda-loose source, plus (when a
// scenario is given) the measured secure-distance shift from bisection
// for comparison.
nlohmann::json penalty_report(double lambda, double half_distance_km,
                              const std::optional<scenario::ScenarioConfig>& config);

struct SourceRun {
    source_sim::SourceConfig config;
    std::uint64_t seed = 0;
    std::vector<source_sim::PulseRecord> pulses;
    nlohmann::json summary;
};

// Generates the scenario's pulse train and summarizes it: per-branch
// statistics, the worst-case intensity ceilings with the realized
// maxima, and the residuals of the two equivalent-source decompositions.
SourceRun run_source_sim(const scenario::ScenarioConfig& config,
                         std::optional<std::uint64_t> seed_override,
                         unsigned threads = 1);

// Observed-rates JSON: required keys s_mu, s_mu_prime, e_mu, e_mu_prime;
// optional s_vac, n_mu, n_mu_prime, n_vac (default 0). Strict about
// unknown keys. Throws scenario::ConfigError.
decoy::ObservedRates rates_from_json(const nlohmann::json& j);
decoy::ObservedRates load_rates_file(const std::string& path);

// Yield/error bounds and the key rate for a set of observed rates,
// using the scenario's advertised intensities. two_intensity drops the
// vacuum line (s0 = 0); finite_size first shifts the rates to their
// n_sigma worst case using the pulse counts in the rates themselves.
nlohmann::json estimate_report(const decoy::ObservedRates& rates,
                               const scenario::ScenarioConfig& config,
                               bool two_intensity, bool finite_size);

} // namespace decoyqkd::report
