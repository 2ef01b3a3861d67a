#include "decoyqkd/report.hpp"

#include "decoyqkd/keyrate.hpp"
#include "decoyqkd/parallel.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <stdexcept>

namespace decoyqkd::report {

using nlohmann::json;

std::string format_sig(double value, int digits) {
    if (digits < 1 || digits > 17) {
        throw std::domain_error("format_sig: digits must be in [1, 17]");
    }
    char buf[48];
    std::snprintf(buf, sizeof(buf), "%.*g", digits, value);
    return buf;
}

double round_sig(double value, int digits) {
    if (!std::isfinite(value)) {
        return value;
    }
    return std::stod(format_sig(value, digits));
}

namespace {

double r12(double v) { return round_sig(v, 12); }

keyrate::ProtocolSpec ideal_twin(const keyrate::ProtocolSpec& spec) {
    keyrate::ProtocolSpec ideal = spec;
    ideal.mode = keyrate::ProtocolMode::ideal;
    ideal.lambda_factor = 1.0;
    return ideal;
}

} // namespace

std::string keyrate_curve_csv(const scenario::ScenarioConfig& cfg,
                              unsigned threads) {
    scenario::validate_scenario(cfg);
    const std::vector<double> distances = cfg.grid.points();
    const keyrate::ProtocolSpec ideal = ideal_twin(cfg.protocol);

    struct Row {
        double r_ideal;
        keyrate::KeyRateReport loose;
    };
    std::vector<Row> rows(distances.size());
    parallel_for(distances.size(), threads,
                 [&](std::uint64_t begin, std::uint64_t end) {
                     for (std::uint64_t i = begin; i < end; ++i) {
                         channel::ChannelModel ch = cfg.channel;
                         ch.distance_km = distances[i];
                         rows[i].r_ideal =
                             keyrate::evaluate_protocol(ideal, ch, cfg.detector)
                                 .rate_per_pulse;
                         rows[i].loose = keyrate::evaluate_protocol(
                             cfg.protocol, ch, cfg.detector);
                     }
                 });

    std::string out =
        "distance_km,R_ideal,R_loose,Q_mu,Q_mu_prime,E_mu,s1_lower,e1_upper\n";
    char line[256];
    for (std::size_t i = 0; i < rows.size(); ++i) {
        const auto& r = rows[i].loose;
        std::snprintf(line, sizeof(line),
                      "%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g,%.12g\n",
                      distances[i], rows[i].r_ideal, r.rate_per_pulse, r.q_mu,
                      r.q_mu_prime, r.e_mu, r.s1_lower, r.e1_upper);
        out += line;
    }
    return out;
}

json penalty_report(double lambda, double half_distance_km,
                    const std::optional<scenario::ScenarioConfig>& cfg) {
    json j;
    j["lambda"] = lambda;
    j["half_distance_km"] = half_distance_km;
    j["penalty_km"] =
        r12(keyrate::distance_penalty(lambda, half_distance_km));

    if (cfg) {
        scenario::validate_scenario(*cfg);
        keyrate::ProtocolSpec loose = cfg->protocol;
        loose.mode = keyrate::ProtocolMode::loose;
        loose.lambda_factor = lambda;
        const keyrate::ProtocolSpec ideal = ideal_twin(cfg->protocol);

        const auto d_ideal = keyrate::find_secure_distance(
            ideal, cfg->channel, cfg->detector);
        const auto d_loose = keyrate::find_secure_distance(
            loose, cfg->channel, cfg->detector);
        if (d_ideal && d_loose) {
            const double shift = *d_ideal - *d_loose;
            j["secure_distance_ideal_km"] = r12(*d_ideal);
            j["secure_distance_loose_km"] = r12(*d_loose);
            j["measured_shift_km"] = r12(shift);
            j["shift_minus_penalty_km"] =
                r12(shift -
                    keyrate::distance_penalty(lambda,
                                              cfg->channel.half_distance_km));
        } else {
            j["secure_distance_ideal_km"] = nullptr;
            j["secure_distance_loose_km"] = nullptr;
        }
    }
    return j;
}

SourceRun run_source_sim(const scenario::ScenarioConfig& cfg,
                         std::optional<std::uint64_t> seed_override,
                         unsigned threads) {
    SourceRun run;
    run.config = scenario::make_source_config(cfg);
    run.seed = seed_override.value_or(cfg.source ? cfg.source->seed : 1);
    run.pulses = source_sim::generate_pulse_train(run.config, run.seed, threads);

    using source_sim::Branch;
    struct BranchStats {
        std::uint64_t count = 0;
        double sum = 0.0;
        double max_output = 0.0;
    };
    BranchStats stats[3];
    double parent_min = std::numeric_limits<double>::infinity();
    double parent_max = 0.0;
    double parent_sum = 0.0;
    double worst_virtual_residual = 0.0;
    double worst_bs_residual = 0.0;

    // Sequential pass in index order: accumulation order, and therefore
    // every reported digit, is independent of the generation threads.
    for (const auto& p : run.pulses) {
        auto& s = stats[static_cast<int>(p.branch)];
        s.count += 1;
        s.sum += p.output_intensity;
        s.max_output = std::max(s.max_output, p.output_intensity);
        parent_min = std::min(parent_min, p.parent_intensity);
        parent_max = std::max(parent_max, p.parent_intensity);
        parent_sum += p.parent_intensity;

        const auto v = source_sim::virtualize(p, run.config);
        const double rebuilt = v.exact_stage_intensity * v.extra_attenuation;
        if (p.output_intensity > 0.0) {
            worst_virtual_residual =
                std::max(worst_virtual_residual,
                         std::abs(rebuilt - p.output_intensity) /
                             p.output_intensity);
            const auto bs = source_sim::realize_attenuator_bs(
                p.parent_intensity, run.config);
            const double arm = p.branch == Branch::decoy ? bs.arm_mu
                                                         : bs.arm_mu_prime;
            worst_bs_residual = std::max(
                worst_bs_residual,
                std::abs(arm - p.output_intensity) / p.output_intensity);
        }
    }

    json branches;
    for (Branch b : {Branch::vacuum, Branch::decoy, Branch::signal}) {
        const auto& s = stats[static_cast<int>(b)];
        json entry;
        entry["count"] = s.count;
        entry["mean_output"] =
            s.count ? r12(s.sum / static_cast<double>(s.count)) : 0.0;
        entry["max_output"] = r12(s.max_output);
        entry["assumed_ceiling"] = r12(run.config.assumed_intensity(b));
        entry["within_ceiling"] =
            s.max_output <= run.config.assumed_intensity(b);
        branches[source_sim::branch_name(b)] = entry;
    }

    json summary;
    summary["seed"] = run.seed;
    summary["pulse_count"] = run.config.pulse_count;
    summary["source"] = {
        {"nominal_parent_intensity", run.config.nominal_parent_intensity},
        {"fluctuation_bound", run.config.fluctuation_bound},
        {"shape", source_sim::shape_name(run.config.shape)},
        {"mu", run.config.mu},
        {"mu_prime", run.config.mu_prime},
        {"lambda", r12(run.config.lambda_factor())},
        {"mu_tilde", r12(run.config.mu_tilde())},
        {"mu_prime_tilde", r12(run.config.mu_prime_tilde())},
    };
    summary["parent_intensity"] = {
        {"min", r12(parent_min)},
        {"max", r12(parent_max)},
        {"mean", r12(parent_sum / static_cast<double>(run.pulses.size()))},
        {"ceiling", r12(run.config.omega_max())},
    };
    summary["branches"] = branches;
    summary["decomposition_checks"] = {
        {"max_virtualization_residual", r12(worst_virtual_residual)},
        {"max_beam_splitter_residual", r12(worst_bs_residual)},
    };
    run.summary = std::move(summary);
    return run;
}

decoy::ObservedRates rates_from_json(const json& j) {
    if (!j.is_object()) {
        throw scenario::ConfigError("rates file must hold a JSON object");
    }
    const char* known[] = {"s_mu", "s_mu_prime", "e_mu", "e_mu_prime",
                           "s_vac", "n_mu", "n_mu_prime", "n_vac"};
    for (const auto& [key, value] : j.items()) {
        if (std::find_if(std::begin(known), std::end(known),
                         [&](const char* k) { return key == k; }) ==
            std::end(known)) {
            throw scenario::ConfigError("rates field '" + key +
                                        "': unknown field");
        }
    }
    const auto get = [&](const char* key, bool required) {
        auto it = j.find(key);
        if (it == j.end()) {
            if (required) {
                throw scenario::ConfigError(std::string("rates field '") + key +
                                            "': missing required field");
            }
            return 0.0;
        }
        if (!it->is_number()) {
            throw scenario::ConfigError(std::string("rates field '") + key +
                                        "': expected a number");
        }
        return it->get<double>();
    };
    decoy::ObservedRates rates;
    rates.s_mu = get("s_mu", true);
    rates.s_mu_prime = get("s_mu_prime", true);
    rates.e_mu = get("e_mu", true);
    rates.e_mu_prime = get("e_mu_prime", true);
    rates.s_vac = get("s_vac", false);
    rates.n_mu = get("n_mu", false);
    rates.n_mu_prime = get("n_mu_prime", false);
    rates.n_vac = get("n_vac", false);
    rates.validate();
    return rates;
}

decoy::ObservedRates load_rates_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) {
        throw scenario::ConfigError("cannot open rates file: " + path);
    }
    json j;
    try {
        in >> j;
    } catch (const json::parse_error& e) {
        throw scenario::ConfigError("rates file " + path +
                                    " is not valid JSON: " + e.what());
    }
    return rates_from_json(j);
}

json estimate_report(const decoy::ObservedRates& rates,
                     const scenario::ScenarioConfig& cfg, bool two_intensity,
                     bool finite_size) {
    rates.validate();
    const double mu = cfg.protocol.assumed_mu;
    const double mu_prime = cfg.protocol.assumed_mu_prime;

    decoy::ObservedRates effective = rates;
    double n_sigma = 0.0;
    if (finite_size) {
        n_sigma = cfg.finite_size ? cfg.finite_size->n_sigma
                                  : scenario::FiniteSizeSettings{}.n_sigma;
        effective = decoy::apply_finite_size(rates, n_sigma);
    }

    const decoy::YieldBounds bounds =
        decoy::bound_yields(mu, mu_prime, effective, two_intensity);
    const double single_photon_gain =
        mu_prime * std::exp(-mu_prime) * bounds.s1_lower;
    const double rate = keyrate::gllp_rate(
        effective.s_mu_prime, effective.e_mu_prime, single_photon_gain,
        bounds.e1_upper, cfg.detector.error_correction_inefficiency,
        cfg.protocol.sifting_factor);

    json j;
    j["intensities"] = {{"mu", mu}, {"mu_prime", mu_prime}};
    j["mode"] = {{"two_intensity", two_intensity},
                 {"finite_size", finite_size},
                 {"n_sigma", n_sigma}};
    j["observed"] = {
        {"s_mu", rates.s_mu},         {"s_mu_prime", rates.s_mu_prime},
        {"e_mu", rates.e_mu},         {"e_mu_prime", rates.e_mu_prime},
        {"s_vac", rates.s_vac},       {"n_mu", rates.n_mu},
        {"n_mu_prime", rates.n_mu_prime}, {"n_vac", rates.n_vac},
    };
    if (finite_size) {
        j["worst_case_rates"] = {{"s_mu", r12(effective.s_mu)},
                                 {"s_mu_prime", r12(effective.s_mu_prime)}};
    }
    j["bounds"] = {
        {"s0", r12(bounds.s0)},
        {"s1_lower", r12(bounds.s1_lower)},
        {"s_c_implied", r12(bounds.s_c_implied)},
        {"e1_upper", r12(bounds.e1_upper)},
        {"equality_residual",
         r12(decoy::equality_residual(mu, effective.s_mu, bounds.s0,
                                      bounds.s1_lower, bounds.s_c_implied))},
    };
    j["rate"] = {{"single_photon_gain", r12(single_photon_gain)},
                 {"per_pulse", r12(rate)}};
    json warnings = json::array();
    for (const auto& w : rates.sanity_warnings()) {
        warnings.push_back(w);
    }
    j["warnings"] = warnings;
    return j;
}

} // namespace decoyqkd::report
