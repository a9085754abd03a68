#pragma once

#include "recur/record.hpp"

#include <nlohmann/json_fwd.hpp>

#include <cstdint>
#include <limits>
#include <random>
#include <vector>

namespace recur {

// Seeded synthetic recurrent-event generator used as a ground-truth oracle:
// per-event gamma frailty, exponential gaps rounded up to the next Games.
struct SimConfig {
    int n_events = 100;
    // Gamma shape and rate (mean 1); infinity switches the frailty off.
    double frailty_alpha = std::numeric_limits<double>::infinity();
    double baseline_rate = 0.15; // events per year
    std::vector<double> covariate_effects;
    int censoring_year = 2008;
    std::uint64_t seed = 0;
};

SimConfig sim_config_from_json(const nlohmann::json& j);

// Deterministic under seed; each cluster draws from its own substream, so
// output is independent of generation order and n_events acts as a prefix.
Dataset generate(const SimConfig& config, const GamesCalendar& calendar);

// Sampling primitives, exposed for distribution-level oracles.
double sample_uniform(std::mt19937_64& rng);             // [0, 1)
double sample_gap(std::mt19937_64& rng, double rate);    // exponential
double sample_normal(std::mt19937_64& rng);              // standard normal
double sample_gamma(std::mt19937_64& rng, double shape, double scale);
std::mt19937_64 cluster_rng(std::uint64_t seed, std::uint64_t cluster_index);

} // namespace recur
