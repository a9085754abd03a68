#include "recur/simulate.hpp"

#include "recur/errors.hpp"

#include <nlohmann/json.hpp>

#include <cmath>

namespace recur {

namespace {

std::uint64_t splitmix64(std::uint64_t x) {
    x += 0x9e3779b97f4a7c15ULL;
    x = (x ^ (x >> 30)) * 0xbf58476d1ce4e5b9ULL;
    x = (x ^ (x >> 27)) * 0x94d049bb133111ebULL;
    return x ^ (x >> 31);
}

} // namespace

std::mt19937_64 cluster_rng(std::uint64_t seed, std::uint64_t cluster_index) {
    return std::mt19937_64(splitmix64(seed ^ splitmix64(cluster_index + 1)));
}

// The distributions are hand-rolled on top of the engine's raw stream so the
// generated datasets are identical across standard library implementations.
double sample_uniform(std::mt19937_64& rng) {
    return static_cast<double>(rng() >> 11) * 0x1.0p-53;
}

double sample_gap(std::mt19937_64& rng, double rate) {
    return -std::log1p(-sample_uniform(rng)) / rate;
}

double sample_normal(std::mt19937_64& rng) {
    double u1 = sample_uniform(rng);
    while (u1 <= 0.0) u1 = sample_uniform(rng);
    const double u2 = sample_uniform(rng);
    return std::sqrt(-2.0 * std::log(u1)) * std::cos(2.0 * M_PI * u2);
}

// Marsaglia-Tsang squeeze; the shape < 1 case boosts through shape + 1.
double sample_gamma(std::mt19937_64& rng, double shape, double scale) {
    if (shape < 1.0) {
        const double u = sample_uniform(rng);
        return sample_gamma(rng, shape + 1.0, scale) * std::pow(u, 1.0 / shape);
    }
    const double d = shape - 1.0 / 3.0;
    const double c = 1.0 / std::sqrt(9.0 * d);
    for (;;) {
        double z, v;
        do {
            z = sample_normal(rng);
            v = 1.0 + c * z;
        } while (v <= 0.0);
        v = v * v * v;
        const double u = sample_uniform(rng);
        if (u < 1.0 - 0.0331 * z * z * z * z) return d * v * scale;
        if (u > 0.0 && std::log(u) < 0.5 * z * z + d * (1.0 - v + std::log(v))) {
            return d * v * scale;
        }
    }
}

SimConfig sim_config_from_json(const nlohmann::json& j) {
    SimConfig cfg;
    cfg.n_events = j.at("n_events").get<int>();
    if (j.contains("frailty_alpha")) {
        const auto& a = j.at("frailty_alpha");
        if (a.is_string()) {
            if (a.get<std::string>() != "inf") {
                throw ValidationError("frailty_alpha must be a positive number or \"inf\"");
            }
            cfg.frailty_alpha = std::numeric_limits<double>::infinity();
        } else {
            cfg.frailty_alpha = a.get<double>();
        }
    }
    if (j.contains("baseline_rate")) cfg.baseline_rate = j.at("baseline_rate").get<double>();
    if (j.contains("covariate_effects")) {
        cfg.covariate_effects = j.at("covariate_effects").get<std::vector<double>>();
    }
    if (j.contains("censoring_year")) cfg.censoring_year = j.at("censoring_year").get<int>();
    if (j.contains("seed")) cfg.seed = j.at("seed").get<std::uint64_t>();
    return cfg;
}

Dataset generate(const SimConfig& config, const GamesCalendar& calendar) {
    if (config.n_events <= 0) throw ValidationError("generate: n_events must be positive");
    if (config.baseline_rate <= 0) throw ValidationError("generate: baseline_rate must be positive");
    if (!(config.frailty_alpha > 0)) throw ValidationError("generate: frailty_alpha must be positive");
    if (!calendar.contains(config.censoring_year)) {
        throw ValidationError("generate: censoring_year must be a Games year");
    }

    Dataset ds;
    ds.calendar = calendar;
    const int n_cov = static_cast<int>(config.covariate_effects.size());
    for (int c = 0; c < n_cov; ++c) {
        ds.covariate_names.push_back("x" + std::to_string(c + 1));
        ds.missing_counts["x" + std::to_string(c + 1)] = 0;
    }

    const Category categories[5] = {Category::Track, Category::Field, Category::Canoeing,
                                    Category::Cycling, Category::Swimming};
    for (int cluster = 0; cluster < config.n_events; ++cluster) {
        auto rng = cluster_rng(config.seed, static_cast<std::uint64_t>(cluster));
        const double frailty = std::isinf(config.frailty_alpha)
                                   ? 1.0
                                   : sample_gamma(rng, config.frailty_alpha,
                                                  1.0 / config.frailty_alpha);
        char id[32];
        std::snprintf(id, sizeof(id), "E%04d", cluster + 1);
        const Category category = categories[cluster % 5];

        int year = calendar.first();
        int sequence = 1;
        for (;;) {
            std::map<std::string, double> covs;
            double eta = 0;
            for (int c = 0; c < n_cov; ++c) {
                const double x = sample_normal(rng);
                covs["x" + std::to_string(c + 1)] = x;
                eta += config.covariate_effects[static_cast<size_t>(c)] * x;
            }
            const double rate = frailty * config.baseline_rate * std::exp(eta);
            const double gap = sample_gap(rng, rate);
            const auto next = calendar.next_on_or_after(year + gap);

            RecordSpell sp;
            sp.event_id = id;
            sp.category = category;
            sp.sequence = sequence;
            sp.year_set = year;
            sp.covariates = std::move(covs);
            if (!next || *next > config.censoring_year) {
                sp.status = SpellStatus::Censored;
                sp.year_end = config.censoring_year;
                sp.duration = config.censoring_year - year;
                ds.spells.push_back(std::move(sp));
                break;
            }
            sp.status = SpellStatus::Broken;
            sp.year_end = *next;
            sp.duration = *next - year;
            ds.spells.push_back(std::move(sp));
            if (*next == config.censoring_year) break; // nothing observable past the horizon
            year = *next;
            ++sequence;
        }
    }
    return ds;
}

} // namespace recur
