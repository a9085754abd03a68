#include "recur/frailty.hpp"

#include "recur/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace recur {

namespace {

struct FrailtyWork {
    std::vector<double> support;          // distinct complete gap times
    std::vector<double> deaths;           // d(s), pooled
    std::vector<std::vector<double>> y;   // y[i][s]: gaps of unit i >= support[s]
    std::vector<std::vector<double>> n;   // n[i][s]: complete gaps of i equal to support[s]
    std::vector<double> events_per_unit;  // N_i
};

FrailtyWork prepare(const std::vector<GapHistory>& histories) {
    FrailtyWork w;
    for (const auto& h : histories) {
        for (const auto& g : h.gaps) {
            if (g.time <= 0) throw ValidationError("fit_frailty: gaps must be positive");
            if (g.event) w.support.push_back(g.time);
        }
    }
    std::sort(w.support.begin(), w.support.end());
    w.support.erase(std::unique(w.support.begin(), w.support.end()), w.support.end());
    if (w.support.empty()) throw NumericError("fit_frailty: no events in input");

    const size_t m = w.support.size();
    w.deaths.assign(m, 0.0);
    w.y.assign(histories.size(), std::vector<double>(m, 0.0));
    w.n.assign(histories.size(), std::vector<double>(m, 0.0));
    w.events_per_unit.assign(histories.size(), 0.0);
    for (size_t i = 0; i < histories.size(); ++i) {
        for (const auto& g : histories[i].gaps) {
            for (size_t s = 0; s < m; ++s) {
                if (g.time >= w.support[s]) w.y[i][s] += 1;
            }
            if (g.event) {
                auto it = std::lower_bound(w.support.begin(), w.support.end(), g.time);
                const size_t s = static_cast<size_t>(it - w.support.begin());
                w.n[i][s] += 1;
                w.deaths[s] += 1;
                w.events_per_unit[i] += 1;
            }
        }
    }
    return w;
}

std::vector<double> exposures(const FrailtyWork& w, const std::vector<double>& dlambda) {
    std::vector<double> e(w.y.size(), 0.0);
    for (size_t i = 0; i < w.y.size(); ++i) {
        for (size_t s = 0; s < w.support.size(); ++s) e[i] += dlambda[s] * w.y[i][s];
    }
    return e;
}

double marginal_loglik(const FrailtyWork& w, const std::vector<double>& dlambda,
                       const std::vector<double>& expo, double alpha) {
    double ll = 0;
    for (size_t s = 0; s < w.support.size(); ++s) {
        if (w.deaths[s] > 0) ll += w.deaths[s] * std::log(dlambda[s]);
    }
    for (size_t i = 0; i < w.y.size(); ++i) {
        const double ni = w.events_per_unit[i];
        ll += alpha * std::log(alpha) - std::lgamma(alpha) + std::lgamma(alpha + ni) -
              (alpha + ni) * std::log(alpha + expo[i]);
    }
    return ll;
}

// Golden-section maximum over log(alpha).
double search_alpha(const FrailtyWork& w, const std::vector<double>& dlambda,
                    const std::vector<double>& expo) {
    const double phi = (std::sqrt(5.0) - 1.0) / 2.0;
    double lo = std::log(1e-3), hi = std::log(1e6);
    double x1 = hi - phi * (hi - lo);
    double x2 = lo + phi * (hi - lo);
    auto eval = [&](double lx) { return marginal_loglik(w, dlambda, expo, std::exp(lx)); };
    double f1 = eval(x1), f2 = eval(x2);
    for (int it = 0; it < 80 && hi - lo > 1e-10; ++it) {
        if (f1 < f2) {
            lo = x1;
            x1 = x2;
            f1 = f2;
            x2 = lo + phi * (hi - lo);
            f2 = eval(x2);
        } else {
            hi = x2;
            x2 = x1;
            f2 = f1;
            x1 = hi - phi * (hi - lo);
            f1 = eval(x1);
        }
    }
    return std::exp((lo + hi) / 2.0);
}

} // namespace

double FrailtyFit::cum_hazard_at(double t) const {
    double value = 0;
    for (const auto& [time, lambda] : cum_hazard) {
        if (time > t) break;
        value = lambda;
    }
    return value;
}

FrailtyFit fit_frailty(const std::vector<GapHistory>& histories, const FrailtyOptions& options) {
    if (histories.size() < 2) throw ValidationError("fit_frailty: need at least 2 units");
    FrailtyWork w = prepare(histories);
    const size_t m = w.support.size();

    // Pooled Nelson-Aalen start.
    std::vector<double> dlambda(m, 0.0);
    {
        std::vector<double> pooled_y(m, 0.0);
        for (const auto& yi : w.y) {
            for (size_t s = 0; s < m; ++s) pooled_y[s] += yi[s];
        }
        for (size_t s = 0; s < m; ++s) dlambda[s] = w.deaths[s] / pooled_y[s];
    }

    FrailtyFit fit;
    fit.alpha = options.alpha_fixed.value_or(1.0);
    if (fit.alpha <= 0) throw ValidationError("fit_frailty: alpha must be positive");

    auto expo = exposures(w, dlambda);
    double ll = marginal_loglik(w, dlambda, expo, fit.alpha);
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        // E-step: posterior frailty means.
        std::vector<double> frail(w.y.size());
        for (size_t i = 0; i < w.y.size(); ++i) {
            frail[i] = (fit.alpha + w.events_per_unit[i]) / (fit.alpha + expo[i]);
        }
        // M-step: frailty-weighted Nelson-Aalen increments.
        for (size_t s = 0; s < m; ++s) {
            double denom = 0;
            for (size_t i = 0; i < w.y.size(); ++i) denom += frail[i] * w.y[i][s];
            dlambda[s] = w.deaths[s] / denom;
        }
        expo = exposures(w, dlambda);

        if (!options.alpha_fixed) {
            const double candidate = search_alpha(w, dlambda, expo);
            if (marginal_loglik(w, dlambda, expo, candidate) >
                marginal_loglik(w, dlambda, expo, fit.alpha)) {
                fit.alpha = candidate;
            }
        }

        const double next_ll = marginal_loglik(w, dlambda, expo, fit.alpha);
        fit.loglik_trace.push_back(next_ll);
        fit.iterations = iter;
        const double rel = std::abs(next_ll - ll) / (std::abs(ll) + 1.0);
        ll = next_ll;
        if (rel < options.tol) {
            fit.converged = true;
            break;
        }
    }
    fit.log_likelihood = ll;

    double cum = 0;
    for (size_t s = 0; s < m; ++s) {
        cum += dlambda[s];
        fit.cum_hazard.emplace_back(w.support[s], cum);
    }
    return fit;
}

double survival_at(const FrailtyFit& fit, double t) {
    if (t < 0) throw ValidationError("survival_at: negative time");
    const double lambda = fit.cum_hazard_at(t);
    // [a/(a+L)]^a computed as exp(-a log1p(L/a)); stable for large alpha.
    return std::exp(-fit.alpha * std::log1p(lambda / fit.alpha));
}

SurvivalCurve frailty_curve(const FrailtyFit& fit, const std::vector<GapHistory>& histories) {
    SurvivalCurve curve;
    curve.tag = EstimatorTag::Frailty;
    for (const auto& [time, lambda] : fit.cum_hazard) {
        double at_risk = 0, events = 0;
        for (const auto& h : histories) {
            for (const auto& g : h.gaps) {
                if (g.time >= time) ++at_risk;
                if (g.event && g.time == time) ++events;
            }
        }
        curve.points.push_back({time, survival_at(fit, time), at_risk, events});
    }
    return curve;
}

nlohmann::ordered_json frailty_to_json(const FrailtyFit& fit) {
    nlohmann::ordered_json j;
    j["alpha"] = fit.alpha;
    auto steps = nlohmann::ordered_json::array();
    for (const auto& [time, lambda] : fit.cum_hazard) {
        steps.push_back({{"time", time}, {"cum_hazard", lambda}});
    }
    j["cum_hazard"] = std::move(steps);
    j["log_likelihood"] = fit.log_likelihood;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j;
}

} // namespace recur
