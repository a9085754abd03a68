#pragma once

#include "recur/nonparametric.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <utility>
#include <vector>

namespace recur {

struct FrailtyOptions {
    std::optional<double> alpha_fixed; // estimate the baseline only when set
    int max_iter = 500;
    double tol = 1e-8; // relative log-likelihood change
};

// Gamma-frailty marginal survival fit: shared frailty per unit with shape
// and rate both alpha (mean 1), piecewise-constant baseline hazard on the
// distinct complete gap times.
struct FrailtyFit {
    double alpha = 1;
    std::vector<std::pair<double, double>> cum_hazard; // (time, cumulative value)
    double log_likelihood = 0;
    int iterations = 0;
    bool converged = false;
    std::vector<double> loglik_trace; // one entry per outer iteration

    // Right-continuous step evaluation; 0 before the first hazard time.
    double cum_hazard_at(double t) const;
};

// EM fit: posterior frailty means (alpha + N_i)/(alpha + exposure_i), then a
// frailty-weighted Nelson-Aalen baseline update, with a golden-section
// search over alpha each outer iteration. Non-convergence returns the last
// iterate with converged = false.
FrailtyFit fit_frailty(const std::vector<GapHistory>& histories,
                       const FrailtyOptions& options = {});

// S(t) = [alpha / (alpha + Lambda0(t))]^alpha.
double survival_at(const FrailtyFit& fit, double t);

// Curve on the baseline-hazard support; at_risk/events carry the unweighted
// pooled counts.
SurvivalCurve frailty_curve(const FrailtyFit& fit, const std::vector<GapHistory>& histories);

nlohmann::ordered_json frailty_to_json(const FrailtyFit& fit);

} // namespace recur
