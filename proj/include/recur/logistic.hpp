#pragma once

#include "recur/record.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <map>
#include <string>
#include <vector>

namespace recur {

struct LogisticOptions {
    int max_iter = 100;
    double tol = 1e-9;
    double divergence_bound = 50; // separation detector
};

// Discrete-time repeated-events logistic model over person-period rows:
// logit P(break at this Games | survived) = intercept + beta . x.
struct LogisticFit {
    std::vector<std::string> covariate_names; // includes time, time_sq when requested
    double intercept = 0;
    Eigen::VectorXd coefficients;
    double intercept_se = 0;
    Eigen::VectorXd se;
    double log_likelihood = 0;
    double aic = 0; // -2 loglik + 2 (1 + p)
    int iterations = 0;
    bool converged = false;
    std::vector<double> fitted_probabilities;
    bool has_time_terms = false;
};

// Newton-Raphson MLE with step-halving. Time and time-squared columns are
// appended from the rows when include_time_terms is set. Throws NumericError
// on separation or a rank-deficient design.
LogisticFit fit_logit(const std::vector<PersonPeriodRow>& rows,
                      const std::vector<std::string>& covariate_names,
                      bool include_time_terms, const LogisticOptions& options = {});

// Break probability at one exposure; covariates must cover every name the
// fit uses ("category" permitted through the map as a numeric code).
double predict_break_probability(const LogisticFit& fit,
                                 const std::map<std::string, double>& covariates,
                                 double time);

struct ResidualRow {
    std::string event_id;
    int sequence = 1;
    Category category = Category::Track;
    double pearson = 0;
};

// Pearson residuals (term - P) / sqrt(P (1-P)), grouped by category for
// plotting.
std::vector<ResidualRow> residuals(const LogisticFit& fit,
                                   const std::vector<PersonPeriodRow>& rows);

nlohmann::ordered_json logistic_to_json(const LogisticFit& fit);

} // namespace recur
