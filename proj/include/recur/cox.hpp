#pragma once

#include "recur/record.hpp"

#include <Eigen/Dense>
#include <nlohmann/json_fwd.hpp>

#include <string>
#include <vector>

namespace recur {

// Risk-set construction schemes for recurrent events.
enum class RiskScheme { AG, PWP_TT, PWP_GT, WLW };

const char* to_string(RiskScheme s);
RiskScheme scheme_from_string(const std::string& s);

// Counting-process interval (start, stop]; the unit is at risk at event time
// t iff start < t <= stop within its stratum.
struct RiskInterval {
    std::string event_id;
    int sequence = 1;
    std::string cluster; // robust-variance clustering unit (the event id)
    int stratum = 0;
    double start = 0;
    double stop = 0;
    int status = 0;
    Eigen::VectorXd covariates;
};

struct CoxData {
    RiskScheme scheme = RiskScheme::AG;
    std::vector<std::string> covariate_names;
    std::vector<RiskInterval> intervals;
};

struct CoxOptions {
    bool robust_cluster = true; // Lin-Wei sandwich aggregated by cluster key
    int max_iter = 100;
    double tol = 1e-9;            // sup-norm of the score
    double divergence_bound = 50; // |beta_j| beyond this reports monotone likelihood
};

struct CoxFit {
    RiskScheme scheme = RiskScheme::AG;
    std::vector<std::string> covariate_names;
    Eigen::VectorXd coefficients;
    Eigen::VectorXd model_se;
    Eigen::VectorXd robust_se;
    Eigen::MatrixXd model_cov;
    Eigen::MatrixXd robust_cov;
    Eigen::MatrixXd score_residuals; // one row per interval
    double log_partial_likelihood = 0;
    double aic = 0;
    int iterations = 0;
    bool converged = false;
    int n_intervals = 0;
    int n_events = 0;
};

// Spell geometry per scheme, calendar origin at the first Games:
//   AG      (year_set-origin, end-origin],  single stratum
//   PWP_TT  same intervals, stratum = sequence
//   PWP_GT  (0, duration],   stratum = sequence
//   WLW     (0, end-origin], stratum = sequence (entry at 0 for every spell)
// Sequence strata of 12 and above are pooled. Requires complete covariate
// data (filter with complete_cases first).
CoxData build_risk_intervals(const std::vector<RecordSpell>& spells, RiskScheme scheme,
                             const GamesCalendar& calendar,
                             const std::vector<std::string>& covariate_names);

// Newton-Raphson maximizer of the stratified partial likelihood with Breslow
// tie handling and step-halving. Throws NumericError on a singular
// information matrix, a divergent coefficient, or non-convergence.
CoxFit fit_cox(const CoxData& data, const CoxOptions& options = {});

// exp(beta . (xi - xj)).
double hazard_ratio(const CoxFit& fit, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj);

// The marginal model with a common coefficient vector across the sequence
// strata; robust variance is clustered on the event id.
CoxFit wlw_pooled_fit(const CoxData& data, const CoxOptions& options = {});

// Diagnostic per-stratum coefficients: one fit per sequence stratum.
std::vector<CoxFit> wlw_per_stratum_fits(const CoxData& data, const CoxOptions& options = {});

// Log partial likelihood with analytic score and information at an arbitrary
// coefficient vector; shared by the fitter and by derivative checks.
struct CoxDerivatives {
    double loglik = 0;
    Eigen::VectorXd score;
    Eigen::MatrixXd info; // observed information (negative Hessian)
};
CoxDerivatives cox_partial_derivatives(const std::vector<RiskInterval>& intervals,
                                       const Eigen::VectorXd& beta);

nlohmann::ordered_json cox_to_json(const CoxFit& fit);

} // namespace recur
