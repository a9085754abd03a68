#include "recur/logistic.hpp"

#include "recur/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>

namespace recur {

namespace {

double row_value(const PersonPeriodRow& row, const std::string& name) {
    if (name == "category") return static_cast<double>(static_cast<int>(row.category));
    if (name == "time") return row.time;
    if (name == "time_sq") return row.time_sq;
    auto it = row.covariates.find(name);
    if (it == row.covariates.end()) {
        throw ValidationError("missing covariate " + name + " on record " + row.event_id + "#" +
                              std::to_string(row.sequence));
    }
    return it->second;
}

// Design matrix with a leading intercept column.
Eigen::MatrixXd design(const std::vector<PersonPeriodRow>& rows,
                       const std::vector<std::string>& names) {
    Eigen::MatrixXd x(rows.size(), names.size() + 1);
    for (size_t r = 0; r < rows.size(); ++r) {
        x(static_cast<int>(r), 0) = 1.0;
        for (size_t c = 0; c < names.size(); ++c) {
            x(static_cast<int>(r), static_cast<int>(c) + 1) = row_value(rows[r], names[c]);
        }
    }
    return x;
}

double bernoulli_loglik(const Eigen::VectorXd& eta, const Eigen::VectorXd& y) {
    double ll = 0;
    for (int i = 0; i < eta.size(); ++i) {
        // y*eta - log(1 + e^eta), computed through the stable softplus.
        const double softplus =
            eta(i) > 0 ? eta(i) + std::log1p(std::exp(-eta(i))) : std::log1p(std::exp(eta(i)));
        ll += y(i) * eta(i) - softplus;
    }
    return ll;
}

} // namespace

LogisticFit fit_logit(const std::vector<PersonPeriodRow>& rows,
                      const std::vector<std::string>& covariate_names, bool include_time_terms,
                      const LogisticOptions& options) {
    if (rows.empty()) throw ValidationError("fit_logit: no rows");
    std::vector<std::string> names = covariate_names;
    if (include_time_terms) {
        names.push_back("time");
        names.push_back("time_sq");
    }

    const int n = static_cast<int>(rows.size());
    const int p = static_cast<int>(names.size());
    Eigen::MatrixXd x = design(rows, names);
    Eigen::VectorXd y(n);
    for (int i = 0; i < n; ++i) y(i) = rows[static_cast<size_t>(i)].term;
    const double events = y.sum();
    if (events == 0 || events == n) {
        throw ValidationError("fit_logit: needs both broken and surviving exposures");
    }

    Eigen::FullPivLU<Eigen::MatrixXd> rank_check(x.transpose() * x);
    rank_check.setThreshold(1e-10);
    if (rank_check.rank() < p + 1) throw NumericError("fit_logit: rank-deficient design matrix");

    Eigen::VectorXd theta = Eigen::VectorXd::Zero(p + 1);
    Eigen::VectorXd eta = x * theta;
    double ll = bernoulli_loglik(eta, y);
    int iterations = 0;
    bool converged = false;
    Eigen::MatrixXd info;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        iterations = iter;
        Eigen::VectorXd mu = (1.0 + (-eta.array()).exp()).inverse().matrix();
        Eigen::VectorXd score = x.transpose() * (y - mu);
        Eigen::VectorXd w = mu.array() * (1.0 - mu.array());
        info = x.transpose() * w.asDiagonal() * x;
        if (score.lpNorm<Eigen::Infinity>() < options.tol) {
            converged = true;
            break;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
        lu.setThreshold(1e-10);
        if (lu.rank() < p + 1) throw NumericError("fit_logit: singular information matrix");
        const Eigen::VectorXd step = lu.solve(score);

        double scale = 1.0;
        Eigen::VectorXd next = theta + step;
        double next_ll = bernoulli_loglik(x * next, y);
        for (int h = 0; h < 30 && !(next_ll > ll - 1e-12); ++h) {
            scale /= 2;
            next = theta + scale * step;
            next_ll = bernoulli_loglik(x * next, y);
        }
        theta = next;
        eta = x * theta;
        ll = next_ll;
        if (theta.lpNorm<Eigen::Infinity>() > options.divergence_bound) {
            throw NumericError("fit_logit: divergent coefficient (complete separation)");
        }
    }
    if (!converged) throw NumericError("fit_logit: Newton-Raphson did not converge");

    Eigen::FullPivLU<Eigen::MatrixXd> lu(info);
    lu.setThreshold(1e-10);
    if (lu.rank() < p + 1) throw NumericError("fit_logit: singular information at the optimum");
    const Eigen::VectorXd se_all = lu.inverse().diagonal().cwiseMax(0.0).cwiseSqrt();

    LogisticFit fit;
    fit.covariate_names = names;
    fit.intercept = theta(0);
    fit.coefficients = theta.tail(p);
    fit.intercept_se = se_all(0);
    fit.se = se_all.tail(p);
    fit.log_likelihood = ll;
    fit.aic = -2.0 * ll + 2.0 * (p + 1);
    fit.iterations = iterations;
    fit.converged = converged;
    fit.has_time_terms = include_time_terms;
    fit.fitted_probabilities.resize(static_cast<size_t>(n));
    for (int i = 0; i < n; ++i) {
        fit.fitted_probabilities[static_cast<size_t>(i)] = 1.0 / (1.0 + std::exp(-eta(i)));
    }
    return fit;
}

double predict_break_probability(const LogisticFit& fit,
                                 const std::map<std::string, double>& covariates, double time) {
    double eta = fit.intercept;
    for (size_t c = 0; c < fit.covariate_names.size(); ++c) {
        const std::string& name = fit.covariate_names[c];
        double v;
        if (name == "time") {
            v = time;
        } else if (name == "time_sq") {
            v = time * time;
        } else {
            auto it = covariates.find(name);
            if (it == covariates.end()) {
                throw ValidationError("predict_break_probability: missing covariate " + name);
            }
            v = it->second;
        }
        eta += fit.coefficients(static_cast<int>(c)) * v;
    }
    return 1.0 / (1.0 + std::exp(-eta));
}

std::vector<ResidualRow> residuals(const LogisticFit& fit,
                                   const std::vector<PersonPeriodRow>& rows) {
    if (fit.fitted_probabilities.size() != rows.size()) {
        throw ValidationError("residuals: fit and rows disagree in length");
    }
    std::vector<ResidualRow> out;
    out.reserve(rows.size());
    for (size_t i = 0; i < rows.size(); ++i) {
        const double p = fit.fitted_probabilities[i];
        ResidualRow r;
        r.event_id = rows[i].event_id;
        r.sequence = rows[i].sequence;
        r.category = rows[i].category;
        r.pearson = (rows[i].term - p) / std::sqrt(p * (1.0 - p));
        out.push_back(std::move(r));
    }
    return out;
}

nlohmann::ordered_json logistic_to_json(const LogisticFit& fit) {
    nlohmann::ordered_json j;
    j["model"] = "logistic";
    j["intercept"] = fit.intercept;
    j["intercept_se"] = fit.intercept_se;
    auto coeffs = nlohmann::ordered_json::array();
    for (size_t i = 0; i < fit.covariate_names.size(); ++i) {
        const int k = static_cast<int>(i);
        const double z = fit.coefficients(k) / fit.se(k);
        coeffs.push_back({{"name", fit.covariate_names[i]},
                          {"estimate", fit.coefficients(k)},
                          {"se", fit.se(k)},
                          {"z", z},
                          {"p", std::erfc(std::abs(z) / std::sqrt(2.0))}});
    }
    j["coefficients"] = std::move(coeffs);
    j["log_likelihood"] = fit.log_likelihood;
    j["aic"] = fit.aic;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    return j;
}

} // namespace recur
