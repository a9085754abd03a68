#include "recur/cox.hpp"

#include "recur/errors.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <set>

namespace recur {

namespace {

constexpr int kPooledStratum = 12; // sequences at and above pool into one stratum

double wald_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

struct StratumIndex {
    std::vector<int> members;     // interval indices
    std::vector<double> event_times; // distinct, ascending
};

std::map<int, StratumIndex> index_strata(const std::vector<RiskInterval>& intervals) {
    std::map<int, StratumIndex> strata;
    for (size_t i = 0; i < intervals.size(); ++i) {
        strata[intervals[i].stratum].members.push_back(static_cast<int>(i));
    }
    for (auto& [id, stratum] : strata) {
        std::set<double> times;
        for (int i : stratum.members) {
            if (intervals[i].status == 1) times.insert(intervals[i].stop);
        }
        stratum.event_times.assign(times.begin(), times.end());
    }
    return strata;
}

bool at_risk(const RiskInterval& iv, double t) { return iv.start < t && t <= iv.stop; }

} // namespace

const char* to_string(RiskScheme s) {
    switch (s) {
        case RiskScheme::AG: return "ag";
        case RiskScheme::PWP_TT: return "pwp-tt";
        case RiskScheme::PWP_GT: return "pwp-gt";
        case RiskScheme::WLW: return "wlw";
    }
    return "?";
}

RiskScheme scheme_from_string(const std::string& s) {
    if (s == "ag") return RiskScheme::AG;
    if (s == "pwp-tt") return RiskScheme::PWP_TT;
    if (s == "pwp-gt") return RiskScheme::PWP_GT;
    if (s == "wlw") return RiskScheme::WLW;
    throw ValidationError("unknown risk scheme: " + s);
}

CoxData build_risk_intervals(const std::vector<RecordSpell>& spells, RiskScheme scheme,
                             const GamesCalendar& calendar,
                             const std::vector<std::string>& covariate_names) {
    std::map<std::string, std::vector<const RecordSpell*>> by_event;
    for (const auto& sp : spells) by_event[sp.event_id].push_back(&sp);
    for (auto& [event_id, group] : by_event) {
        std::sort(group.begin(), group.end(),
                  [](const RecordSpell* a, const RecordSpell* b) { return a->sequence < b->sequence; });
        for (size_t i = 0; i < group.size(); ++i) {
            if (group[i]->sequence != static_cast<int>(i) + 1) {
                throw ValidationError("event " + event_id + ": record " +
                                      std::to_string(group[i]->sequence) +
                                      " is missing its predecessor");
            }
        }
    }

    const double origin = calendar.first();
    CoxData data;
    data.scheme = scheme;
    data.covariate_names = covariate_names;
    for (const auto& sp : spells) {
        RiskInterval iv;
        iv.event_id = sp.event_id;
        iv.sequence = sp.sequence;
        iv.cluster = sp.event_id;
        iv.status = sp.status == SpellStatus::Broken ? 1 : 0;
        const double set = sp.year_set - origin;
        const double end = sp.year_set + sp.duration - origin;
        switch (scheme) {
            case RiskScheme::AG:
                iv.start = set;
                iv.stop = end;
                iv.stratum = 0;
                break;
            case RiskScheme::PWP_TT:
                iv.start = set;
                iv.stop = end;
                iv.stratum = std::min(sp.sequence, kPooledStratum);
                break;
            case RiskScheme::PWP_GT:
                iv.start = 0;
                iv.stop = sp.duration;
                iv.stratum = std::min(sp.sequence, kPooledStratum);
                break;
            case RiskScheme::WLW:
                iv.start = 0;
                iv.stop = end;
                iv.stratum = std::min(sp.sequence, kPooledStratum);
                break;
        }
        iv.covariates.resize(static_cast<int>(covariate_names.size()));
        for (size_t c = 0; c < covariate_names.size(); ++c) {
            iv.covariates(static_cast<int>(c)) = sp.value(covariate_names[c]);
        }
        data.intervals.push_back(std::move(iv));
    }
    return data;
}

CoxDerivatives cox_partial_derivatives(const std::vector<RiskInterval>& intervals,
                                       const Eigen::VectorXd& beta) {
    const int p = static_cast<int>(beta.size());
    CoxDerivatives d;
    d.score = Eigen::VectorXd::Zero(p);
    d.info = Eigen::MatrixXd::Zero(p, p);

    const auto strata = index_strata(intervals);
    for (const auto& [id, stratum] : strata) {
        for (double t : stratum.event_times) {
            double s0 = 0;
            Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
            Eigen::MatrixXd s2 = Eigen::MatrixXd::Zero(p, p);
            double deaths = 0;
            Eigen::VectorXd death_x = Eigen::VectorXd::Zero(p);
            double death_eta = 0;
            for (int i : stratum.members) {
                const RiskInterval& iv = intervals[i];
                if (!at_risk(iv, t)) continue;
                const double r = std::exp(beta.dot(iv.covariates));
                s0 += r;
                s1 += r * iv.covariates;
                s2.noalias() += r * iv.covariates * iv.covariates.transpose();
                if (iv.status == 1 && iv.stop == t) {
                    deaths += 1;
                    death_x += iv.covariates;
                    death_eta += beta.dot(iv.covariates);
                }
            }
            const Eigen::VectorXd mean = s1 / s0;
            d.loglik += death_eta - deaths * std::log(s0);
            d.score += death_x - deaths * mean;
            d.info.noalias() += deaths * (s2 / s0 - mean * mean.transpose());
        }
    }
    return d;
}

CoxFit fit_cox(const CoxData& data, const CoxOptions& options) {
    const auto& intervals = data.intervals;
    if (intervals.empty()) throw ValidationError("fit_cox: no intervals");
    const int p = static_cast<int>(data.covariate_names.size());
    if (p == 0) throw ValidationError("fit_cox: no covariates");
    int n_events = 0;
    for (const auto& iv : intervals) {
        if (iv.covariates.size() != p) throw ValidationError("fit_cox: covariate size mismatch");
        if (!(iv.start < iv.stop)) throw ValidationError("fit_cox: interval start must precede stop");
        n_events += iv.status;
    }
    if (n_events == 0) throw ValidationError("fit_cox: no events");

    Eigen::VectorXd beta = Eigen::VectorXd::Zero(p);
    CoxDerivatives d = cox_partial_derivatives(intervals, beta);
    int iterations = 0;
    bool converged = false;
    for (int iter = 1; iter <= options.max_iter; ++iter) {
        iterations = iter;
        if (d.score.lpNorm<Eigen::Infinity>() < options.tol) {
            converged = true;
            break;
        }
        Eigen::FullPivLU<Eigen::MatrixXd> lu(d.info);
        lu.setThreshold(1e-10);
        if (lu.rank() < p) throw NumericError("fit_cox: singular information matrix");
        const Eigen::VectorXd step = lu.solve(d.score);

        double scale = 1.0;
        Eigen::VectorXd next = beta + step;
        CoxDerivatives nd = cox_partial_derivatives(intervals, next);
        for (int h = 0; h < 30 && !(nd.loglik > d.loglik - 1e-12); ++h) {
            scale /= 2;
            next = beta + scale * step;
            nd = cox_partial_derivatives(intervals, next);
        }
        beta = next;
        d = nd;
        if (beta.lpNorm<Eigen::Infinity>() > options.divergence_bound) {
            throw NumericError(
                "fit_cox: divergent coefficient (monotone partial likelihood; a covariate "
                "separates events from risk sets)");
        }
    }
    if (!converged) throw NumericError("fit_cox: Newton-Raphson did not converge");

    CoxFit fit;
    fit.scheme = data.scheme;
    fit.covariate_names = data.covariate_names;
    fit.coefficients = beta;
    fit.log_partial_likelihood = d.loglik;
    fit.aic = -2.0 * d.loglik + 2.0 * p;
    fit.iterations = iterations;
    fit.converged = converged;
    fit.n_intervals = static_cast<int>(intervals.size());
    fit.n_events = n_events;

    Eigen::FullPivLU<Eigen::MatrixXd> lu(d.info);
    lu.setThreshold(1e-10);
    if (lu.rank() < p) throw NumericError("fit_cox: singular information matrix at the optimum");
    fit.model_cov = lu.inverse();
    fit.model_se = fit.model_cov.diagonal().cwiseMax(0.0).cwiseSqrt();

    // Score residuals: one row per interval, dM integrated against the
    // covariate deviation from the risk-set mean.
    fit.score_residuals = Eigen::MatrixXd::Zero(static_cast<int>(intervals.size()), p);
    const auto strata = index_strata(intervals);
    for (const auto& [id, stratum] : strata) {
        for (double t : stratum.event_times) {
            double s0 = 0;
            Eigen::VectorXd s1 = Eigen::VectorXd::Zero(p);
            double deaths = 0;
            for (int i : stratum.members) {
                const RiskInterval& iv = intervals[i];
                if (!at_risk(iv, t)) continue;
                const double r = std::exp(beta.dot(iv.covariates));
                s0 += r;
                s1 += r * iv.covariates;
                if (iv.status == 1 && iv.stop == t) deaths += 1;
            }
            const Eigen::VectorXd mean = s1 / s0;
            const double hazard = deaths / s0;
            for (int i : stratum.members) {
                const RiskInterval& iv = intervals[i];
                if (!at_risk(iv, t)) continue;
                const double r = std::exp(beta.dot(iv.covariates));
                Eigen::VectorXd dev = iv.covariates - mean;
                if (iv.status == 1 && iv.stop == t) fit.score_residuals.row(i) += dev;
                fit.score_residuals.row(i) -= (r * hazard) * dev;
            }
        }
    }

    // Lin-Wei sandwich: aggregate score residuals by cluster (or leave each
    // interval as its own cluster).
    std::map<std::string, Eigen::VectorXd> cluster_sums;
    Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(p, p);
    if (options.robust_cluster) {
        for (size_t i = 0; i < intervals.size(); ++i) {
            auto [it, inserted] =
                cluster_sums.try_emplace(intervals[i].cluster, Eigen::VectorXd::Zero(p));
            it->second += fit.score_residuals.row(static_cast<int>(i)).transpose();
        }
        for (const auto& [key, u] : cluster_sums) meat.noalias() += u * u.transpose();
    } else {
        for (size_t i = 0; i < intervals.size(); ++i) {
            const Eigen::VectorXd u = fit.score_residuals.row(static_cast<int>(i)).transpose();
            meat.noalias() += u * u.transpose();
        }
    }
    fit.robust_cov = fit.model_cov * meat * fit.model_cov;
    fit.robust_cov = ((fit.robust_cov + fit.robust_cov.transpose()) / 2.0).eval();
    fit.robust_se = fit.robust_cov.diagonal().cwiseMax(0.0).cwiseSqrt();
    return fit;
}

double hazard_ratio(const CoxFit& fit, const Eigen::VectorXd& xi, const Eigen::VectorXd& xj) {
    if (xi.size() != fit.coefficients.size() || xj.size() != fit.coefficients.size()) {
        throw ValidationError("hazard_ratio: covariate dimension mismatch");
    }
    return std::exp(fit.coefficients.dot(xi - xj));
}

CoxFit wlw_pooled_fit(const CoxData& data, const CoxOptions& options) {
    CoxOptions opts = options;
    opts.robust_cluster = true;
    return fit_cox(data, opts);
}

std::vector<CoxFit> wlw_per_stratum_fits(const CoxData& data, const CoxOptions& options) {
    std::map<int, CoxData> per_stratum;
    for (const auto& iv : data.intervals) {
        auto& sub = per_stratum[iv.stratum];
        sub.scheme = data.scheme;
        sub.covariate_names = data.covariate_names;
        sub.intervals.push_back(iv);
    }
    std::vector<CoxFit> fits;
    for (auto& [stratum, sub] : per_stratum) {
        bool any_event = std::any_of(sub.intervals.begin(), sub.intervals.end(),
                                     [](const RiskInterval& iv) { return iv.status == 1; });
        if (!any_event) continue;
        fits.push_back(fit_cox(sub, options));
    }
    return fits;
}

nlohmann::ordered_json cox_to_json(const CoxFit& fit) {
    nlohmann::ordered_json j;
    j["scheme"] = to_string(fit.scheme);
    auto coeffs = nlohmann::ordered_json::array();
    for (size_t i = 0; i < fit.covariate_names.size(); ++i) {
        const int k = static_cast<int>(i);
        const double z = fit.coefficients(k) / fit.robust_se(k);
        coeffs.push_back({{"name", fit.covariate_names[i]},
                          {"estimate", fit.coefficients(k)},
                          {"model_se", fit.model_se(k)},
                          {"robust_se", fit.robust_se(k)},
                          {"z", z},
                          {"p", wald_p(z)}});
    }
    j["coefficients"] = std::move(coeffs);
    j["log_partial_likelihood"] = fit.log_partial_likelihood;
    j["aic"] = fit.aic;
    j["iterations"] = fit.iterations;
    j["converged"] = fit.converged;
    j["n_intervals"] = fit.n_intervals;
    j["n_events"] = fit.n_events;
    return j;
}

} // namespace recur
