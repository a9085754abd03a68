#pragma once

// Reference implementations for tests. These are written independently of
// the library's optimized paths and kept deliberately naive.

#include "recur/cox.hpp"
#include "recur/nonparametric.hpp"

#include <algorithm>
#include <cmath>
#include <functional>
#include <set>
#include <vector>

namespace oracle {

// Log partial likelihood by direct risk-set enumeration, Breslow ties.
inline double cox_loglik(const std::vector<recur::RiskInterval>& intervals,
                         const Eigen::VectorXd& beta) {
    std::set<int> strata;
    for (const auto& iv : intervals) strata.insert(iv.stratum);
    double ll = 0;
    for (int s : strata) {
        std::set<double> times;
        for (const auto& iv : intervals) {
            if (iv.stratum == s && iv.status == 1) times.insert(iv.stop);
        }
        for (double t : times) {
            double deaths = 0, eta_sum = 0, denom = 0;
            for (const auto& iv : intervals) {
                if (iv.stratum != s) continue;
                if (iv.start < t && t <= iv.stop) denom += std::exp(beta.dot(iv.covariates));
                if (iv.status == 1 && iv.stop == t) {
                    deaths += 1;
                    eta_sum += beta.dot(iv.covariates);
                }
            }
            ll += eta_sum - deaths * std::log(denom);
        }
    }
    return ll;
}

// Dense grid search over a scalar coefficient, refined by ternary steps.
inline double grid_search_beta(const std::vector<recur::RiskInterval>& intervals, double lo,
                               double hi) {
    auto f = [&](double b) {
        Eigen::VectorXd beta(1);
        beta << b;
        return cox_loglik(intervals, beta);
    };
    double best = lo, best_ll = f(lo);
    const int n = 4000;
    for (int i = 1; i <= n; ++i) {
        const double b = lo + (hi - lo) * i / n;
        const double ll = f(b);
        if (ll > best_ll) {
            best_ll = ll;
            best = b;
        }
    }
    double a = best - (hi - lo) / n, c = best + (hi - lo) / n;
    for (int it = 0; it < 200; ++it) {
        const double m1 = a + (c - a) / 3, m2 = c - (c - a) / 3;
        if (f(m1) < f(m2)) a = m1;
        else c = m2;
    }
    return (a + c) / 2;
}

// Central finite differences of a scalar function.
inline Eigen::VectorXd fd_gradient(const std::function<double(const Eigen::VectorXd&)>& f,
                                   const Eigen::VectorXd& x, double h = 1e-5) {
    Eigen::VectorXd g(x.size());
    for (int j = 0; j < x.size(); ++j) {
        Eigen::VectorXd hi = x, lo = x;
        hi(j) += h;
        lo(j) -= h;
        g(j) = (f(hi) - f(lo)) / (2 * h);
    }
    return g;
}

inline Eigen::MatrixXd fd_hessian(const std::function<double(const Eigen::VectorXd&)>& f,
                                  const Eigen::VectorXd& x, double h = 1e-4) {
    const int p = static_cast<int>(x.size());
    Eigen::MatrixXd hess(p, p);
    for (int i = 0; i < p; ++i) {
        for (int j = 0; j < p; ++j) {
            Eigen::VectorXd pp = x, pm = x, mp = x, mm = x;
            pp(i) += h;
            pp(j) += h;
            pm(i) += h;
            pm(j) -= h;
            mp(i) -= h;
            mp(j) += h;
            mm(i) -= h;
            mm(j) -= h;
            hess(i, j) = (f(pp) - f(pm) - f(mp) + f(mm)) / (4 * h * h);
        }
    }
    return hess;
}

// Nelson-Aalen cumulative hazard on pooled observations, events before
// censorings at ties.
inline double nelson_aalen_at(const std::vector<recur::Observation>& obs, double t) {
    std::vector<double> times;
    for (const auto& o : obs) {
        if (o.event && o.time <= t) times.push_back(o.time);
    }
    std::sort(times.begin(), times.end());
    times.erase(std::unique(times.begin(), times.end()), times.end());
    double cum = 0;
    for (double s : times) {
        double d = 0, r = 0;
        for (const auto& o : obs) {
            if (o.event && o.time == s) ++d;
            if (o.time >= s) ++r;
        }
        cum += d / r;
    }
    return cum;
}

} // namespace oracle
