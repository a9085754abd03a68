#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "recur/cox.hpp"
#include "recur/errors.hpp"

#include <cmath>
#include <random>

using namespace recur;

namespace {

RiskInterval interval(double start, double stop, int status, std::vector<double> x,
                      int stratum = 0, const std::string& cluster = "") {
    RiskInterval iv;
    iv.start = start;
    iv.stop = stop;
    iv.status = status;
    iv.stratum = stratum;
    iv.cluster = cluster.empty() ? "c" + std::to_string(rand()) : cluster;
    iv.covariates = Eigen::Map<Eigen::VectorXd>(x.data(), static_cast<int>(x.size()));
    return iv;
}

CoxData three_obs_instance() {
    CoxData data;
    data.covariate_names = {"x"};
    data.intervals = {interval(0, 1, 1, {1}, 0, "a"), interval(0, 2, 1, {0}, 0, "b"),
                      interval(0, 3, 1, {1}, 0, "c")};
    return data;
}

RecordSpell spell(const std::string& event, int seq, int set, int end, SpellStatus status) {
    RecordSpell sp;
    sp.event_id = event;
    sp.sequence = seq;
    sp.year_set = set;
    sp.year_end = end;
    sp.status = status;
    sp.duration = end - set;
    return sp;
}

// Instances small enough for the dense grid oracle: unique stop times, a
// single binary-ish covariate.
CoxData random_small_instance(std::mt19937& rng) {
    std::uniform_int_distribution<int> n_iv(3, 8);
    std::uniform_real_distribution<double> u(0, 1);
    CoxData data;
    data.covariate_names = {"x"};
    const int n = n_iv(rng);
    std::vector<double> stops(n);
    for (int i = 0; i < n; ++i) stops[i] = i + 1 + 0.5 * u(rng); // distinct, no ties
    std::shuffle(stops.begin(), stops.end(), rng);
    int events = 0;
    for (int i = 0; i < n; ++i) {
        const double start = stops[i] * u(rng) * 0.8;
        const int status = u(rng) < 0.75 ? 1 : 0;
        events += status;
        data.intervals.push_back(
            interval(start, stops[i], status, {u(rng) < 0.5 ? 0.0 : 1.0}, 0,
                     "u" + std::to_string(i)));
    }
    if (events == 0) data.intervals[0].status = 1;
    // Both covariate levels must appear among events and risk sets.
    data.intervals[0].covariates(0) = 0;
    data.intervals[1].covariates(0) = 1;
    return data;
}

} // namespace

TEST_CASE("risk interval geometry per scheme") {
    const auto cal = GamesCalendar::modern();
    std::vector<RecordSpell> spells = {spell("e", 1, 1896, 1904, SpellStatus::Broken),
                                       spell("e", 2, 1904, 1912, SpellStatus::Broken)};

    const auto ag = build_risk_intervals(spells, RiskScheme::AG, cal, {"category"});
    CHECK(ag.intervals[1].start == 8);
    CHECK(ag.intervals[1].stop == 16);
    CHECK(ag.intervals[1].stratum == 0);

    const auto pwp_tt = build_risk_intervals(spells, RiskScheme::PWP_TT, cal, {"category"});
    CHECK(pwp_tt.intervals[1].start == 8);
    CHECK(pwp_tt.intervals[1].stop == 16);
    CHECK(pwp_tt.intervals[1].stratum == 2);

    const auto pwp_gt = build_risk_intervals(spells, RiskScheme::PWP_GT, cal, {"category"});
    CHECK(pwp_gt.intervals[1].start == 0);
    CHECK(pwp_gt.intervals[1].stop == 8);
    CHECK(pwp_gt.intervals[1].stratum == 2);

    const auto wlw = build_risk_intervals(spells, RiskScheme::WLW, cal, {"category"});
    CHECK(wlw.intervals[1].start == 0);
    CHECK(wlw.intervals[1].stop == 16);
    CHECK(wlw.intervals[1].stratum == 2);

    // First records coincide under AG and WLW.
    CHECK(ag.intervals[0].start == wlw.intervals[0].start);
    CHECK(ag.intervals[0].stop == wlw.intervals[0].stop);
}

TEST_CASE("censored spells pass through with status 0") {
    const auto cal = GamesCalendar::modern();
    const auto data = build_risk_intervals({spell("e", 1, 2000, 2008, SpellStatus::Censored)},
                                           RiskScheme::AG, cal, {"category"});
    CHECK(data.intervals[0].status == 0);
    CHECK(data.intervals[0].stop == 112);
}

TEST_CASE("missing predecessor sequence is rejected") {
    const auto cal = GamesCalendar::modern();
    CHECK_THROWS_WITH_AS(build_risk_intervals({spell("e", 2, 1904, 1912, SpellStatus::Broken)},
                                              RiskScheme::PWP_GT, cal, {"category"}),
                         doctest::Contains("predecessor"), ValidationError);
}

TEST_CASE("three-observation fit matches the analytic optimum") {
    const auto fit = fit_cox(three_obs_instance());
    CHECK(std::abs(fit.coefficients(0) - (-0.5 * std::log(2.0))) < 1e-4);
    CHECK(fit.converged);
    CHECK(fit.aic == -2.0 * fit.log_partial_likelihood + 2.0);
    // grid oracle agrees
    const double grid = oracle::grid_search_beta(three_obs_instance().intervals, -5, 5);
    CHECK(std::abs(fit.coefficients(0) - grid) < 1e-4);
}

TEST_CASE("newton matches the dense grid oracle on random small instances") {
    std::mt19937 rng(2024);
    int done = 0;
    while (done < 50) {
        const auto data = random_small_instance(rng);
        const double grid = oracle::grid_search_beta(data.intervals, -8, 8);
        if (std::abs(grid) > 7.9) continue; // no interior optimum: (quasi-)separated draw
        CoxFit fit;
        try {
            fit = fit_cox(data);
        } catch (const NumericError&) {
            continue;
        }
        CHECK(std::abs(fit.coefficients(0) - grid) < 1e-4);
        ++done;
    }
}

TEST_CASE("analytic derivatives match finite differences") {
    std::mt19937 rng(99);
    std::uniform_real_distribution<double> u(-0.8, 0.8);
    CoxData data;
    data.covariate_names = {"x1", "x2"};
    std::vector<double> stops = {1.5, 2.5, 3.5, 4.5, 5.5, 6.5};
    for (int i = 0; i < 6; ++i) {
        data.intervals.push_back(interval(0.3 * i, stops[static_cast<size_t>(i)], i % 3 != 0,
                                          {u(rng), u(rng)}, 0, "u" + std::to_string(i)));
    }
    auto f = [&](const Eigen::VectorXd& b) { return oracle::cox_loglik(data.intervals, b); };
    for (int rep = 0; rep < 5; ++rep) {
        Eigen::VectorXd beta(2);
        beta << u(rng), u(rng);
        const auto d = cox_partial_derivatives(data.intervals, beta);
        CHECK(std::abs(d.loglik - f(beta)) < 1e-10);
        const Eigen::VectorXd g = oracle::fd_gradient(f, beta);
        const Eigen::MatrixXd h = oracle::fd_hessian(f, beta);
        for (int j = 0; j < 2; ++j) {
            CHECK(std::abs(d.score(j) - g(j)) / std::max(1.0, std::abs(g(j))) < 1e-5);
            for (int k = 0; k < 2; ++k) {
                // info is the negative Hessian
                CHECK(std::abs(-d.info(j, k) - h(j, k)) / std::max(1.0, std::abs(h(j, k))) < 1e-5);
            }
        }
    }
}

TEST_CASE("score at the optimum is numerically zero") {
    const auto data = three_obs_instance();
    const auto fit = fit_cox(data);
    const auto d = cox_partial_derivatives(data.intervals, fit.coefficients);
    CHECK(d.score.lpNorm<Eigen::Infinity>() < 1e-9);
}

TEST_CASE("covariate translation leaves coefficients unchanged") {
    std::mt19937 rng(5);
    auto data = random_small_instance(rng);
    const auto fit = fit_cox(data);
    auto shifted = data;
    for (auto& iv : shifted.intervals) iv.covariates(0) += 17.5;
    const auto fit2 = fit_cox(shifted);
    CHECK(std::abs(fit.coefficients(0) - fit2.coefficients(0)) < 1e-8);
}

TEST_CASE("constant covariate reports a singular information matrix") {
    CoxData data;
    data.covariate_names = {"x"};
    data.intervals = {interval(0, 1, 1, {1}), interval(0, 2, 1, {1}), interval(0, 3, 1, {1})};
    CHECK_THROWS_WITH_AS(fit_cox(data), doctest::Contains("singular"), NumericError);
}

TEST_CASE("monotone likelihood reports divergence instead of looping") {
    // Small covariate scale keeps the score above tolerance until the walk
    // crosses the divergence bound.
    CoxData data;
    data.covariate_names = {"x"};
    data.intervals = {interval(0, 1, 1, {0.01}), interval(0, 2, 1, {0})};
    CHECK_THROWS_WITH_AS(fit_cox(data), doctest::Contains("divergent"), NumericError);
}

TEST_CASE("hazard ratios") {
    const auto fit = fit_cox(three_obs_instance());
    Eigen::VectorXd x(1);
    x << 3.7;
    CHECK(hazard_ratio(fit, x, x) == 1.0);

    CoxFit manual = fit;
    manual.coefficients(0) = std::log(2.0);
    Eigen::VectorXd xi(1), xj(1);
    xi << 1;
    xj << 0;
    CHECK(hazard_ratio(manual, xi, xj) == doctest::Approx(2.0));
    // exponentiating a published-scale estimate
    manual.coefficients(0) = 0.18584;
    CHECK(hazard_ratio(manual, xi, xj) == doctest::Approx(1.2042).epsilon(1e-4));

    Eigen::VectorXd bad(2);
    bad << 1, 2;
    CHECK_THROWS_AS(hazard_ratio(fit, bad, bad), ValidationError);
}

TEST_CASE("single stratum reproduces the unstratified fit exactly") {
    std::mt19937 rng(8);
    auto data = random_small_instance(rng);
    const auto fit = fit_cox(data);
    auto relabeled = data;
    for (auto& iv : relabeled.intervals) iv.stratum = 7;
    const auto fit2 = fit_cox(relabeled);
    CHECK(fit.coefficients(0) == fit2.coefficients(0));
    CHECK(fit.log_partial_likelihood == fit2.log_partial_likelihood);
}

TEST_CASE("sandwich covariance is symmetric PSD with the expected form") {
    std::mt19937 rng(12);
    for (int rep = 0; rep < 10; ++rep) {
        const auto data = random_small_instance(rng);
        CoxFit fit;
        try {
            fit = fit_cox(data);
        } catch (const NumericError&) {
            continue;
        }
        CHECK((fit.robust_cov - fit.robust_cov.transpose()).norm() < 1e-12);
        Eigen::SelfAdjointEigenSolver<Eigen::MatrixXd> es(fit.robust_cov);
        CHECK(es.eigenvalues().minCoeff() > -1e-12);
        // bread-meat-bread structure
        Eigen::MatrixXd meat = Eigen::MatrixXd::Zero(1, 1);
        std::map<std::string, Eigen::VectorXd> sums;
        for (size_t i = 0; i < data.intervals.size(); ++i) {
            auto [it, ins] = sums.try_emplace(data.intervals[i].cluster, Eigen::VectorXd::Zero(1));
            it->second += fit.score_residuals.row(static_cast<int>(i)).transpose();
        }
        Eigen::VectorXd total = Eigen::VectorXd::Zero(1);
        for (auto& [k, v] : sums) {
            meat += v * v.transpose();
            total += v;
        }
        CHECK(total.lpNorm<Eigen::Infinity>() < 1e-8); // residuals sum to the score = 0
        const Eigen::MatrixXd expect = fit.model_cov * meat * fit.model_cov;
        CHECK((fit.robust_cov - expect).norm() < 1e-10);
    }
}

TEST_CASE("wlw pooled fit equals AG when every cluster has one unit at origin") {
    const auto cal = GamesCalendar::modern();
    std::vector<RecordSpell> spells;
    std::mt19937 rng(4);
    std::uniform_int_distribution<int> pick(1, 6);
    for (int i = 0; i < 12; ++i) {
        const int end = 1896 + 4 * pick(rng) + (i % 2 ? 4 : 0);
        auto sp = spell("e" + std::to_string(i), 1, 1896, std::min(end, 1936),
                        i % 5 ? SpellStatus::Broken : SpellStatus::Censored);
        sp.covariates["x"] = i % 3 == 0 ? 1 : 0;
        spells.push_back(sp);
    }
    const auto ag = fit_cox(build_risk_intervals(spells, RiskScheme::AG, cal, {"x"}));
    const auto wlw = wlw_pooled_fit(build_risk_intervals(spells, RiskScheme::WLW, cal, {"x"}));
    CHECK(std::abs(ag.coefficients(0) - wlw.coefficients(0)) < 1e-10);
    CHECK(std::abs(ag.log_partial_likelihood - wlw.log_partial_likelihood) < 1e-10);
}

TEST_CASE("wlw per-stratum diagnostics bracket the pooled estimate") {
    // Six units, two marginal strata, events in both.
    CoxData data;
    data.covariate_names = {"x"};
    data.intervals = {
        interval(0, 1, 1, {1}, 1, "a"), interval(0, 2, 1, {0}, 1, "b"),
        interval(0, 3, 1, {1}, 1, "c"), interval(0, 2.5, 1, {1}, 2, "a"),
        interval(0, 3.5, 1, {0}, 2, "b"), interval(0, 4.5, 0, {1}, 2, "c"),
    };
    const auto pooled = wlw_pooled_fit(data);
    const auto per = wlw_per_stratum_fits(data);
    REQUIRE(per.size() == 2);
    const double b1 = per[0].coefficients(0);
    const double b2 = per[1].coefficients(0);
    CHECK(pooled.coefficients(0) >= std::min(b1, b2) - 1e-9);
    CHECK(pooled.coefficients(0) <= std::max(b1, b2) + 1e-9);
    // each stratum fit matches its own grid search
    std::vector<RiskInterval> s1(data.intervals.begin(), data.intervals.begin() + 3);
    CHECK(std::abs(b1 - oracle::grid_search_beta(s1, -8, 8)) < 1e-4);
}

TEST_CASE("aic identity holds on every fit") {
    std::mt19937 rng(77);
    for (int rep = 0; rep < 10; ++rep) {
        const auto data = random_small_instance(rng);
        try {
            const auto fit = fit_cox(data);
            CHECK(fit.aic == -2.0 * fit.log_partial_likelihood +
                                 2.0 * static_cast<double>(fit.covariate_names.size()));
        } catch (const NumericError&) {
        }
    }
}

TEST_CASE("strata without events contribute nothing rather than failing") {
    CoxData data;
    data.covariate_names = {"x"};
    data.intervals = {interval(0, 1, 1, {1}, 1, "a"), interval(0, 2, 1, {0}, 1, "b"),
                      interval(0, 3, 1, {1}, 1, "c"), interval(0, 9, 0, {1}, 2, "d")};
    const auto fit = fit_cox(data);
    std::vector<RiskInterval> first_stratum(data.intervals.begin(), data.intervals.begin() + 3);
    CHECK(std::abs(fit.coefficients(0) - oracle::grid_search_beta(first_stratum, -5, 5)) < 1e-4);
}
