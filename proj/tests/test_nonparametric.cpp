#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include "oracles.hpp"
#include "recur/errors.hpp"
#include "recur/nonparametric.hpp"

#include <random>
#include <sstream>

using namespace recur;

namespace {

// The published product-limit walk through t = 16: (t, d, r) with the
// survival column it implies.
std::vector<Observation> table5_durations() {
    std::vector<Observation> obs;
    auto add = [&](int count, double time, bool event) {
        for (int i = 0; i < count; ++i) obs.push_back({time, event});
    };
    add(3, 2, true);
    add(412, 4, true);
    add(79, 4, false);
    add(2, 6, true);
    add(142, 8, true);
    add(17, 8, false);
    add(1, 10, true);
    add(43, 12, true);
    add(7, 12, false);
    add(12, 16, true);
    add(32, 16, false);
    return obs;
}

std::vector<GapHistory> random_histories(std::mt19937& rng, int units) {
    std::uniform_int_distribution<int> n_gaps(1, 6);
    std::uniform_int_distribution<int> gap(1, 10);
    std::uniform_real_distribution<double> u(0, 1);
    std::vector<GapHistory> hs;
    for (int i = 0; i < units; ++i) {
        GapHistory h;
        const int n = n_gaps(rng);
        for (int g = 0; g < n; ++g) {
            const bool last = g == n - 1;
            h.gaps.push_back({static_cast<double>(gap(rng)), last ? u(rng) < 0.5 : true});
        }
        hs.push_back(std::move(h));
    }
    return hs;
}

} // namespace

TEST_CASE("kaplan_meier reproduces the published survival walk") {
    const auto curve = kaplan_meier(table5_durations());
    REQUIRE(curve.points.size() == 7);
    const double expected_s[] = {0.9960, 0.4467, 0.4432, 0.1954, 0.1934, 0.1049, 0.0763};
    const double expected_t[] = {2, 4, 6, 8, 10, 12, 16};
    const double expected_r[] = {750, 747, 256, 254, 95, 94, 44};
    const double expected_d[] = {3, 412, 2, 142, 1, 43, 12};
    for (size_t i = 0; i < 7; ++i) {
        CHECK(curve.points[i].time == expected_t[i]);
        CHECK(std::abs(curve.points[i].estimate - expected_s[i]) < 5e-4);
        CHECK(curve.points[i].at_risk == expected_r[i]);
        CHECK(curve.points[i].events == expected_d[i]);
    }
}

TEST_CASE("kaplan_meier with all observations censored is flat 1") {
    const auto curve = kaplan_meier({{4, false}, {8, false}});
    CHECK(curve.points.empty());
    CHECK(curve.survival_at(100) == 1.0);
}

TEST_CASE("kaplan_meier tie convention keeps censored in the risk set") {
    const auto curve = kaplan_meier({{4, true}, {4, true}, {8, false}, {8, true}});
    REQUIRE(curve.points.size() == 2);
    CHECK(curve.points[0].estimate == doctest::Approx(0.5));
    CHECK(curve.points[1].estimate == doctest::Approx(0.25)); // r(8) = 2 includes the censored one
}

TEST_CASE("kaplan_meier equals the empirical survivor without censoring") {
    std::mt19937 rng(7);
    std::uniform_int_distribution<int> t(1, 12);
    std::vector<Observation> obs;
    for (int i = 0; i < 200; ++i) obs.push_back({static_cast<double>(t(rng)), true});
    const auto curve = kaplan_meier(obs);
    for (const auto& p : curve.points) {
        double beyond = 0;
        for (const auto& o : obs) {
            if (o.time > p.time) ++beyond;
        }
        CHECK(p.estimate == doctest::Approx(beyond / obs.size()));
    }
}

TEST_CASE("kaplan_meier estimates are monotone in [0,1] and order-invariant") {
    std::mt19937 rng(11);
    std::uniform_int_distribution<int> t(1, 15);
    std::uniform_real_distribution<double> u(0, 1);
    for (int rep = 0; rep < 20; ++rep) {
        std::vector<Observation> obs;
        for (int i = 0; i < 60; ++i) obs.push_back({static_cast<double>(t(rng)), u(rng) < 0.7});
        bool any_event = std::any_of(obs.begin(), obs.end(), [](auto& o) { return o.event; });
        if (!any_event) obs.push_back({3.0, true});
        const auto curve = kaplan_meier(obs);
        double prev = 1.0;
        for (const auto& p : curve.points) {
            CHECK(p.estimate <= prev + 1e-15);
            CHECK(p.estimate >= 0);
            CHECK(p.events <= p.at_risk);
            prev = p.estimate;
        }
        auto shuffled = obs;
        std::shuffle(shuffled.begin(), shuffled.end(), rng);
        const auto curve2 = kaplan_meier(shuffled);
        REQUIRE(curve2.points.size() == curve.points.size());
        for (size_t i = 0; i < curve.points.size(); ++i) {
            CHECK(curve2.points[i].estimate == curve.points[i].estimate);
        }
    }
}

TEST_CASE("kaplan_meier rejects empty and non-positive input") {
    CHECK_THROWS_AS(kaplan_meier({}), ValidationError);
    CHECK_THROWS_AS(kaplan_meier({{0, true}}), ValidationError);
}

TEST_CASE("generalized_km equals kaplan_meier on the pooled gaps") {
    std::mt19937 rng(13);
    for (int rep = 0; rep < 50; ++rep) {
        const auto hs = random_histories(rng, 20);
        std::vector<Observation> pooled;
        for (const auto& h : hs) {
            for (const auto& g : h.gaps) pooled.push_back(g);
        }
        bool any_event = std::any_of(pooled.begin(), pooled.end(), [](auto& o) { return o.event; });
        if (!any_event) continue;
        const auto gkm = generalized_km(hs);
        const auto km = kaplan_meier(pooled);
        REQUIRE(gkm.points.size() == km.points.size());
        for (size_t i = 0; i < km.points.size(); ++i) {
            CHECK(gkm.points[i].time == km.points[i].time);
            CHECK(std::abs(gkm.points[i].estimate - km.points[i].estimate) < 1e-12);
            CHECK(gkm.points[i].at_risk == km.points[i].at_risk);
            CHECK(gkm.points[i].events == km.points[i].events);
        }
    }
}

TEST_CASE("generalized_km hand examples") {
    SUBCASE("single complete gap drops to zero") {
        const auto curve = generalized_km({GapHistory{{{5, true}}}});
        REQUIRE(curve.points.size() == 1);
        CHECK(curve.points[0].estimate == 0.0);
    }
    SUBCASE("censored gap stays in the risk set only") {
        const auto curve = generalized_km({GapHistory{{{4, true}, {8, false}}},
                                           GapHistory{{{4, true}}}});
        REQUIRE(curve.points.size() == 1);
        CHECK(curve.points[0].estimate == doctest::Approx(1.0 / 3.0));
        CHECK(curve.survival_at(8) == doctest::Approx(1.0 / 3.0));
    }
}

TEST_CASE("wang_chang equals kaplan_meier when each unit has one complete gap") {
    std::mt19937 rng(17);
    std::uniform_int_distribution<int> t(1, 9);
    std::vector<GapHistory> hs;
    std::vector<Observation> pooled;
    for (int i = 0; i < 40; ++i) {
        const double time = t(rng);
        hs.push_back(GapHistory{{{time, true}}});
        pooled.push_back({time, true});
    }
    const auto wc = wang_chang(hs);
    const auto km = kaplan_meier(pooled);
    REQUIRE(wc.points.size() == km.points.size());
    for (size_t i = 0; i < km.points.size(); ++i) {
        CHECK(wc.points[i].estimate == doctest::Approx(km.points[i].estimate));
    }
}

TEST_CASE("wang_chang weighted sums on a single unit") {
    const auto curve = wang_chang({GapHistory{{{4, true}, {4, true}}}});
    REQUIRE(curve.points.size() == 1);
    CHECK(curve.points[0].at_risk == doctest::Approx(1.0)); // 2 gaps x weight 1/2
    CHECK(curve.points[0].events == doctest::Approx(1.0));
    CHECK(curve.points[0].estimate == 0.0);
}

TEST_CASE("wang_chang with only censored gaps is flat 1") {
    const auto curve = wang_chang({GapHistory{{{4, false}}}, GapHistory{{{6, false}}}});
    CHECK(curve.points.empty());
    CHECK(curve.survival_at(10) == 1.0);
}

TEST_CASE("survival_at is a right-continuous step from 1") {
    SurvivalCurve curve;
    curve.points = {{4, 0.5, 10, 5}, {8, 0.25, 5, 2}};
    CHECK(curve.survival_at(0) == 1.0);
    CHECK(curve.survival_at(3.999) == 1.0);
    CHECK(curve.survival_at(4) == 0.5);
    CHECK(curve.survival_at(7.5) == 0.5);
    CHECK(curve.survival_at(8) == 0.25);
    CHECK(curve.survival_at(100) == 0.25);
}

TEST_CASE("log_rank on identical groups is exactly null") {
    const std::vector<Observation> g = {{2, true}, {5, true}, {7, false}};
    const auto res = log_rank({g, g});
    CHECK(res.statistic == doctest::Approx(0.0));
    CHECK(res.p_value == doctest::Approx(1.0));
    CHECK(res.df == 1);
}

TEST_CASE("log_rank two-group hand instance") {
    const std::vector<Observation> a = {{1, true}, {3, true}};
    const std::vector<Observation> b = {{2, true}, {4, false}};
    const auto res = log_rank({a, b});
    CHECK(std::abs(res.statistic - 0.615) < 5e-3);
    CHECK(std::abs(res.p_value - 0.433) < 5e-3);
    CHECK(res.df == 1);
    // observed-minus-expected sums to zero across groups
    double diff = 0;
    for (const auto& g : res.per_group) diff += g.observed - g.expected;
    CHECK(std::abs(diff) < 1e-12);

    const auto swapped = log_rank({b, a});
    CHECK(swapped.statistic == doctest::Approx(res.statistic));
    CHECK(swapped.p_value == doctest::Approx(res.p_value));
}

TEST_CASE("log_rank five-group form") {
    std::mt19937 rng(23);
    std::uniform_int_distribution<int> t(1, 10);
    std::vector<std::vector<Observation>> groups(5);
    for (auto& g : groups) {
        for (int i = 0; i < 12; ++i) g.push_back({static_cast<double>(t(rng)), true});
    }
    const auto res = log_rank(groups);
    CHECK(res.df == 4);
    CHECK(res.statistic >= 0);
    CHECK(res.p_value >= 0);
    CHECK(res.p_value <= 1);
}

TEST_CASE("log_rank ignores observations censored before the first event") {
    const std::vector<Observation> a = {{3, true}, {6, true}};
    const std::vector<Observation> b = {{4, true}, {8, false}};
    const auto base = log_rank({a, b});
    auto a2 = a;
    auto b2 = b;
    a2.push_back({1, false});
    b2.push_back({2, false});
    const auto padded = log_rank({a2, b2});
    CHECK(padded.statistic == doctest::Approx(base.statistic));
    CHECK(padded.p_value == doctest::Approx(base.p_value));
}

TEST_CASE("log_rank input validation") {
    CHECK_THROWS_AS(log_rank({{{1, true}}}), ValidationError);
    CHECK_THROWS_AS(log_rank({{{1, true}}, {}}), ValidationError);
    CHECK_THROWS_AS(log_rank({{{1, false}}, {{2, false}}}), ValidationError);
}

TEST_CASE("curve CSV round trip") {
    const auto curve = kaplan_meier(table5_durations());
    std::ostringstream out;
    write_curve_csv(curve, out);
    std::istringstream in(out.str());
    const auto back = read_curve_csv(in, EstimatorTag::KM);
    REQUIRE(back.points.size() == curve.points.size());
    for (size_t i = 0; i < curve.points.size(); ++i) {
        CHECK(back.points[i].time == doctest::Approx(curve.points[i].time));
        CHECK(back.points[i].estimate == doctest::Approx(curve.points[i].estimate).epsilon(1e-5));
    }
}
