#pragma once

#include "recur/record.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <string>
#include <vector>

namespace recur {

enum class EstimatorTag { KM, WangChang, GeneralizedKM, Frailty };

const char* to_string(EstimatorTag t);
EstimatorTag estimator_from_string(const std::string& s);

struct CurvePoint {
    double time = 0;
    double estimate = 1;
    double at_risk = 0; // real-valued for weighted estimators
    double events = 0;
};

// Product-limit curve: right-continuous step function, 1 before the first
// support point.
struct SurvivalCurve {
    EstimatorTag tag = EstimatorTag::KM;
    std::vector<CurvePoint> points; // strictly increasing times

    double survival_at(double t) const;
    double max_support() const { return points.empty() ? 0.0 : points.back().time; }
};

struct Observation {
    double time = 0;
    bool event = false; // false: censored
};

// Gap-time history of one unit (one Olympic event): successive record
// durations with per-gap event flags.
struct GapHistory {
    std::vector<Observation> gaps;
};

// Classic product-limit estimator. Ties: events precede censorings, so an
// observation censored at t stays in the risk set for events at t.
SurvivalCurve kaplan_meier(const std::vector<Observation>& observations);

// Pooled-gap product-limit estimator for i.i.d. recurrent gaps: every gap
// (complete or censored) enters as one observation.
SurvivalCurve generalized_km(const std::vector<GapHistory>& histories);

// Weighted recurrent-event estimator: each unit contributes weight
// 1/max(K_i,1) per gap, K_i its number of complete gaps; censored final gaps
// enter the risk sums only.
SurvivalCurve wang_chang(const std::vector<GapHistory>& histories);

struct GroupCount {
    double observed = 0;
    double expected = 0;
};

struct LogRankResult {
    double statistic = 0;
    int df = 0;
    double p_value = 1;
    std::vector<GroupCount> per_group;
};

// k-sample log-rank test with hypergeometric variance, no continuity
// correction. Requires >= 2 non-empty groups and at least one event time.
LogRankResult log_rank(const std::vector<std::vector<Observation>>& groups);

void write_curve_csv(const SurvivalCurve& curve, std::ostream& out);
SurvivalCurve read_curve_csv(std::istream& in, EstimatorTag tag);
nlohmann::ordered_json curve_to_json(const SurvivalCurve& curve);

// Gap histories of a dataset, one per event, gaps ordered by sequence.
std::vector<GapHistory> gap_histories(const std::vector<RecordSpell>& spells);
// (duration, broken) observations, one per spell.
std::vector<Observation> duration_observations(const std::vector<RecordSpell>& spells);

} // namespace recur
