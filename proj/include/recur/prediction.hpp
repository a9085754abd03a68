#pragma once

#include "recur/nonparametric.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <map>
#include <string>
#include <vector>

namespace recur {

// P(T <= t + horizon | T > t) = (S(t) - S(t+horizon)) / S(t) with
// right-continuous step evaluation and S(0) = 1 by convention. Throws
// NumericError when S(t) = 0 or t + horizon runs past the curve support.
double conditional_break_probability(const SurvivalCurve& curve, double t,
                                     double horizon = 4.0);

struct CohortPrediction {
    int year_set = 0;
    int at_risk = 0;
    double survived_years = 0;
    double probability = 0;
    double expected_breaks = 0;
};

struct PredictionTable {
    std::string estimator;
    std::vector<CohortPrediction> cohorts; // descending year_set
    double total = 0;
    std::vector<std::string> warnings; // cohorts excluded as outside support
};

// Expected break counts at games_year per cohort of records still standing:
// a record set in year y has survived t = games_year - 4 - y years. Cohorts
// whose evaluation window runs past the curve support are excluded with a
// warning.
PredictionTable predict_counts(const SurvivalCurve& curve,
                               const std::map<int, int>& cohorts, int games_year,
                               const std::string& estimator_name);

std::vector<PredictionTable> predict_counts(
    const std::vector<std::pair<std::string, SurvivalCurve>>& curves,
    const std::map<int, int>& cohorts, int games_year);

// Rows = estimator, columns = cohort year (descending), final Total column.
void write_prediction_csv(const std::vector<PredictionTable>& tables, std::ostream& out);
nlohmann::ordered_json prediction_to_json(const std::vector<PredictionTable>& tables);

} // namespace recur
