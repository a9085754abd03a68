#include "recur/prediction.hpp"

#include "recur/errors.hpp"
#include "recur/numfmt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <ostream>
#include <set>

namespace recur {

double conditional_break_probability(const SurvivalCurve& curve, double t, double horizon) {
    if (t < 0) throw ValidationError("conditional_break_probability: negative time");
    if (horizon <= 0) throw ValidationError("conditional_break_probability: horizon must be positive");
    if (t + horizon > curve.max_support()) {
        throw NumericError("conditional_break_probability: t + horizon runs past the curve "
                           "support (no reliable estimate)");
    }
    const double s_t = curve.survival_at(t);
    if (s_t <= 0) throw NumericError("conditional_break_probability: survival is 0 at t");
    return (s_t - curve.survival_at(t + horizon)) / s_t;
}

PredictionTable predict_counts(const SurvivalCurve& curve, const std::map<int, int>& cohorts,
                               int games_year, const std::string& estimator_name) {
    PredictionTable table;
    table.estimator = estimator_name;
    // Descending year-set order, the youngest cohort first.
    for (auto it = cohorts.rbegin(); it != cohorts.rend(); ++it) {
        const int year_set = it->first;
        const int count = it->second;
        const double t = static_cast<double>(games_year - 4 - year_set);
        if (t < 0 || t + 4.0 > curve.max_support()) {
            table.warnings.push_back("cohort " + std::to_string(year_set) +
                                     " excluded: outside the reliable support window");
            continue;
        }
        CohortPrediction pred;
        pred.year_set = year_set;
        pred.at_risk = count;
        pred.survived_years = t;
        pred.probability = conditional_break_probability(curve, t, 4.0);
        pred.expected_breaks = count * pred.probability;
        table.total += pred.expected_breaks;
        table.cohorts.push_back(pred);
    }
    return table;
}

std::vector<PredictionTable> predict_counts(
    const std::vector<std::pair<std::string, SurvivalCurve>>& curves,
    const std::map<int, int>& cohorts, int games_year) {
    std::vector<PredictionTable> tables;
    for (const auto& [name, curve] : curves) {
        tables.push_back(predict_counts(curve, cohorts, games_year, name));
    }
    return tables;
}

void write_prediction_csv(const std::vector<PredictionTable>& tables, std::ostream& out) {
    std::set<int, std::greater<int>> years;
    for (const auto& t : tables) {
        for (const auto& c : t.cohorts) years.insert(c.year_set);
    }
    out << "estimator";
    for (int y : years) out << ',' << y;
    out << ",total\n";
    for (const auto& t : tables) {
        out << t.estimator;
        for (int y : years) {
            out << ',';
            auto it = std::find_if(t.cohorts.begin(), t.cohorts.end(),
                                   [y](const CohortPrediction& c) { return c.year_set == y; });
            if (it != t.cohorts.end()) out << fmt_num(it->expected_breaks);
        }
        out << ',' << fmt_num(t.total) << '\n';
    }
}

nlohmann::ordered_json prediction_to_json(const std::vector<PredictionTable>& tables) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& t : tables) {
        nlohmann::ordered_json jt;
        jt["estimator"] = t.estimator;
        auto cohorts = nlohmann::ordered_json::array();
        for (const auto& c : t.cohorts) {
            cohorts.push_back({{"year_set", c.year_set},
                               {"at_risk", c.at_risk},
                               {"survived_years", c.survived_years},
                               {"conditional_probability", c.probability},
                               {"expected_breaks", c.expected_breaks}});
        }
        jt["cohorts"] = std::move(cohorts);
        jt["total"] = t.total;
        jt["warnings"] = t.warnings;
        arr.push_back(std::move(jt));
    }
    return arr;
}

} // namespace recur
