#pragma once

#include "recur/calendar.hpp"

#include <map>
#include <optional>
#include <string>
#include <vector>

namespace recur {

enum class Category { Track = 1, Field = 2, Canoeing = 3, Cycling = 4, Swimming = 5 };
enum class SpellStatus { Broken, Censored };

const char* to_string(Category c);
const char* to_string(SpellStatus s);
// Accepts category names (case-insensitive) or numeric codes 1-5.
Category category_from_string(const std::string& s);
SpellStatus status_from_string(const std::string& s);

// One record's life: set at year_set, at risk until broken or censored.
// Covariate values are keyed by column name; an absent key means missing.
struct RecordSpell {
    std::string event_id;
    Category category = Category::Track;
    int sequence = 1;
    int year_set = 0;
    std::optional<int> year_end; // empty: still standing at the horizon
    SpellStatus status = SpellStatus::Broken;
    int duration = 0; // years survived; year_end - year_set when broken
    std::map<std::string, double> covariates;

    bool has(const std::string& name) const;
    // Model value of a covariate; the name "category" resolves to the
    // numeric category code.
    double value(const std::string& name) const;
};

enum class CovariateKind { Binary, Quantitative };

struct CovariateSpec {
    std::string name;
    CovariateKind kind = CovariateKind::Quantitative;
    std::optional<double> dichotomize_threshold; // sample mean, Quantitative only
};

// A validated collection of record spells plus ingestion metadata.
struct Dataset {
    GamesCalendar calendar = GamesCalendar::modern();
    std::vector<RecordSpell> spells;
    std::vector<std::string> covariate_names; // source column order
    std::map<std::string, int> missing_counts;

    int censored_count() const;
    // Kinds inferred from observed values: a column whose non-missing values
    // are all 0/1 is Binary, otherwise Quantitative.
    std::vector<CovariateSpec> covariate_specs() const;
};

// One (record, Games) exposure row for the discrete-time logistic model.
struct PersonPeriodRow {
    std::string event_id;
    int sequence = 1;
    int period_index = 1; // 1-based within the record
    double time = 0;      // years since the record was set
    double time_sq = 0;
    int term = 0; // 1 only on the breaking Games
    int duration = 0;
    Category category = Category::Track;
    std::map<std::string, double> covariates;
};

} // namespace recur
