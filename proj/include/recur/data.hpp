#pragma once

#include "recur/record.hpp"

#include <nlohmann/json_fwd.hpp>

#include <iosfwd>
#include <optional>
#include <string>
#include <vector>

namespace recur {

// Reads and validates the record-spell CSV schema:
//   event_id,category,sequence,year_set,year_end,status[,covariate...]
// Empty cells denote missing values. Throws ValidationError with the source
// line number on malformed rows, years off the calendar, non-positive
// durations, or overlapping spells within an event.
Dataset ingest_csv(const std::string& path, const GamesCalendar& calendar);
Dataset ingest_csv(std::istream& in, const GamesCalendar& calendar,
                   const std::string& source_name = "<stream>");

struct DichotomizeResult {
    std::vector<std::optional<double>> values; // 1 iff input >= threshold
    double threshold = 0;                      // mean of non-missing inputs
};

// Mean-split dichotomization; missing values stay missing.
DichotomizeResult dichotomize(const std::vector<std::optional<double>>& values);

// One row per Games the record was at risk: Games strictly after year_set up
// to and including the last observed Games. Cancelled editions generate no
// rows. term = 1 only on the breaking Games.
std::vector<PersonPeriodRow> expand_person_period(const std::vector<RecordSpell>& spells,
                                                  const GamesCalendar& calendar);

// Outcome spell paired with the lagged duration covariate for the
// within-event dependence check.
struct LaggedRow {
    RecordSpell outcome;      // the nth spell of its event
    double lag_duration = 0;  // duration of the (n-k)th spell
};

// One row per event with at least n records. Requires n > k >= 1 and at
// least 2 qualifying events.
std::vector<LaggedRow> build_lagged_dataset(const std::vector<RecordSpell>& spells,
                                            int n, int k);

// Spells carrying non-missing values for every named covariate.
std::vector<RecordSpell> complete_cases(const std::vector<RecordSpell>& spells,
                                        const std::vector<std::string>& covariate_names);

// Re-serialization in the ingest schema; numbers use shortest round-trip
// formatting so ingest -> write -> ingest is bit-identical.
void write_dataset_csv(const Dataset& ds, std::ostream& out);

nlohmann::ordered_json dataset_to_json(const Dataset& ds);

} // namespace recur
