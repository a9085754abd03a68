#include "recur/data.hpp"

#include "recur/csv.hpp"
#include "recur/errors.hpp"
#include "recur/numfmt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <charconv>
#include <fstream>
#include <map>
#include <ostream>
#include <set>
#include <sstream>

namespace recur {

namespace {

const std::vector<std::string> kFixedColumns = {"event_id", "category", "sequence",
                                                "year_set", "year_end", "status"};

int parse_int(const std::string& s, const std::string& what, int line_no) {
    int value = 0;
    auto res = std::from_chars(s.data(), s.data() + s.size(), value);
    if (res.ec != std::errc() || res.ptr != s.data() + s.size()) {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed " + what +
                              " value '" + s + "'");
    }
    return value;
}

double parse_double(const std::string& s, const std::string& what, int line_no) {
    try {
        size_t pos = 0;
        double v = std::stod(s, &pos);
        if (pos != s.size()) throw std::invalid_argument(s);
        return v;
    } catch (const std::exception&) {
        throw ValidationError("line " + std::to_string(line_no) + ": malformed " + what +
                              " value '" + s + "'");
    }
}

bool is_cancelled(int year) {
    const auto& c = GamesCalendar::cancelled_years();
    return std::find(c.begin(), c.end(), year) != c.end();
}

void validate_event_sequences(const Dataset& ds) {
    std::map<std::string, std::vector<const RecordSpell*>> by_event;
    for (const auto& sp : ds.spells) by_event[sp.event_id].push_back(&sp);
    for (auto& [event_id, spells] : by_event) {
        std::sort(spells.begin(), spells.end(),
                  [](const RecordSpell* a, const RecordSpell* b) { return a->sequence < b->sequence; });
        for (size_t i = 0; i < spells.size(); ++i) {
            if (spells[i]->sequence != static_cast<int>(i) + 1) {
                throw ValidationError("event " + event_id +
                                      ": sequences must be consecutive starting at 1");
            }
            if (i > 0) {
                const RecordSpell& prev = *spells[i - 1];
                const RecordSpell& cur = *spells[i];
                if (cur.year_set < prev.year_set + prev.duration) {
                    throw ValidationError("event " + event_id + ": spell " +
                                          std::to_string(cur.sequence) +
                                          " overlaps its predecessor");
                }
            }
        }
    }
}

} // namespace

Dataset ingest_csv(const std::string& path, const GamesCalendar& calendar) {
    std::ifstream in(path);
    if (!in) throw ValidationError("cannot open " + path);
    return ingest_csv(in, calendar, path);
}

Dataset ingest_csv(std::istream& in, const GamesCalendar& calendar,
                   const std::string& source_name) {
    CsvTable table = read_csv(in);

    std::map<std::string, size_t> col;
    for (size_t i = 0; i < table.header.size(); ++i) col[table.header[i]] = i;
    for (const auto& name : kFixedColumns) {
        if (!col.count(name)) {
            throw ValidationError(source_name + ": missing required column " + name);
        }
    }

    Dataset ds;
    ds.calendar = calendar;
    for (const auto& name : table.header) {
        if (std::find(kFixedColumns.begin(), kFixedColumns.end(), name) == kFixedColumns.end()) {
            ds.covariate_names.push_back(name);
            ds.missing_counts[name] = 0;
        }
    }

    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        const int line_no = table.line_numbers[r];
        if (row.size() != table.header.size()) {
            throw ValidationError("line " + std::to_string(line_no) + ": expected " +
                                  std::to_string(table.header.size()) + " fields, got " +
                                  std::to_string(row.size()));
        }

        RecordSpell sp;
        sp.event_id = row[col["event_id"]];
        if (sp.event_id.empty()) {
            throw ValidationError("line " + std::to_string(line_no) + ": empty event_id");
        }
        sp.category = category_from_string(row[col["category"]]);
        sp.sequence = parse_int(row[col["sequence"]], "sequence", line_no);
        if (sp.sequence < 1) {
            throw ValidationError("line " + std::to_string(line_no) + ": sequence must be >= 1");
        }
        sp.year_set = parse_int(row[col["year_set"]], "year_set", line_no);
        if (!calendar.contains(sp.year_set)) {
            throw ValidationError("line " + std::to_string(line_no) + ": year_set " +
                                  std::to_string(sp.year_set) + " is not a Games year");
        }
        sp.status = status_from_string(row[col["status"]]);

        const std::string& end_field = row[col["year_end"]];
        if (end_field.empty()) {
            if (sp.status == SpellStatus::Broken) {
                throw ValidationError("line " + std::to_string(line_no) +
                                      ": broken spell needs a year_end");
            }
            sp.year_end = std::nullopt;
            sp.duration = calendar.last() - sp.year_set;
        } else {
            int end = parse_int(end_field, "year_end", line_no);
            // A censored spell may end on a cancelled edition: that is the
            // censoring horizon for records spanning the war gaps.
            bool ok = calendar.contains(end) ||
                      (sp.status == SpellStatus::Censored && is_cancelled(end));
            if (!ok) {
                throw ValidationError("line " + std::to_string(line_no) + ": year_end " +
                                      std::to_string(end) + " is not a Games year");
            }
            sp.year_end = end;
            sp.duration = end - sp.year_set;
        }
        if (sp.duration <= 0) {
            throw ValidationError("line " + std::to_string(line_no) +
                                  ": duration must be positive (year_set " +
                                  std::to_string(sp.year_set) + ", year_end " + end_field + ")");
        }

        for (const auto& name : ds.covariate_names) {
            const std::string& cell = row[col[name]];
            if (cell.empty()) {
                ++ds.missing_counts[name];
            } else {
                sp.covariates[name] = parse_double(cell, name, line_no);
            }
        }
        ds.spells.push_back(std::move(sp));
    }

    validate_event_sequences(ds);
    return ds;
}

DichotomizeResult dichotomize(const std::vector<std::optional<double>>& values) {
    double sum = 0;
    int n = 0;
    for (const auto& v : values) {
        if (v) {
            sum += *v;
            ++n;
        }
    }
    if (n == 0) throw ValidationError("dichotomize: all values missing");
    DichotomizeResult out;
    out.threshold = sum / n;
    out.values.reserve(values.size());
    for (const auto& v : values) {
        if (!v) out.values.push_back(std::nullopt);
        else out.values.push_back(*v >= out.threshold ? 1.0 : 0.0);
    }
    return out;
}

std::vector<PersonPeriodRow> expand_person_period(const std::vector<RecordSpell>& spells,
                                                  const GamesCalendar& calendar) {
    std::vector<PersonPeriodRow> rows;
    for (const auto& sp : spells) {
        const int last_observed = sp.year_set + sp.duration;
        const auto games = calendar.games_between(sp.year_set, last_observed);
        int idx = 0;
        for (int g : games) {
            PersonPeriodRow row;
            row.event_id = sp.event_id;
            row.sequence = sp.sequence;
            row.period_index = ++idx;
            row.time = static_cast<double>(g - sp.year_set);
            row.time_sq = row.time * row.time;
            row.term = (sp.status == SpellStatus::Broken && g == last_observed) ? 1 : 0;
            row.duration = sp.duration;
            row.category = sp.category;
            row.covariates = sp.covariates;
            rows.push_back(std::move(row));
        }
    }
    return rows;
}

std::vector<LaggedRow> build_lagged_dataset(const std::vector<RecordSpell>& spells, int n,
                                            int k) {
    if (k < 1 || n <= k) throw ValidationError("build_lagged_dataset requires n > k >= 1");
    std::map<std::string, std::map<int, const RecordSpell*>> by_event;
    for (const auto& sp : spells) by_event[sp.event_id][sp.sequence] = &sp;

    std::vector<LaggedRow> rows;
    for (const auto& [event_id, seqs] : by_event) {
        auto nth = seqs.find(n);
        auto lag = seqs.find(n - k);
        if (nth == seqs.end() || lag == seqs.end()) continue;
        LaggedRow row;
        row.outcome = *nth->second;
        row.lag_duration = static_cast<double>(lag->second->duration);
        rows.push_back(std::move(row));
    }
    if (rows.size() < 2) {
        throw ValidationError("build_lagged_dataset: fewer than 2 events have a record " +
                              std::to_string(n));
    }
    return rows;
}

std::vector<RecordSpell> complete_cases(const std::vector<RecordSpell>& spells,
                                        const std::vector<std::string>& covariate_names) {
    std::vector<RecordSpell> out;
    for (const auto& sp : spells) {
        bool complete = std::all_of(covariate_names.begin(), covariate_names.end(),
                                    [&](const std::string& n) { return sp.has(n); });
        if (complete) out.push_back(sp);
    }
    return out;
}

void write_dataset_csv(const Dataset& ds, std::ostream& out) {
    out << "event_id,category,sequence,year_set,year_end,status";
    for (const auto& name : ds.covariate_names) out << ',' << csv_escape(name);
    out << '\n';
    for (const auto& sp : ds.spells) {
        out << csv_escape(sp.event_id) << ',' << to_string(sp.category) << ',' << sp.sequence
            << ',' << sp.year_set << ',';
        if (sp.year_end) out << *sp.year_end;
        out << ',' << to_string(sp.status);
        for (const auto& name : ds.covariate_names) {
            out << ',';
            auto it = sp.covariates.find(name);
            if (it != sp.covariates.end()) out << fmt_exact(it->second);
        }
        out << '\n';
    }
}

nlohmann::ordered_json dataset_to_json(const Dataset& ds) {
    nlohmann::ordered_json j;
    j["calendar"] = ds.calendar.years();
    j["covariate_names"] = ds.covariate_names;
    j["missing_counts"] = ds.missing_counts;
    auto spells = nlohmann::ordered_json::array();
    for (const auto& sp : ds.spells) {
        nlohmann::ordered_json s;
        s["event_id"] = sp.event_id;
        s["category"] = to_string(sp.category);
        s["sequence"] = sp.sequence;
        s["year_set"] = sp.year_set;
        if (sp.year_end) s["year_end"] = *sp.year_end;
        else s["year_end"] = nullptr;
        s["status"] = to_string(sp.status);
        s["duration"] = sp.duration;
        s["covariates"] = sp.covariates;
        spells.push_back(std::move(s));
    }
    j["spells"] = std::move(spells);
    return j;
}

} // namespace recur
