#include "recur/workflow.hpp"

#include "recur/data.hpp"
#include "recur/errors.hpp"
#include "recur/nonparametric.hpp"
#include "recur/numfmt.hpp"

#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <limits>
#include <sstream>

namespace recur {

namespace {

constexpr double kScreenLevel = 0.05;
constexpr double kEliminationLevel = 0.10;

double wald_p(double z) { return std::erfc(std::abs(z) / std::sqrt(2.0)); }

const char* stars(double p) {
    if (p < 0.01) return "***";
    if (p < 0.05) return "**";
    if (p < 0.10) return "*";
    return "";
}

ScreeningRow screen_one(const std::string& name,
                        const std::vector<std::vector<Observation>>& groups) {
    ScreeningRow row;
    row.name = name;
    size_t non_empty = 0;
    for (const auto& g : groups) {
        if (!g.empty()) ++non_empty;
    }
    if (non_empty < 2) {
        row.p_value = std::numeric_limits<double>::quiet_NaN();
        row.decision = ScreenDecision::Untestable;
        row.note = "fewer than 2 observed levels";
        return row;
    }
    std::vector<std::vector<Observation>> observed;
    for (const auto& g : groups) {
        if (!g.empty()) observed.push_back(g);
    }
    try {
        const LogRankResult lr = log_rank(observed);
        row.p_value = lr.p_value;
        row.decision = lr.p_value < kScreenLevel ? ScreenDecision::Keep : ScreenDecision::Drop;
    } catch (const ValidationError& e) {
        row.p_value = std::numeric_limits<double>::quiet_NaN();
        row.decision = ScreenDecision::Untestable;
        row.note = e.what();
    }
    return row;
}

} // namespace

std::vector<std::string> ScreeningReport::kept() const {
    std::vector<std::string> out;
    for (const auto& row : rows) {
        if (row.decision == ScreenDecision::Keep) out.push_back(row.name);
    }
    return out;
}

ScreeningReport screen_covariates(const Dataset& ds) {
    ScreeningReport report;

    {
        std::vector<std::vector<Observation>> groups(5);
        for (const auto& sp : ds.spells) {
            groups[static_cast<size_t>(static_cast<int>(sp.category)) - 1].push_back(
                {static_cast<double>(sp.duration), sp.status == SpellStatus::Broken});
        }
        report.rows.push_back(screen_one("category", groups));
    }

    for (const auto& spec : ds.covariate_specs()) {
        std::vector<std::vector<Observation>> groups(2);
        if (spec.kind == CovariateKind::Binary) {
            for (const auto& sp : ds.spells) {
                auto it = sp.covariates.find(spec.name);
                if (it == sp.covariates.end()) continue;
                groups[it->second >= 0.5 ? 1 : 0].push_back(
                    {static_cast<double>(sp.duration), sp.status == SpellStatus::Broken});
            }
        } else {
            std::vector<std::optional<double>> values;
            values.reserve(ds.spells.size());
            for (const auto& sp : ds.spells) {
                auto it = sp.covariates.find(spec.name);
                if (it == sp.covariates.end()) values.push_back(std::nullopt);
                else values.push_back(it->second);
            }
            DichotomizeResult dich;
            try {
                dich = dichotomize(values);
            } catch (const ValidationError&) {
                ScreeningRow row;
                row.name = spec.name;
                row.p_value = std::numeric_limits<double>::quiet_NaN();
                row.decision = ScreenDecision::Untestable;
                row.note = "all values missing";
                report.rows.push_back(row);
                continue;
            }
            for (size_t i = 0; i < ds.spells.size(); ++i) {
                if (!dich.values[i]) continue;
                const auto& sp = ds.spells[i];
                groups[*dich.values[i] >= 0.5 ? 1 : 0].push_back(
                    {static_cast<double>(sp.duration), sp.status == SpellStatus::Broken});
            }
        }
        report.rows.push_back(screen_one(spec.name, groups));
    }
    return report;
}

const char* to_string(CategorySubset s) {
    switch (s) {
        case CategorySubset::All: return "all";
        case CategorySubset::TrackField: return "track_field";
        case CategorySubset::Swimming: return "swimming";
    }
    return "?";
}

CategorySubset subset_from_string(const std::string& s) {
    if (s == "all") return CategorySubset::All;
    if (s == "track_field") return CategorySubset::TrackField;
    if (s == "swimming") return CategorySubset::Swimming;
    throw ValidationError("unknown subset: " + s);
}

DependenceReport dependence_check(const Dataset& ds, const std::vector<int>& n_range, int k,
                                  CategorySubset subset,
                                  const std::vector<std::string>& covariates) {
    if (k != 1 && k != 2) throw ValidationError("dependence_check: k must be 1 or 2");

    std::vector<RecordSpell> filtered;
    for (const auto& sp : ds.spells) {
        const bool in_subset =
            subset == CategorySubset::All ||
            (subset == CategorySubset::TrackField &&
             (sp.category == Category::Track || sp.category == Category::Field)) ||
            (subset == CategorySubset::Swimming && sp.category == Category::Swimming);
        if (in_subset) filtered.push_back(sp);
    }

    DependenceReport report;
    report.subset = subset;
    report.k = k;
    for (int n : n_range) {
        DependenceCell cell;
        cell.n = n;
        cell.k = k;
        try {
            const auto lagged = build_lagged_dataset(filtered, n, k);
            CoxData data;
            data.scheme = RiskScheme::AG;
            data.covariate_names.push_back("lag_duration");
            for (const auto& c : covariates) data.covariate_names.push_back(c);
            for (const auto& row : lagged) {
                bool complete = std::all_of(covariates.begin(), covariates.end(),
                                            [&](const std::string& c) { return row.outcome.has(c); });
                if (!complete) continue;
                RiskInterval iv;
                iv.event_id = row.outcome.event_id;
                iv.sequence = row.outcome.sequence;
                iv.cluster = row.outcome.event_id;
                iv.stratum = 0;
                iv.start = 0;
                iv.stop = row.outcome.duration;
                iv.status = row.outcome.status == SpellStatus::Broken ? 1 : 0;
                iv.covariates.resize(static_cast<int>(data.covariate_names.size()));
                iv.covariates(0) = row.lag_duration;
                for (size_t c = 0; c < covariates.size(); ++c) {
                    iv.covariates(static_cast<int>(c) + 1) = row.outcome.value(covariates[c]);
                }
                data.intervals.push_back(std::move(iv));
            }
            if (data.intervals.size() < 2) {
                throw ValidationError("fewer than 2 complete-case rows");
            }
            CoxOptions opts;
            opts.robust_cluster = false; // one row per event: plain model variance
            const CoxFit fit = fit_cox(data, opts);
            const double z = fit.coefficients(0) / fit.model_se(0);
            cell.p_value = wald_p(z);
        } catch (const std::runtime_error& e) {
            cell.missing = true;
            cell.p_value = std::numeric_limits<double>::quiet_NaN();
            cell.reason = e.what();
        }
        report.cells.push_back(std::move(cell));
    }
    return report;
}

const char* to_string(ModelKind m) {
    switch (m) {
        case ModelKind::AG: return "andersen_gill";
        case ModelKind::PWP_TT: return "pwp_total_time";
        case ModelKind::PWP_GT: return "pwp_gap_time";
        case ModelKind::WLW: return "wlw_marginal";
        case ModelKind::Logistic: return "logistic";
    }
    return "?";
}

const char* display_name(ModelKind m) {
    switch (m) {
        case ModelKind::AG: return "Andersen-Gill";
        case ModelKind::PWP_TT: return "PWP Total Time";
        case ModelKind::PWP_GT: return "PWP Gap Time";
        case ModelKind::WLW: return "WLW Marginal";
        case ModelKind::Logistic: return "Logistic";
    }
    return "?";
}

namespace {

ModelSummary summarize_cox(ModelKind kind, const CoxFit& fit) {
    ModelSummary s;
    s.kind = kind;
    s.ok = true;
    s.log_likelihood = fit.log_partial_likelihood;
    s.aic = fit.aic;
    s.n_obs = fit.n_intervals;
    s.n_events = fit.n_events;
    for (size_t i = 0; i < fit.covariate_names.size(); ++i) {
        const int k = static_cast<int>(i);
        CoefficientEntry e;
        e.name = fit.covariate_names[i];
        e.estimate = fit.coefficients(k);
        e.se = fit.robust_se(k);
        e.z = e.se > 0 ? e.estimate / e.se : 0.0;
        e.p = wald_p(e.z);
        s.coefficients.push_back(std::move(e));
    }
    return s;
}

ModelSummary summarize_logit(const LogisticFit& fit, int n_events) {
    ModelSummary s;
    s.kind = ModelKind::Logistic;
    s.ok = true;
    s.intercept = fit.intercept;
    s.log_likelihood = fit.log_likelihood;
    s.aic = fit.aic;
    s.n_obs = static_cast<int>(fit.fitted_probabilities.size());
    s.n_events = n_events;
    for (size_t i = 0; i < fit.covariate_names.size(); ++i) {
        const int k = static_cast<int>(i);
        CoefficientEntry e;
        e.name = fit.covariate_names[i];
        e.estimate = fit.coefficients(k);
        e.se = fit.se(k);
        e.z = e.se > 0 ? e.estimate / e.se : 0.0;
        e.p = wald_p(e.z);
        s.coefficients.push_back(std::move(e));
    }
    return s;
}

// One elimination pass: survivors at the 10 percent level among the named
// covariates (structural time terms are never dropped).
std::vector<std::string> survivors(const ModelSummary& s, const std::vector<std::string>& names) {
    std::vector<std::string> out;
    for (const auto& e : s.coefficients) {
        if (std::find(names.begin(), names.end(), e.name) == names.end()) continue;
        if (e.p < kEliminationLevel) out.push_back(e.name);
    }
    return out;
}

ModelSummary fit_cox_model(const Dataset& ds, ModelKind kind, RiskScheme scheme,
                           const std::vector<std::string>& names) {
    const auto cc = complete_cases(ds.spells, names);
    const CoxData data = build_risk_intervals(cc, scheme, ds.calendar, names);
    const CoxFit fit = scheme == RiskScheme::WLW ? wlw_pooled_fit(data) : fit_cox(data);
    return summarize_cox(kind, fit);
}

ModelSummary fit_logit_model(const Dataset& ds, const std::vector<std::string>& names) {
    const auto cc = complete_cases(ds.spells, names);
    const auto rows = expand_person_period(cc, ds.calendar);
    const bool time_terms = !names.empty();
    const LogisticFit fit = fit_logit(rows, names, time_terms);
    int n_events = 0;
    for (const auto& r : rows) n_events += r.term;
    return summarize_logit(fit, n_events);
}

} // namespace

std::vector<ModelSummary> estimate_all_models(const Dataset& ds,
                                              const std::vector<std::string>& kept_covariates) {
    struct Entry {
        ModelKind kind;
        RiskScheme scheme;
    };
    const Entry cox_models[] = {{ModelKind::AG, RiskScheme::AG},
                                {ModelKind::PWP_TT, RiskScheme::PWP_TT},
                                {ModelKind::PWP_GT, RiskScheme::PWP_GT},
                                {ModelKind::WLW, RiskScheme::WLW}};

    std::vector<ModelSummary> out;
    for (const auto& m : cox_models) {
        ModelSummary summary;
        summary.kind = m.kind;
        try {
            summary = fit_cox_model(ds, m.kind, m.scheme, kept_covariates);
            const auto surv = survivors(summary, kept_covariates);
            if (surv.empty()) {
                summary = ModelSummary{};
                summary.kind = m.kind;
                summary.error = "all covariates eliminated at the 10 percent level";
            } else if (surv.size() < kept_covariates.size()) {
                summary = fit_cox_model(ds, m.kind, m.scheme, surv);
            }
        } catch (const std::runtime_error& e) {
            summary = ModelSummary{};
            summary.kind = m.kind;
            summary.error = e.what();
        }
        out.push_back(std::move(summary));
    }

    {
        ModelSummary summary;
        summary.kind = ModelKind::Logistic;
        try {
            summary = fit_logit_model(ds, kept_covariates);
            const auto surv = survivors(summary, kept_covariates);
            if (surv.size() < kept_covariates.size()) {
                summary = fit_logit_model(ds, surv);
            }
        } catch (const std::runtime_error& e) {
            summary = ModelSummary{};
            summary.kind = ModelKind::Logistic;
            summary.error = e.what();
        }
        out.push_back(std::move(summary));
    }
    return out;
}

std::vector<AicRank> compare_aic(const std::vector<ModelSummary>& fits) {
    std::vector<AicRank> ranks;
    for (const auto& f : fits) {
        if (f.ok) ranks.push_back({to_string(f.kind), f.aic});
    }
    std::sort(ranks.begin(), ranks.end(), [](const AicRank& a, const AicRank& b) {
        if (a.aic != b.aic) return a.aic < b.aic;
        return a.model < b.model;
    });
    return ranks;
}

nlohmann::ordered_json screening_to_json(const ScreeningReport& report) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& row : report.rows) {
        nlohmann::ordered_json r;
        r["covariate"] = row.name;
        if (std::isnan(row.p_value)) r["p_value"] = nullptr;
        else r["p_value"] = row.p_value;
        r["decision"] = row.decision == ScreenDecision::Keep       ? "keep"
                        : row.decision == ScreenDecision::Drop     ? "drop"
                                                                   : "untestable";
        if (!row.note.empty()) r["note"] = row.note;
        arr.push_back(std::move(r));
    }
    return arr;
}

nlohmann::ordered_json dependence_to_json(const DependenceReport& report) {
    nlohmann::ordered_json j;
    j["subset"] = to_string(report.subset);
    j["k"] = report.k;
    auto cells = nlohmann::ordered_json::array();
    for (const auto& c : report.cells) {
        nlohmann::ordered_json jc;
        jc["n"] = c.n;
        if (c.missing) {
            jc["p_value"] = nullptr;
            jc["reason"] = c.reason;
        } else {
            jc["p_value"] = c.p_value;
        }
        cells.push_back(std::move(jc));
    }
    j["cells"] = std::move(cells);
    return j;
}

nlohmann::ordered_json models_to_json(const std::vector<ModelSummary>& fits) {
    auto arr = nlohmann::ordered_json::array();
    for (const auto& f : fits) {
        nlohmann::ordered_json j;
        j["model"] = to_string(f.kind);
        j["ok"] = f.ok;
        if (!f.ok) {
            j["error"] = f.error;
            arr.push_back(std::move(j));
            continue;
        }
        if (f.intercept) j["intercept"] = *f.intercept;
        auto coeffs = nlohmann::ordered_json::array();
        for (const auto& e : f.coefficients) {
            coeffs.push_back({{"name", e.name},
                              {"estimate", e.estimate},
                              {"se", e.se},
                              {"z", e.z},
                              {"p", e.p}});
        }
        j["coefficients"] = std::move(coeffs);
        j["log_likelihood"] = f.log_likelihood;
        j["aic"] = f.aic;
        j["n_obs"] = f.n_obs;
        j["n_events"] = f.n_events;
        arr.push_back(std::move(j));
    }
    return arr;
}

std::string render_screening_table(const ScreeningReport& report) {
    std::ostringstream out;
    out << "covariate          p-value   decision\n";
    out << "---------------------------------------\n";
    for (const auto& row : report.rows) {
        char line[128];
        const char* decision = row.decision == ScreenDecision::Keep       ? "keep"
                               : row.decision == ScreenDecision::Drop     ? "drop"
                                                                          : "untestable";
        if (std::isnan(row.p_value)) {
            std::snprintf(line, sizeof(line), "%-18s %-9s %s\n", row.name.c_str(), "-", decision);
        } else {
            std::snprintf(line, sizeof(line), "%-18s %-9s %s\n", row.name.c_str(),
                          fmt_num(row.p_value).c_str(), decision);
        }
        out << line;
    }
    return out.str();
}

std::string render_model_table(const std::vector<ModelSummary>& fits) {
    std::vector<std::string> names;
    for (const auto& f : fits) {
        for (const auto& e : f.coefficients) {
            if (std::find(names.begin(), names.end(), e.name) == names.end()) {
                names.push_back(e.name);
            }
        }
    }

    std::ostringstream out;
    const int width = 22;
    out << std::string(16, ' ');
    for (const auto& f : fits) {
        char cell[64];
        std::snprintf(cell, sizeof(cell), "%-*s", width, display_name(f.kind));
        out << cell;
    }
    out << '\n';
    for (const auto& name : names) {
        char head[64];
        std::snprintf(head, sizeof(head), "%-16s", name.c_str());
        out << head;
        for (const auto& f : fits) {
            std::string cell = "-";
            if (f.ok) {
                auto it = std::find_if(f.coefficients.begin(), f.coefficients.end(),
                                       [&](const CoefficientEntry& e) { return e.name == name; });
                if (it != f.coefficients.end()) {
                    cell = fmt_num(it->estimate) + stars(it->p) + " (" + fmt_num(it->se) + ")";
                }
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%-*s", width, cell.c_str());
            out << buf;
        }
        out << '\n';
    }
    out << std::string(16, '-') << '\n';
    {
        char head[64];
        std::snprintf(head, sizeof(head), "%-16s", "AIC");
        out << head;
        for (const auto& f : fits) {
            std::string cell = f.ok ? fmt_num(f.aic) : std::string("(") + f.error + ")";
            char buf[192];
            std::snprintf(buf, sizeof(buf), "%-*s", width, cell.c_str());
            out << buf;
        }
        out << '\n';
    }
    out << "significance: * 10%, ** 5%, *** 1% (robust SEs for the Cox schemes)\n";
    return out.str();
}

} // namespace recur
