#pragma once

#include "recur/cox.hpp"
#include "recur/logistic.hpp"
#include "recur/record.hpp"

#include <nlohmann/json_fwd.hpp>

#include <optional>
#include <string>
#include <vector>

namespace recur {

enum class ScreenDecision { Keep, Drop, Untestable };

struct ScreeningRow {
    std::string name;
    double p_value = 1; // NaN when untestable
    ScreenDecision decision = ScreenDecision::Drop;
    std::string note;
};

// Per-covariate log-rank screening on (duration, status). Binary covariates
// split into their two levels, quantitative ones are mean-dichotomized
// first, and category runs as a 5-group test. Keep at p < 0.05.
struct ScreeningReport {
    std::vector<ScreeningRow> rows;
    std::vector<std::string> kept() const;
};

ScreeningReport screen_covariates(const Dataset& ds);

enum class CategorySubset { All, TrackField, Swimming };
const char* to_string(CategorySubset s);
CategorySubset subset_from_string(const std::string& s);

struct DependenceCell {
    int n = 0;
    int k = 1;
    double p_value = 1;
    bool missing = false; // the "-" cells: too few events or a failed fit
    std::string reason;
};

struct DependenceReport {
    CategorySubset subset = CategorySubset::All;
    int k = 1;
    std::vector<DependenceCell> cells;
};

// For each n, fits an unstratified Cox model of the nth record's duration on
// the (n-k)th record's duration plus the given covariates, and reports the
// Wald p-value of the lag coefficient.
DependenceReport dependence_check(const Dataset& ds, const std::vector<int>& n_range,
                                  int k, CategorySubset subset,
                                  const std::vector<std::string>& covariates);

enum class ModelKind { AG, PWP_TT, PWP_GT, WLW, Logistic };
const char* to_string(ModelKind m);
const char* display_name(ModelKind m); // the conventional method name

struct CoefficientEntry {
    std::string name;
    double estimate = 0;
    double se = 0; // robust for the Cox schemes, model-based for logistic
    double z = 0;
    double p = 1;
};

struct ModelSummary {
    ModelKind kind = ModelKind::AG;
    bool ok = false;
    std::string error;
    std::vector<CoefficientEntry> coefficients;
    std::optional<double> intercept; // logistic only
    double log_likelihood = 0;
    double aic = 0;
    int n_obs = 0;
    int n_events = 0;
};

// Fits all five models on the kept covariates with complete-case data per
// model, then runs one backward-elimination pass at the 10 percent level and
// refits. Per-model failures are reported, not propagated.
std::vector<ModelSummary> estimate_all_models(const Dataset& ds,
                                              const std::vector<std::string>& kept_covariates);

struct AicRank {
    std::string model;
    double aic = 0;
};

// Ascending AIC; ties break on the model name.
std::vector<AicRank> compare_aic(const std::vector<ModelSummary>& fits);

nlohmann::ordered_json screening_to_json(const ScreeningReport& report);
nlohmann::ordered_json dependence_to_json(const DependenceReport& report);
nlohmann::ordered_json models_to_json(const std::vector<ModelSummary>& fits);

// Table-6-shaped and Table-10-shaped text renderings for the CLI.
std::string render_screening_table(const ScreeningReport& report);
std::string render_model_table(const std::vector<ModelSummary>& fits);

} // namespace recur
