#include "recur/record.hpp"

#include "recur/errors.hpp"

#include <algorithm>
#include <cctype>

namespace recur {

namespace {

std::string lowered(const std::string& s) {
    std::string out = s;
    std::transform(out.begin(), out.end(), out.begin(),
                   [](unsigned char c) { return static_cast<char>(std::tolower(c)); });
    return out;
}

} // namespace

const char* to_string(Category c) {
    switch (c) {
        case Category::Track: return "track";
        case Category::Field: return "field";
        case Category::Canoeing: return "canoeing";
        case Category::Cycling: return "cycling";
        case Category::Swimming: return "swimming";
    }
    return "?";
}

const char* to_string(SpellStatus s) {
    return s == SpellStatus::Broken ? "broken" : "censored";
}

Category category_from_string(const std::string& s) {
    const std::string v = lowered(s);
    if (v == "track" || v == "1") return Category::Track;
    if (v == "field" || v == "2") return Category::Field;
    if (v == "canoeing" || v == "3") return Category::Canoeing;
    if (v == "cycling" || v == "4") return Category::Cycling;
    if (v == "swimming" || v == "5") return Category::Swimming;
    throw ValidationError("unknown category: " + s);
}

SpellStatus status_from_string(const std::string& s) {
    const std::string v = lowered(s);
    if (v == "broken") return SpellStatus::Broken;
    if (v == "censored") return SpellStatus::Censored;
    throw ValidationError("unknown status: " + s + " (expected broken or censored)");
}

bool RecordSpell::has(const std::string& name) const {
    if (name == "category") return true;
    return covariates.count(name) > 0;
}

double RecordSpell::value(const std::string& name) const {
    if (name == "category") return static_cast<double>(static_cast<int>(category));
    auto it = covariates.find(name);
    if (it == covariates.end()) {
        throw ValidationError("missing covariate " + name + " on event " + event_id +
                              " sequence " + std::to_string(sequence));
    }
    return it->second;
}

int Dataset::censored_count() const {
    return static_cast<int>(std::count_if(spells.begin(), spells.end(), [](const RecordSpell& s) {
        return s.status == SpellStatus::Censored;
    }));
}

std::vector<CovariateSpec> Dataset::covariate_specs() const {
    std::vector<CovariateSpec> specs;
    for (const auto& name : covariate_names) {
        CovariateSpec spec;
        spec.name = name;
        bool binary = true;
        bool any = false;
        double sum = 0;
        int n = 0;
        for (const auto& sp : spells) {
            auto it = sp.covariates.find(name);
            if (it == sp.covariates.end()) continue;
            any = true;
            if (it->second != 0.0 && it->second != 1.0) binary = false;
            sum += it->second;
            ++n;
        }
        spec.kind = (any && binary) ? CovariateKind::Binary : CovariateKind::Quantitative;
        if (spec.kind == CovariateKind::Quantitative && n > 0) {
            spec.dichotomize_threshold = sum / n;
        }
        specs.push_back(std::move(spec));
    }
    return specs;
}

} // namespace recur
