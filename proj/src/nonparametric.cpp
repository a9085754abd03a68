#include "recur/nonparametric.hpp"

#include "recur/csv.hpp"
#include "recur/errors.hpp"
#include "recur/numfmt.hpp"

#include <Eigen/Dense>
#include <boost/math/distributions/chi_squared.hpp>
#include <nlohmann/json.hpp>

#include <algorithm>
#include <cmath>
#include <map>
#include <ostream>
#include <sstream>

namespace recur {

const char* to_string(EstimatorTag t) {
    switch (t) {
        case EstimatorTag::KM: return "km";
        case EstimatorTag::WangChang: return "wang_chang";
        case EstimatorTag::GeneralizedKM: return "generalized_km";
        case EstimatorTag::Frailty: return "frailty";
    }
    return "?";
}

EstimatorTag estimator_from_string(const std::string& s) {
    if (s == "km") return EstimatorTag::KM;
    if (s == "wc" || s == "wang_chang") return EstimatorTag::WangChang;
    if (s == "gkm" || s == "generalized_km") return EstimatorTag::GeneralizedKM;
    if (s == "frailty") return EstimatorTag::Frailty;
    throw ValidationError("unknown estimator: " + s);
}

double SurvivalCurve::survival_at(double t) const {
    double s = 1.0;
    for (const auto& p : points) {
        if (p.time > t) break;
        s = p.estimate;
    }
    return s;
}

SurvivalCurve kaplan_meier(const std::vector<Observation>& observations) {
    if (observations.empty()) throw ValidationError("kaplan_meier: empty input");
    for (const auto& o : observations) {
        if (o.time <= 0) throw ValidationError("kaplan_meier: times must be positive");
    }

    std::vector<Observation> obs = observations;
    std::sort(obs.begin(), obs.end(), [](const Observation& a, const Observation& b) {
        if (a.time != b.time) return a.time < b.time;
        return a.event > b.event; // events precede censorings
    });

    SurvivalCurve curve;
    curve.tag = EstimatorTag::KM;
    double at_risk = static_cast<double>(obs.size());
    double surv = 1.0;
    size_t i = 0;
    while (i < obs.size()) {
        const double t = obs[i].time;
        double d = 0, c = 0;
        for (; i < obs.size() && obs[i].time == t; ++i) {
            if (obs[i].event) ++d;
            else ++c;
        }
        if (d > 0) {
            surv *= 1.0 - d / at_risk;
            curve.points.push_back({t, surv, at_risk, d});
        }
        at_risk -= d + c;
    }
    return curve;
}

SurvivalCurve generalized_km(const std::vector<GapHistory>& histories) {
    if (histories.empty()) throw ValidationError("generalized_km: empty input");
    // Pools every gap and walks the product-limit formula through the
    // N(dw)/Y(w) counts directly.
    std::vector<Observation> pooled;
    for (const auto& h : histories) {
        for (const auto& g : h.gaps) pooled.push_back(g);
    }
    if (pooled.empty()) throw ValidationError("generalized_km: no gaps");
    for (const auto& g : pooled) {
        if (g.time <= 0) throw ValidationError("generalized_km: gaps must be positive");
    }

    std::vector<double> support;
    for (const auto& g : pooled) {
        if (g.event) support.push_back(g.time);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    SurvivalCurve curve;
    curve.tag = EstimatorTag::GeneralizedKM;
    double surv = 1.0;
    for (double w : support) {
        double events = 0, at_risk = 0;
        for (const auto& g : pooled) {
            if (g.event && g.time == w) ++events;
            if (g.time >= w) ++at_risk;
        }
        surv *= 1.0 - events / at_risk;
        curve.points.push_back({w, surv, at_risk, events});
    }
    return curve;
}

SurvivalCurve wang_chang(const std::vector<GapHistory>& histories) {
    if (histories.empty()) throw ValidationError("wang_chang: empty input");
    for (const auto& h : histories) {
        for (const auto& g : h.gaps) {
            if (g.time <= 0) throw ValidationError("wang_chang: gaps must be positive");
        }
    }

    std::vector<double> weight(histories.size());
    std::vector<double> support;
    for (size_t i = 0; i < histories.size(); ++i) {
        int complete = 0;
        for (const auto& g : histories[i].gaps) {
            if (g.event) {
                ++complete;
                support.push_back(g.time);
            }
        }
        weight[i] = 1.0 / std::max(complete, 1);
    }
    std::sort(support.begin(), support.end());
    support.erase(std::unique(support.begin(), support.end()), support.end());

    SurvivalCurve curve;
    curve.tag = EstimatorTag::WangChang;
    double surv = 1.0;
    for (double y : support) {
        double d_star = 0, r_star = 0;
        for (size_t i = 0; i < histories.size(); ++i) {
            for (const auto& g : histories[i].gaps) {
                if (g.event && g.time == y) d_star += weight[i];
                if (g.time >= y) r_star += weight[i];
            }
        }
        surv *= 1.0 - d_star / r_star;
        curve.points.push_back({y, surv, r_star, d_star});
    }
    return curve;
}

LogRankResult log_rank(const std::vector<std::vector<Observation>>& groups) {
    const size_t k = groups.size();
    if (k < 2) throw ValidationError("log_rank: need at least 2 groups");
    for (const auto& g : groups) {
        if (g.empty()) throw ValidationError("log_rank: a group has no observations");
    }

    std::vector<double> event_times;
    for (const auto& g : groups) {
        for (const auto& o : g) {
            if (o.event) event_times.push_back(o.time);
        }
    }
    if (event_times.empty()) throw ValidationError("log_rank: no event times");
    std::sort(event_times.begin(), event_times.end());
    event_times.erase(std::unique(event_times.begin(), event_times.end()), event_times.end());

    Eigen::VectorXd observed = Eigen::VectorXd::Zero(k);
    Eigen::VectorXd expected = Eigen::VectorXd::Zero(k);
    Eigen::MatrixXd var = Eigen::MatrixXd::Zero(k, k);

    for (double t : event_times) {
        Eigen::VectorXd at_risk(k), events(k);
        for (size_t g = 0; g < k; ++g) {
            double r = 0, d = 0;
            for (const auto& o : groups[g]) {
                if (o.time >= t) ++r;
                if (o.event && o.time == t) ++d;
            }
            at_risk(g) = r;
            events(g) = d;
        }
        const double n = at_risk.sum();
        const double d = events.sum();
        if (n <= 0 || d <= 0) continue;
        observed += events;
        expected += (d / n) * at_risk;
        if (n > 1) {
            const double scale = d * (n - d) / (n - 1) / (n * n);
            var += scale * (n * at_risk.asDiagonal().toDenseMatrix() -
                            at_risk * at_risk.transpose());
        }
    }

    LogRankResult result;
    result.df = static_cast<int>(k) - 1;
    for (size_t g = 0; g < k; ++g) result.per_group.push_back({observed(g), expected(g)});

    // Quadratic form on the first k-1 components; the pseudo-inverse covers
    // degenerate risk configurations.
    Eigen::VectorXd diff = (observed - expected).head(k - 1);
    Eigen::MatrixXd v = var.topLeftCorner(k - 1, k - 1);
    Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(v);
    result.statistic = diff.dot(cod.pseudoInverse() * diff);
    if (result.statistic < 0 && result.statistic > -1e-12) result.statistic = 0;

    boost::math::chi_squared chi(result.df);
    result.p_value = boost::math::cdf(boost::math::complement(chi, result.statistic));
    return result;
}

void write_curve_csv(const SurvivalCurve& curve, std::ostream& out) {
    out << "time,estimate,at_risk,events\n";
    for (const auto& p : curve.points) {
        out << fmt_num(p.time) << ',' << fmt_num(p.estimate) << ',' << fmt_num(p.at_risk) << ','
            << fmt_num(p.events) << '\n';
    }
}

SurvivalCurve read_curve_csv(std::istream& in, EstimatorTag tag) {
    CsvTable table = read_csv(in);
    std::map<std::string, size_t> col;
    for (size_t i = 0; i < table.header.size(); ++i) col[table.header[i]] = i;
    for (const char* name : {"time", "estimate"}) {
        if (!col.count(name)) throw ValidationError(std::string("curve CSV missing column ") + name);
    }
    SurvivalCurve curve;
    curve.tag = tag;
    for (size_t r = 0; r < table.rows.size(); ++r) {
        const auto& row = table.rows[r];
        CurvePoint p;
        p.time = std::stod(row[col["time"]]);
        p.estimate = std::stod(row[col["estimate"]]);
        if (col.count("at_risk")) p.at_risk = std::stod(row[col["at_risk"]]);
        if (col.count("events")) p.events = std::stod(row[col["events"]]);
        curve.points.push_back(p);
    }
    for (size_t i = 1; i < curve.points.size(); ++i) {
        if (curve.points[i].time <= curve.points[i - 1].time) {
            throw ValidationError("curve CSV times must be strictly increasing");
        }
    }
    return curve;
}

nlohmann::ordered_json curve_to_json(const SurvivalCurve& curve) {
    nlohmann::ordered_json j;
    j["estimator"] = to_string(curve.tag);
    auto points = nlohmann::ordered_json::array();
    for (const auto& p : curve.points) {
        points.push_back({{"time", p.time},
                          {"estimate", p.estimate},
                          {"at_risk", p.at_risk},
                          {"events", p.events}});
    }
    j["points"] = std::move(points);
    return j;
}

std::vector<GapHistory> gap_histories(const std::vector<RecordSpell>& spells) {
    std::map<std::string, std::map<int, const RecordSpell*>> by_event;
    for (const auto& sp : spells) by_event[sp.event_id][sp.sequence] = &sp;
    std::vector<GapHistory> histories;
    for (const auto& [event_id, seqs] : by_event) {
        GapHistory h;
        for (const auto& [seq, sp] : seqs) {
            h.gaps.push_back({static_cast<double>(sp->duration),
                              sp->status == SpellStatus::Broken});
        }
        histories.push_back(std::move(h));
    }
    return histories;
}

std::vector<Observation> duration_observations(const std::vector<RecordSpell>& spells) {
    std::vector<Observation> obs;
    obs.reserve(spells.size());
    for (const auto& sp : spells) {
        obs.push_back({static_cast<double>(sp.duration), sp.status == SpellStatus::Broken});
    }
    return obs;
}

} // namespace recur
