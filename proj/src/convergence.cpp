#include "loanhazard/convergence.hpp"

#include <algorithm>
#include <json.hpp>
#include <ostream>

#include "loanhazard/csv.hpp"
#include "loanhazard/error.hpp"

namespace loanhazard {

namespace {
constexpr std::string_view kNoConvergence = "no convergence in window";
}

std::string_view to_string(Decision d) {
    switch (d) {
        case Decision::Reject: return "reject";
        case Decision::FailToReject: return "fail_to_reject";
        case Decision::Undefined: return "undefined";
    }
    return "?";
}

std::string_view to_string(ConvergenceRule r) {
    switch (r) {
        case ConvergenceRule::OverlapRun: return "overlap_run";
        case ConvergenceRule::BothZero: return "both_zero";
        case ConvergenceRule::None: return "none";
    }
    return "?";
}

Decision overlap_test(const Interval& a, const Interval& b) {
    return (a.lo <= b.hi && b.lo <= a.hi) ? Decision::FailToReject : Decision::Reject;
}

Decision overlap_test(const std::optional<Interval>& a, const std::optional<Interval>& b) {
    if (!a || !b) return Decision::Undefined;
    return overlap_test(*a, *b);
}

ConvergenceResult convergence_point(const HazardCurve& a, const HazardCurve& b, const ConvergenceOptions& opts) {
    require(opts.run_length >= 1, "run length must be at least one");
    if (a.rows.empty() || b.rows.empty() || a.ages() != b.ages()) {
        fail(Errc::Incompatible, "hazard curves for '" + a.band + "' and '" + b.band + "' do not share an age grid");
    }

    ConvergenceResult out;
    out.band_a = a.band;
    out.band_b = b.band;
    const std::size_t n = a.rows.size();
    out.decisions.reserve(n);
    for (std::size_t k = 0; k < n; ++k) {
        out.decisions.push_back({a.rows[k].age, overlap_test(a.rows[k].ci, b.rows[k].ci)});
    }

    std::optional<int> run_start;
    int run = 0;
    for (const auto& d : out.decisions) {
        if (d.age < opts.min_test_age) continue;
        if (d.decision == Decision::FailToReject) {
            if (run++ == 0) run_start = d.age;
            if (run >= opts.run_length) break;
        } else {
            run = 0;
            run_start.reset();
        }
    }
    const std::optional<int> overlap_month = run >= opts.run_length ? run_start : std::nullopt;

    // first age (>= min_test_age) after which neither curve has another event
    std::optional<int> zero_month;
    for (std::size_t k = n; k-- > 0;) {
        if (a.rows[k].events > 0 || b.rows[k].events > 0) break;
        if (a.rows[k].age >= opts.min_test_age) zero_month = a.rows[k].age;
    }

    if (overlap_month && (!zero_month || *overlap_month <= *zero_month)) {
        out.convergence_month = overlap_month;
        out.rule_fired = ConvergenceRule::OverlapRun;
    } else if (zero_month) {
        out.convergence_month = zero_month;
        out.rule_fired = ConvergenceRule::BothZero;
    }
    return out;
}

TransitionMatrix::TransitionMatrix(std::vector<std::string> bands, int min_test_age)
    : bands_(std::move(bands)), min_test_age_(min_test_age), upper_(bands_.size() * (bands_.size() + 1) / 2) {
    for (std::size_t i = 0; i < bands_.size(); ++i) set(i, i, min_test_age_);
}

std::size_t TransitionMatrix::slot(std::size_t i, std::size_t j) const {
    require(i < size() && j < size(), "transition matrix index out of range");
    if (i > j) std::swap(i, j);
    // row-major upper triangle
    return i * size() - i * (i - 1) / 2 + (j - i);
}

std::optional<int> TransitionMatrix::at(std::size_t i, std::size_t j) const { return upper_[slot(i, j)]; }

void TransitionMatrix::set(std::size_t i, std::size_t j, std::optional<int> month) { upper_[slot(i, j)] = month; }

TransitionMatrix transition_matrix(std::span<const HazardCurve> curves, const ConvergenceOptions& opts) {
    std::vector<std::string> order;
    for (const auto& c : curves) order.push_back(c.band);
    return transition_matrix(curves, order, opts);
}

TransitionMatrix transition_matrix(std::span<const HazardCurve> curves, const std::vector<std::string>& band_order,
                                   const ConvergenceOptions& opts) {
    if (band_order.size() < 2) fail(Errc::InvalidArgument, "a transition matrix needs at least two bands");
    std::vector<const HazardCurve*> picked;
    for (const auto& band : band_order) {
        if (std::count(band_order.begin(), band_order.end(), band) > 1) {
            fail(Errc::InvalidArgument, "band '" + band + "' appears more than once");
        }
        const auto it = std::find_if(curves.begin(), curves.end(), [&](const HazardCurve& c) { return c.band == band; });
        if (it == curves.end()) fail(Errc::UnknownKey, "no hazard curve for band '" + band + "'");
        picked.push_back(&*it);
    }
    TransitionMatrix m(band_order, opts.min_test_age);
    for (std::size_t i = 0; i < picked.size(); ++i) {
        for (std::size_t j = i + 1; j < picked.size(); ++j) {
            auto r = convergence_point(*picked[i], *picked[j], opts);
            m.set(i, j, r.convergence_month);
            m.add_trace(std::move(r));
        }
    }
    return m;
}

void write_matrix_csv(std::ostream& out, const TransitionMatrix& m) {
    csv::Writer w(out);
    std::vector<std::string> header{"band"};
    header.insert(header.end(), m.bands().begin(), m.bands().end());
    w.row(header);
    for (std::size_t i = 0; i < m.size(); ++i) {
        std::vector<std::string> row{m.bands()[i]};
        for (std::size_t j = 0; j < m.size(); ++j) {
            if (j < i) {
                row.emplace_back();  // lower triangle mirrors the upper one
                continue;
            }
            const auto v = m.at(i, j);
            row.push_back(v ? std::to_string(*v) : std::string(kNoConvergence));
        }
        w.row(row);
    }
}

std::string matrix_to_json(const TransitionMatrix& m) {
    nlohmann::json doc;
    doc["bands"] = m.bands();
    doc["min_test_age"] = m.min_test_age();
    auto& months = doc["months"] = nlohmann::json::array();
    for (std::size_t i = 0; i < m.size(); ++i) {
        auto row = nlohmann::json::array();
        for (std::size_t j = 0; j < m.size(); ++j) {
            const auto v = m.at(i, j);
            row.push_back(v ? nlohmann::json(*v) : nlohmann::json(nullptr));
        }
        months.push_back(std::move(row));
    }
    auto& rules = doc["pairs"] = nlohmann::json::array();
    for (const auto& t : m.traces()) {
        rules.push_back({{"band_a", t.band_a},
                         {"band_b", t.band_b},
                         {"month", t.convergence_month ? nlohmann::json(*t.convergence_month) : nlohmann::json(nullptr)},
                         {"rule", std::string(to_string(t.rule_fired))}});
    }
    return doc.dump(2);
}

void write_trace_csv(std::ostream& out, const TransitionMatrix& m) {
    csv::Writer w(out);
    w.row({"band_a", "band_b", "age", "decision"});
    for (const auto& t : m.traces()) {
        for (const auto& d : t.decisions) {
            w.row({t.band_a, t.band_b, std::to_string(d.age), std::string(to_string(d.decision))});
        }
    }
}

}  // namespace loanhazard
