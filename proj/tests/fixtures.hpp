#pragma once

// Small builders for loan fixtures used across tests.

#include <string>
#include <vector>

#include "loanhazard/ingest.hpp"

namespace fixture {

using loanhazard::Money;

inline std::vector<std::optional<Money>> money(const std::vector<std::string>& cells) {
    std::vector<std::optional<Money>> out;
    for (const auto& c : cells) {
        if (c == "NA") {
            out.emplace_back();
        } else {
            out.emplace_back(Money::parse(c));
        }
    }
    return out;
}

inline loanhazard::PaymentHistory history(const std::vector<std::string>& bal, const std::vector<std::string>& pmt,
                                          const std::vector<std::string>& prc) {
    return {money(bal), money(pmt), money(prc)};
}

/// A record that passes every default filter.
inline loanhazard::LoanRecord conforming(std::string id, double apr = 22.65) {
    loanhazard::LoanRecord r;
    r.loan_id = std::move(id);
    r.apr_pct = apr;
    r.original_amount = Money::parse("300.00");
    r.original_term = 72;
    r.loan_age_at_entry = 3;
    r.recovered_amount = Money::parse("120.00");
    r.history = history({"300", "200", "100", "0"}, {"110", "110", "110", "0"}, {"100", "100", "100", "0"});
    return r;
}

}  // namespace fixture

#include "loanhazard/estimator.hpp"

namespace fixture {

/// Curve with a given interval at every age; every age has events.
inline loanhazard::HazardCurve interval_curve(const std::string& band, int lo,
                                              const std::vector<loanhazard::Interval>& cis) {
    loanhazard::HazardCurve c;
    c.band = band;
    c.n = 1000;
    int age = lo;
    for (const auto& ci : cis) {
        loanhazard::HazardRow r;
        r.age = age++;
        r.events = 5;
        r.at_risk = 100;
        r.hazard = 0.5 * (ci.lo + ci.hi);
        r.ci = ci;
        c.rows.push_back(r);
    }
    return c;
}

/// Band i sits on its own level until its merge age, then joins a common
/// level. Two bands first overlap at the later of their merge ages.
inline std::vector<loanhazard::HazardCurve> staggered_curves(const std::vector<int>& merge_ages, int lo = 1,
                                                             int hi = 55) {
    std::vector<loanhazard::HazardCurve> out;
    for (std::size_t i = 0; i < merge_ages.size(); ++i) {
        std::vector<loanhazard::Interval> cis;
        for (int age = lo; age <= hi; ++age) {
            const double level = age >= merge_ages[i] ? 0.01 : 0.01 * static_cast<double>(i + 2);
            cis.push_back({level - 0.002, level + 0.002});
        }
        out.push_back(interval_curve("b" + std::to_string(i), lo, cis));
    }
    return out;
}

}  // namespace fixture

namespace fixture {

struct GoldenOutcome {
    const char* name;
    loanhazard::PaymentHistory h;
    loanhazard::OutcomeKind kind;
    int month;
    loanhazard::Money pad = loanhazard::kDefaultOutcomePad;
};

/// Hand-traced payment vectors with their expected outcome and event month.
inline std::vector<GoldenOutcome> golden_outcomes() {
    using loanhazard::Money;
    using loanhazard::OutcomeKind;
    return {
        {"repaid at first zero balance", history({"300", "200", "100", "0"}, {"110", "110", "110", "0"},
                                                 {"100", "100", "100", "0"}),
         OutcomeKind::Repaid, 4},
        {"default at first of three zeros", history({"300", "290", "290", "290", "290"}, {"110", "0", "0", "0", "110"},
                                                    {"10", "0", "0", "0", "10"}),
         OutcomeKind::Defaulted, 2},
        {"isolated zeros are censored", history({"300", "290", "290", "280", "280"}, {"110", "0", "110", "0", "110"},
                                                {"10", "0", "10", "0", "10"}),
         OutcomeKind::Censored, 5},
        {"pad closes a ten dollar gap", history({"300", "150", "0"}, {"160", "160", "0"}, {"150", "140", "0"}),
         OutcomeKind::Repaid, 3},
        {"one cent short of the pad", history({"300", "150", "10.01"}, {"160", "150", "50"}, {"150", "139.99", "0"}),
         OutcomeKind::Censored, 3},
        {"no pad means no tie", history({"300", "150", "0"}, {"160", "160", "0"}, {"150", "140", "0"}),
         OutcomeKind::Censored, 3, Money{}},
        {"three zeros at the end", history({"300", "250", "200", "200", "200"}, {"60", "60", "0", "0", "0"},
                                           {"50", "50", "0", "0", "0"}),
         OutcomeKind::Defaulted, 3},
        {"two zeros then a run of three", history({"300", "300", "300", "250", "250", "250", "250", "200"},
                                                  {"0", "0", "60", "0", "0", "0", "60", "60"},
                                                  {"0", "0", "50", "0", "0", "0", "50", "50"}),
         OutcomeKind::Defaulted, 4},
        {"missing payment breaks a run", history({"300", "250", "250", "250", "250"}, {"60", "NA", "0", "0", "60"},
                                                 {"50", "NA", "0", "0", "50"}),
         OutcomeKind::Censored, 5},
        {"missing payment inside zeros", history({"300", "300", "300", "300", "300"}, {"0", "0", "NA", "0", "0"},
                                                 {"0", "0", "NA", "0", "0"}),
         OutcomeKind::Censored, 5},
        {"four zeros from the first month", history({"300", "300", "300", "300"}, {"0", "0", "0", "0"},
                                                    {"0", "0", "0", "0"}),
         OutcomeKind::Defaulted, 1},
        {"trailing zero balances keep the first", history({"300", "150", "0", "0", "0"}, {"155", "155", "0", "0", "0"},
                                                          {"150", "150", "0", "0", "0"}),
         OutcomeKind::Repaid, 3},
        {"principal test wins over zeros", history({"300", "300", "300", "300", "0"}, {"0", "0", "0", "0", "310"},
                                                   {"0", "0", "0", "0", "300"}),
         OutcomeKind::Repaid, 5},
        {"repaid without a zero balance row", history({"300", "200", "NA"}, {"110", "110", "110"},
                                                      {"100", "100", "100"}),
         OutcomeKind::Repaid, 3},
        {"single month payoff", history({"100"}, {"101"}, {"100"}), OutcomeKind::Repaid, 1},
        {"single month open", history({"100"}, {"5"}, {"4"}), OutcomeKind::Censored, 1},
        {"two zeros only at the end", history({"300", "250", "250", "250"}, {"60", "60", "0", "0"},
                                              {"50", "0", "0", "0"}),
         OutcomeKind::Censored, 4},
    };
}

}  // namespace fixture
