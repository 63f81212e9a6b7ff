#pragma once

#include <array>
#include <optional>
#include <string>
#include <string_view>

namespace loanhazard {

/// Terminal state of a loan. Default is the event of interest (state 1),
/// prepayment/repayment the competing event (state 2).
enum class Cause { Default = 1, Prepay = 2 };

inline constexpr std::array<Cause, 2> kCauses{Cause::Default, Cause::Prepay};

inline constexpr int index_of(Cause c) { return c == Cause::Default ? 0 : 1; }

std::string_view to_string(Cause c);
Cause parse_cause(std::string_view text);  // throws Error{UnknownKey}

/// APR-defined borrower tier, ordered from least to most risky.
enum class RiskBand { SuperPrime, Prime, NearPrime, Subprime, DeepSubprime };

inline constexpr std::array<RiskBand, 5> kRiskBands{RiskBand::SuperPrime, RiskBand::Prime,
                                                    RiskBand::NearPrime, RiskBand::Subprime,
                                                    RiskBand::DeepSubprime};

std::string_view to_string(RiskBand b);
RiskBand parse_risk_band(std::string_view text);  // throws Error{UnknownKey}

/// Inclusive integer age range in months.
struct AgeRange {
    int lo = 1;
    int hi = 1;

    bool contains(int age) const { return lo <= age && age <= hi; }
    int size() const { return hi - lo + 1; }
    friend bool operator==(const AgeRange&, const AgeRange&) = default;
};

/// One left-truncated, right-censored lifetime: the loan entered observation
/// at `entry_age` and left it at `exit_age`, either by an observed event of
/// kind `cause` or by censoring.
struct ObservedLoan {
    int entry_age = 1;
    int exit_age = 1;
    bool observed_event = false;
    std::optional<Cause> cause;

    friend bool operator==(const ObservedLoan&, const ObservedLoan&) = default;
};

/// Checks the entry <= exit and cause-iff-event invariants.
void validate(const ObservedLoan& obs);

}  // namespace loanhazard
