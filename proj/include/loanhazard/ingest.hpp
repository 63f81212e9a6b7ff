#pragma once

// Loan-level CSV ingestion: risk-band assignment, eligibility filtering, and
// loan-outcome determination from monthly payment vectors.

#include <compare>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <set>
#include <string>
#include <string_view>
#include <vector>

#include "loanhazard/types.hpp"

namespace loanhazard {

/// Exact currency amount in cents. Source fields carry at most two fractional
/// digits, so outcome classification never sees binary rounding.
class Money {
  public:
    constexpr Money() = default;
    static constexpr Money from_cents(std::int64_t cents) { return Money(cents); }
    /// Parses "123", "123.4", "-0.05"; more than two fractional digits is an
    /// error unless the extra digits are zero.
    static Money parse(std::string_view text);

    constexpr std::int64_t cents() const { return cents_; }
    double to_double() const { return static_cast<double>(cents_) / 100.0; }
    std::string to_string() const;

    constexpr Money& operator+=(Money o) {
        cents_ += o.cents_;
        return *this;
    }
    friend constexpr Money operator+(Money a, Money b) { return Money(a.cents_ + b.cents_); }
    friend constexpr Money operator-(Money a, Money b) { return Money(a.cents_ - b.cents_); }
    friend constexpr auto operator<=>(Money, Money) = default;

  private:
    constexpr explicit Money(std::int64_t cents) : cents_(cents) {}
    std::int64_t cents_ = 0;
};

enum class VehicleCondition { New, Used };

/// Income verification levels, numbered as in the asset-level reporting codes.
enum class IncomeVerification {
    NotStatedNotVerified = 1,
    StatedNotVerified = 2,
    StatedVerifiedPartial = 3,
    StatedVerifiedLevel4 = 4,
    StatedVerifiedLevel5 = 5,
};

enum class LoanStatus { Current, Delinquent, Repossessed, ChargedOff, PaidOff };

/// Monthly trust vectors for one loan. A missing (NA) value is nullopt.
struct PaymentHistory {
    std::vector<std::optional<Money>> balance;
    std::vector<std::optional<Money>> payment;
    std::vector<std::optional<Money>> principal;

    std::size_t months() const { return balance.size(); }
    void validate() const;  // non-empty, equal lengths, first balance present
};

struct LoanRecord {
    std::string loan_id;
    double apr_pct = 0.0;
    Money original_amount;
    int original_term = 0;
    int loan_age_at_entry = 0;
    bool has_coborrower = false;
    IncomeVerification income_verification = IncomeVerification::StatedNotVerified;
    bool subvention = false;
    VehicleCondition vehicle_condition = VehicleCondition::Used;
    LoanStatus initial_status = LoanStatus::Current;
    Money recovered_amount;
    PaymentHistory history;

    void validate() const;
};

enum class OutcomeKind { Defaulted, Repaid, Censored };

struct LoanOutcome {
    OutcomeKind kind = OutcomeKind::Censored;
    int event_month = 1;  // one-based trust month

    friend bool operator==(const LoanOutcome&, const LoanOutcome&) = default;
};

/// Eligibility criteria applied by filter_loans. Every criterion can be
/// switched off individually.
struct FilterPolicy {
    bool exclude_coborrower = true;
    std::optional<IncomeVerification> income_verification = IncomeVerification::StatedNotVerified;
    bool exclude_subvention = true;
    std::optional<VehicleCondition> vehicle_condition = VehicleCondition::Used;
    bool exclude_repossessed = true;
    std::optional<int> max_entry_age_exclusive = 18;
    std::set<int> allowed_terms{72, 73};
    bool drop_unclear_outcomes = true;
};

inline constexpr Money kDefaultOutcomePad = Money::from_cents(1000);

RiskBand classify_risk_band(double apr_pct);

std::vector<LoanRecord> filter_loans(const std::vector<LoanRecord>& records, const FilterPolicy& policy = {});

/// True when a loan paid too little principal to retire its first-month
/// balance yet has no final-month balance, so its outcome cannot be read.
bool has_unclear_outcome(const PaymentHistory& history);

LoanOutcome determine_outcome(const PaymentHistory& history, Money pad = kDefaultOutcomePad);

ObservedLoan to_observation(const LoanRecord& record, const LoanOutcome& outcome);

/// Band-tagged observation as written to the observations CSV.
struct BandObservation {
    std::string loan_id;
    RiskBand band = RiskBand::SuperPrime;
    ObservedLoan obs;

    friend bool operator==(const BandObservation&, const BandObservation&) = default;
};

/// filter -> outcome -> observation, ordered by loan_id.
std::vector<BandObservation> build_observations(const std::vector<LoanRecord>& records,
                                                const FilterPolicy& policy = {}, Money pad = kDefaultOutcomePad);

// --- CSV interfaces ---------------------------------------------------------

std::string_view to_string(VehicleCondition v);
std::string_view to_string(IncomeVerification v);
std::string_view to_string(LoanStatus s);
VehicleCondition parse_vehicle_condition(std::string_view text);
IncomeVerification parse_income_verification(std::string_view text);
LoanStatus parse_loan_status(std::string_view text);

/// Joins the static loan table with the long-format monthly table.
std::vector<LoanRecord> read_loans(const std::string& loans_csv_text, const std::string& payments_csv_text);
std::vector<LoanRecord> read_loan_files(const std::string& loans_path, const std::string& payments_path);

void write_loans_csv(std::ostream& out, const std::vector<LoanRecord>& records);
void write_payments_csv(std::ostream& out, const std::vector<LoanRecord>& records);

void write_observations_csv(std::ostream& out, const std::vector<BandObservation>& rows);
std::vector<BandObservation> read_observations(const std::string& csv_text);
std::vector<BandObservation> read_observation_file(const std::string& path);

}  // namespace loanhazard
