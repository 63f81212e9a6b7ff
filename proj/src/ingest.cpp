#include "loanhazard/ingest.hpp"

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <ostream>
#include <sstream>

#include "loanhazard/csv.hpp"
#include "loanhazard/error.hpp"

namespace loanhazard {

// --- Money ------------------------------------------------------------------

Money Money::parse(std::string_view text) {
    const std::string original(text);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.front()))) text.remove_prefix(1);
    while (!text.empty() && std::isspace(static_cast<unsigned char>(text.back()))) text.remove_suffix(1);
    bool negative = false;
    if (!text.empty() && (text.front() == '-' || text.front() == '+')) {
        negative = text.front() == '-';
        text.remove_prefix(1);
    }
    const auto dot = text.find('.');
    const std::string_view whole = text.substr(0, dot);
    const std::string_view frac = dot == std::string_view::npos ? std::string_view{} : text.substr(dot + 1);
    auto all_digits = [](std::string_view s) {
        return std::all_of(s.begin(), s.end(), [](char c) { return std::isdigit(static_cast<unsigned char>(c)); });
    };
    if ((whole.empty() && frac.empty()) || !all_digits(whole) || !all_digits(frac) || whole.size() > 15) {
        fail(Errc::Schema, "invalid currency amount '" + original + "'");
    }
    std::int64_t cents = 0;
    for (char c : whole) cents = cents * 10 + (c - '0');
    cents *= 100;
    for (std::size_t i = 0; i < frac.size(); ++i) {
        const int digit = frac[i] - '0';
        if (i == 0) cents += 10 * digit;
        else if (i == 1) cents += digit;
        else if (digit != 0) fail(Errc::Schema, "currency amount '" + original + "' has more than two decimals");
    }
    return Money(negative ? -cents : cents);
}

std::string Money::to_string() const {
    const std::int64_t a = cents_ < 0 ? -cents_ : cents_;
    std::string out = (cents_ < 0 ? "-" : "") + std::to_string(a / 100) + ".";
    const auto frac = a % 100;
    if (frac < 10) out.push_back('0');
    out += std::to_string(frac);
    return out;
}

// --- domain operations ------------------------------------------------------

void PaymentHistory::validate() const {
    if (balance.empty() || payment.empty() || principal.empty()) {
        fail(Errc::InvalidArgument, "payment history vectors must be non-empty");
    }
    if (balance.size() != payment.size() || balance.size() != principal.size()) {
        fail(Errc::InvalidArgument, "payment history vectors must share one length");
    }
    if (!balance.front()) fail(Errc::InvalidArgument, "first-month balance is missing");
}

void LoanRecord::validate() const {
    require(apr_pct >= 0.0, "apr_pct must be non-negative for loan " + loan_id);
    require(original_amount > Money{}, "original_amount must be positive for loan " + loan_id);
    history.validate();
}

RiskBand classify_risk_band(double apr_pct) {
    require(apr_pct >= 0.0, "APR must be non-negative");
    if (apr_pct < 5.0) return RiskBand::SuperPrime;
    if (apr_pct < 10.0) return RiskBand::Prime;
    if (apr_pct < 15.0) return RiskBand::NearPrime;
    if (apr_pct < 20.0) return RiskBand::Subprime;
    return RiskBand::DeepSubprime;
}

namespace {

Money paid_principal(const PaymentHistory& h) {
    Money sum;
    for (const auto& p : h.principal) {
        if (p) sum += *p;
    }
    return sum;
}

}  // namespace

bool has_unclear_outcome(const PaymentHistory& history) {
    history.validate();
    return paid_principal(history) < *history.balance.front() && !history.balance.back().has_value();
}

std::vector<LoanRecord> filter_loans(const std::vector<LoanRecord>& records, const FilterPolicy& policy) {
    std::vector<LoanRecord> kept;
    for (const auto& r : records) {
        if (policy.exclude_coborrower && r.has_coborrower) continue;
        if (policy.income_verification && r.income_verification != *policy.income_verification) continue;
        if (policy.exclude_subvention && r.subvention) continue;
        if (policy.vehicle_condition && r.vehicle_condition != *policy.vehicle_condition) continue;
        if (policy.exclude_repossessed && r.initial_status == LoanStatus::Repossessed) continue;
        if (policy.max_entry_age_exclusive && r.loan_age_at_entry >= *policy.max_entry_age_exclusive) continue;
        if (!policy.allowed_terms.empty() && !policy.allowed_terms.contains(r.original_term)) continue;
        if (policy.drop_unclear_outcomes && has_unclear_outcome(r.history)) continue;
        kept.push_back(r);
    }
    return kept;
}

LoanOutcome determine_outcome(const PaymentHistory& history, Money pad) {
    history.validate();
    const int months = static_cast<int>(history.months());
    const Money initial_balance = *history.balance.front();

    if (paid_principal(history) + pad >= initial_balance) {
        for (int m = 0; m < months; ++m) {
            if (history.balance[m] && history.balance[m]->cents() == 0) return {OutcomeKind::Repaid, m + 1};
        }
        // retired on paper but never reported a zero balance
        return {OutcomeKind::Repaid, months};
    }

    auto is_zero = [&](int m) { return history.payment[m] && history.payment[m]->cents() == 0; };
    for (int m = 0; m + 2 < months; ++m) {
        if (is_zero(m) && is_zero(m + 1) && is_zero(m + 2)) return {OutcomeKind::Defaulted, m + 1};
    }
    return {OutcomeKind::Censored, months};
}

ObservedLoan to_observation(const LoanRecord& record, const LoanOutcome& outcome) {
    const int months = static_cast<int>(record.history.months());
    if (outcome.event_month < 1 || outcome.event_month > months) {
        fail(Errc::InvalidArgument, "event month " + std::to_string(outcome.event_month) +
                                        " outside the trust history of loan " + record.loan_id);
    }
    ObservedLoan obs;
    obs.entry_age = record.loan_age_at_entry + 1;
    obs.exit_age = record.loan_age_at_entry + outcome.event_month;
    obs.observed_event = outcome.kind != OutcomeKind::Censored;
    if (outcome.kind == OutcomeKind::Defaulted) obs.cause = Cause::Default;
    if (outcome.kind == OutcomeKind::Repaid) obs.cause = Cause::Prepay;
    return obs;
}

std::vector<BandObservation> build_observations(const std::vector<LoanRecord>& records, const FilterPolicy& policy,
                                                Money pad) {
    std::vector<BandObservation> out;
    for (const auto& r : filter_loans(records, policy)) {
        out.push_back({r.loan_id, classify_risk_band(r.apr_pct), to_observation(r, determine_outcome(r.history, pad))});
    }
    std::sort(out.begin(), out.end(), [](const auto& a, const auto& b) { return a.loan_id < b.loan_id; });
    return out;
}

// --- enumerations -----------------------------------------------------------

namespace {

std::string key_of(std::string_view text) {
    std::string out;
    for (char ch : text) {
        if (std::isspace(static_cast<unsigned char>(ch))) continue;
        if (ch == '-' || ch == ',') ch = '_';
        out.push_back(static_cast<char>(std::tolower(static_cast<unsigned char>(ch))));
    }
    return out;
}

bool is_na(std::string_view text) {
    const auto k = key_of(text);
    return k.empty() || k == "na" || k == "null";
}

std::optional<Money> parse_optional_money(std::string_view text) {
    if (is_na(text)) return std::nullopt;
    return Money::parse(text);
}

std::string money_field(const std::optional<Money>& m) { return m ? m->to_string() : "NA"; }

}  // namespace

std::string_view to_string(VehicleCondition v) { return v == VehicleCondition::New ? "new" : "used"; }

std::string_view to_string(IncomeVerification v) {
    switch (v) {
        case IncomeVerification::NotStatedNotVerified: return "not_stated_not_verified";
        case IncomeVerification::StatedNotVerified: return "stated_not_verified";
        case IncomeVerification::StatedVerifiedPartial: return "stated_verified_partial";
        case IncomeVerification::StatedVerifiedLevel4: return "stated_verified_level4";
        case IncomeVerification::StatedVerifiedLevel5: return "stated_verified_level5";
    }
    return "?";
}

std::string_view to_string(LoanStatus s) {
    switch (s) {
        case LoanStatus::Current: return "current";
        case LoanStatus::Delinquent: return "delinquent";
        case LoanStatus::Repossessed: return "repossessed";
        case LoanStatus::ChargedOff: return "charged_off";
        case LoanStatus::PaidOff: return "paid_off";
    }
    return "?";
}

VehicleCondition parse_vehicle_condition(std::string_view text) {
    const auto k = key_of(text);
    if (k == "new" || k == "1") return VehicleCondition::New;
    if (k == "used" || k == "2") return VehicleCondition::Used;
    fail(Errc::Schema, "invalid vehicle_condition '" + std::string(text) + "'");
}

IncomeVerification parse_income_verification(std::string_view text) {
    const auto k = key_of(text);
    for (int code = 1; code <= 5; ++code) {
        const auto v = static_cast<IncomeVerification>(code);
        if (k == std::to_string(code) || k == to_string(v)) return v;
    }
    fail(Errc::Schema, "invalid income_verification '" + std::string(text) + "'");
}

LoanStatus parse_loan_status(std::string_view text) {
    const auto k = key_of(text);
    for (auto s : {LoanStatus::Current, LoanStatus::Delinquent, LoanStatus::Repossessed, LoanStatus::ChargedOff,
                   LoanStatus::PaidOff}) {
        if (k == to_string(s)) return s;
    }
    fail(Errc::Schema, "invalid initial_status '" + std::string(text) + "'");
}

// --- CSV --------------------------------------------------------------------

namespace {

const std::vector<std::string_view> kLoanColumns{
    "loan_id",   "apr_pct",           "original_amount", "original_term",  "loan_age_at_entry", "has_coborrower",
    "income_verification", "subvention", "vehicle_condition", "initial_status", "recovered_amount"};

const std::vector<std::string_view> kPaymentColumns{"loan_id", "trust_month", "balance", "payment", "principal"};

const std::vector<std::string> kObservationColumns{"loan_id", "band", "entry_age", "exit_age", "event", "cause"};

std::string read_text(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) fail(Errc::Schema, "cannot open '" + path + "'");
    std::ostringstream buf;
    buf << in.rdbuf();
    return buf.str();
}

}  // namespace

std::vector<LoanRecord> read_loans(const std::string& loans_csv_text, const std::string& payments_csv_text) {
    const auto loans = csv::parse(loans_csv_text);
    loans.require_columns(kLoanColumns);
    const auto payments = csv::parse(payments_csv_text);
    payments.require_columns(kPaymentColumns);

    std::map<std::string, LoanRecord> by_id;
    for (const auto& row : loans.rows()) {
        auto col = [&](std::string_view name) -> const std::string& { return row[loans.column(name)]; };
        LoanRecord r;
        r.loan_id = col("loan_id");
        if (r.loan_id.empty()) fail(Errc::Schema, "empty loan_id");
        r.apr_pct = csv::parse_double(col("apr_pct"), "apr_pct");
        r.original_amount = Money::parse(col("original_amount"));
        r.original_term = static_cast<int>(csv::parse_int(col("original_term"), "original_term"));
        r.loan_age_at_entry = static_cast<int>(csv::parse_int(col("loan_age_at_entry"), "loan_age_at_entry"));
        r.has_coborrower = csv::parse_bool(col("has_coborrower"), "has_coborrower");
        r.income_verification = parse_income_verification(col("income_verification"));
        r.subvention = csv::parse_bool(col("subvention"), "subvention");
        r.vehicle_condition = parse_vehicle_condition(col("vehicle_condition"));
        r.initial_status = parse_loan_status(col("initial_status"));
        r.recovered_amount = is_na(col("recovered_amount")) ? Money{} : Money::parse(col("recovered_amount"));
        if (r.apr_pct < 0.0) fail(Errc::Schema, "negative apr_pct for loan " + r.loan_id);
        if (r.original_amount <= Money{}) fail(Errc::Schema, "non-positive original_amount for loan " + r.loan_id);
        if (r.loan_age_at_entry < 0) fail(Errc::Schema, "negative loan_age_at_entry for loan " + r.loan_id);
        const auto id = r.loan_id;
        if (!by_id.emplace(id, std::move(r)).second) fail(Errc::Schema, "duplicate loan_id " + id);
    }

    struct Month {
        long long index;
        std::optional<Money> balance, payment, principal;
    };
    std::map<std::string, std::vector<Month>> months;
    const auto c_id = payments.column("loan_id"), c_m = payments.column("trust_month"),
               c_b = payments.column("balance"), c_p = payments.column("payment"),
               c_q = payments.column("principal");
    for (const auto& row : payments.rows()) {
        if (!by_id.contains(row[c_id])) fail(Errc::Schema, "payments reference unknown loan_id " + row[c_id]);
        months[row[c_id]].push_back({csv::parse_int(row[c_m], "trust_month"), parse_optional_money(row[c_b]),
                                     parse_optional_money(row[c_p]), parse_optional_money(row[c_q])});
    }

    std::vector<LoanRecord> out;
    out.reserve(by_id.size());
    for (auto& [id, record] : by_id) {
        auto it = months.find(id);
        if (it == months.end()) fail(Errc::Schema, "loan " + id + " has no monthly payment rows");
        auto& rows = it->second;
        std::sort(rows.begin(), rows.end(), [](const Month& a, const Month& b) { return a.index < b.index; });
        for (std::size_t k = 0; k < rows.size(); ++k) {
            if (rows[k].index != static_cast<long long>(k) + 1) {
                fail(Errc::Schema, "loan " + id + " trust months must run 1..n without gaps");
            }
            record.history.balance.push_back(rows[k].balance);
            record.history.payment.push_back(rows[k].payment);
            record.history.principal.push_back(rows[k].principal);
        }
        if (!record.history.balance.front()) fail(Errc::Schema, "loan " + id + " lacks a first-month balance");
        out.push_back(std::move(record));
    }
    return out;
}

std::vector<LoanRecord> read_loan_files(const std::string& loans_path, const std::string& payments_path) {
    return read_loans(read_text(loans_path), read_text(payments_path));
}

void write_loans_csv(std::ostream& out, const std::vector<LoanRecord>& records) {
    csv::Writer w(out);
    w.row(std::vector<std::string>(kLoanColumns.begin(), kLoanColumns.end()));
    for (const auto& r : records) {
        w.row({r.loan_id, csv::format_double(r.apr_pct), r.original_amount.to_string(),
               std::to_string(r.original_term), std::to_string(r.loan_age_at_entry), r.has_coborrower ? "1" : "0",
               std::string(to_string(r.income_verification)), r.subvention ? "1" : "0",
               std::string(to_string(r.vehicle_condition)), std::string(to_string(r.initial_status)),
               r.recovered_amount.to_string()});
    }
}

void write_payments_csv(std::ostream& out, const std::vector<LoanRecord>& records) {
    csv::Writer w(out);
    w.row(std::vector<std::string>(kPaymentColumns.begin(), kPaymentColumns.end()));
    for (const auto& r : records) {
        for (std::size_t m = 0; m < r.history.months(); ++m) {
            w.row({r.loan_id, std::to_string(m + 1), money_field(r.history.balance[m]),
                   money_field(r.history.payment[m]), money_field(r.history.principal[m])});
        }
    }
}

void write_observations_csv(std::ostream& out, const std::vector<BandObservation>& rows) {
    csv::Writer w(out);
    w.row(kObservationColumns);
    for (const auto& r : rows) {
        w.row({r.loan_id, std::string(to_string(r.band)), std::to_string(r.obs.entry_age),
               std::to_string(r.obs.exit_age), r.obs.observed_event ? "1" : "0",
               r.obs.cause ? std::string(to_string(*r.obs.cause)) : std::string()});
    }
}

std::vector<BandObservation> read_observations(const std::string& csv_text) {
    const auto t = csv::parse(csv_text);
    t.require_columns({"loan_id", "band", "entry_age", "exit_age", "event", "cause"});
    std::vector<BandObservation> out;
    out.reserve(t.size());
    for (const auto& row : t.rows()) {
        BandObservation b;
        b.loan_id = row[t.column("loan_id")];
        try {
            b.band = parse_risk_band(row[t.column("band")]);
        } catch (const Error&) {
            fail(Errc::Schema, "invalid band '" + row[t.column("band")] + "'");
        }
        b.obs.entry_age = static_cast<int>(csv::parse_int(row[t.column("entry_age")], "entry_age"));
        b.obs.exit_age = static_cast<int>(csv::parse_int(row[t.column("exit_age")], "exit_age"));
        b.obs.observed_event = csv::parse_bool(row[t.column("event")], "event");
        const auto& cause = row[t.column("cause")];
        if (!cause.empty()) {
            try {
                b.obs.cause = parse_cause(cause);
            } catch (const Error&) {
                fail(Errc::Schema, "invalid cause '" + cause + "'");
            }
        }
        try {
            validate(b.obs);
        } catch (const Error& e) {
            fail(Errc::Schema, "observation " + b.loan_id + ": " + e.what());
        }
        out.push_back(std::move(b));
    }
    return out;
}

std::vector<BandObservation> read_observation_file(const std::string& path) { return read_observations(read_text(path)); }

}  // namespace loanhazard
