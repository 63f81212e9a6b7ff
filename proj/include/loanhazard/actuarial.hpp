#pragma once

// Amortization math, risk-adjusted returns, refinance savings, and LTV paths.
//
// Closed forms are templated on the scalar type; everything that needs a
// root solve or a hazard curve works in double.

#include <Eigen/Dense>
#include <cmath>
#include <functional>
#include <iosfwd>
#include <optional>
#include <vector>

#include "loanhazard/error.hpp"
#include "loanhazard/estimator.hpp"

namespace loanhazard {

/// Level payment retiring `principal` over `term` months at monthly rate r.
template <typename Scalar>
Scalar monthly_payment(Scalar principal, Scalar rate, int term) {
    using std::pow;
    require(term >= 1, "term must be at least one month");
    require(principal > Scalar(0), "principal must be positive");
    require(rate >= Scalar(0), "monthly rate must be non-negative");
    if (rate == Scalar(0)) return principal / Scalar(term);
    return principal * rate / (Scalar(1) - pow(Scalar(1) + rate, -term));
}

/// Scheduled balance after x payments: B(1+r)^x - P((1+r)^x - 1)/r.
template <typename Scalar>
Scalar balance_at(Scalar principal, Scalar rate, int term, int x) {
    using std::pow;
    require(x >= 0 && x <= term, "month outside the amortization schedule");
    const Scalar payment = monthly_payment(principal, rate, term);
    if (x == term) return Scalar(0);
    if (rate == Scalar(0)) return principal - payment * Scalar(x);
    const Scalar growth = pow(Scalar(1) + rate, x);
    return principal * growth - payment * (growth - Scalar(1)) / rate;
}

/// Monthly rate to effective annual rate by geometric compounding.
template <typename Scalar>
Scalar annualize(Scalar monthly) {
    using std::pow;
    require(monthly > Scalar(-1), "monthly rate must exceed -1");
    return pow(Scalar(1) + monthly, 12) - Scalar(1);
}

/// Monthly rate equivalent to an effective annual rate.
template <typename Scalar>
Scalar effective_monthly_rate(Scalar annual) {
    using std::pow;
    require(annual > Scalar(-1), "annual rate must exceed -1");
    return pow(Scalar(1) + annual, Scalar(1) / Scalar(12)) - Scalar(1);
}

/// One-period return r~ of the two-path asset priced at B_x that pays
/// B_{x+1} + P with probability 1 - lambda and R_{x+1} with probability
/// lambda one month later.
template <typename Scalar>
Scalar one_month_return(Scalar default_hazard, Scalar balance_now, Scalar balance_next, Scalar payment,
                        Scalar recovery_next) {
    require(balance_now > Scalar(0), "price B_x must be positive");
    require(default_hazard >= Scalar(0) && default_hazard <= Scalar(1), "hazard must lie in [0,1]");
    const Scalar expected =
        default_hazard * recovery_next + (Scalar(1) - default_hazard) * (balance_next + payment);
    return expected / balance_now - Scalar(1);
}

struct AmortizationSchedule {
    double principal = 0.0;
    double rate = 0.0;  // monthly
    int term = 0;
    double payment = 0.0;
    Eigen::VectorXd balances;  // balances(x) for x = 0..term

    double balance(int x) const;
};

AmortizationSchedule make_schedule(double principal, double monthly_rate, int term);

/// Recovery upon default as a fraction of the original balance, by default age.
using RecoveryFunction = std::function<double(int)>;

RecoveryFunction constant_recovery(double fraction);

/// Cause-specific hazards for ages first_age, first_age+1, ...
struct HazardPath {
    int first_age = 0;
    Eigen::VectorXd default_hazard;
    Eigen::VectorXd prepay_hazard;

    int last_age() const { return first_age + static_cast<int>(default_hazard.size()) - 1; }
    double at(Cause cause, int age) const;
};

/// Hazards on [first_age, last_age] from estimated curves. Ages with no data
/// take the nearest preceding estimate; ages past a curve's last estimate
/// hold that value (geometric tail); ages before the first estimate take the
/// first one.
HazardPath hazard_path_from_curves(const HazardCurve& default_curve, const HazardCurve& prepay_curve, int first_age,
                                   int last_age);

/// Cash flows for a default at ages x..psi-1 (rows) over times 1..psi-x
/// (columns): P before the default month, R_{j+1} in it.
Eigen::MatrixXd default_cash_matrix(const AmortizationSchedule& schedule, const RecoveryFunction& recovery, int x);

/// As default_cash_matrix with B_{j+1} + P paid in the prepayment month.
Eigen::MatrixXd prepay_cash_matrix(const AmortizationSchedule& schedule, int x);

/// Expected cash flow at times 1..psi-x for a loan of age x.
///
/// A loan that terminates at age j (x <= j <= psi-1) pays P at times
/// 1..j-x and then, at time j-x+1, R_{j+1} on default or B_{j+1} + P on
/// prepayment. The mass surviving every hazard follows the schedule to
/// maturity. The row weights are the conditional event probabilities.
Eigen::VectorXd expected_cash_flows(const AmortizationSchedule& schedule, const HazardPath& hazards,
                                    const RecoveryFunction& recovery, int x);

/// Present value of a cash-flow vector (times 1..n) at monthly rate rho.
double present_value(const Eigen::VectorXd& flows, double rho);

struct RootOptions {
    double lo = -0.99;
    double hi = 2.0;
    double relative_tolerance = 1e-12;
    int max_iterations = 500;
};

/// Lifetime risk-adjusted monthly return rho_x solving B_x = EPV_x(rho).
/// Throws Error{Numerical} when the bracket holds no sign change.
double lifetime_return(const AmortizationSchedule& schedule, const HazardPath& hazards,
                       const RecoveryFunction& recovery, int x, const RootOptions& opts = {});

/// Remaining level payments P needed to retire B at monthly rate r (rounded up).
int remaining_payments(double balance, double payment, double rate);

enum class PayoffRate {
    Nominal,          // count payments at APR / 12
    EffectiveAnnual,  // count payments at (1 + APR)^(1/12) - 1
};

enum class TotalSavings {
    TimesPayoffCount,     // monthly saving x remaining payments
    TimesRemainingTerm,   // monthly saving x (original term - loan age)
};

struct SavingsConvention {
    PayoffRate payoff_rate = PayoffRate::EffectiveAnnual;
    TotalSavings total = TotalSavings::TimesPayoffCount;
    std::optional<int> original_term;  // needed by TimesRemainingTerm
    std::optional<int> loan_age;
};

struct SavingsEstimate {
    double old_payment = 0.0;
    double new_payment = 0.0;
    double monthly_saving = 0.0;
    double total_saving = 0.0;
    int remaining_payments = 0;
};

/// Refinance at a lower monthly rate: N = remaining_payments(B, P, r_old),
/// new payment amortizes B over N at r_new, total = saving x N.
SavingsEstimate refinance_savings(double balance, double old_payment, double old_rate, double new_rate);

/// APR-quoted variant (APRs as fractions, e.g. 0.2237). The new payment is
/// quoted at apr_new / 12; the payoff count and the total follow `conv`.
SavingsEstimate refinance_savings_apr(double balance, double old_payment, double apr_old, double apr_new,
                                      const SavingsConvention& conv = {});

/// LTV(x) = B_x / (value (1 - d)^(x/12)) for x = 0..term.
Eigen::VectorXd ltv_trajectory(const AmortizationSchedule& schedule, double initial_value,
                               double annual_depreciation);

// --- export -----------------------------------------------------------------

struct ReturnRow {
    std::string band;
    int age = 0;
    double one_month_annualized = 0.0;
    std::optional<double> lifetime_annualized;
};

void write_returns_csv(std::ostream& out, const std::vector<ReturnRow>& rows);

struct SavingsRow {
    std::string band;
    std::optional<int> age;
    double balance = 0.0;
    double payment = 0.0;
    double apr_pct = 0.0;
    double new_apr_pct = 0.0;
    SavingsEstimate estimate;
};

/// Columns mirror the savings table: band, age, balance, payment, apr,
/// payments, new_apr, new_payment, monthly_saving, total_saving.
void write_savings_csv(std::ostream& out, const std::vector<SavingsRow>& rows);

}  // namespace loanhazard
