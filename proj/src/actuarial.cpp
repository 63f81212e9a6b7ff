#include "loanhazard/actuarial.hpp"

#include <cmath>
#include <ostream>

#include "loanhazard/csv.hpp"
#include "loanhazard/risk_model.hpp"

namespace loanhazard {

double AmortizationSchedule::balance(int x) const {
    require(x >= 0 && x <= term, "month outside the amortization schedule");
    return balances(x);
}

AmortizationSchedule make_schedule(double principal, double monthly_rate, int term) {
    AmortizationSchedule s;
    s.principal = principal;
    s.rate = monthly_rate;
    s.term = term;
    s.payment = monthly_payment(principal, monthly_rate, term);
    s.balances.resize(term + 1);
    for (int x = 0; x <= term; ++x) s.balances(x) = balance_at(principal, monthly_rate, term, x);
    return s;
}

RecoveryFunction constant_recovery(double fraction) {
    require(fraction >= 0.0 && fraction <= 1.0, "recovery fraction must lie in [0,1]");
    return [fraction](int) { return fraction; };
}

double HazardPath::at(Cause cause, int age) const {
    require(age >= first_age && age <= last_age(), "age outside the hazard path");
    const auto k = static_cast<Eigen::Index>(age - first_age);
    return cause == Cause::Default ? default_hazard(k) : prepay_hazard(k);
}

namespace {

Eigen::VectorXd extend_curve(const HazardCurve& curve, int first_age, int last_age) {
    const HazardRow* first_with_data = nullptr;
    for (const auto& r : curve.rows) {
        if (r.has_data()) {
            first_with_data = &r;
            break;
        }
    }
    if (!first_with_data) {
        fail(Errc::InvalidArgument, "hazard curve '" + curve.band + "' has no estimable ages");
    }
    Eigen::VectorXd h(last_age - first_age + 1);
    double carry = first_with_data->hazard;
    for (int age = first_age; age <= last_age; ++age) {
        if (const auto* row = curve.find(age); row && row->has_data()) carry = row->hazard;
        h(age - first_age) = carry;
    }
    return h;
}

}  // namespace

HazardPath hazard_path_from_curves(const HazardCurve& default_curve, const HazardCurve& prepay_curve, int first_age,
                                   int last_age) {
    require(last_age >= first_age, "empty hazard path");
    HazardPath path;
    path.first_age = first_age;
    path.default_hazard = extend_curve(default_curve, first_age, last_age);
    path.prepay_hazard = extend_curve(prepay_curve, first_age, last_age);
    for (Eigen::Index k = 0; k < path.default_hazard.size(); ++k) {
        const double total = path.default_hazard(k) + path.prepay_hazard(k);
        if (total > 1.0) {
            fail(Errc::InvalidArgument, "all-cause hazard exceeds one at age " + std::to_string(first_age + k));
        }
    }
    return path;
}

Eigen::MatrixXd default_cash_matrix(const AmortizationSchedule& schedule, const RecoveryFunction& recovery, int x) {
    require(x >= 0 && x < schedule.term, "loan age must lie in [0, term)");
    const int m = schedule.term - x;
    Eigen::MatrixXd def = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        def.row(k).head(k).setConstant(schedule.payment);
        const double fraction = recovery(x + k + 1);
        require(fraction >= 0.0 && fraction <= 1.0, "recovery fraction must lie in [0,1]");
        def(k, k) = fraction * schedule.principal;
    }
    return def;
}

Eigen::MatrixXd prepay_cash_matrix(const AmortizationSchedule& schedule, int x) {
    require(x >= 0 && x < schedule.term, "loan age must lie in [0, term)");
    const int m = schedule.term - x;
    Eigen::MatrixXd pre = Eigen::MatrixXd::Zero(m, m);
    for (int k = 0; k < m; ++k) {
        pre.row(k).head(k).setConstant(schedule.payment);
        pre(k, k) = schedule.balances(x + k + 1) + schedule.payment;
    }
    return pre;
}

Eigen::VectorXd expected_cash_flows(const AmortizationSchedule& schedule, const HazardPath& hazards,
                                    const RecoveryFunction& recovery, int x) {
    require(x >= 0 && x < schedule.term, "loan age must lie in [0, term)");
    const int last = schedule.term - 1;
    if (hazards.first_age > x || hazards.last_age() < last) {
        fail(Errc::InvalidArgument, "hazard path does not cover ages [" + std::to_string(x) + ", " +
                                        std::to_string(last) + "]");
    }
    const int m = schedule.term - x;
    const auto offset = static_cast<Eigen::Index>(x - hazards.first_age);
    const Eigen::VectorXd h01 = hazards.default_hazard.segment(offset, m);
    const Eigen::VectorXd h02 = hazards.prepay_hazard.segment(offset, m);

    const auto probs = event_probs_from_hazards(h01, h02);
    const double maturity = 1.0 - probs.sum();
    if (maturity < -1e-9) fail(Errc::Numerical, "conditional event probabilities exceed one");

    Eigen::RowVectorXd flows = probs.col(0).transpose() * default_cash_matrix(schedule, recovery, x) +
                               probs.col(1).transpose() * prepay_cash_matrix(schedule, x);
    flows.array() += std::max(maturity, 0.0) * schedule.payment;
    return flows.transpose();
}

double present_value(const Eigen::VectorXd& flows, double rho) {
    require(rho > -1.0, "discount rate must exceed -1");
    const double v = 1.0 / (1.0 + rho);
    // Horner from the last period
    double pv = 0.0;
    for (Eigen::Index k = flows.size(); k-- > 0;) pv = (pv + flows(k)) * v;
    return pv;
}

double lifetime_return(const AmortizationSchedule& schedule, const HazardPath& hazards,
                       const RecoveryFunction& recovery, int x, const RootOptions& opts) {
    const double price = schedule.balance(x);
    require(price > 0.0, "price B_x must be positive");
    const Eigen::VectorXd flows = expected_cash_flows(schedule, hazards, recovery, x);

    auto residual = [&](double rho) { return present_value(flows, rho) - price; };
    double lo = opts.lo, hi = opts.hi;
    double f_lo = residual(lo), f_hi = residual(hi);
    if (f_lo == 0.0) return lo;
    if (f_hi == 0.0) return hi;
    if ((f_lo > 0.0) == (f_hi > 0.0)) {
        fail(Errc::Numerical, "EPV root not bracketed in [" + std::to_string(lo) + ", " + std::to_string(hi) + "]");
    }
    const double tol = opts.relative_tolerance * price;
    double mid = 0.5 * (lo + hi);
    for (int it = 0; it < opts.max_iterations; ++it) {
        mid = 0.5 * (lo + hi);
        if (mid <= lo || mid >= hi) break;  // bracket exhausted at machine precision
        const double f_mid = residual(mid);
        if (std::abs(f_mid) <= tol) break;
        if ((f_mid > 0.0) == (f_lo > 0.0)) {
            lo = mid;
            f_lo = f_mid;
        } else {
            hi = mid;
        }
    }
    if (std::abs(residual(mid)) > 1e-8 * price) fail(Errc::Numerical, "EPV root did not converge");
    return mid;
}

int remaining_payments(double balance, double payment, double rate) {
    require(balance > 0.0 && payment > 0.0, "balance and payment must be positive");
    require(rate >= 0.0, "monthly rate must be non-negative");
    if (payment <= balance * rate) fail(Errc::InvalidArgument, "payment does not amortize the balance");
    const double n = rate == 0.0 ? balance / payment : -std::log1p(-balance * rate / payment) / std::log1p(rate);
    // absorb floating noise when n is an integer by construction
    return static_cast<int>(std::ceil(n - 1e-9));
}

namespace {

SavingsEstimate savings_over(double balance, double old_payment, double new_rate, int n) {
    SavingsEstimate s;
    s.remaining_payments = n;
    s.old_payment = old_payment;
    s.new_payment = monthly_payment(balance, new_rate, n);
    s.monthly_saving = old_payment - s.new_payment;
    s.total_saving = s.monthly_saving * n;
    return s;
}

}  // namespace

SavingsEstimate refinance_savings(double balance, double old_payment, double old_rate, double new_rate) {
    require(new_rate >= 0.0, "refinance rate must be non-negative");
    if (!(new_rate < old_rate)) fail(Errc::InvalidArgument, "refinance rate must be lower than the current rate");
    return savings_over(balance, old_payment, new_rate, remaining_payments(balance, old_payment, old_rate));
}

SavingsEstimate refinance_savings_apr(double balance, double old_payment, double apr_old, double apr_new,
                                      const SavingsConvention& conv) {
    require(apr_new >= 0.0, "refinance APR must be non-negative");
    if (!(apr_new < apr_old)) fail(Errc::InvalidArgument, "refinance APR must be lower than the current APR");
    const double payoff_rate =
        conv.payoff_rate == PayoffRate::Nominal ? apr_old / 12.0 : effective_monthly_rate(apr_old);
    auto s = savings_over(balance, old_payment, apr_new / 12.0, remaining_payments(balance, old_payment, payoff_rate));
    if (conv.total == TotalSavings::TimesRemainingTerm) {
        require(conv.original_term && conv.loan_age, "remaining-term totals need the original term and loan age");
        const int remaining = *conv.original_term - *conv.loan_age;
        require(remaining >= 0, "loan age exceeds the original term");
        s.total_saving = s.monthly_saving * remaining;
    }
    return s;
}

Eigen::VectorXd ltv_trajectory(const AmortizationSchedule& schedule, double initial_value, double annual_depreciation) {
    require(initial_value > 0.0, "collateral value must be positive");
    require(annual_depreciation >= 0.0 && annual_depreciation < 1.0, "depreciation must lie in [0,1)");
    Eigen::VectorXd ltv(schedule.term + 1);
    for (int x = 0; x <= schedule.term; ++x) {
        ltv(x) = schedule.balances(x) / (initial_value * std::pow(1.0 - annual_depreciation, x / 12.0));
    }
    return ltv;
}

void write_returns_csv(std::ostream& out, const std::vector<ReturnRow>& rows) {
    csv::Writer w(out);
    w.row({"band", "age", "one_month_return_annualized", "lifetime_return_annualized"});
    for (const auto& r : rows) {
        w.row({r.band, std::to_string(r.age), csv::format_double(r.one_month_annualized),
               r.lifetime_annualized ? csv::format_double(*r.lifetime_annualized) : ""});
    }
}

void write_savings_csv(std::ostream& out, const std::vector<SavingsRow>& rows) {
    csv::Writer w(out);
    w.row({"band", "age", "balance", "payment", "apr", "payments", "new_apr", "new_payment", "monthly_saving",
           "total_saving"});
    for (const auto& r : rows) {
        w.row({r.band, r.age ? std::to_string(*r.age) : "", csv::format_money(r.balance), csv::format_money(r.payment),
               csv::format_double(r.apr_pct), std::to_string(r.estimate.remaining_payments),
               csv::format_double(r.new_apr_pct), csv::format_money(r.estimate.new_payment),
               csv::format_money(r.estimate.monthly_saving), csv::format_money(r.estimate.total_saving)});
    }
}

}  // namespace loanhazard
