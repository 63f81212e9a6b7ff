#include <doctest.h>

#include <random>
#include <sstream>

#include "loanhazard/actuarial.hpp"
#include "oracles.hpp"

using namespace loanhazard;

namespace {

HazardPath flat_path(int first, int length, double h01, double h02) {
    return {first, Eigen::VectorXd::Constant(length, h01), Eigen::VectorXd::Constant(length, h02)};
}

struct TableRow {
    int age;
    double balance, payment, apr;
    int payments;
};

}  // namespace

TEST_CASE("level payment") {
    CHECK(monthly_payment(100.0, 0.01, 12) == doctest::Approx(8.88487886783416).epsilon(1e-13));
    CHECK(monthly_payment(100.0, 0.0, 10) == 10.0);
    CHECK(monthly_payment(100.0, 0.2265 / 12, 72) == doctest::Approx(2.551339334734415).epsilon(1e-12));
    CHECK_THROWS_AS(monthly_payment(100.0, 0.01, 0), Error);
    CHECK_THROWS_AS(monthly_payment(-1.0, 0.01, 12), Error);
}

TEST_CASE("scheduled balance") {
    const oracle::ToyLoan loan{100.0, 0.01, 12};
    CHECK(balance_at(100.0, 0.01, 12, 0) == doctest::Approx(100.0));
    CHECK(balance_at(100.0, 0.01, 12, 12) == 0.0);
    CHECK(balance_at(100.0, 0.01, 12, 6) == doctest::Approx(51.492106458019904).epsilon(1e-12));
    CHECK(balance_at(100.0, 0.01, 12, 6) == doctest::Approx(loan.balance(6)).epsilon(1e-12));
    CHECK(std::abs(balance_at(100.0, 0.01, 12, 11) - loan.balance(11)) < 1e-10);
    CHECK_THROWS_AS(balance_at(100.0, 0.01, 12, 13), Error);

    const auto s = make_schedule(25000.0, 0.2265 / 12, 72);
    CHECK(s.balances(0) == 25000.0);
    CHECK(s.balances(72) == 0.0);
    for (int x = 1; x <= 72; ++x) CHECK(s.balances(x) < s.balances(x - 1));
}

TEST_CASE("annualization") {
    CHECK(annualize(0.0) == 0.0);
    CHECK(annualize(0.01) == doctest::Approx(0.12682503013196977).epsilon(1e-14));
    CHECK(annualize(-0.5) == doctest::Approx(-0.999755859375).epsilon(1e-14));
    CHECK_THROWS_AS(annualize(-1.0), Error);
    CHECK(effective_monthly_rate(annualize(0.0123)) == doctest::Approx(0.0123).epsilon(1e-13));
}

TEST_CASE("one-month return") {
    CHECK(one_month_return(0.0, 100.0, 95.0, 7.0, 40.0) == doctest::Approx(0.02).epsilon(1e-14));
    CHECK(one_month_return(1.0, 100.0, 95.0, 7.0, 50.0) == doctest::Approx(-0.5).epsilon(1e-14));
    CHECK(one_month_return(0.05, 100.0, 95.0, 7.0, 40.0) == doctest::Approx(-0.011).epsilon(1e-12));
    CHECK_THROWS_AS(one_month_return(0.05, 0.0, 95.0, 7.0, 40.0), Error);
    double last = 1.0;
    for (int i = 0; i <= 100; ++i) {
        const double r = one_month_return(i / 100.0, 100.0, 95.0, 7.0, 40.0);
        if (i > 0) CHECK(r < last);
        last = r;
    }
}

TEST_CASE("certain schedule returns the contract rate") {
    for (const double r : {0.001, 0.0075, 0.02}) {
        for (const int term : {12, 36, 72}) {
            const auto s = make_schedule(1000.0, r, term);
            const auto path = flat_path(0, term, 0.0, 0.0);
            for (int x = 0; x < term; x += 5) {
                CHECK(std::abs(lifetime_return(s, path, constant_recovery(0.3), x) - r) < 1e-10);
            }
        }
    }
}

TEST_CASE("immediate payoff returns the contract rate") {
    const auto s = make_schedule(5000.0, 0.015, 24);
    for (int x = 0; x < 24; ++x) {
        auto path = flat_path(0, 24, 0.0, 0.0);
        path.prepay_hazard(x) = 1.0;
        CHECK(std::abs(lifetime_return(s, path, constant_recovery(0.0), x) - 0.015) < 1e-10);
    }
}

TEST_CASE("three-month toy loan matches path enumeration") {
    const oracle::ToyLoan loan{100.0, 0.02, 3};
    const auto s = make_schedule(loan.principal, loan.rate, loan.term);
    const std::vector<double> h01{0.1, 0.1, 0.1}, h02{0.0, 0.0, 0.0};
    const auto rec = [](int) { return 0.4; };
    const HazardPath path{0, Eigen::Map<const Eigen::VectorXd>(h01.data(), 3),
                          Eigen::Map<const Eigen::VectorXd>(h02.data(), 3)};
    for (int x = 0; x < 3; ++x) {
        const double expected = oracle::path_return(loan, h01, h02, rec, x);
        CHECK(std::abs(lifetime_return(s, path, rec, x) - expected) < 1e-10);
    }
    // a loss-making loan has a negative return
    CHECK(lifetime_return(s, path, rec, 0) < 0.0);
}

TEST_CASE("expected cash flows and EPV reconstruction") {
    const auto s = make_schedule(100.0, 0.2265 / 12, 72);
    const auto path = flat_path(0, 72, 0.01, 0.02);
    const auto rec = constant_recovery(0.35);
    for (const int x : {0, 12, 40, 71}) {
        const auto flows = expected_cash_flows(s, path, rec, x);
        CHECK(flows.size() == 72 - x);
        const double rho = lifetime_return(s, path, rec, x);
        CHECK(std::abs(present_value(flows, rho) - s.balance(x)) <= 1e-8 * s.balance(x));
    }
    // row weights plus the maturity mass sum to one
    const auto probs = event_probs_from_hazards(path.default_hazard, path.prepay_hazard);
    CHECK(probs.sum() < 1.0);
    const auto def = default_cash_matrix(s, rec, 70);
    CHECK(def.rows() == 2);
    CHECK(def(0, 0) == doctest::Approx(35.0));
    CHECK(def(1, 0) == doctest::Approx(s.payment));
    CHECK(def(0, 1) == 0.0);
    const auto pre = prepay_cash_matrix(s, 70);
    CHECK(pre(0, 0) == doctest::Approx(s.balance(71) + s.payment));
    CHECK(pre(1, 1) == doctest::Approx(s.payment));
}

TEST_CASE("hazard paths from curves carry and extend") {
    HazardCurve d, p;
    for (int age = 1; age <= 5; ++age) {
        HazardRow r;
        r.age = age;
        r.at_risk = age == 3 ? 0 : 10;
        r.events = 1;
        r.hazard = 0.01 * age;
        d.rows.push_back(r);
        r.hazard = 0.02;
        p.rows.push_back(r);
    }
    const auto path = hazard_path_from_curves(d, p, 0, 8);
    CHECK(path.at(Cause::Default, 0) == doctest::Approx(0.01));
    CHECK(path.at(Cause::Default, 3) == doctest::Approx(0.02));
    CHECK(path.at(Cause::Default, 8) == doctest::Approx(0.05));
    CHECK(path.at(Cause::Prepay, 8) == doctest::Approx(0.02));
    CHECK_THROWS_AS(path.at(Cause::Default, 9), Error);

    for (auto& r : d.rows) r.hazard = 0.99;
    CHECK_THROWS_AS(hazard_path_from_curves(d, p, 0, 8), Error);
}

TEST_CASE("lifetime return errors") {
    const auto s = make_schedule(100.0, 0.01, 12);
    CHECK_THROWS_AS(lifetime_return(s, flat_path(0, 5, 0.0, 0.0), constant_recovery(0.0), 0), Error);
    CHECK_THROWS_AS(lifetime_return(s, flat_path(0, 12, 0.0, 0.0), constant_recovery(0.0), 12), Error);
    CHECK_THROWS_AS(constant_recovery(1.5), Error);
    RootOptions narrow;
    narrow.lo = 0.5;
    try {
        lifetime_return(s, flat_path(0, 12, 0.0, 0.0), constant_recovery(0.0), 0, narrow);
        FAIL("expected an error");
    } catch (const Error& e) {
        CHECK(e.code() == Errc::Numerical);
    }
}

TEST_CASE("remaining payments") {
    CHECK(remaining_payments(7485.0, 360.0, 0.2237 / 12) == 27);
    CHECK(remaining_payments(100.0, 10.0, 0.0) == 10);
    const double p = monthly_payment(4000.0, 0.01, 12);
    CHECK(remaining_payments(4000.0, p, 0.01) == 12);
    CHECK_THROWS_AS(remaining_payments(1000.0, 10.0, 0.01), Error);
}

TEST_CASE("refinance savings conventions") {
    const auto nominal = refinance_savings(7485.0, 360.0, 0.2237 / 12, 0.0359 / 12);
    CHECK(nominal.remaining_payments == 27);
    CHECK(nominal.monthly_saving == doctest::Approx(nominal.old_payment - nominal.new_payment));
    CHECK(nominal.total_saving == doctest::Approx(nominal.monthly_saving * 27));

    const auto sp = refinance_savings_apr(7485.0, 360.0, 0.2237, 0.0359);
    CHECK(sp.remaining_payments == 26);
    CHECK(std::abs(sp.monthly_saving - 61.0) <= 3.0);
    const auto s = refinance_savings_apr(10985.0, 359.0, 0.2246, 0.1797);
    CHECK(s.remaining_payments == 44);
    CHECK(std::abs(s.monthly_saving - 16.0) <= 3.0);

    SavingsConvention remaining;
    remaining.total = TotalSavings::TimesRemainingTerm;
    remaining.original_term = 72;
    remaining.loan_age = 36;
    const auto t = refinance_savings_apr(10985.0, 359.0, 0.2246, 0.1797, remaining);
    CHECK(std::abs(t.total_saving - 586.0) <= 3.0);
    remaining.loan_age.reset();
    CHECK_THROWS_AS(refinance_savings_apr(10985.0, 359.0, 0.2246, 0.1797, remaining), Error);

    CHECK_THROWS_AS(refinance_savings(7485.0, 360.0, 0.01, 0.02), Error);
    // a whole number of payments already undercuts the old payment slightly
    const auto tiny = refinance_savings(7485.0, 360.0, 0.2237 / 12, 0.2237 / 12 - 1e-9);
    CHECK(tiny.monthly_saving > 0.0);
    CHECK(std::abs(tiny.new_payment - monthly_payment(7485.0, 0.2237 / 12, 27)) < 1e-4);
}

TEST_CASE("payoff counts follow the effective monthly rate") {
    const std::vector<TableRow> deep{{12, 14245, 365, 22.58, 65}, {15, 13844, 364, 22.56, 62},
                                     {18, 13520, 363, 22.54, 60}, {24, 12836, 361, 22.50, 56},
                                     {30, 11973, 361, 22.46, 50}, {36, 10985, 359, 22.46, 44},
                                     {42, 9833, 357, 22.46, 38},  {48, 8799, 358, 22.43, 33},
                                     {50, 8312, 358, 22.44, 30},  {54, 7485, 360, 22.37, 26},
                                     {60, 6923, 377, 22.00, 23}};
    for (const auto& r : deep) {
        CAPTURE(r.age);
        CHECK(remaining_payments(r.balance, r.payment, effective_monthly_rate(r.apr / 100)) == r.payments);
    }
    // the one subprime row the convention misses by a payment
    CHECK(remaining_payments(16693, 395, effective_monthly_rate(0.1797)) == 65);
    CHECK(remaining_payments(16126, 394, effective_monthly_rate(0.1796)) == 61);
}

TEST_CASE("loan-to-value path") {
    const auto s = make_schedule(100.0, 0.2265 / 12, 72);
    const auto ltv = ltv_trajectory(s, 100.0, 0.31);
    CHECK(ltv(0) == doctest::Approx(1.0));
    CHECK(ltv(36) == doctest::Approx(2.0158105039658336).epsilon(1e-10));
    const auto flat = ltv_trajectory(s, 100.0, 0.0);
    for (int x = 1; x <= 72; ++x) CHECK(flat(x) < flat(x - 1));
    const auto half = ltv_trajectory(s, 100.0, 0.16);
    CHECK(half(36) < ltv(36));
    CHECK_THROWS_AS(ltv_trajectory(s, 0.0, 0.31), Error);
    CHECK_THROWS_AS(ltv_trajectory(s, 100.0, 1.0), Error);
}

TEST_CASE("returns and savings exports") {
    std::ostringstream out;
    write_returns_csv(out, {{"deep_subprime", 3, 0.25, std::nullopt}});
    CHECK(out.str() == "band,age,one_month_return_annualized,lifetime_return_annualized\ndeep_subprime,3,0.25,\n");
    std::ostringstream sav;
    SavingsRow row{"deep_subprime", 54, 7485, 360, 22.37, 3.59, refinance_savings_apr(7485, 360, 0.2237, 0.0359)};
    write_savings_csv(sav, {row});
    CHECK(sav.str().find("deep_subprime,54,7485.00,360.00,22.37,26,3.59,") != std::string::npos);
}
