#pragma once

// Brute-force reference computations shared by the unit and acceptance
// tests. Each one recomputes a library quantity from first principles,
// without calling the code it checks.

#include <cmath>
#include <functional>
#include <map>
#include <random>
#include <vector>

#include "loanhazard/risk_model.hpp"
#include "loanhazard/types.hpp"

namespace oracle {

using loanhazard::Cause;

/// Estimator target by enumerating every (X, Y, cause) cell of the
/// generating process, independent of the factorised closed form.
struct EnumeratedTruth {
    double alpha = 0.0;
    std::map<int, double> at_risk;                  // age -> Pr(at risk | retained)
    std::map<std::pair<int, int>, double> events;   // (age, cause 1|2) -> Pr(event | retained)

    double hazard(int age, Cause c) const {
        return events.at({age, static_cast<int>(c)}) / at_risk.at(age);
    }
};

inline EnumeratedTruth enumerate_truth(const std::vector<double>& pmf, const std::vector<double>& share, int min_age,
                                       int y_lo, int y_hi, int tau) {
    EnumeratedTruth t;
    const double py = 1.0 / (y_hi - y_lo + 1);
    const int max_age = min_age + static_cast<int>(pmf.size()) - 1;
    for (int a = min_age; a <= max_age; ++a) {
        t.at_risk[a] = 0.0;
        t.events[{a, 1}] = 0.0;
        t.events[{a, 2}] = 0.0;
    }
    for (int y = y_lo; y <= y_hi; ++y) {
        for (int k = 0; k < static_cast<int>(pmf.size()); ++k) {
            const int x = min_age + k;
            for (int cause = 1; cause <= 2; ++cause) {
                const double p = py * pmf[k] * (cause == 1 ? share[k] : 1.0 - share[k]);
                if (p == 0.0 || y > x) continue;
                t.alpha += p;
                const int c = y + tau;
                const int exit = std::min(x, c);
                for (int a = y; a <= exit; ++a) {
                    if (a >= min_age && a <= max_age) t.at_risk[a] += p;
                }
                if (x <= c) t.events[{x, cause}] += p;
            }
        }
    }
    for (auto& [a, v] : t.at_risk) v /= t.alpha;
    for (auto& [k, v] : t.events) v /= t.alpha;
    return t;
}

/// Toy loan: level payment, monthly rate and term with explicit balances.
struct ToyLoan {
    double principal = 0.0;
    double rate = 0.0;
    int term = 0;

    double payment() const {
        return rate == 0.0 ? principal / term : principal * rate / (1.0 - std::pow(1.0 + rate, -term));
    }
    double balance(int x) const {
        // roll the schedule forward one month at a time
        double b = principal;
        for (int m = 0; m < x; ++m) b = b * (1.0 + rate) - payment();
        return x == term ? 0.0 : b;
    }
};

/// EPV of a loan aged x by enumerating every termination path month by
/// month: default, prepay or continue, with the terminal cash flow paid in
/// the month the loan ends.
inline double path_epv(const ToyLoan& loan, const std::vector<double>& h01, const std::vector<double>& h02,
                       const std::function<double(int)>& recovery, int x, double rho) {
    const double p = loan.payment();
    const double v = 1.0 / (1.0 + rho);
    double epv = 0.0;
    std::function<void(int, double, double)> walk = [&](int age, double prob, double pv_so_far) {
        const int t = age - x + 1;  // cash-flow time of an event at this age
        const double disc = std::pow(v, t);
        if (age == loan.term) {
            epv += prob * pv_so_far;
            return;
        }
        epv += prob * h01[age] * (pv_so_far + disc * recovery(age + 1) * loan.principal);
        epv += prob * h02[age] * (pv_so_far + disc * (loan.balance(age + 1) + p));
        const double stay = 1.0 - h01[age] - h02[age];
        if (stay > 0.0) walk(age + 1, prob * stay, pv_so_far + disc * p);
    };
    walk(x, 1.0, 0.0);
    return epv;
}

/// Root of path_epv(rho) = B_x by plain bisection on [-0.99, 2].
inline double path_return(const ToyLoan& loan, const std::vector<double>& h01, const std::vector<double>& h02,
                          const std::function<double(int)>& recovery, int x) {
    const double price = loan.balance(x);
    double lo = -0.99, hi = 2.0;
    auto f = [&](double r) { return path_epv(loan, h01, h02, recovery, x, r) - price; };
    const bool lo_positive = f(lo) > 0.0;
    for (int i = 0; i < 400 && hi - lo > 1e-16; ++i) {
        const double mid = 0.5 * (lo + hi);
        if ((f(mid) > 0.0) == lo_positive) {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    return 0.5 * (lo + hi);
}

/// Occurrence/exposure life table for complete data (everybody enters at
/// age 1 and is followed to the event): deaths of the cause at age a over
/// the number still alive at the start of a.
inline std::map<int, double> life_table(const std::vector<std::pair<int, Cause>>& lifetimes, Cause cause) {
    std::map<int, double> out;
    int max_age = 0;
    for (const auto& [age, c] : lifetimes) max_age = std::max(max_age, age);
    for (int a = 1; a <= max_age; ++a) {
        int alive = 0, deaths = 0;
        for (const auto& [age, c] : lifetimes) {
            if (age >= a) ++alive;
            if (age == a && c == cause) ++deaths;
        }
        if (alive > 0) out[a] = static_cast<double>(deaths) / alive;
    }
    return out;
}

}  // namespace oracle
