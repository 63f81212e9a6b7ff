// Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any FAIL.

#include <chrono>
#include <cmath>
#include <cstdio>
#include <functional>
#include <random>
#include <sstream>
#include <string>
#include <vector>

#include "fixtures.hpp"
#include "loanhazard/actuarial.hpp"
#include "loanhazard/convergence.hpp"
#include "loanhazard/estimator.hpp"
#include "loanhazard/ingest.hpp"
#include "loanhazard/montecarlo.hpp"
#include "loanhazard/recovery.hpp"
#include "oracles.hpp"

using namespace loanhazard;

namespace {

struct Outcome {
    bool pass = true;
    std::string detail;
    std::vector<std::string> notes;  // printed under the criterion line

    void require(bool ok, const std::string& what) {
        if (!ok) {
            pass = false;
            notes.push_back("failed: " + what);
        }
    }
};

std::string fmt(const char* f, auto... args) {
    char buf[256];
    std::snprintf(buf, sizeof buf, f, args...);
    return buf;
}

double seconds_since(std::chrono::steady_clock::time_point t0) {
    return std::chrono::duration<double>(std::chrono::steady_clock::now() - t0).count();
}

std::vector<double> to_std(const Eigen::VectorXd& v) { return {v.begin(), v.end()}; }

// --- 1 ----------------------------------------------------------------------

Outcome simulation_study() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    const auto config = table_b1_config();
    const auto rep = run_study(config);
    const double elapsed = seconds_since(t0);

    const bool a = std::abs(rep.alpha_hat - 0.864) <= 0.010;

    bool b = true, c = true, d = true;
    double worst_z = 0.0, worst_cov = 0.95, worst_ratio = 1.0;
    std::string z_at, cov_at, ratio_at;
    for (const auto& r : rep.rows) {
        const std::string cell = fmt("age %d %s", r.age, std::string(to_string(r.cause)).c_str());
        if (r.age <= 9) {
            const auto se = r.mc_se();
            const double z = se && *se > 0.0 ? (r.mean - r.true_hazard) / *se : INFINITY;
            if (std::abs(z) > std::abs(worst_z)) {
                worst_z = z;
                z_at = cell;
            }
            if (!(std::abs(z) <= 3.0)) {
                b = false;
                o.notes.push_back(fmt("(b) %s: mean %.6f truth %.6f z %.2f", cell.c_str(), r.mean, r.true_hazard, z));
            }
        }
        if (r.coverage) {
            if (std::abs(*r.coverage - 0.95) > std::abs(worst_cov - 0.95)) {
                worst_cov = *r.coverage;
                cov_at = cell;
            }
            if (*r.coverage < 0.935 || *r.coverage > 0.965) {
                c = false;
                o.notes.push_back(fmt("(c) %s: coverage %.3f", cell.c_str(), *r.coverage));
            }
        }
        if (r.f_star >= 0.01) {
            const auto ratio = r.variance_ratio();
            if (!ratio || std::abs(*ratio - 1.0) > std::abs(worst_ratio - 1.0)) {
                worst_ratio = ratio.value_or(NAN);
                ratio_at = cell;
            }
            if (!ratio || *ratio < 0.8 || *ratio > 1.2) {
                d = false;
                o.notes.push_back(fmt("(d) %s: variance ratio %.3f", cell.c_str(), ratio.value_or(NAN)));
            }
        }
    }
    double max_corr = 0.0;
    for (const auto& m : rep.correlation) {
        for (Eigen::Index i = 0; i < m.rows(); ++i) {
            for (Eigen::Index j = 0; j < m.cols(); ++j) {
                if (i != j && std::isfinite(m(i, j))) max_corr = std::max(max_corr, std::abs(m(i, j)));
            }
        }
    }
    o.pass = a && b && c && d && elapsed <= 60.0;
    auto tag = [](bool ok) { return ok ? "pass" : "FAIL"; };
    o.detail = fmt("(a) %s alpha_hat=%.5f; (b) %s worst z=%.2f at %s; (c) %s worst coverage=%.3f at %s; "
                   "(d) %s worst ratio=%.3f at %s; %.1f s",
                   tag(a), rep.alpha_hat, tag(b), worst_z, z_at.c_str(), tag(c), worst_cov, cov_at.c_str(), tag(d),
                   worst_ratio, ratio_at.c_str(), elapsed);
    o.notes.push_back(fmt("n=%ld r=%d seed=%llu; max off-diagonal |corr| = %.3f", rep.n, rep.replicates,
                          static_cast<unsigned long long>(rep.seed), max_corr));

    // informational only: the same study pooled over seeds 1..8
    std::vector<double> sum(rep.rows.size()), var(rep.rows.size()), cov(rep.rows.size());
    const int seeds = 8;
    for (int seed = 1; seed <= seeds; ++seed) {
        auto cfg = config;
        cfg.seed = static_cast<std::uint64_t>(seed);
        const auto other = seed == static_cast<int>(config.seed) ? rep : run_study(cfg);
        for (std::size_t k = 0; k < other.rows.size(); ++k) {
            sum[k] += other.rows[k].mean;
            var[k] += other.rows[k].empirical_variance.value_or(NAN);
            cov[k] += other.rows[k].coverage.value_or(NAN);
        }
    }
    double pooled_z = 0.0, cov_lo = 1.0, cov_hi = 0.0;
    for (std::size_t k = 0; k < rep.rows.size(); ++k) {
        const double se = std::sqrt(var[k] / seeds / (static_cast<double>(seeds) * config.replicates));
        if (rep.rows[k].age <= 9) pooled_z = std::max(pooled_z, std::abs((sum[k] / seeds - rep.rows[k].true_hazard) / se));
        cov_lo = std::min(cov_lo, cov[k] / seeds);
        cov_hi = std::max(cov_hi, cov[k] / seeds);
    }
    o.notes.push_back(fmt("pooled over seeds 1-%d (%d replicates): max |z| = %.2f, coverage %.3f-%.3f", seeds,
                          seeds * config.replicates, pooled_z, cov_lo, cov_hi));
    return o;
}

// --- 2 ----------------------------------------------------------------------

Outcome analytic_oracle() {
    Outcome o;
    const auto dist = table_b1_distribution();
    const TruncationLaw law{1, 5, 5};
    const auto e = oracle::enumerate_truth(to_std(dist.pmf()), to_std(dist.cause1_share()), dist.min_age(), law.lo,
                                           law.hi, law.censor_offset);
    double worst = std::abs(retention_probability(dist, law) - e.alpha);
    int cells = 0;
    for (const auto& t : analytic_truth(dist, law)) {
        worst = std::max(worst, std::abs(t.hazard - e.hazard(t.age, t.cause)));
        worst = std::max(worst, std::abs(t.f_star - e.events.at({t.age, static_cast<int>(t.cause)})));
        worst = std::max(worst, std::abs(t.u_star - e.at_risk.at(t.age)));
        ++cells;
    }
    o.require(worst <= 1e-12, "closed form differs from enumeration");
    o.detail = fmt("%d age/cause cells, max |diff| = %.2e", cells, worst);
    return o;
}

// --- 3 ----------------------------------------------------------------------

Outcome certain_schedule() {
    Outcome o;
    const auto t0 = std::chrono::steady_clock::now();
    int combos = 0;
    double worst = 0.0;
    for (const double principal : {100.0, 5000.0, 25000.0}) {
        for (const double r : {0.0005, 0.005, 0.01, 0.0189, 0.03}) {
            for (const int term : {6, 24, 60, 72}) {
                const auto s = make_schedule(principal, r, term);
                const HazardPath none{0, Eigen::VectorXd::Zero(term), Eigen::VectorXd::Zero(term)};
                for (const int x : {0, 1, term / 3, term / 2, term - 2, term - 1}) {
                    worst = std::max(worst, std::abs(lifetime_return(s, none, constant_recovery(0.5), x) - r));
                    ++combos;
                }
            }
        }
    }
    const double elapsed = seconds_since(t0);
    o.require(combos >= 200, "grid too small");
    o.require(worst <= 1e-10, "return differs from the contract rate");
    o.require(elapsed <= 5.0, "slower than 5 s");
    o.detail = fmt("%d (B, r, term, x) combinations, max |rho - r| = %.2e, %.3f s", combos, worst, elapsed);
    return o;
}

// --- 4 ----------------------------------------------------------------------

Outcome toy_epv() {
    Outcome o;
    std::mt19937_64 rng(20240501);
    std::uniform_real_distribution<double> unit(0.0, 1.0);
    int instances = 0;
    double worst = 0.0;
    for (int i = 0; i < 200; ++i) {
        const oracle::ToyLoan loan{50.0 + 950.0 * unit(rng), 0.002 + 0.03 * unit(rng), 3};
        std::vector<double> h01(3), h02(3), rec(5);
        for (int k = 0; k < 3; ++k) {
            h01[k] = 0.3 * unit(rng);
            h02[k] = 0.3 * unit(rng);
        }
        for (auto& v : rec) v = unit(rng);
        const auto recovery = [rec](int age) { return rec[static_cast<std::size_t>(age)]; };
        const auto s = make_schedule(loan.principal, loan.rate, loan.term);
        const HazardPath path{0, Eigen::Map<const Eigen::VectorXd>(h01.data(), 3),
                              Eigen::Map<const Eigen::VectorXd>(h02.data(), 3)};
        const int x = static_cast<int>(rng() % 3);
        const double expected = oracle::path_return(loan, h01, h02, recovery, x);
        const double got = lifetime_return(s, path, recovery, x);
        worst = std::max(worst, std::abs(got - expected));
        ++instances;
    }
    o.require(worst <= 1e-10, "return differs from path enumeration");
    o.detail = fmt("%d seeded three-month loans, max |diff| = %.2e", instances, worst);
    return o;
}

// --- 5 ----------------------------------------------------------------------

Outcome refinance_spot_checks() {
    Outcome o;
    const auto a = refinance_savings_apr(7485.0, 360.0, 0.2237, 0.0359);
    const auto b = refinance_savings_apr(10985.0, 359.0, 0.2246, 0.1797);
    o.require(std::abs(a.monthly_saving - 61.0) <= 3.0, "first spot check");
    o.require(std::abs(b.monthly_saving - 16.0) <= 3.0, "second spot check");
    o.detail = fmt("7485/360 22.37%%->3.59%%: %.2f (N=%d); 10985/359 22.46%%->17.97%%: %.2f (N=%d)",
                   a.monthly_saving, a.remaining_payments, b.monthly_saving, b.remaining_payments);
    return o;
}

// --- 6 ----------------------------------------------------------------------

bool additive(std::span<const ObservedLoan> obs, AgeRange ages) {
    const auto d = estimate_csh(obs, Cause::Default, ages);
    const auto p = estimate_csh(obs, Cause::Prepay, ages);
    const auto all = estimate_all_cause(obs, ages);
    for (int a = ages.lo; a <= ages.hi; ++a) {
        if (d.at(a).events + p.at(a).events != all.at(a).events) return false;
        if (d.at(a).at_risk != all.at(a).at_risk || p.at(a).at_risk != all.at(a).at_risk) return false;
        if (!all.at(a).has_data()) continue;
        if (std::abs(d.at(a).hazard + p.at(a).hazard - all.at(a).hazard) > 1e-15 * all.at(a).hazard) return false;
    }
    return true;
}

Outcome estimator_identities() {
    Outcome o;
    int fixtures = 0;
    const std::vector<ObservedLoan> four{
        {1, 2, true, Cause::Default}, {1, 2, true, Cause::Prepay}, {1, 3, false, {}}, {1, 3, false, {}}};
    const std::vector<ObservedLoan> truncated{{3, 3, true, Cause::Default}, {3, 6, false, {}}, {5, 6, true, Cause::Prepay}};
    o.require(additive(four, {1, 4}), "additivity on the four-loan fixture");
    o.require(additive(truncated, {1, 7}), "additivity on the truncated fixture");
    fixtures += 2;
    auto sim = table_b1_config();
    sim.n = 5000;
    for (std::uint64_t k = 0; k < 5; ++k, ++fixtures) {
        o.require(additive(simulate_cohort(sim, k), {1, 10}), "additivity on a simulated cohort");
    }

    std::mt19937_64 rng(2024);
    int cohorts = 0, mismatches = 0;
    for (; cohorts < 100; ++cohorts, ++fixtures) {
        const int n = 1 + static_cast<int>(rng() % 50);
        std::vector<ObservedLoan> obs;
        std::vector<std::pair<int, Cause>> lifetimes;
        for (int i = 0; i < n; ++i) {
            const int age = 1 + static_cast<int>(rng() % 12);
            const Cause c = (rng() & 1) ? Cause::Default : Cause::Prepay;
            obs.push_back({1, age, true, c});
            lifetimes.emplace_back(age, c);
        }
        o.require(additive(obs, {1, 12}), "additivity on a random cohort");
        for (const Cause cause : kCauses) {
            const auto curve = estimate_csh(obs, cause, {1, 12});
            const auto table = oracle::life_table(lifetimes, cause);
            for (const auto& row : curve.rows) {
                const auto it = table.find(row.age);
                const bool ok = row.has_data() ? (it != table.end() && it->second == row.hazard) : it == table.end();
                if (!ok) ++mismatches;
            }
        }
    }
    o.require(mismatches == 0, "life-table mismatch");
    o.detail = fmt("additivity on %d fixtures; %d random complete cohorts match the life table (%d mismatches)",
                   fixtures, cohorts, mismatches);
    return o;
}

// --- 7 ----------------------------------------------------------------------

Outcome convergence_suite() {
    Outcome o;
    o.require(overlap_test(Interval{0.01, 0.02}, Interval{0.02, 0.03}) == Decision::FailToReject,
              "touching intervals overlap");
    o.require(overlap_test(Interval{0.02, 0.03}, Interval{0.01, 0.02}) == Decision::FailToReject,
              "touching intervals overlap in either order");
    o.require(overlap_test(Interval{0.01, 0.02}, Interval{0.0200001, 0.03}) == Decision::Reject,
              "disjoint intervals reject");

    const std::vector<int> merge{10, 14, 21, 33, 42};
    const auto curves = fixture::staggered_curves(merge);
    const auto m = transition_matrix(curves);
    int entries = 0;
    for (std::size_t i = 0; i < curves.size(); ++i) {
        o.require(m.at(i, i) == 10, "diagonal is 10");
        for (std::size_t j = 0; j < curves.size(); ++j) {
            const auto ij = convergence_point(curves[i], curves[j]).convergence_month;
            const auto ji = convergence_point(curves[j], curves[i]).convergence_month;
            o.require(ij == ji, "symmetric");
            if (i != j) {
                o.require(m.at(i, j) == std::max(merge[i], merge[j]), "staggered entry");
                ++entries;
            }
        }
    }
    o.detail = fmt("tie convention, diagonal, symmetry and %d staggered entries checked", entries);
    return o;
}

// --- 8 ----------------------------------------------------------------------

Outcome outcome_goldens() {
    Outcome o;
    int n = 0;
    for (const auto& g : fixture::golden_outcomes()) {
        const auto got = determine_outcome(g.h, g.pad);
        if (got.kind != g.kind || got.event_month != g.month) o.require(false, g.name);
        ++n;
    }
    o.require(n >= 12, "fewer than 12 fixtures");
    o.detail = fmt("%d hand-traced payment vectors", n);
    return o;
}

// --- 9 ----------------------------------------------------------------------

Outcome recovery_fit() {
    Outcome o;
    const Eigen::VectorXd ages = Eigen::VectorXd::LinSpaced(60, 1, 60);
    auto kernel = [&](double c, double k, double th) {
        return (c * ages.array().pow(k - 1.0) * (-ages.array() / th).exp()).matrix().eval();
    };
    double worst = 0.0;
    for (const auto& [c, k, th] : {std::tuple{0.1, 3.0, 6.0}, std::tuple{0.02, 4.0, 5.0}, std::tuple{0.3, 2.0, 10.0}}) {
        const auto fit = fit_gamma_kernel(ages, kernel(c, k, th));
        worst = std::max({worst, std::abs(fit.scale / c - 1.0), std::abs(fit.shape / k - 1.0),
                          std::abs(fit.theta / th - 1.0)});
    }
    o.require(worst <= 1e-3, "parameters not recovered");

    std::mt19937_64 rng(5);
    std::normal_distribution<double> noise(0.0, 0.01);
    Eigen::VectorXd hump = kernel(0.1, 3.0, 6.0);
    for (auto& v : hump) v = std::max(0.0, v + noise(rng));
    const auto fit = fit_gamma_kernel(ages, hump);
    o.require(std::abs(fit.peak_age() - 12.0) <= 3.0, "hump peak misplaced");
    o.detail = fmt("max relative parameter error %.2e; noisy hump peak at %.2f (built at 12)", worst, fit.peak_age());
    return o;
}

}  // namespace

int main() {
    const std::vector<std::pair<std::string, std::function<Outcome()>>> criteria{
        {"1 simulation study", simulation_study},
        {"2 analytic target vs enumeration", analytic_oracle},
        {"3 certain-schedule return", certain_schedule},
        {"4 toy-loan EPV enumeration", toy_epv},
        {"5 refinance spot checks", refinance_spot_checks},
        {"6 estimator identities", estimator_identities},
        {"7 convergence rule suite", convergence_suite},
        {"8 loan-outcome goldens", outcome_goldens},
        {"9 recovery fit", recovery_fit},
    };
    int failed = 0;
    for (const auto& [name, check] : criteria) {
        Outcome o;
        try {
            o = check();
        } catch (const std::exception& e) {
            o.pass = false;
            o.detail = std::string("threw: ") + e.what();
        }
        std::printf("%s  criterion %s: %s\n", o.pass ? "PASS" : "FAIL", name.c_str(), o.detail.c_str());
        for (const auto& note : o.notes) std::printf("        %s\n", note.c_str());
        std::fflush(stdout);
        if (!o.pass) ++failed;
    }
    std::printf("%d of %zu criteria passed\n", static_cast<int>(criteria.size()) - failed, criteria.size());
    return failed == 0 ? 0 : 1;
}
