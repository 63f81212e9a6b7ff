#pragma once

// Simulation study for the hazard estimator: truncated and censored cohorts
// drawn from a known competing-risks law, compared with the analytic target.

#include <Eigen/Dense>
#include <cstdint>
#include <iosfwd>
#include <optional>
#include <random>
#include <string>
#include <vector>

#include "loanhazard/estimator.hpp"
#include "loanhazard/risk_model.hpp"
#include "loanhazard/types.hpp"

namespace loanhazard {

struct SimConfig {
    CompetingRisksDistribution dist = table_b1_distribution();
    TruncationLaw trunc{1, 5, 5};
    long n = 10000;  // lifetimes drawn per replicate, before truncation
    int replicates = 1000;
    std::uint64_t seed = 7;
    double theta = kDefaultTheta;
    int threads = 0;  // 0 = hardware concurrency

    void validate() const;
};

/// The preset used by the large-sample study.
SimConfig table_b1_config();

std::uint64_t splitmix64(std::uint64_t x);

/// Seed of the independent stream for one replicate.
std::uint64_t stream_seed(std::uint64_t seed, std::uint64_t replicate_index);

/// Uniform on [0, 1) with 53 random bits.
inline double uniform01(std::mt19937_64& rng) { return static_cast<double>(rng() >> 11) * 0x1.0p-53; }

/// Observations surviving truncation for one replicate. Each lifetime draws
/// Y, X and the cause in that order; draws with Y > X are discarded.
std::vector<ObservedLoan> simulate_cohort(const SimConfig& config, std::uint64_t replicate_index);

/// Pr(Y <= X).
double retention_probability(const CompetingRisksDistribution& dist, const TruncationLaw& trunc);

/// Target of the estimator under truncation, by age and cause.
struct TruthRow {
    int age = 0;
    Cause cause = Cause::Default;
    double f_star = 0.0;    // Pr(X = x, Z = i, x in window | retained)
    double u_star = 0.0;    // Pr(at risk at x | retained)
    double hazard = 0.0;    // f_star / u_star; NaN when u_star = 0
    double variance = 0.0;  // f (U - f) / U^3, per retained loan
};

std::vector<TruthRow> analytic_truth(const CompetingRisksDistribution& dist, const TruncationLaw& trunc);

struct StudyRow {
    int age = 0;
    Cause cause = Cause::Default;
    double true_hazard = 0.0;
    double f_star = 0.0;
    double u_star = 0.0;
    double mean = 0.0;                      // over replicates with an estimate
    std::optional<double> empirical_variance;  // needs two or more estimates
    double asymptotic_variance = 0.0;       // variance / (alpha n)
    std::optional<double> coverage;         // over replicates with a defined CI
    int estimated = 0;                      // replicates with anyone at risk
    int ci_defined = 0;

    /// Monte Carlo standard error of the mean.
    std::optional<double> mc_se() const;
    std::optional<double> variance_ratio() const;
};

struct StudyReport {
    long n = 0;
    int replicates = 0;
    std::uint64_t seed = 0;
    double theta = 0.0;
    int censor_offset = 0;
    double alpha = 0.0;        // analytic retention probability
    double alpha_hat = 0.0;    // mean retained fraction
    double truncation_fraction = 0.0;
    bool variances_defined = false;
    std::vector<StudyRow> rows;                  // age-major, default before prepay
    std::vector<Eigen::MatrixXd> correlation;    // per cause, ages x ages; NaN where undefined

    const StudyRow& row(int age, Cause cause) const;
};

StudyReport run_study(const SimConfig& config);

std::string report_to_json(const StudyReport& report);
void write_report_csv(std::ostream& out, const StudyReport& report);

}  // namespace loanhazard
