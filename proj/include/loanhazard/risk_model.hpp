#pragma once

// Discrete competing-risks lifetime law and the exact identities linking the
// pmf, the all-cause hazard, the cause-specific hazards, and the conditional
// event probabilities.

#include <Eigen/Dense>
#include <string>

#include "loanhazard/error.hpp"
#include "loanhazard/types.hpp"

namespace loanhazard {

/// Conditional event probabilities from a pair of cause-specific hazard paths.
///
/// Row k of the result holds Pr(X = x+k, Z = i | X >= x) for i = default,
/// prepay, i.e. lambda_i(x+k) * prod_{m<k} (1 - lambda(x+m)). The table sums
/// to one exactly when the last all-cause hazard is one; otherwise the
/// shortfall is the probability of surviving past the last row.
template <typename Derived1, typename Derived2>
Eigen::Matrix<typename Derived1::Scalar, Eigen::Dynamic, 2> event_probs_from_hazards(
    const Eigen::MatrixBase<Derived1>& default_hazard, const Eigen::MatrixBase<Derived2>& prepay_hazard) {
    using Scalar = typename Derived1::Scalar;
    require(default_hazard.size() == prepay_hazard.size(), "hazard paths must have equal length");
    const Eigen::Index rows = default_hazard.size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 2> table(rows, 2);
    Scalar alive(1);
    for (Eigen::Index k = 0; k < rows; ++k) {
        table(k, 0) = default_hazard(k) * alive;
        table(k, 1) = prepay_hazard(k) * alive;
        alive *= Scalar(1) - (default_hazard(k) + prepay_hazard(k));
    }
    return table;
}

/// Survival function Pr(X >= x0 + k | X >= x0) for k = 0..n from an all-cause
/// hazard path of length n (product-limit identity).
template <typename Derived>
Eigen::Matrix<typename Derived::Scalar, Eigen::Dynamic, 1> survival_from_hazard(
    const Eigen::MatrixBase<Derived>& all_cause_hazard) {
    using Scalar = typename Derived::Scalar;
    const Eigen::Index n = all_cause_hazard.size();
    Eigen::Matrix<Scalar, Eigen::Dynamic, 1> surv(n + 1);
    surv(0) = Scalar(1);
    for (Eigen::Index k = 0; k < n; ++k) surv(k + 1) = surv(k) * (Scalar(1) - all_cause_hazard(k));
    return surv;
}

/// Ground-truth lifetime law: Pr(X = x) on [min_age, max_age] together with
/// the share p(x) of events at x that are defaults.
class CompetingRisksDistribution {
  public:
    CompetingRisksDistribution(int min_age, Eigen::VectorXd pmf, Eigen::VectorXd cause1_share);

    /// Builds the law implied by two cause-specific hazard paths starting at
    /// min_age. The final all-cause hazard must be one.
    static CompetingRisksDistribution from_hazards(int min_age, const Eigen::VectorXd& default_hazard,
                                                   const Eigen::VectorXd& prepay_hazard);

    int min_age() const { return min_age_; }
    int max_age() const { return min_age_ + static_cast<int>(pmf_.size()) - 1; }
    AgeRange ages() const { return {min_age(), max_age()}; }

    const Eigen::VectorXd& pmf() const { return pmf_; }
    const Eigen::VectorXd& cause1_share() const { return cause1_share_; }

    double pmf(int x) const;
    double cause1_share(int x) const;
    /// Pr(X = x, Z = cause).
    double joint(int x, Cause cause) const;

    /// Pr(X >= x) by tail summation; valid for min_age <= x <= max_age + 1.
    double survival(int x) const;
    /// Pr(X >= x) by the product of (1 - lambda(k)) over k < x.
    double survival_by_hazard_product(int x) const;

    /// lambda(x) = Pr(X = x) / Pr(X >= x).
    double all_cause_hazard(int x) const;
    /// lambda_i(x) = Pr(X = x, Z = i) / Pr(X >= x).
    double cause_specific_hazard(int x, Cause cause) const;

    Eigen::VectorXd hazard_path(Cause cause) const;

    /// Rows j = x..max_age, columns (default, prepay): Pr(X = j, Z = i | X >= x).
    Eigen::Matrix<double, Eigen::Dynamic, 2> conditional_event_probs(int x) const;

  private:
    void check_age(int x, int hi) const;

    int min_age_;
    Eigen::VectorXd pmf_;
    Eigen::VectorXd cause1_share_;
    Eigen::VectorXd tail_;  // tail_(k) = Pr(X >= min_age + k), one past the end holds 0
};

/// The ten-age distribution used by the large-sample simulation study.
CompetingRisksDistribution table_b1_distribution();

/// Discrete uniform truncation time Y on [lo, hi] with censoring C = Y + offset.
struct TruncationLaw {
    int lo = 1;
    int hi = 1;
    int censor_offset = 1;

    void validate() const;
    double probability(int y) const;
    /// Pr(Y <= x <= Y + offset).
    double prob_in_window(int x) const;
};

std::string to_json(const CompetingRisksDistribution& dist);
CompetingRisksDistribution distribution_from_json(const std::string& text);

}  // namespace loanhazard
