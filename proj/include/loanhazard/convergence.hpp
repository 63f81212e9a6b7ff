#pragma once

// Confidence-interval overlap test between two risk bands and the
// credit-risk-convergence transition matrix built from it.

#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loanhazard/estimator.hpp"

namespace loanhazard {

enum class Decision { Reject, FailToReject, Undefined };
enum class ConvergenceRule { OverlapRun, BothZero, None };

std::string_view to_string(Decision d);
std::string_view to_string(ConvergenceRule r);

struct ConvergenceOptions {
    int min_test_age = 10;
    int run_length = 2;
};

struct AgeDecision {
    int age = 0;
    Decision decision = Decision::Undefined;
};

struct ConvergenceResult {
    std::string band_a;
    std::string band_b;
    std::vector<AgeDecision> decisions;
    std::optional<int> convergence_month;
    ConvergenceRule rule_fired = ConvergenceRule::None;
};

/// Closed-interval intersection: touching endpoints fail to reject.
Decision overlap_test(const Interval& a, const Interval& b);
Decision overlap_test(const std::optional<Interval>& a, const std::optional<Interval>& b);

/// Earliest of (1) the first age >= min_test_age opening a run of run_length
/// consecutive FailToReject decisions and (2) the first age >= min_test_age
/// from which neither curve records another event through the end of the
/// grid. Throws Error{Incompatible} when the grids differ.
ConvergenceResult convergence_point(const HazardCurve& a, const HazardCurve& b, const ConvergenceOptions& opts = {});

/// Symmetric band-by-band matrix of convergence months; only the upper
/// triangle (with the diagonal) is stored.
class TransitionMatrix {
  public:
    TransitionMatrix(std::vector<std::string> bands, int min_test_age);

    std::size_t size() const { return bands_.size(); }
    const std::vector<std::string>& bands() const { return bands_; }
    int min_test_age() const { return min_test_age_; }

    std::optional<int> at(std::size_t i, std::size_t j) const;
    void set(std::size_t i, std::size_t j, std::optional<int> month);

    const std::vector<ConvergenceResult>& traces() const { return traces_; }
    void add_trace(ConvergenceResult r) { traces_.push_back(std::move(r)); }

  private:
    std::size_t slot(std::size_t i, std::size_t j) const;

    std::vector<std::string> bands_;
    int min_test_age_;
    std::vector<std::optional<int>> upper_;
    std::vector<ConvergenceResult> traces_;
};

/// Pairwise convergence over the curves' bands in the given order.
TransitionMatrix transition_matrix(std::span<const HazardCurve> curves, const ConvergenceOptions& opts = {});

/// As above but with an explicit band order; a band without a curve throws
/// Error{UnknownKey}, a repeated band Error{InvalidArgument}.
TransitionMatrix transition_matrix(std::span<const HazardCurve> curves, const std::vector<std::string>& band_order,
                                   const ConvergenceOptions& opts = {});

/// Matrix CSV: header "band,<b1>,...,<bn>"; missing entries print as
/// "no convergence in window".
void write_matrix_csv(std::ostream& out, const TransitionMatrix& m);
std::string matrix_to_json(const TransitionMatrix& m);
/// Audit trace: band_a, band_b, age, decision.
void write_trace_csv(std::ostream& out, const TransitionMatrix& m);

}  // namespace loanhazard
