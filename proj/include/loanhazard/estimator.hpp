#pragma once

// Cause-specific hazard estimation from truncated/censored observations,
// with asymptotic variances and log-scale confidence intervals.

#include <Eigen/Dense>
#include <iosfwd>
#include <optional>
#include <span>
#include <string>
#include <vector>

#include "loanhazard/types.hpp"

namespace loanhazard {

/// Closed interval [lo, hi].
struct Interval {
    double lo = 0.0;
    double hi = 0.0;

    friend bool operator==(const Interval&, const Interval&) = default;
};

inline constexpr AgeRange kReportingWindow{10, 55};
inline constexpr double kDefaultTheta = 0.05;

struct HazardRow {
    int age = 0;
    long events = 0;    // n * f-hat(x)
    long at_risk = 0;   // n * U-hat(x)
    double hazard = 0.0;
    double variance = 0.0;  // sigma^2(x) / n
    std::optional<Interval> ci;
    bool interpolated = false;

    /// False when nobody was at risk; such ages carry no estimate.
    bool has_data() const { return at_risk > 0; }
};

struct HazardCurve {
    std::string band;
    Cause cause = Cause::Default;
    long n = 0;
    double theta = kDefaultTheta;
    std::vector<HazardRow> rows;  // one per age, ascending and contiguous

    AgeRange ages() const;
    const HazardRow& at(int age) const;
    const HazardRow* find(int age) const;
    Eigen::VectorXd hazards() const;
};

/// Hazard-scale asymptotic variance f (U - f) / (n U^3), where f and U are
/// the event and at-risk fractions of a sample of size n. Throws when U <= 0.
double asymptotic_variance(double f, double u, long n);

/// exp(ln(f/U) +- z sqrt((U - f) / (n U f))) at level theta, upper bound
/// capped at 1. Undefined (nullopt) when f = 0 or f = U.
std::optional<Interval> confidence_interval(double f, double u, long n, double theta);

/// Count forms; n cancels, so these need only the two counts.
double asymptotic_variance_counts(long events, long at_risk);
std::optional<Interval> confidence_interval_counts(long events, long at_risk, double theta);

/// Counts events of `cause` and the at-risk set at every age in `ages`, then
/// fills hazard, variance, and CI columns at level `theta`.
HazardCurve estimate_csh(std::span<const ObservedLoan> obs, Cause cause, AgeRange ages,
                         double theta = kDefaultTheta);

/// Pooled all-cause estimate (events of either cause over the same at-risk set).
HazardCurve estimate_all_cause(std::span<const ObservedLoan> obs, AgeRange ages, double theta = kDefaultTheta);

/// Per-age variances of an estimated curve; nullopt where nobody is at risk.
std::vector<std::optional<double>> asymptotic_variance(const HazardCurve& curve);

/// Per-age CIs of an estimated curve at level theta.
std::vector<std::optional<Interval>> confidence_interval(const HazardCurve& curve, double theta);

/// Recomputes the CI column at a new level.
HazardCurve with_theta(HazardCurve curve, double theta);

/// Constant-hazard fill for ages with data but no events: carry the most
/// recent non-zero hazard forward; a leading gap takes the first non-zero
/// hazard. Filled rows are flagged. Throws when no age has an event.
HazardCurve interpolate_zero_defaults(HazardCurve curve);

// --- curve export -----------------------------------------------------------

/// Columns band, cause, age, events, at_risk, hazard, var, ci_lo, ci_hi,
/// interpolated. Ages without data are omitted.
void write_curve_csv(std::ostream& out, const HazardCurve& curve);
std::string curve_to_json(const HazardCurve& curve);

/// Reads one curve from the export CSV; ages missing from the file are
/// restored as rows without data so the grid stays contiguous.
HazardCurve read_curve_csv(const std::string& text);
HazardCurve read_curve_file(const std::string& path);

}  // namespace loanhazard
